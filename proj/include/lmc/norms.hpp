#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "calculus.hpp"

namespace lmc {

namespace detail {
inline void check_exponent(double q) {
    if (!(q >= 1.0)) throw BadExponent("Lebesgue exponents must lie in [1, inf]");
}

// Quadrature weights matching the field location.
inline std::vector<double> space_weights(Loc loc, double X, int nx) {
    const double dx = X / nx;
    if (loc == Loc::center) return std::vector<double>(static_cast<std::size_t>(nx), dx);
    std::vector<double> w(static_cast<std::size_t>(nx + 1), dx);
    w.front() = w.back() = 0.5 * dx;
    return w;
}

inline double lq_of_values(std::span<const double> v, const std::vector<double>& w, double q) {
    if (std::isinf(q)) {
        double m = 0.0;
        for (double a : v) m = std::max(m, std::abs(a));
        return m;
    }
    double s = 0.0;
    if (q == 1.0) {
        for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * std::abs(v[i]);
        return s;
    }
    if (q == 2.0) {
        for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * v[i] * v[i];
        return std::sqrt(s);
    }
    for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * std::pow(std::abs(v[i]), q);
    return std::pow(s, 1.0 / q);
}

// Trapezoid weights over a list of sample times.
inline std::vector<double> time_weights(const std::vector<double>& t) {
    std::vector<double> w(t.size(), 0.0);
    for (std::size_t k = 1; k < t.size(); ++k) {
        const double h = 0.5 * (t[k] - t[k - 1]);
        w[k - 1] += h;
        w[k] += h;
    }
    return w;
}
}  // namespace detail

inline double lq_norm(const Field& y, double q) {
    detail::check_exponent(q);
    return detail::lq_of_values(y.v, detail::space_weights(y.loc, y.X, y.nx()), q);
}

// Norm of a time series in L^r(0,T) with trapezoid weights.
inline double lr_time(const std::vector<double>& b, const std::vector<double>& t, double r) {
    detail::check_exponent(r);
    return detail::lq_of_values(b, detail::time_weights(t), r);
}

// || || w(.,t) ||_{L^q(Omega)} ||_{L^r(0,T)}.
inline double lqr_norm(const SpaceTimeField& w, double q, double r) {
    detail::check_exponent(q);
    detail::check_exponent(r);
    const auto ws = detail::space_weights(w.loc, w.X, w.nx());
    std::vector<double> inner(static_cast<std::size_t>(w.nt()));
    for (int k = 0; k < w.nt(); ++k) inner[k] = detail::lq_of_values(w.row(k), ws, q);
    return lr_time(inner, w.t, r);
}

// || y ||_{H^{-1;m}}.
inline double h_minus_one(const Field& y, int m) {
    if (m == 3) return lq_norm(primitive(y), 2.0) + y.X * std::abs(mean_omega(y));
    return lq_norm(i_bracket(y, m), 2.0);
}

// sup_t || w(.,t) ||_{H^{-1;m}}.
inline double h_minus_one_sup(const SpaceTimeField& w, int m) {
    double s = 0.0;
    for (int k = 0; k < w.nt(); ++k) s = std::max(s, h_minus_one(w.slice(k), m));
    return s;
}

// || w ||_{L^{2,inf}(Q)} + || Dw ||_{L^2(Q)}.
inline double v2_norm(const SpaceTimeField& w) {
    SpaceTimeField dw = map_rows(w, [](const Field& r) { return derivative(r); });
    return lqr_norm(w, 2.0, inf) + lqr_norm(dw, 2.0, 2.0);
}

// || y ||_{L^1} + max_j || Delta^{(1)}_{j dx} y ||_{L^1(0, X - j dx)}.
inline double wh_seminorm(const Field& y) {
    double best = 0.0;
    for (int j = 1; j < y.nx(); ++j) best = std::max(best, lq_norm(difference_quotient(y, j), 1.0));
    return lq_norm(y, 1.0) + best;
}

// Two-scale version: rows hold y(xi_s, .) and wxi the xi-quadrature weights;
// the L^1 part takes the sup over xi inside, the quotient part integrates in xi.
inline double wh_seminorm(const std::vector<Field>& rows, const std::vector<double>& wxi) {
    const Field& r0 = rows.front();
    Field sup(r0.loc, r0.X, r0.nx());
    for (const auto& r : rows)
        for (int i = 0; i < sup.size(); ++i) sup.v[i] = std::max(sup.v[i], std::abs(r.v[i]));
    double best = 0.0;
    for (int j = 1; j < r0.nx(); ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < rows.size(); ++k) s += wxi[k] * lq_norm(difference_quotient(rows[k], j), 1.0);
        best = std::max(best, s);
    }
    return lq_norm(sup, 1.0) + best;
}

// Space-time seminorm with outer L^r(0,T): || w ||_{L^{1,r}} + max_j || Delta^{(1)}_{j dx} w ||_{L^{1,r}}.
inline double wh_spacetime(const SpaceTimeField& w, double r) {
    double best = 0.0;
    for (int j = 1; j < w.nx(); ++j) best = std::max(best, lqr_norm(difference_quotient(w, j), 1.0, r));
    return lqr_norm(w, 1.0, r) + best;
}

inline constexpr std::array<std::array<double, 2>, 3> dual_v2_exponents{{{2.0, 1.0}, {1.0, 4.0 / 3.0}, {1.2, 1.2}}};

// min over the sampled exponent pairs of || w ||_{L^{q,r}(Q)}.
inline double v2star_majorant(const SpaceTimeField& w) {
    double best = inf;
    for (auto [q, r] : dual_v2_exponents) best = std::min(best, lqr_norm(w, q, r));
    return best;
}

// Time series of the spatial mean.
inline std::vector<double> mean_series(const SpaceTimeField& w) {
    std::vector<double> out(static_cast<std::size_t>(w.nt()));
    for (int k = 0; k < w.nt(); ++k) out[k] = mean_omega(w.slice(k));
    return out;
}

// min( N ||F||_{L^1(Q)}, N ||I^<m> F||_{L^{2,1}} + delta_{m3} sqrt(X) ||I_t <F>||_{L^2(0,T)} ),
// with N = 1/kappa_floor.
inline double h21star_majorant(const SpaceTimeField& F, int m, double kappa_floor) {
    const double N = 1.0 / kappa_floor;
    const double a = N * lqr_norm(F, 1.0, 1.0);
    SpaceTimeField iF = map_rows(F, [m](const Field& r) { return i_bracket(r, m); });
    double b = N * lqr_norm(iF, 2.0, 1.0);
    if (m == 3) b += std::sqrt(F.X) * lr_time(time_primitive(mean_series(F), F.t), F.t, 2.0);
    return std::min(a, b);
}

}  // namespace lmc
