#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "calculus.hpp"
#include "dsl.hpp"
#include "norms.hpp"
#include "problem.hpp"

namespace lmc {

struct OscillationSpec {
    double eps = 1.0;
    double a_eps = 0.0;
};

// w(xi, x[, t, chi]) with xi in the periodic cell (0,1). breakpoints lists the
// xi values where w may jump; w is continuous in xi elsewhere.
struct TwoScaleField {
    std::string text = "0";
    dsl::Expr expr;
    std::vector<double> breakpoints;
    int nxi = 256;

    TwoScaleField() = default;
    TwoScaleField(const std::string& src, std::vector<double> bps = {}, int n = 256)
        : text(src), expr(dsl::parse(src)), breakpoints(std::move(bps)), nxi(n) {
        for (std::size_t i = 0; i < breakpoints.size(); ++i) {
            if (!(breakpoints[i] > 0.0 && breakpoints[i] < 1.0)) throw Error("breakpoints must lie in (0,1)");
            if (i > 0 && !(breakpoints[i] > breakpoints[i - 1])) throw Error("breakpoints must be strictly increasing");
        }
    }

    bool depends_on_xi() const { return expr.uses(dsl::Var::xi); }

    double operator()(double xi, double x, double t = 0.0, double chi = 0.0) const {
        return dsl::evaluate(expr, xi, x, t, chi);
    }
};

// Composite midpoint nodes in xi on a partition refined at the breakpoints.
struct XiQuadrature {
    std::vector<double> nodes, weights;
};

inline XiQuadrature xi_quadrature(const std::vector<double>& breakpoints, int nxi) {
    std::vector<double> cuts{0.0};
    cuts.insert(cuts.end(), breakpoints.begin(), breakpoints.end());
    cuts.push_back(1.0);
    XiQuadrature q;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double a = cuts[s], b = cuts[s + 1];
        const int n = std::max(1, static_cast<int>(std::lround(nxi * (b - a))));
        const double h = (b - a) / n;
        for (int i = 0; i < n; ++i) {
            q.nodes.push_back(a + (i + 0.5) * h);
            q.weights.push_back(h);
        }
    }
    return q;
}

inline XiQuadrature xi_quadrature(const TwoScaleField& w) {
    if (!w.depends_on_xi()) return {{0.5}, {1.0}};
    return xi_quadrature(w.breakpoints, w.nxi);
}

inline double fractional_part(double z) { return z - std::floor(z); }

inline double fast_variable(double x, const OscillationSpec& osc) { return fractional_part(x / osc.eps - osc.a_eps); }

// w^(eps)(x) = w({x/eps - a_eps}, x) at the grid samples of the given location.
inline Field realize(const TwoScaleField& w, const OscillationSpec& osc, Loc loc, double X, int nx, double t = 0.0) {
    return Field::sample(loc, X, nx, [&](double x) { return w(fast_variable(x, osc), x, t); });
}

// Cell average <w>(x) by xi-quadrature that respects the breakpoints.
inline double xi_mean_at(const TwoScaleField& w, const XiQuadrature& q, double x, double t = 0.0, double chi = 0.0) {
    double s = 0.0;
    for (std::size_t k = 0; k < q.nodes.size(); ++k) s += q.weights[k] * w(q.nodes[k], x, t, chi);
    return s;
}

inline Field xi_mean(const TwoScaleField& w, Loc loc, double X, int nx, double t = 0.0) {
    const auto q = xi_quadrature(w);
    return Field::sample(loc, X, nx, [&](double x) { return xi_mean_at(w, q, x, t); });
}

// R_eps w = w^(eps) - <w>.
inline Field averaging_error(const TwoScaleField& w, const OscillationSpec& osc, Loc loc, double X, int nx,
                             double t = 0.0) {
    return realize(w, osc, loc, X, nx, t) - xi_mean(w, loc, X, nx, t);
}

// Realized and averaged force terms as functions of (chi, x, t).
inline FieldFn realize_fn(const TwoScaleField& w, const OscillationSpec& osc) {
    if (w.text == "0") return {};
    return FieldFn(w.text, [w, osc](double chi, double x, double t) { return w(fast_variable(x, osc), x, t, chi); });
}
inline FieldFn xi_mean_fn(const TwoScaleField& w) {
    if (w.text == "0") return {};
    if (!w.depends_on_xi()) return FieldFn(w.text, [w](double chi, double x, double t) { return w(0.5, x, t, chi); });
    const auto q = xi_quadrature(w);
    return FieldFn("<" + w.text + ">", [w, q](double chi, double x, double t) { return xi_mean_at(w, q, x, t, chi); });
}

// theta_hat0 = (1/(2 cV)) <(u0 - <u0>)^2> + <theta0>, at cell centers.
inline Field homogenized_theta0(const TwoScaleField& u0, const TwoScaleField& theta0, double cV, double X, int nx) {
    const auto qu = xi_quadrature(u0);
    const auto qt = xi_quadrature(theta0);
    return Field::sample(Loc::center, X, nx, [&](double x) {
        const double mu = xi_mean_at(u0, qu, x);
        double var = 0.0;
        for (std::size_t k = 0; k < qu.nodes.size(); ++k) {
            const double d = u0(qu.nodes[k], x) - mu;
            var += qu.weights[k] * d * d;
        }
        return var / (2.0 * cV) + xi_mean_at(theta0, qt, x);
    });
}

// beta_e,eps = -I R_eps eta0 (eta0 sampled at centers, result at edges).
inline Field beta_e_of(const TwoScaleField& eta0, const OscillationSpec& osc, double X, int nx) {
    return -1.0 * primitive(averaging_error(eta0, osc, Loc::center, X, nx));
}

// Samples w(xi_s, .) at the xi nodes, plus the one-sided values at the breakpoints.
inline std::vector<Field> xi_rows(const TwoScaleField& w, Loc loc, double X, int nx, const XiQuadrature& q) {
    std::vector<Field> rows;
    for (double xi : q.nodes) rows.push_back(Field::sample(loc, X, nx, [&](double x) { return w(xi, x); }));
    return rows;
}

// || w ||_{L^q(Omega; L^inf(J))}.
inline double lq_sup_xi(const TwoScaleField& w, Loc loc, double X, int nx, double qexp) {
    auto q = xi_quadrature(w);
    std::vector<double> pts = q.nodes;
    pts.push_back(0.0);
    pts.insert(pts.end(), w.breakpoints.begin(), w.breakpoints.end());
    Field sup = Field::sample(loc, X, nx, [&](double x) {
        double s = 0.0;
        for (double xi : pts) s = std::max(s, std::abs(w(xi, x)));
        return s;
    });
    return lq_norm(sup, qexp);
}

inline double wh_seminorm(const TwoScaleField& w, Loc loc, double X, int nx) {
    const auto q = xi_quadrature(w);
    return wh_seminorm(xi_rows(w, loc, X, nx, q), q.weights);
}

}  // namespace lmc
