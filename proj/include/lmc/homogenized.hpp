#pragma once

#include <cmath>
#include <vector>

#include "solver.hpp"
#include "two_scale.hpp"

namespace lmc {

// Data of the oscillating problem: initial fields and forces as two-scale fields,
// boundary data and gas parameters shared by every scale.
struct TwoScaleData {
    Grid grid;
    GasParams gas;
    BoundaryData bc;
    TwoScaleField eta0{"1"}, u0{"0"}, theta0{"1"}, g{"0"}, f{"0"};
    double N = 10.0;
};

inline ProblemSpec oscillating_problem(const TwoScaleData& d, const OscillationSpec& osc) {
    ProblemSpec s;
    s.grid = d.grid;
    s.gas = d.gas;
    s.bc = d.bc;
    normalize_boundary(s.bc, s.grid);
    s.eta0 = realize(d.eta0, osc, Loc::center, d.grid.X, d.grid.nx);
    s.u0 = realize(d.u0, osc, Loc::edge, d.grid.X, d.grid.nx);
    s.theta0 = realize(d.theta0, osc, Loc::center, d.grid.X, d.grid.nx);
    s.g = realize_fn(d.g, osc);
    s.f = realize_fn(d.f, osc);
    s.N = d.N;
    return s;
}

inline ProblemSpec averaged_problem(const TwoScaleData& d) {
    ProblemSpec s;
    s.grid = d.grid;
    s.gas = d.gas;
    s.bc = d.bc;
    normalize_boundary(s.bc, s.grid);
    s.eta0 = xi_mean(d.eta0, Loc::center, d.grid.X, d.grid.nx);
    s.u0 = xi_mean(d.u0, Loc::edge, d.grid.X, d.grid.nx);
    s.theta0 = homogenized_theta0(d.u0, d.theta0, d.gas.cV, d.grid.X, d.grid.nx);
    s.g = xi_mean_fn(d.g);
    s.f = xi_mean_fn(d.f);
    s.N = d.N;
    return s;
}

struct HomogSolution {
    SolutionBundle base;
    SpaceTimeField B_hat;  // exp(I_t sigma / nu), centers
    SpaceTimeField J;      // I_t(B_hat^{-1} theta), centers
};

namespace detail {
// Builds B_hat from the snapshot rows of I_t sigma.
inline SpaceTimeField b_hat_of(const SolutionBundle& b) {
    const double nu = b.gas.nu;
    return map_rows(b.It_sigma, [nu](Field f) {
        for (auto& s : f.v) s = std::exp(s / nu);
        return f;
    });
}
}  // namespace detail

// Solves the averaged problem; J is accumulated by trapezoid over every accepted substep.
inline HomogSolution solve_homogenized(const TwoScaleData& d, const SchemeParams& scheme = {}) {
    const ProblemSpec spec = averaged_problem(d);
    const Grid& g = spec.grid;
    const int n = g.nx;
    const double nu = spec.gas.nu;
    const int stride = std::max(1, scheme.snapshot_stride);
    HomogSolution hs;
    hs.J = SpaceTimeField(Loc::center, g.X, n, {});
    hs.J.push_row(0.0, std::vector<double>(n, 0.0));
    std::vector<double> J(n, 0.0);
    auto observer = [&](const StepState& a, const StepState& b) {
        const double dt = b.t - a.t;
        for (int i = 0; i < n; ++i)
            J[i] += 0.5 * dt *
                    (std::exp(-a.It_sigma[i] / nu) * a.theta[i] + std::exp(-b.It_sigma[i] / nu) * b.theta[i]);
        const double kk = b.t / g.dt();
        const long step = std::lround(kk);
        if (std::abs(kk - static_cast<double>(step)) < 1e-6 && step > 0 && (step % stride == 0 || step == g.nt))
            hs.J.push_row(g.t(static_cast<int>(step)), J);
    };
    hs.base = solve(spec, scheme, observer);
    hs.B_hat = detail::b_hat_of(hs.base);
    if (hs.J.nt() != hs.base.eta.nt()) throw Error("homogenized: snapshot bookkeeping mismatch");
    return hs;
}

// eta(xi, x, t) = B_hat (eta0(xi, x) + (k/nu) J) for a fixed xi, or for a given
// initial profile in x (realized or averaged).
inline SpaceTimeField reconstruct_from_initial(const HomogSolution& hs, const Field& eta_init) {
    const double kn = hs.base.gas.k / hs.base.gas.nu;
    SpaceTimeField out = hs.B_hat;
    for (int k = 0; k < out.nt(); ++k)
        for (int i = 0; i < out.nx(); ++i)
            out.at(k, i) = hs.B_hat.at(k, i) * (eta_init.v[i] + kn * hs.J.at(k, i));
    return out;
}

inline SpaceTimeField reconstruct_eta(const HomogSolution& hs, const TwoScaleField& eta0, double xi) {
    const Grid& g = hs.base.grid;
    return reconstruct_from_initial(hs, Field::sample(Loc::center, g.X, g.nx, [&](double x) { return eta0(xi, x); }));
}

// <eta_recon>: the reconstruction is affine in eta0, so its cell mean uses <eta0>.
inline SpaceTimeField recon_mean(const HomogSolution& hs, const TwoScaleField& eta0) {
    const Grid& g = hs.base.grid;
    return reconstruct_from_initial(hs, xi_mean(eta0, Loc::center, g.X, g.nx));
}

inline SpaceTimeField eta_epsilon(const HomogSolution& hs, const TwoScaleField& eta0, const OscillationSpec& osc) {
    const Grid& g = hs.base.grid;
    return reconstruct_from_initial(hs, realize(eta0, osc, Loc::center, g.X, g.nx));
}

// beta^(eps) = (1/nu) sigma R_eps eta at centers.
inline SpaceTimeField beta_eps(const HomogSolution& hs, const TwoScaleField& eta0, const OscillationSpec& osc) {
    SpaceTimeField r = eta_epsilon(hs, eta0, osc) - recon_mean(hs, eta0);
    const double nu = hs.base.gas.nu;
    for (std::size_t q = 0; q < r.data.size(); ++q) r.data[q] *= hs.base.sigma.data[q] / nu;
    return r;
}

// gamma^(eps) = (1/lambda) pi R_eps eta at edges.
inline SpaceTimeField gamma_eps(const HomogSolution& hs, const TwoScaleField& eta0, const OscillationSpec& osc) {
    const SpaceTimeField r = eta_epsilon(hs, eta0, osc) - recon_mean(hs, eta0);
    const double lambda = hs.base.gas.lambda;
    SpaceTimeField out = hs.base.pi;
    for (int k = 0; k < out.nt(); ++k) {
        const Field re = center_to_edge(r.slice(k));
        for (int j = 0; j < re.size(); ++j) out.at(k, j) *= re.v[j] / lambda;
    }
    return out;
}

// max_t || (1/nu) sigma <eta_recon> + (k/nu) theta - Du ||_{L2}.
inline double averaged_identity_residual(const HomogSolution& hs, const TwoScaleField& eta0) {
    const SpaceTimeField em = recon_mean(hs, eta0);
    const auto& b = hs.base;
    const double nu = b.gas.nu, kn = b.gas.k / b.gas.nu;
    double worst = 0.0;
    for (int k = 0; k < em.nt(); ++k) {
        Field r(Loc::center, b.grid.X, b.grid.nx);
        for (int i = 0; i < b.grid.nx; ++i)
            r.v[i] = b.sigma.at(k, i) / nu * em.at(k, i) + kn * b.theta.at(k, i) -
                     (b.u.at(k, i + 1) - b.u.at(k, i)) / b.grid.dx();
        worst = std::max(worst, lq_norm(r, 2.0));
    }
    return worst;
}

}  // namespace lmc
