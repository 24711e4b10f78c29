#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "calculus.hpp"
#include "norms.hpp"
#include "problem.hpp"
#include "tridiag.hpp"

// Semi-implicit solver for the Lagrangian 1D viscous heat-conducting gas:
//   D_t eta = Du + beta,  D_t u = D sigma + g[x_e],  c_V D_t theta = D pi + sigma Du + f[x_e],
//   D_t x_e = u,  sigma = nu rho (Du + beta) - p,  p = k rho theta,  pi = lambda rho (D theta + gamma).
// eta, theta, sigma, p live at cell centers; u, x_e, pi at edges.

namespace lmc {

struct SchemeParams {
    double theta_implicitness = 1.0;
    int max_picard = 50;
    double tolerance = 1e-10;
    int max_halvings = 10;
    double positivity_floor = 1e-12;
    int snapshot_stride = 1;
};

// Full state at one time level, plus running time integrals.
struct StepState {
    double t = 0.0;
    std::vector<double> eta, u, theta, xe;
    std::vector<double> sigma, p, pi, g;  // derived at this level
    std::vector<double> It_sigma, It_p, It_g;
    double volume_flux = 0.0;
    double work = 0.0;
};

// Called after every accepted (sub)step with the previous and new state.
using StepObserver = std::function<void(const StepState& prev, const StepState& cur)>;

struct SolutionBundle {
    Grid grid;
    GasParams gas;
    int m = 3;
    SpaceTimeField eta, u, theta, xe, sigma, pi, rho, p;
    SpaceTimeField It_sigma, It_p, It_g;
    std::vector<double> volume, volume_flux, energy, work;
    std::vector<int> substeps;
    long picard_iterations = 0;
    int picard_max = 0;
};

namespace detail {

class Stepper {
public:
    Stepper(const ProblemSpec& s, const SchemeParams& sp) : s_(s), sp_(sp), n_(s.grid.nx) {
        const int ne = n_ + 1;
        a_.resize(ne);
        b_.resize(ne);
        c_.resize(ne);
        d_.resize(ne);
        beta_.assign(n_, 0.0);
        gamma_.assign(ne, 0.0);
        xc_.resize(n_);
        xe_pos_.resize(ne);
        for (int i = 0; i < n_; ++i) xc_[i] = s.grid.xc(i);
        for (int j = 0; j < ne; ++j) xe_pos_[j] = s.grid.xe(j);
        if (s.perturbation) {
            has_beta_ = !s.perturbation->beta.is_zero();
            has_gamma_ = !s.perturbation->gamma.is_zero();
        }
    }

    StepState initial() {
        StepState st;
        st.t = 0.0;
        st.eta = s_.eta0.v;
        st.u = s_.u0.v;
        st.theta = s_.theta0.v;
        st.xe = initial_xe(s_).v;
        load_perturbation(0.0);
        st.g = eval_g(st.xe, 0.0);
        const auto du = du_of(st.u);
        derive(st, du, du, st.theta, st.theta);
        st.It_sigma.assign(n_, 0.0);
        st.It_p.assign(n_, 0.0);
        st.It_g.assign(n_ + 1, 0.0);
        return st;
    }

    // Advance from prev by dt; returns false on positivity loss or divergence.
    bool try_step(const StepState& prev, double dt, StepState& out, int& iters, std::string& why) {
        const double t1 = prev.t + dt;
        const double a = sp_.theta_implicitness;
        const double dx = s_.grid.dx();
        const GasParams& gas = s_.gas;
        const int m = s_.bc.m;
        load_perturbation(t1);
        const auto du_old = du_of(prev.u);
        const auto dth_old = dtheta_of(prev.theta);

        std::vector<double> eta = prev.eta, th = prev.theta, u = prev.u, xe = prev.xe;
        std::vector<double> eta_k, th_k, u_k, du(n_), dua(n_), rho(n_), g;
        const double u0b = s_.bc.u0(t1), uXb = s_.bc.uX(t1);
        const double sg0 = -s_.bc.p0(t1), sgX = -s_.bc.pX(t1);
        const double pi0 = s_.bc.pi0(t1), piX = s_.bc.piX(t1);

        for (iters = 1; iters <= sp_.max_picard; ++iters) {
            eta_k = eta;
            th_k = th;
            u_k = u;
            g = eval_g(xe, t1);

            // Momentum: implicit viscous stress with rho and p from the current iterate.
            std::vector<double> A(n_), e(n_);
            for (int i = 0; i < n_; ++i) {
                const double r = 1.0 / eta_k[i];
                A[i] = a * gas.nu * r / dx;
                e[i] = (1.0 - a) * gas.nu * r * du_old[i] + gas.nu * r * beta_[i] - gas.k * r * th_k[i];
            }
            const double md = dx / dt;
            for (int j = 1; j < n_; ++j) {
                a_[j] = -A[j - 1];
                b_[j] = md + A[j] + A[j - 1];
                c_[j] = -A[j];
                d_[j] = md * prev.u[j] + dx * g[j] + e[j] - e[j - 1];
            }
            if (m == 1) {
                b_[0] = 1.0, c_[0] = 0.0, d_[0] = u0b;
            } else {
                b_[0] = 0.5 * md + A[0];
                c_[0] = -A[0];
                d_[0] = 0.5 * md * prev.u[0] + 0.5 * dx * g[0] + e[0] - sg0;
            }
            if (m == 3) {
                a_[n_] = -A[n_ - 1];
                b_[n_] = 0.5 * md + A[n_ - 1];
                d_[n_] = 0.5 * md * prev.u[n_] + 0.5 * dx * g[n_] + sgX - e[n_ - 1];
            } else {
                a_[n_] = 0.0, b_[n_] = 1.0, d_[n_] = uXb;
            }
            thomas_solve(a_, b_, c_, d_);
            u = d_;

            // Mass: exactly conservative update.
            for (int i = 0; i < n_; ++i) {
                du[i] = (u[i + 1] - u[i]) / dx;
                dua[i] = a * du[i] + (1.0 - a) * du_old[i];
                eta[i] = prev.eta[i] + dt * (dua[i] + beta_[i]);
                if (!(eta[i] > sp_.positivity_floor)) {
                    why = "eta";
                    return false;
                }
                rho[i] = 1.0 / eta[i];
            }
            for (int j = 0; j <= n_; ++j) xe[j] = prev.xe[j] + 0.5 * dt * (prev.u[j] + u[j]);

            // Energy: implicit conduction; pressure work implicit where the gas expands.
            std::vector<double> B(n_ + 1, 0.0), h(n_ + 1, 0.0);
            h[0] = pi0;
            h[n_] = piX;
            for (int j = 1; j < n_; ++j) {
                const double rb = 0.5 * (rho[j - 1] + rho[j]);
                B[j] = a * gas.lambda * rb / (dx * dx);
                h[j] = gas.lambda * rb * ((1.0 - a) * dth_old[j] + gamma_[j]);
            }
            const double cd = gas.cV / dt;
            for (int i = 0; i < n_; ++i) {
                const double kr = gas.k * rho[i] * dua[i];
                double diag = cd + B[i] + B[i + 1];
                double rhs = cd * prev.theta[i] + gas.nu * rho[i] * (dua[i] + beta_[i]) * dua[i] + (h[i + 1] - h[i]) / dx;
                if (kr >= 0) {
                    diag += kr;
                } else {
                    rhs -= kr * th_k[i];
                }
                if (!s_.f.is_zero()) rhs += s_.f(0.5 * (xe[i] + xe[i + 1]), xc_[i], t1);
                a_[i] = -B[i];
                b_[i] = diag;
                c_[i] = -B[i + 1];
                d_[i] = rhs;
            }
            std::vector<double> a2(a_.begin(), a_.begin() + n_), b2(b_.begin(), b_.begin() + n_),
                c2(c_.begin(), c_.begin() + n_), d2(d_.begin(), d_.begin() + n_);
            thomas_solve(a2, b2, c2, d2);
            th = d2;
            for (int i = 0; i < n_; ++i)
                if (!(th[i] > sp_.positivity_floor)) {
                    why = "theta";
                    return false;
                }

            double diff = 0.0;
            for (int i = 0; i < n_; ++i) {
                diff = std::max(diff, std::abs(eta[i] - eta_k[i]));
                diff = std::max(diff, std::abs(th[i] - th_k[i]));
            }
            for (int j = 0; j <= n_; ++j) diff = std::max(diff, std::abs(u[j] - u_k[j]));
            if (!std::isfinite(diff)) {
                why = "divergence";
                return false;
            }
            if (diff < sp_.tolerance) break;
        }
        if (iters > sp_.max_picard) {
            why = "divergence";
            return false;
        }

        out.t = t1;
        out.eta = std::move(eta);
        out.u = std::move(u);
        out.theta = std::move(th);
        out.xe = std::move(xe);
        out.g = eval_g(out.xe, t1);
        derive(out, dua, du, prev.theta, out.theta);

        // Running time integrals (trapezoid) and the scheme's own volume flux.
        out.It_sigma.resize(n_);
        out.It_p.resize(n_);
        out.It_g.resize(n_ + 1);
        for (int i = 0; i < n_; ++i) {
            out.It_sigma[i] = prev.It_sigma[i] + 0.5 * dt * (prev.sigma[i] + out.sigma[i]);
            out.It_p[i] = prev.It_p[i] + 0.5 * dt * (prev.p[i] + out.p[i]);
        }
        for (int j = 0; j <= n_; ++j) out.It_g[j] = prev.It_g[j] + 0.5 * dt * (prev.g[j] + out.g[j]);
        double bsum = 0.0;
        for (int i = 0; i < n_; ++i) bsum += beta_[i];
        const double ua0 = a * out.u[0] + (1.0 - a) * prev.u[0];
        const double uan = a * out.u[n_] + (1.0 - a) * prev.u[n_];
        out.volume_flux = prev.volume_flux + dt * ((uan - ua0) + dx * bsum);

        // Work of boundary stresses and fluxes plus the force terms.
        const double sl = (m == 1) ? out.sigma[0] : sg0;
        const double sr = (m == 3) ? sgX : out.sigma[n_ - 1];
        double wf = sr * out.u[n_] - sl * out.u[0] + piX - pi0;
        for (int j = 0; j <= n_; ++j) wf += ((j == 0 || j == n_) ? 0.5 : 1.0) * dx * out.g[j] * out.u[j];
        if (!s_.f.is_zero())
            for (int i = 0; i < n_; ++i) wf += dx * s_.f(0.5 * (out.xe[i] + out.xe[i + 1]), xc_[i], t1);
        out.work = prev.work + dt * wf;
        return true;
    }

    const Grid& grid() const { return s_.grid; }

private:
    std::vector<double> du_of(const std::vector<double>& u) const {
        std::vector<double> du(n_);
        const double dx = s_.grid.dx();
        for (int i = 0; i < n_; ++i) du[i] = (u[i + 1] - u[i]) / dx;
        return du;
    }
    // D theta at interior edges (index j = 1..n-1), zero at the boundary edges.
    std::vector<double> dtheta_of(const std::vector<double>& th) const {
        std::vector<double> d(n_ + 1, 0.0);
        const double dx = s_.grid.dx();
        for (int j = 1; j < n_; ++j) d[j] = (th[j] - th[j - 1]) / dx;
        return d;
    }
    std::vector<double> eval_g(const std::vector<double>& xe, double t) const {
        std::vector<double> g(n_ + 1, 0.0);
        if (!s_.g.is_zero())
            for (int j = 0; j <= n_; ++j) g[j] = s_.g(xe[j], xe_pos_[j], t);
        return g;
    }
    void load_perturbation(double t) {
        if (has_beta_)
            for (int i = 0; i < n_; ++i) beta_[i] = s_.perturbation->beta(0.0, xc_[i], t);
        if (has_gamma_)
            for (int j = 1; j < n_; ++j) gamma_[j] = s_.perturbation->gamma(0.0, xe_pos_[j], t);
    }
    // sigma, p and pi of a state; dua is the stress rate, th_prev/th the temperatures
    // entering the theta-weighted conduction flux.
    void derive(StepState& st, const std::vector<double>& dua, const std::vector<double>&,
                const std::vector<double>& th_prev, const std::vector<double>& th) const {
        const double a = sp_.theta_implicitness;
        const double dx = s_.grid.dx();
        const GasParams& gas = s_.gas;
        st.sigma.resize(n_);
        st.p.resize(n_);
        st.pi.assign(n_ + 1, 0.0);
        for (int i = 0; i < n_; ++i) {
            const double r = 1.0 / st.eta[i];
            st.p[i] = gas.k * r * st.theta[i];
            st.sigma[i] = gas.nu * r * (dua[i] + beta_[i]) - st.p[i];
        }
        st.pi[0] = s_.bc.pi0(st.t);
        st.pi[n_] = s_.bc.piX(st.t);
        for (int j = 1; j < n_; ++j) {
            const double rb = 0.5 * (1.0 / st.eta[j - 1] + 1.0 / st.eta[j]);
            const double dth = a * (th[j] - th[j - 1]) / dx + (1.0 - a) * (th_prev[j] - th_prev[j - 1]) / dx;
            st.pi[j] = gas.lambda * rb * (dth + gamma_[j]);
        }
    }

    const ProblemSpec& s_;
    SchemeParams sp_;
    int n_;
    std::vector<double> a_, b_, c_, d_, beta_, gamma_, xc_, xe_pos_;
    bool has_beta_ = false, has_gamma_ = false;
};

inline double energy_of(const StepState& st, const ProblemSpec& s) {
    const double dx = s.grid.dx();
    const int n = s.grid.nx;
    double e = 0.0;
    for (int j = 0; j <= n; ++j) e += ((j == 0 || j == n) ? 0.5 : 1.0) * 0.5 * st.u[j] * st.u[j];
    double th = 0.0;
    for (double v : st.theta) th += v;
    return dx * (e + s.gas.cV * th);
}

}  // namespace detail

inline SolutionBundle solve(const ProblemSpec& spec, const SchemeParams& scheme = {},
                            const StepObserver& observer = nullptr) {
    detail::Stepper stepper(spec, scheme);
    const Grid& g = spec.grid;
    const int n = g.nx;
    SolutionBundle sol;
    sol.grid = g;
    sol.gas = spec.gas;
    sol.m = spec.bc.m;
    for (SpaceTimeField* f : {&sol.eta, &sol.theta, &sol.sigma, &sol.rho, &sol.p, &sol.It_sigma, &sol.It_p})
        *f = SpaceTimeField(Loc::center, g.X, n, {});
    for (SpaceTimeField* f : {&sol.u, &sol.xe, &sol.pi, &sol.It_g}) *f = SpaceTimeField(Loc::edge, g.X, n, {});

    auto record = [&](const StepState& st) {
        sol.eta.push_row(st.t, st.eta);
        sol.u.push_row(st.t, st.u);
        sol.theta.push_row(st.t, st.theta);
        sol.xe.push_row(st.t, st.xe);
        sol.sigma.push_row(st.t, st.sigma);
        sol.pi.push_row(st.t, st.pi);
        std::vector<double> rho(n);
        for (int i = 0; i < n; ++i) rho[i] = 1.0 / st.eta[i];
        sol.rho.push_row(st.t, rho);
        sol.p.push_row(st.t, st.p);
        sol.It_sigma.push_row(st.t, st.It_sigma);
        sol.It_p.push_row(st.t, st.It_p);
        sol.It_g.push_row(st.t, st.It_g);
        double V = 0.0;
        for (double e : st.eta) V += e;
        sol.volume.push_back(V * g.X / n);
        sol.volume_flux.push_back(st.volume_flux);
        sol.energy.push_back(detail::energy_of(st, spec));
        sol.work.push_back(st.work);
    };

    StepState cur = stepper.initial();
    record(cur);
    const int stride = std::max(1, scheme.snapshot_stride);

    // Advance over [cur.t, cur.t + dt], halving on failure.
    std::function<void(StepState&, double, int, long, int&)> advance = [&](StepState& st, double dt, int level,
                                                                           long step, int& count) {
        StepState next;
        int iters = 0;
        std::string why;
        if (stepper.try_step(st, dt, next, iters, why)) {
            sol.picard_iterations += iters;
            sol.picard_max = std::max(sol.picard_max, iters);
            if (observer) observer(st, next);
            st = std::move(next);
            ++count;
            return;
        }
        if (level >= scheme.max_halvings) {
            if (why == "divergence") throw NonlinearDivergence(step);
            throw PositivityLoss(st.t + dt, why);
        }
        advance(st, 0.5 * dt, level + 1, step, count);
        advance(st, 0.5 * dt, level + 1, step, count);
    };

    for (int step = 1; step <= g.nt; ++step) {
        int count = 0;
        const double target = g.t(step);
        advance(cur, target - cur.t, 0, step, count);
        cur.t = target;
        sol.substeps.push_back(count);
        if (step % stride == 0 || step == g.nt) record(cur);
    }
    return sol;
}

struct DiagnosticsReport {
    double volume_residual = 0.0;
    double logvol_residual = 0.0;
    double stress_repr_residual = 0.0;
    double mean_volume_residual = 0.0;
    double min_eta = 0.0;
    double min_theta = 0.0;
    std::vector<double> energy;
    std::vector<double> energy_balance;  // E(t) - E(0) - work(t)
};

// I_t of a boundary series evaluated at the given times (trapezoid over its knots).
inline std::vector<double> boundary_primitive(const TimeSeries& s, const std::vector<double>& times) {
    auto it = time_primitive(s.v, s.t);
    std::vector<double> out;
    for (double t : times) {
        auto pos = std::lower_bound(s.t.begin(), s.t.end(), t - 1e-12 * (1.0 + std::abs(t)));
        std::size_t k = static_cast<std::size_t>(pos - s.t.begin());
        if (k >= s.t.size()) k = s.t.size() - 1;
        out.push_back(it[k]);
    }
    return out;
}

// Residual field of the stress representation at snapshot k.
inline Field stress_repr_residual_at(const SolutionBundle& sol, const ProblemSpec& spec, int k,
                                     const std::vector<double>& itp0, const std::vector<double>& itpX) {
    const int m = sol.m;
    Field w = sol.u.slice(k) - sol.u.slice(0) - sol.It_g.slice(k);
    Field rhs = i_bracket(w, m);
    Field its = sol.It_sigma.slice(k);
    if (m == 1) {
        rhs = subtract_constant(rhs, -mean_omega(its));
    } else {
        const double X = spec.grid.X;
        for (int i = 0; i < rhs.size(); ++i) {
            const double x = rhs.x(i);
            rhs.v[i] += (m == 2) ? -itp0[k] : -(1.0 - x / X) * itp0[k] - (x / X) * itpX[k];
        }
    }
    return its - rhs;
}

inline DiagnosticsReport diagnostics(const SolutionBundle& sol, const ProblemSpec& spec) {
    DiagnosticsReport r;
    const double nu = spec.gas.nu;
    const double V0 = sol.volume.front();
    const auto itp0 = boundary_primitive(spec.bc.p0, sol.eta.t);
    const auto itpX = boundary_primitive(spec.bc.pX, sol.eta.t);
    const Field eta0 = sol.eta.slice(0);
    r.min_eta = inf;
    r.min_theta = inf;
    for (int k = 0; k < sol.eta.nt(); ++k) {
        r.volume_residual = std::max(r.volume_residual, std::abs(sol.volume[k] - V0 - sol.volume_flux[k]));
        r.mean_volume_residual =
            std::max(r.mean_volume_residual, std::abs((sol.volume[k] - V0 - sol.volume_flux[k]) / spec.grid.X));
        Field lne = sol.eta.slice(k);
        for (int i = 0; i < lne.size(); ++i)
            lne.v[i] = nu * std::log(lne.v[i]) - nu * std::log(eta0.v[i]) - sol.It_sigma.at(k, i) - sol.It_p.at(k, i);
        r.logvol_residual = std::max(r.logvol_residual, lq_norm(lne, 2.0));
        r.stress_repr_residual =
            std::max(r.stress_repr_residual, lq_norm(stress_repr_residual_at(sol, spec, k, itp0, itpX), 2.0));
        for (double v : sol.eta.row(k)) r.min_eta = std::min(r.min_eta, v);
        for (double v : sol.theta.row(k)) r.min_theta = std::min(r.min_theta, v);
        r.energy.push_back(sol.energy[k]);
        r.energy_balance.push_back(sol.energy[k] - sol.energy.front() - sol.work[k]);
    }
    return r;
}

inline double linf_velocity_check(const SolutionBundle& sol, const ProblemSpec&) { return lqr_norm(sol.u, inf, inf); }

}  // namespace lmc
