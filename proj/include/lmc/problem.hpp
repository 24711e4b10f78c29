#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "calculus.hpp"
#include "grid.hpp"

namespace lmc {

struct GasParams {
    double nu = 1.0;
    double k = 1.0;
    double cV = 1.0;
    double lambda = 1.0;

    bool operator==(const GasParams&) const = default;
};

// Boundary data for family m. Entries not used by m are identically zero.
struct BoundaryData {
    int m = 3;
    TimeSeries u0, uX, p0, pX, pi0, piX;

    bool operator==(const BoundaryData&) const = default;
};

// A function of (chi, x, t) with the source text it was built from.
struct FieldFn {
    std::string text = "0";
    std::function<double(double, double, double)> fn;

    FieldFn() = default;
    FieldFn(std::string src, std::function<double(double, double, double)> f) : text(std::move(src)), fn(std::move(f)) {}

    bool is_zero() const { return !fn; }
    double operator()(double chi, double x, double t) const { return fn ? fn(chi, x, t) : 0.0; }
};

struct PerturbationSpec {
    FieldFn beta;    // at cell centers, function of (x, t)
    FieldFn gamma;   // at cell edges, function of (x, t)
    Field beta_e;    // at cell edges; empty means zero
    std::optional<std::pair<FieldFn, FieldFn>> beta_split;  // beta = beta1 + beta2
    std::optional<std::pair<FieldFn, FieldFn>> g_split;     // ghat - g = g1 + g2, functions of (chi, x, t)
};

struct ProblemSpec {
    Grid grid;
    GasParams gas;
    BoundaryData bc;
    Field eta0;    // centers
    Field u0;      // edges
    Field theta0;  // centers
    FieldFn g;     // g(chi, x, t)
    FieldFn f;     // f(chi, x, t) >= 0
    std::optional<PerturbationSpec> perturbation;
    double N = 10.0;
};

// Zero the boundary entries that family m does not use.
inline void normalize_boundary(BoundaryData& bc, const Grid& g) {
    auto zero = TimeSeries::constant(g, 0.0);
    auto fill = [&](TimeSeries& s) {
        if (s.v.empty()) s = zero;
    };
    for (TimeSeries* s : {&bc.u0, &bc.uX, &bc.p0, &bc.pX, &bc.pi0, &bc.piX}) fill(*s);
    if (bc.m == 1) bc.p0 = bc.pX = zero;
    if (bc.m == 2) bc.u0 = bc.pX = zero;
    if (bc.m == 3) bc.u0 = bc.uX = zero;
}

// Initial Eulerian coordinate at edges: I eta0 + beta_e.
inline Field initial_xe(const ProblemSpec& s) {
    Field xe = primitive(s.eta0);
    if (s.perturbation && !s.perturbation->beta_e.v.empty()) xe = xe + s.perturbation->beta_e;
    return xe;
}

// Checks of the data conditions; returns one message per violation.
inline std::vector<std::string> validate(const ProblemSpec& s) {
    std::vector<std::string> out;
    const Grid& g = s.grid;
    if (!(g.X > 0) || !(g.T > 0)) out.push_back("grid: X and T must be positive");
    if (g.nx < 4) out.push_back("grid: nx must be at least 4");
    if (g.nt < 1) out.push_back("grid: nt must be at least 1");
    if (!(s.gas.nu > 0) || !(s.gas.k > 0) || !(s.gas.cV > 0) || !(s.gas.lambda > 0))
        out.push_back("gas: nu, k, cV and lambda must be strictly positive");
    if (s.bc.m < 1 || s.bc.m > 3) out.push_back("bc: m must be 1, 2 or 3");
    if (!(s.N > 0)) out.push_back("N must be positive");
    if (!out.empty()) return out;

    if (s.eta0.size() != g.nx || s.theta0.size() != g.nx || s.u0.size() != g.nx + 1)
        out.push_back("data: initial fields do not match the grid");
    if (!out.empty()) return out;

    const double floor = 1.0 / s.N;
    for (double a : s.eta0.v)
        if (!(a >= floor)) {
            out.push_back("(C1) eta0 must satisfy eta0 >= 1/N");
            break;
        }
    for (double a : s.theta0.v)
        if (!(a > 0)) {
            out.push_back("theta0 must be strictly positive");
            break;
        }
    for (double a : s.u0.v)
        if (!std::isfinite(a)) {
            out.push_back("(C1) u0 must be finite");
            break;
        }

    // Force terms sampled at the initial Eulerian coordinate and a set of times.
    const Field xe0 = initial_xe(s);
    const int tstride = std::max(1, g.nt / 64);
    bool f_neg = false, g_bad = false;
    for (int n = 0; n <= g.nt && !(f_neg && g_bad); n += tstride) {
        const double t = g.t(n);
        for (int i = 0; i < g.nx; ++i) {
            const double chi = 0.5 * (xe0.v[i] + xe0.v[i + 1]);
            try {
                if (!s.f.is_zero() && s.f(chi, g.xc(i), t) < 0) f_neg = true;
                if (!s.g.is_zero() && !std::isfinite(s.g(chi, g.xc(i), t))) g_bad = true;
            } catch (const Error&) {
                g_bad = true;
            }
        }
    }
    if (f_neg) out.push_back("(C2) f must be nonnegative");
    if (g_bad) out.push_back("(C2) g and f must be finite");

    auto nonneg = [&](const TimeSeries& ts, const char* name) {
        for (double a : ts.v)
            if (!(a >= 0)) {
                out.push_back(std::string("(C3) ") + name + " must be nonnegative");
                return;
            }
    };
    nonneg(s.bc.pi0, "pi0");
    nonneg(s.bc.piX, "piX");
    auto pressure = [&](const TimeSeries& ts, const char* name) {
        for (double a : ts.v)
            if (!(a >= floor)) {
                out.push_back(std::string("(C3) boundary pressure ") + name + " must satisfy p >= 1/N");
                return;
            }
    };
    if (s.bc.m == 2 || s.bc.m == 3) pressure(s.bc.p0, "p0");
    if (s.bc.m == 3) pressure(s.bc.pX, "pX");

    if (s.bc.m == 1) {
        // V(t) = ||eta0||_{L1} + I_t(uX - u0) at the step times.
        std::vector<double> diff(s.bc.uX.v.size()), tt = s.bc.uX.t;
        for (std::size_t n = 0; n < diff.size(); ++n) diff[n] = s.bc.uX.v[n] - s.bc.u0(tt[n]);
        auto it = time_primitive(diff, tt);
        const double V0 = integral(s.eta0);
        for (std::size_t n = 0; n < it.size(); ++n)
            if (V0 + it[n] < floor) {
                out.push_back("(gas volume) ||eta0||_L1 + I_t(uX - u0) must stay >= 1/N; violated at t = " +
                              std::to_string(tt[n]));
                break;
            }
    }
    return out;
}

}  // namespace lmc
