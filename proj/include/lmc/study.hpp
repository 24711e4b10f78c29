#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "homogenized.hpp"
#include "solver.hpp"

namespace lmc {

// ---------------------------------------------------------------------------
// Rate fitting

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double half_width = 0.0;  // 95% confidence half-width of the slope
};

// Least squares of log e against log h.
inline FitResult fit_rate(const std::vector<double>& h, const std::vector<double>& e) {
    if (h.size() != e.size()) throw DegenerateFit("fit_rate: length mismatch");
    const std::size_t n = h.size();
    if (n < 4) throw DegenerateFit("fit_rate: at least 4 rows are required");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(e[i] > 1e-13)) throw DegenerateFit("fit_rate: error at or below 1e-13");
        if (!(h[i] > 0)) throw DegenerateFit("fit_rate: nonpositive abscissa");
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(h[i]);
        my += std::log(e[i]);
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(h[i]) - mx, dy = std::log(e[i]) - my;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    if (!(sxx > 0)) throw DegenerateFit("fit_rate: abscissae do not vary");
    FitResult r;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double res = std::log(e[i]) - (r.intercept + r.slope * std::log(h[i]));
        rss += res * res;
    }
    const double s2 = rss / static_cast<double>(n - 2);
    boost::math::students_t dist(static_cast<double>(n - 2));
    r.half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * std::sqrt(s2 / sxx);
    return r;
}

// ---------------------------------------------------------------------------
// Tables and reports

struct ColumnCheck {
    std::string column;
    double lo = -inf;
    double hi = inf;
};

struct ConvergenceTable {
    std::string abscissa;  // column the slopes are fitted against
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<ColumnCheck> checks;
    std::map<std::string, std::string> metadata;
    std::vector<std::pair<std::string, double>> extras;  // reported scalars (floors, residuals)
    std::vector<std::string> notes;                       // flags and extra pass/fail lines
    bool extra_fail = false;
    bool partial = false;

    int index_of(const std::string& c) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == c) return static_cast<int>(i);
        throw Error("unknown table column '" + c + "'");
    }
    std::vector<double> column(const std::string& c) const {
        const int k = index_of(c);
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(r[k]);
        return out;
    }
};

struct ColumnFit {
    std::string column;
    bool fitted = false;
    FitResult fit;
    std::string note;
    std::optional<bool> pass;  // empty when the column has no check
};

inline std::vector<ColumnFit> fit_columns(const ConvergenceTable& t) {
    std::vector<ColumnFit> out;
    if (t.rows.empty()) return out;
    const auto h = t.column(t.abscissa);
    for (const auto& c : t.columns) {
        if (c == t.abscissa) continue;
        ColumnFit cf;
        cf.column = c;
        try {
            cf.fit = fit_rate(h, t.column(c));
            cf.fitted = true;
        } catch (const DegenerateFit& e) {
            cf.note = "degenerate";
        }
        for (const auto& chk : t.checks)
            if (chk.column == c) cf.pass = cf.fitted && cf.fit.slope >= chk.lo && cf.fit.slope <= chk.hi;
        out.push_back(cf);
    }
    return out;
}

inline bool table_passes(const ConvergenceTable& t) {
    if (t.partial || t.extra_fail || t.rows.empty()) return false;
    for (const auto& f : fit_columns(t))
        if (f.pass && !*f.pass) return false;
    return true;
}

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17e", v);
    return buf;
}

inline std::string csv_text(const ConvergenceTable& t) {
    std::ostringstream os;
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << "\n";
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
        os << "\n";
    }
    return os.str();
}

inline std::string summary_text(const ConvergenceTable& t) {
    std::ostringstream os;
    for (const auto& [k, v] : t.metadata) os << k << ": " << v << "\n";
    if (t.partial) os << "status: partial\n";
    if (t.rows.empty()) {
        os << "no rows\n";
        return os.str();
    }
    char buf[256];
    os << "slopes against " << t.abscissa << ":\n";
    for (const auto& f : fit_columns(t)) {
        std::string check;
        for (const auto& chk : t.checks)
            if (chk.column == f.column) {
                check = " [" + (std::isinf(chk.lo) ? std::string("-inf") : format_number(chk.lo)) + ", " +
                        (std::isinf(chk.hi) ? std::string("inf") : format_number(chk.hi)) + "]";
            }
        if (f.fitted)
            std::snprintf(buf, sizeof buf, "  %s slope %.6f +- %.6f", f.column.c_str(), f.fit.slope, f.fit.half_width);
        else
            std::snprintf(buf, sizeof buf, "  %s %s", f.column.c_str(), f.note.c_str());
        os << buf << check;
        if (f.pass) os << (*f.pass ? " PASS" : " FAIL");
        os << "\n";
    }
    for (const auto& [k, v] : t.extras) os << k << ": " << format_number(v) << "\n";
    for (const auto& n : t.notes) os << n << "\n";
    os << "result: " << (table_passes(t) ? "PASS" : "FAIL") << "\n";
    return os.str();
}

// Writes <path> (CSV) and <path without extension>_summary.txt.
inline void write_report(const ConvergenceTable& t, const std::string& path) {
    namespace fs = std::filesystem;
    const fs::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    auto put = [](const fs::path& f, const std::string& text) {
        std::ofstream os(f, std::ios::binary);
        if (!os) throw IoError("cannot open '" + f.string() + "' for writing");
        os << text;
        if (!os) throw IoError("write failed for '" + f.string() + "'");
    };
    put(p, csv_text(t));
    fs::path s = p;
    s.replace_filename(p.stem().string() + "_summary.txt");
    put(s, summary_text(t));
}

// Thrown when a study stops early; carries the rows completed so far.
struct StudyAborted : Error {
    ConvergenceTable partial;
    StudyAborted(const std::string& why, ConvergenceTable t) : Error(why), partial(std::move(t)) {
        partial.partial = true;
    }
};

namespace detail {
// Runs tasks 0..n-1 on up to `jobs` threads; the first exception of each task is kept.
template <class F>
std::vector<std::exception_ptr> run_parallel(int n, int jobs, F&& task) {
    std::vector<std::exception_ptr> errs(n);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int i = next++; i < n; i = next++) {
            try {
                task(i);
            } catch (...) {
                errs[i] = std::current_exception();
            }
        }
    };
    const int nt = std::max(1, std::min(jobs, n));
    std::vector<std::thread> pool;
    for (int k = 1; k < nt; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return errs;
}

inline std::string error_text(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const std::exception& x) {
        return x.what();
    } catch (...) {
        return "unknown error";
    }
}

inline double zeta(double t, double t0) { return std::min(t / t0, 1.0); }

// Rows multiplied by zeta(t)^power.
inline SpaceTimeField zeta_weighted(SpaceTimeField w, double t0, int power) {
    for (int k = 0; k < w.nt(); ++k) {
        const double z = std::pow(zeta(w.t[k], t0), power);
        for (auto& v : w.row(k)) v *= z;
    }
    return w;
}

inline SpaceTimeField row_derivative(const SpaceTimeField& w) {
    return map_rows(w, [](const Field& f) { return derivative(f); });
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Lipschitz right-hand side

// E0 = (1/2)(u0 - u_Gamma0)^2 + cV theta0 at cell centers.
inline Field compute_E0(const Field& u0, const Field& theta0, const Field& eta0, const BoundaryData& bc, double cV) {
    Field ug(Loc::edge, u0.X, u0.nx());
    if (bc.m == 1) {
        const Field a = coprimitive(eta0), b = primitive(eta0);
        const double V0 = integral(eta0);
        const double ul = bc.u0(0.0), ur = bc.uX(0.0);
        for (int j = 0; j < ug.size(); ++j) ug.v[j] = (a.v[j] * ul + b.v[j] * ur) / V0;
    } else if (bc.m == 2) {
        for (auto& v : ug.v) v = bc.uX(0.0);
    }
    Field half_w2 = u0 - ug;
    for (auto& v : half_w2.v) v = 0.5 * v * v;
    return edge_to_center(half_w2) + cV * theta0;
}

struct DeltaBreakdown {
    std::vector<std::pair<std::string, double>> items;
    double total = 0.0;

    double operator[](const std::string& k) const {
        for (const auto& [n, v] : items)
            if (n == k) return v;
        throw Error("unknown Delta item '" + k + "'");
    }
};

namespace detail {
inline SpaceTimeField sample_fn(const FieldFn& fn, Loc loc, const Grid& g, const std::vector<double>& times,
                                const SpaceTimeField* chi) {
    SpaceTimeField w(loc, g.X, g.nx, times);
    if (fn.is_zero()) return w;
    for (int k = 0; k < w.nt(); ++k)
        for (int i = 0; i < w.nxs; ++i) {
            double c = 0.0;
            if (chi) c = (loc == Loc::edge) ? chi->at(k, i) : 0.5 * (chi->at(k, i) + chi->at(k, i + 1));
            w.at(k, i) = fn(c, w.x(i), w.t[k]);
        }
    return w;
}

inline std::vector<double> series_diff(const TimeSeries& a, const TimeSeries& b) {
    std::vector<double> d(a.t.size());
    for (std::size_t n = 0; n < d.size(); ++n) d[n] = a.v[n] - b(a.t[n]);
    return d;
}

inline double w11(const std::vector<double>& d, const std::vector<double>& t) {
    double var = 0.0;
    for (std::size_t n = 1; n < d.size(); ++n) var += std::abs(d[n] - d[n - 1]);
    return lr_time(d, t, 1.0) + var;
}
}  // namespace detail

// Itemized Delta for a base problem and a perturbed one. Forces are evaluated at the
// perturbed Eulerian coordinate when its trajectory is given, else at its initial value.
inline DeltaBreakdown compute_delta(const ProblemSpec& base, const ProblemSpec& pert, double q_e = inf,
                                    const SolutionBundle* pert_sol = nullptr) {
    const Grid& g = base.grid;
    if (!(g == pert.grid)) throw IncompatibleSpecs("compute_delta: grids differ");
    if (!(base.gas == pert.gas)) throw IncompatibleSpecs("compute_delta: gas parameters differ");
    if (base.bc.m != pert.bc.m) throw IncompatibleSpecs("compute_delta: boundary families differ");
    const int m = base.bc.m;
    BoundaryData bb = base.bc, pb = pert.bc;
    normalize_boundary(bb, g);
    normalize_boundary(pb, g);

    DeltaBreakdown d;
    auto add = [&](const std::string& k, double v) {
        d.items.emplace_back(k, v);
        d.total += v;
    };
    add("eta0_L2", lq_norm(pert.eta0 - base.eta0, 2.0));
    add("u0_Hm1", h_minus_one(pert.u0 - base.u0, m));
    const Field E0 = compute_E0(base.u0, base.theta0, base.eta0, bb, base.gas.cV);
    const Field E0h = compute_E0(pert.u0, pert.theta0, pert.eta0, pb, pert.gas.cV);
    add("E0_Hm1_3", h_minus_one(E0h - E0, 3));

    Field be(Loc::edge, g.X, g.nx);
    if (pert.perturbation && !pert.perturbation->beta_e.v.empty()) be = be + pert.perturbation->beta_e;
    if (base.perturbation && !base.perturbation->beta_e.v.empty()) be = be - base.perturbation->beta_e;
    add("beta_e_Lqe", lq_norm(be, q_e));

    const auto& tt = pb.u0.t;
    add("ub_W11", detail::w11(detail::series_diff(pb.u0, bb.u0), tt) + detail::w11(detail::series_diff(pb.uX, bb.uX), tt));
    add("pb_L1", lr_time(detail::series_diff(pb.p0, bb.p0), tt, 1.0) + lr_time(detail::series_diff(pb.pX, bb.pX), tt, 1.0));
    add("pib_L1",
        lr_time(detail::series_diff(pb.pi0, bb.pi0), tt, 1.0) + lr_time(detail::series_diff(pb.piX, bb.piX), tt, 1.0));

    // Source terms live only on the perturbed problem; the base is assumed unperturbed.
    std::vector<double> times;
    const SpaceTimeField* chi = pert_sol ? &pert_sol->xe : nullptr;
    SpaceTimeField chi0;
    if (pert_sol) {
        times = pert_sol->xe.t;
    } else {
        for (int n = 0; n <= g.nt; ++n) times.push_back(g.t(n));
        chi0 = SpaceTimeField(Loc::edge, g.X, g.nx, times);
        const Field x0 = initial_xe(pert);
        for (int k = 0; k < chi0.nt(); ++k) chi0.set_row(k, x0);
        chi = &chi0;
    }
    FieldFn beta1, beta2, gam, g1, g2;
    if (pert.perturbation) {
        const auto& p = *pert.perturbation;
        if (p.beta_split) {
            beta1 = p.beta_split->first;
            beta2 = p.beta_split->second;
        } else {
            beta1 = p.beta;
        }
        gam = p.gamma;
        if (p.g_split) {
            g1 = p.g_split->first;
            g2 = p.g_split->second;
        }
    }
    if (!pert.perturbation || !pert.perturbation->g_split) {
        const FieldFn gh = pert.g, gb = base.g;
        if (!gh.is_zero() || !gb.is_zero())
            g1 = FieldFn("ghat - g", [gh, gb](double c, double x, double t) { return gh(c, x, t) - gb(c, x, t); });
    }
    const SpaceTimeField B1 = detail::sample_fn(beta1, Loc::center, g, times, chi);
    const SpaceTimeField B2 = detail::sample_fn(beta2, Loc::center, g, times, chi);
    double b1 = inf;
    for (auto [q, r] : dual_v2_exponents) b1 = std::min(b1, lqr_norm(B1, q, r));
    add("beta1_M0", b1);
    add("I3beta2_M1", lqr_norm(map_rows(B2, [](const Field& f) { return i_bracket(f, 3); }), inf, 2.0));
    add("ItI1beta2_Lqe_inf",
        q_e == 2.0 ? 0.0
                   : lqr_norm(time_primitive(map_rows(B2, [](const Field& f) { return i_bracket(f, 1); })), q_e, inf));
    add("mean_beta2_L1", lr_time(mean_series(B2), times, 1.0));
    add("gamma_V2star", v2star_majorant(detail::sample_fn(gam, Loc::edge, g, times, chi)));
    const SpaceTimeField G1 = detail::sample_fn(g1, Loc::edge, g, times, chi);
    const SpaceTimeField G2 = detail::sample_fn(g2, Loc::edge, g, times, chi);
    add("g1_L1", lqr_norm(G1, 1.0, 1.0));
    add("Img2_L2", lqr_norm(map_rows(G2, [m](const Field& f) { return i_bracket(f, m); }), 2.0, 2.0));
    add("mean_g2_L1", m == 3 ? lr_time(mean_series(G2), times, 1.0) : 0.0);
    const FieldFn fh = pert.f, fb = base.f;
    FieldFn fd;
    if (!fh.is_zero() || !fb.is_zero())
        fd = FieldFn("fhat - f", [fh, fb](double c, double x, double t) { return fh(c, x, t) - fb(c, x, t); });
    add("f_H21star", h21star_majorant(detail::sample_fn(fd, Loc::center, g, times, chi), m, 1.0 / pert.N));
    return d;
}

// ---------------------------------------------------------------------------
// Error columns shared by both studies

struct StudyThresholds {
    double primary_lo = 0.9;
    double primary_hi = 1.1;   // Lipschitz only
    double holder = 0.45;
    double stress_cq = 0.6;
    double zeta_cq = 0.2;
    double ratio_spread = 3.0;  // Lipschitz LHS/Delta spread
    double decade = 10.0;       // homogenization: largest error over floor
    double monotone = 1.25;
};

inline const std::vector<std::string>& primary_columns() {
    static const std::vector<std::string> c{"eta_CL2", "u_L2Q", "u_Hm1_sup", "theta_L2Q", "xe_Lqe_inf", "Itsigma_CL2"};
    return c;
}

inline const std::vector<std::string>& error_column_names() {
    static const std::vector<std::string> c{"eta_CL2",    "u_L2Q",           "u_Hm1_sup",       "theta_L2Q",
                                            "xe_Lqe_inf", "Itsigma_CL2",     "eta_Linf",        "u_Linf2",
                                            "theta_Linf2", "Itsigma_CQ",     "zeta_u_CL2",      "zeta2_theta_CL2",
                                            "zeta_u_CQ",  "zeta2_theta_CQ"};
    return c;
}

struct ErrorFields {
    SpaceTimeField eta, u, theta, xe, It_sigma;
};

// All error columns for a difference (hat - plain), in a fixed order.
inline std::vector<std::pair<std::string, double>> error_columns(const ErrorFields& e, int m, double q_e, double t0) {
    using detail::zeta_weighted;
    std::vector<std::pair<std::string, double>> c;
    c.emplace_back("eta_CL2", lqr_norm(e.eta, 2.0, inf));
    c.emplace_back("u_L2Q", lqr_norm(e.u, 2.0, 2.0));
    c.emplace_back("u_Hm1_sup", h_minus_one_sup(e.u, m));
    c.emplace_back("theta_L2Q", lqr_norm(e.theta, 2.0, 2.0));
    c.emplace_back("xe_Lqe_inf", lqr_norm(e.xe, q_e, inf));
    c.emplace_back("Itsigma_CL2", lqr_norm(e.It_sigma, 2.0, inf));
    c.emplace_back("eta_Linf", lqr_norm(e.eta, inf, inf));
    c.emplace_back("u_Linf2", lqr_norm(e.u, inf, 2.0));
    c.emplace_back("theta_Linf2", lqr_norm(e.theta, inf, 2.0));
    c.emplace_back("Itsigma_CQ", lqr_norm(e.It_sigma, inf, inf));
    const auto zu = zeta_weighted(e.u, t0, 1), zt = zeta_weighted(e.theta, t0, 2);
    c.emplace_back("zeta_u_CL2", lqr_norm(zu, 2.0, inf));
    c.emplace_back("zeta2_theta_CL2", lqr_norm(zt, 2.0, inf));
    c.emplace_back("zeta_u_CQ", lqr_norm(zu, inf, inf));
    c.emplace_back("zeta2_theta_CQ", lqr_norm(zt, inf, inf));
    return c;
}

inline void add_rate_checks(ConvergenceTable& t, const StudyThresholds& th, bool primary_upper) {
    for (const auto& c : primary_columns()) t.checks.push_back({c, th.primary_lo, primary_upper ? th.primary_hi : inf});
    for (const char* c : {"eta_Linf", "u_Linf2", "theta_Linf2", "zeta_u_CL2", "zeta2_theta_CL2"})
        t.checks.push_back({c, th.holder, inf});
    t.checks.push_back({"Itsigma_CQ", th.stress_cq, inf});
    t.checks.push_back({"zeta_u_CQ", th.zeta_cq, inf});
    t.checks.push_back({"zeta2_theta_CQ", th.zeta_cq, inf});
}

// ---------------------------------------------------------------------------
// Homogenization study

struct HomogStudyConfig {
    TwoScaleData data;
    std::vector<double> eps_list{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
    double a_eps = 0.0;
    SchemeParams scheme;
    double t0_fraction = 0.2;
    double min_eps_over_dx = 16.0;
    bool measure_floor = true;
    int jobs = 1;
    StudyThresholds thresholds;
};

struct HomogStudyResult {
    ConvergenceTable table;
    std::map<std::string, double> floor;  // Richardson estimate of the solver error per primary column
    double recon_consistency = 0.0;       // ||<eta_recon> - eta||_{C(0,T;L2)}
    double averaged_identity = 0.0;
};

namespace detail {
// Coarse-grid restriction of a field from a grid refined twice in x and t.
inline SpaceTimeField restrict_twice(const SpaceTimeField& fine, const SpaceTimeField& like) {
    if (fine.nt() != like.nt()) throw Error("restriction: snapshot counts differ");
    SpaceTimeField out = like;
    for (int k = 0; k < out.nt(); ++k) {
        if (std::abs(fine.t[k] - like.t[k]) > 1e-9 * (1.0 + like.t[k])) throw Error("restriction: snapshot times differ");
        for (int i = 0; i < out.nxs; ++i)
            out.at(k, i) = like.loc == Loc::center ? 0.5 * (fine.at(k, 2 * i) + fine.at(k, 2 * i + 1)) : fine.at(k, 2 * i);
    }
    return out;
}
}  // namespace detail

inline HomogStudyResult run_homog_study(const HomogStudyConfig& cfg) {
    const Grid& g = cfg.data.grid;
    if (cfg.eps_list.size() < 4) throw ConfigError("homogenization study needs at least 4 values of eps");
    for (std::size_t i = 1; i < cfg.eps_list.size(); ++i)
        if (std::abs(cfg.eps_list[i] - 0.5 * cfg.eps_list[i - 1]) > 1e-12 * cfg.eps_list[i - 1])
            throw ConfigError("eps values must decrease by a factor of 2");
    const double eps_min = *std::min_element(cfg.eps_list.begin(), cfg.eps_list.end());
    if (eps_min / g.dx() < cfg.min_eps_over_dx)
        throw ResolutionGuard("eps_min/dx = " + std::to_string(eps_min / g.dx()) + " is below " +
                              std::to_string(cfg.min_eps_over_dx));

    HomogStudyResult res;
    ConvergenceTable& t = res.table;
    t.abscissa = "eps";
    add_rate_checks(t, cfg.thresholds, false);
    const int m = cfg.data.bc.m;
    const double t0 = cfg.t0_fraction * g.T;

    const HomogSolution hs = solve_homogenized(cfg.data, cfg.scheme);
    res.recon_consistency = lqr_norm(recon_mean(hs, cfg.data.eta0) - hs.base.eta, 2.0, inf);
    res.averaged_identity = averaged_identity_residual(hs, cfg.data.eta0);

    const int n = static_cast<int>(cfg.eps_list.size());
    std::vector<std::vector<std::pair<std::string, double>>> cols(n);
    auto task = [&](int i) {
        const OscillationSpec osc{cfg.eps_list[i], cfg.a_eps};
        const ProblemSpec ps = oscillating_problem(cfg.data, osc);
        const SolutionBundle sol = solve(ps, cfg.scheme);
        ErrorFields e{eta_epsilon(hs, cfg.data.eta0, osc) - sol.eta, hs.base.u - sol.u, hs.base.theta - sol.theta,
                      hs.base.xe - sol.xe, hs.base.It_sigma - sol.It_sigma};
        cols[i] = error_columns(e, m, inf, t0);
    };
    auto errs = detail::run_parallel(n, cfg.jobs, task);

    t.columns.push_back("eps");
    for (const auto& k : error_column_names()) t.columns.push_back(k);
    for (int i = 0; i < n; ++i) {
        if (errs[i]) throw StudyAborted("eps = " + format_number(cfg.eps_list[i]) + ": " + detail::error_text(errs[i]), t);
        std::vector<double> row{cfg.eps_list[i]};
        for (const auto& [k, v] : cols[i]) row.push_back(v);
        t.rows.push_back(row);
    }

    // Solver floor: refined averaged run, restricted to the study grid.
    if (cfg.measure_floor) {
        TwoScaleData fine = cfg.data;
        fine.grid.nx *= 2;
        fine.grid.nt *= 2;
        for (TimeSeries* s : {&fine.bc.u0, &fine.bc.uX, &fine.bc.p0, &fine.bc.pX, &fine.bc.pi0, &fine.bc.piX}) {
            if (s->v.empty()) continue;
            const TimeSeries old = *s;
            *s = TimeSeries::sample(fine.grid, [&](double tt) { return old(tt); });
        }
        SchemeParams sp = cfg.scheme;
        sp.snapshot_stride = 2 * std::max(1, cfg.scheme.snapshot_stride);
        const HomogSolution hf = solve_homogenized(fine, sp);
        const auto& a = hs.base;
        const auto& b = hf.base;
        using detail::restrict_twice;
        ErrorFields e{a.eta - restrict_twice(b.eta, a.eta), a.u - restrict_twice(b.u, a.u),
                      a.theta - restrict_twice(b.theta, a.theta), a.xe - restrict_twice(b.xe, a.xe),
                      a.It_sigma - restrict_twice(b.It_sigma, a.It_sigma)};
        // First-order Richardson estimate of the coarse-grid error: 2 x (coarse - fine).
        for (const auto& [k, v] : error_columns(e, m, inf, t0))
            if (std::find(primary_columns().begin(), primary_columns().end(), k) != primary_columns().end())
                res.floor[k] = 2.0 * v;
    }

    const auto& th = cfg.thresholds;
    for (const auto& c : primary_columns()) {
        const auto col = t.column(c);
        for (std::size_t i = 1; i < col.size(); ++i)
            if (col[i] > th.monotone * col[i - 1]) {
                t.notes.push_back("monotone check FAIL: " + c + " grows at eps = " + format_number(t.rows[i][0]));
                t.extra_fail = true;
            }
        if (cfg.measure_floor) {
            const double fl = res.floor[c];
            t.extras.emplace_back("floor_" + c, fl);
            const double top = *std::max_element(col.begin(), col.end());
            const bool ok = top >= th.decade * fl;
            t.notes.push_back("decade above floor " + c + (ok ? " PASS" : " FAIL"));
            if (!ok) t.extra_fail = true;
        }
    }
    t.extras.emplace_back("recon_consistency_CL2", res.recon_consistency);
    t.extras.emplace_back("averaged_identity_residual", res.averaged_identity);
    if (cfg.measure_floor) t.extras.emplace_back("recon_over_floor", res.recon_consistency / res.floor["eta_CL2"]);
    t.metadata["grid"] = "X=" + format_number(g.X) + " T=" + format_number(g.T) + " nx=" + std::to_string(g.nx) +
                         " nt=" + std::to_string(g.nt);
    t.metadata["study"] = "homogenization";
    return res;
}

// ---------------------------------------------------------------------------
// Lipschitz study

// Directions along which the base data are perturbed; scaled by delta.
struct PerturbationDirection {
    Field eta0, u0, theta0;  // empty means zero
    FieldFn beta, gamma;
    TimeSeries p0, pX, pi0, piX;
};

struct LipschitzStudyConfig {
    ProblemSpec base;
    PerturbationDirection dir;
    double delta0 = 0.1;
    int levels = 5;
    double q_e = inf;
    SchemeParams scheme;
    double t0_fraction = 0.2;
    int jobs = 1;
    StudyThresholds thresholds;
    double hypothesis_drift = 1.5;
};

inline ProblemSpec perturbed_problem(const ProblemSpec& base, const PerturbationDirection& dir, double delta) {
    ProblemSpec p = base;
    normalize_boundary(p.bc, p.grid);
    if (!dir.eta0.v.empty()) p.eta0 = p.eta0 + delta * dir.eta0;
    if (!dir.u0.v.empty()) p.u0 = p.u0 + delta * dir.u0;
    if (!dir.theta0.v.empty()) p.theta0 = p.theta0 + delta * dir.theta0;
    auto shift = [&](TimeSeries& s, const TimeSeries& d) {
        if (d.v.empty()) return;
        for (std::size_t n = 0; n < s.v.size(); ++n) s.v[n] += delta * d(s.t[n]);
    };
    shift(p.bc.p0, dir.p0);
    shift(p.bc.pX, dir.pX);
    shift(p.bc.pi0, dir.pi0);
    shift(p.bc.piX, dir.piX);
    normalize_boundary(p.bc, p.grid);
    auto scaled = [delta](const FieldFn& f) {
        if (f.is_zero()) return FieldFn{};
        return FieldFn(f.text, [f, delta](double c, double x, double t) { return delta * f(c, x, t); });
    };
    if (!dir.beta.is_zero() || !dir.gamma.is_zero()) {
        PerturbationSpec ps;
        ps.beta = scaled(dir.beta);
        ps.gamma = scaled(dir.gamma);
        p.perturbation = ps;
    }
    return p;
}

inline ConvergenceTable run_lipschitz_study(const LipschitzStudyConfig& cfg) {
    if (cfg.levels < 4) throw ConfigError("Lipschitz study needs at least 4 levels");
    ConvergenceTable t;
    t.abscissa = "Delta";
    add_rate_checks(t, cfg.thresholds, true);
    ProblemSpec base = cfg.base;
    normalize_boundary(base.bc, base.grid);
    const int m = base.bc.m;
    const double t0 = cfg.t0_fraction * base.grid.T;
    const SolutionBundle sb = solve(base, cfg.scheme);

    const int n = cfg.levels;
    std::vector<double> deltas(n);
    for (int j = 0; j < n; ++j) deltas[j] = std::ldexp(cfg.delta0, -j);
    std::vector<std::vector<std::pair<std::string, double>>> cols(n);
    std::vector<DeltaBreakdown> dlt(n);
    std::vector<std::pair<double, double>> hyp(n);
    auto task = [&](int j) {
        const ProblemSpec p = perturbed_problem(base, cfg.dir, deltas[j]);
        const SolutionBundle sp = solve(p, cfg.scheme);
        dlt[j] = compute_delta(base, p, cfg.q_e, &sp);
        ErrorFields e{sp.eta - sb.eta, sp.u - sb.u, sp.theta - sb.theta, sp.xe - sb.xe, sp.It_sigma - sb.It_sigma};
        cols[j] = error_columns(e, m, cfg.q_e, t0);
        hyp[j] = {lqr_norm(detail::row_derivative(sp.u), 2.0, inf), lqr_norm(detail::row_derivative(sp.theta), 2.0, 2.0)};
    };
    auto errs = detail::run_parallel(n, cfg.jobs, task);

    t.columns = {"delta", "Delta"};
    for (const auto& k : error_column_names()) t.columns.push_back(k);
    for (const auto& [k, v] : compute_delta(base, base, cfg.q_e).items) t.columns.push_back("D_" + k);
    t.columns.push_back("hyp_Du_L2inf");
    t.columns.push_back("hyp_Dtheta_L2");
    for (int j = 0; j < n; ++j) {
        if (errs[j]) throw StudyAborted("delta = " + format_number(deltas[j]) + ": " + detail::error_text(errs[j]), t);
        std::vector<double> row{deltas[j], dlt[j].total};
        for (const auto& [k, v] : cols[j]) row.push_back(v);
        for (const auto& [k, v] : dlt[j].items) row.push_back(v);
        row.push_back(hyp[j].first);
        row.push_back(hyp[j].second);
        t.rows.push_back(row);
    }

    // LHS / Delta spread for the primary columns.
    const auto D = t.column("Delta");
    for (const auto& c : primary_columns()) {
        const auto col = t.column(c);
        double lo = inf, hi = 0.0;
        for (std::size_t j = 0; j < col.size(); ++j) {
            const double r = col[j] / D[j];
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        const double spread = lo > 0 ? hi / lo : inf;
        t.extras.emplace_back("ratio_spread_" + c, spread);
        const bool ok = spread < cfg.thresholds.ratio_spread;
        t.notes.push_back("ratio spread " + c + (ok ? " PASS" : " FAIL"));
        if (!ok) t.extra_fail = true;
    }
    // Hypothesis norms of the perturbed solution: flagged, never failed.
    for (const char* c : {"hyp_Du_L2inf", "hyp_Dtheta_L2"}) {
        const auto col = t.column(c);
        const double lo = *std::min_element(col.begin(), col.end()), hi = *std::max_element(col.begin(), col.end());
        if (lo > 0 && hi / lo > cfg.hypothesis_drift) t.notes.push_back(std::string("flag: ") + c + " drifts across the sweep");
    }
    const Grid& g = base.grid;
    t.metadata["grid"] = "X=" + format_number(g.X) + " T=" + format_number(g.T) + " nx=" + std::to_string(g.nx) +
                         " nt=" + std::to_string(g.nt);
    t.metadata["study"] = "lipschitz";
    return t;
}

}  // namespace lmc
