#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "homogenized.hpp"
#include "study.hpp"

// JSON configuration: loading into problem and study types, and writing problems
// back with every field sampled on the grid.

namespace lmc::config {

using json = nlohmann::json;

inline json load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config '" + path + "'");
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

// FNV-1a 64 over the canonical dump (keys sorted, no whitespace).
inline std::string config_hash(const json& j) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace detail {
inline double number(const json& j, const char* key, double def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (v.is_string() && (v == "inf" || v == "infinity")) return inf;
    if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
    return v.get<double>();
}
inline int integer(const json& j, const char* key, int def) {
    if (!j.contains(key)) return def;
    if (!j.at(key).is_number_integer()) throw ConfigError(std::string("'") + key + "' must be an integer");
    return j.at(key).get<int>();
}
inline const json& section(const json& j, const char* key) {
    static const json empty = json::object();
    if (!j.contains(key)) return empty;
    if (!j.at(key).is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
    return j.at(key);
}
inline dsl::Expr expr(const std::string& src, const std::string& where) {
    try {
        return dsl::parse(src);
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    }
}
}  // namespace detail

inline Grid load_grid(const json& j) {
    const json& d = detail::section(j, "domain");
    const json& g = detail::section(j, "grid");
    Grid grid{detail::number(d, "X", 1.0), detail::number(d, "T", 1.0), detail::integer(g, "nx", 256),
              detail::integer(g, "nt", 256)};
    if (!(grid.X > 0) || !(grid.T > 0) || grid.nx < 4 || grid.nt < 1) throw ConfigError("invalid domain or grid");
    return grid;
}

inline GasParams load_gas(const json& j) {
    const json& g = detail::section(j, "gas");
    return {detail::number(g, "nu", 1.0), detail::number(g, "k", 1.0), detail::number(g, "cV", 1.0),
            detail::number(g, "lambda", 1.0)};
}

inline SchemeParams load_scheme(const json& j) {
    const json& s = detail::section(j, "scheme");
    SchemeParams p;
    p.theta_implicitness = detail::number(s, "theta_implicitness", p.theta_implicitness);
    p.max_picard = detail::integer(s, "max_picard", p.max_picard);
    p.tolerance = detail::number(s, "tolerance", p.tolerance);
    p.max_halvings = detail::integer(s, "max_halvings", p.max_halvings);
    p.positivity_floor = detail::number(s, "positivity_floor", p.positivity_floor);
    p.snapshot_stride = detail::integer(s, "snapshot_stride", p.snapshot_stride);
    return p;
}

// A boundary series: number, DSL expression in t, or {"t": [...], "v": [...]}.
inline TimeSeries load_series(const json& v, const Grid& g, const std::string& name) {
    if (v.is_number()) return TimeSeries::constant(g, v.get<double>());
    if (v.is_string()) {
        const auto e = detail::expr(v.get<std::string>(), "bc." + name);
        if (e.uses(dsl::Var::xi) || e.uses(dsl::Var::x) || e.uses(dsl::Var::chi))
            throw ConfigError("bc." + name + " may depend on t only");
        return TimeSeries::sample(g, [&](double t) { return dsl::evaluate(e, 0.0, 0.0, t, 0.0); });
    }
    if (v.is_object() && v.contains("t") && v.contains("v")) {
        TimeSeries raw{v.at("t").get<std::vector<double>>(), v.at("v").get<std::vector<double>>()};
        if (raw.t.size() != raw.v.size() || raw.t.empty()) throw ConfigError("bc." + name + ": table sizes differ");
        for (std::size_t i = 1; i < raw.t.size(); ++i)
            if (!(raw.t[i] > raw.t[i - 1])) throw ConfigError("bc." + name + ": table times must increase");
        return TimeSeries::sample(g, [&](double t) { return raw(t); });
    }
    throw ConfigError("bc." + name + " must be a number, an expression in t or a {t, v} table");
}

inline BoundaryData load_bc(const json& j, const Grid& g) {
    const json& b = detail::section(j, "bc");
    BoundaryData bc;
    bc.m = detail::integer(b, "m", 3);
    if (bc.m < 1 || bc.m > 3) throw ConfigError("bc.m must be 1, 2 or 3");
    auto get = [&](const char* k, TimeSeries& s) {
        if (b.contains(k)) s = load_series(b.at(k), g, k);
    };
    get("u0", bc.u0);
    get("uX", bc.uX);
    get("p0", bc.p0);
    get("pX", bc.pX);
    get("pi0", bc.pi0);
    get("piX", bc.piX);
    normalize_boundary(bc, g);
    return bc;
}

// Two-scale field: DSL string or {"expr": ..., "breakpoints_xi": [...], "nxi": n}.
inline TwoScaleField load_two_scale(const json& v, const std::string& name) {
    try {
        if (v.is_string()) return TwoScaleField(v.get<std::string>());
        if (v.is_number()) return TwoScaleField(dsl::detail::number_text(v.get<double>()));
        if (v.is_object() && v.contains("expr")) {
            std::vector<double> bps;
            if (v.contains("breakpoints_xi")) bps = v.at("breakpoints_xi").get<std::vector<double>>();
            return TwoScaleField(v.at("expr").get<std::string>(), bps, detail::integer(v, "nxi", 256));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError("data." + name + ": " + e.what());
    }
    throw ConfigError("data." + name + " must be an expression or {expr, breakpoints_xi}");
}

inline TwoScaleData load_two_scale_data(const json& j) {
    TwoScaleData d;
    d.grid = load_grid(j);
    d.gas = load_gas(j);
    d.bc = load_bc(j, d.grid);
    d.N = detail::number(j, "N", 10.0);
    const json& data = detail::section(j, "data");
    for (auto [k, f] : {std::pair{"eta0", &d.eta0}, {"u0", &d.u0}, {"theta0", &d.theta0}, {"g", &d.g}, {"f", &d.f}})
        if (data.contains(k)) *f = load_two_scale(data.at(k), k);
    return d;
}

inline OscillationSpec load_oscillation(const json& j) {
    const json& o = detail::section(j, "oscillation");
    OscillationSpec osc{detail::number(o, "eps", 1.0), detail::number(o, "a_eps", 0.0)};
    if (!(osc.eps > 0)) throw ConfigError("oscillation.eps must be positive");
    return osc;
}

// FieldFn of (chi, x, t) from a DSL string; xi is not allowed here.
inline FieldFn load_fn(const json& v, const std::string& name) {
    if (v.is_number()) {
        const double c = v.get<double>();
        if (c == 0.0) return {};
        return FieldFn(dsl::detail::number_text(c), [c](double, double, double) { return c; });
    }
    if (!v.is_string()) throw ConfigError(name + " must be an expression");
    const std::string src = v.get<std::string>();
    const auto e = detail::expr(src, name);
    if (e.uses(dsl::Var::xi)) throw ConfigError(name + " may not depend on xi here");
    if (!e.uses(dsl::Var::x) && !e.uses(dsl::Var::t) && !e.uses(dsl::Var::chi) && dsl::evaluate(e, 0, 0, 0, 0) == 0.0)
        return {};
    return FieldFn(src, [e](double chi, double x, double t) { return dsl::evaluate(e, 0.0, x, t, chi); });
}

inline Field load_field(const json& v, Loc loc, const Grid& g, const std::string& name) {
    if (v.is_array()) {
        Field f(loc, g.X, v.get<std::vector<double>>());
        if (f.size() != (loc == Loc::center ? g.nx : g.nx + 1))
            throw ConfigError(name + ": array length does not match the grid");
        return f;
    }
    const auto fn = load_fn(v, name);
    if (fn.is_zero()) return Field(loc, g.X, g.nx);
    return Field::sample(loc, g.X, g.nx, [&](double x) { return fn(0.0, x, 0.0); });
}

// Single-scale problem. Data that depend on xi are realized at the configured oscillation.
inline ProblemSpec load_problem(const json& j) {
    const json& data = detail::section(j, "data");
    bool two_scale = false;
    for (const auto& [k, v] : data.items()) {
        if (v.is_object()) two_scale = true;
        if (v.is_string() && detail::expr(v.get<std::string>(), "data." + k).uses(dsl::Var::xi)) two_scale = true;
    }
    ProblemSpec s;
    if (two_scale) {
        if (!j.contains("oscillation")) throw ConfigError("data depend on xi; an 'oscillation' section is required");
        s = oscillating_problem(load_two_scale_data(j), load_oscillation(j));
    } else {
        s.grid = load_grid(j);
        s.gas = load_gas(j);
        s.bc = load_bc(j, s.grid);
        s.N = detail::number(j, "N", 10.0);
        s.eta0 = data.contains("eta0") ? load_field(data.at("eta0"), Loc::center, s.grid, "data.eta0")
                                       : Field(Loc::center, s.grid.X, s.grid.nx, 1.0);
        s.u0 = data.contains("u0") ? load_field(data.at("u0"), Loc::edge, s.grid, "data.u0")
                                   : Field(Loc::edge, s.grid.X, s.grid.nx);
        s.theta0 = data.contains("theta0") ? load_field(data.at("theta0"), Loc::center, s.grid, "data.theta0")
                                           : Field(Loc::center, s.grid.X, s.grid.nx, 1.0);
        if (data.contains("g")) s.g = load_fn(data.at("g"), "data.g");
        if (data.contains("f")) s.f = load_fn(data.at("f"), "data.f");
    }
    if (j.contains("perturbation")) {
        const json& p = j.at("perturbation");
        PerturbationSpec ps;
        if (p.contains("beta")) ps.beta = load_fn(p.at("beta"), "perturbation.beta");
        if (p.contains("gamma")) ps.gamma = load_fn(p.at("gamma"), "perturbation.gamma");
        if (p.contains("beta_e")) ps.beta_e = load_field(p.at("beta_e"), Loc::edge, s.grid, "perturbation.beta_e");
        s.perturbation = ps;
    }
    return s;
}

namespace detail {
inline json series_json(const TimeSeries& s) { return json{{"t", s.t}, {"v", s.v}}; }
// Source text is kept only when it is plain DSL in (x, t, chi).
inline json fn_json(const FieldFn& f, const std::string& name) {
    if (f.is_zero()) return 0.0;
    try {
        const auto e = dsl::parse(f.text);
        if (!e.uses(dsl::Var::xi)) return f.text;
    } catch (const Error&) {
    }
    throw ConfigError(name + " has no expression form and cannot be written");
}
}  // namespace detail

inline json to_json(const ProblemSpec& s) {
    json j;
    j["domain"] = {{"X", s.grid.X}, {"T", s.grid.T}};
    j["grid"] = {{"nx", s.grid.nx}, {"nt", s.grid.nt}};
    j["gas"] = {{"nu", s.gas.nu}, {"k", s.gas.k}, {"cV", s.gas.cV}, {"lambda", s.gas.lambda}};
    j["N"] = s.N;
    BoundaryData bc = s.bc;
    normalize_boundary(bc, s.grid);
    j["bc"] = {{"m", bc.m},
               {"u0", detail::series_json(bc.u0)},
               {"uX", detail::series_json(bc.uX)},
               {"p0", detail::series_json(bc.p0)},
               {"pX", detail::series_json(bc.pX)},
               {"pi0", detail::series_json(bc.pi0)},
               {"piX", detail::series_json(bc.piX)}};
    j["data"] = {{"eta0", s.eta0.v},
                 {"u0", s.u0.v},
                 {"theta0", s.theta0.v},
                 {"g", detail::fn_json(s.g, "data.g")},
                 {"f", detail::fn_json(s.f, "data.f")}};
    if (s.perturbation) {
        json p;
        p["beta"] = detail::fn_json(s.perturbation->beta, "perturbation.beta");
        p["gamma"] = detail::fn_json(s.perturbation->gamma, "perturbation.gamma");
        if (!s.perturbation->beta_e.v.empty()) p["beta_e"] = s.perturbation->beta_e.v;
        j["perturbation"] = p;
    }
    return j;
}

inline StudyThresholds load_thresholds(const json& study) {
    const json& t = detail::section(study, "thresholds");
    StudyThresholds th;
    th.primary_lo = detail::number(t, "primary_lo", th.primary_lo);
    th.primary_hi = detail::number(t, "primary_hi", th.primary_hi);
    th.holder = detail::number(t, "holder", th.holder);
    th.stress_cq = detail::number(t, "stress_cq", th.stress_cq);
    th.zeta_cq = detail::number(t, "zeta_cq", th.zeta_cq);
    th.ratio_spread = detail::number(t, "ratio_spread", th.ratio_spread);
    th.decade = detail::number(t, "decade", th.decade);
    th.monotone = detail::number(t, "monotone", th.monotone);
    return th;
}

inline HomogStudyConfig load_homog_study(const json& j) {
    HomogStudyConfig c;
    c.data = load_two_scale_data(j);
    c.scheme = load_scheme(j);
    const json& s = detail::section(j, "study");
    if (s.contains("eps_list")) c.eps_list = s.at("eps_list").get<std::vector<double>>();
    c.a_eps = detail::number(s, "a_eps", c.a_eps);
    c.t0_fraction = detail::number(s, "t0_fraction", c.t0_fraction);
    c.min_eps_over_dx = detail::number(s, "min_eps_over_dx", c.min_eps_over_dx);
    c.jobs = detail::integer(s, "jobs", c.jobs);
    if (s.contains("measure_floor")) c.measure_floor = s.at("measure_floor").get<bool>();
    c.thresholds = load_thresholds(s);
    return c;
}

inline LipschitzStudyConfig load_lipschitz_study(const json& j) {
    LipschitzStudyConfig c;
    c.base = load_problem(j);
    c.scheme = load_scheme(j);
    const json& s = detail::section(j, "study");
    c.delta0 = detail::number(s, "delta0", c.delta0);
    c.levels = detail::integer(s, "levels", c.levels);
    c.q_e = detail::number(s, "q_e", c.q_e);
    if (!(c.q_e >= 2.0)) throw ConfigError("study.q_e must lie in [2, inf]");
    c.t0_fraction = detail::number(s, "t0_fraction", c.t0_fraction);
    c.jobs = detail::integer(s, "jobs", c.jobs);
    c.thresholds = load_thresholds(s);
    const json& d = detail::section(s, "direction");
    const Grid& g = c.base.grid;
    if (d.contains("eta0")) c.dir.eta0 = load_field(d.at("eta0"), Loc::center, g, "direction.eta0");
    if (d.contains("u0")) c.dir.u0 = load_field(d.at("u0"), Loc::edge, g, "direction.u0");
    if (d.contains("theta0")) c.dir.theta0 = load_field(d.at("theta0"), Loc::center, g, "direction.theta0");
    if (d.contains("beta")) c.dir.beta = load_fn(d.at("beta"), "direction.beta");
    if (d.contains("gamma")) c.dir.gamma = load_fn(d.at("gamma"), "direction.gamma");
    for (auto [k, ts] : {std::pair{"p0", &c.dir.p0}, {"pX", &c.dir.pX}, {"pi0", &c.dir.pi0}, {"piX", &c.dir.piX}})
        if (d.contains(k)) *ts = load_series(d.at(k), g, std::string("direction.") + k);
    return c;
}

}  // namespace lmc::config
