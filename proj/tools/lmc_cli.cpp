// Command-line front end: solve, homogenize, norms and the two studies.
// Exit codes: 0 success / all thresholds met, 1 threshold failure, 2 runtime error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lmc/lmc.hpp"

namespace fs = std::filesystem;
using namespace lmc;
using config::json;

namespace {

struct Options {
    std::string config_path;
    std::string out = "out";
    std::string eps_list;
    int jobs = 0;
    std::uint64_t seed = 0;
    std::string date;
};

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("--eps-list: cannot read '" + item + "'");
        }
    }
    return out;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw IoError("cannot open '" + p.string() + "' for writing");
    os << text;
}

// Long-format CSV: one line per (snapshot, grid point).
std::string fields_csv(const std::vector<std::pair<std::string, const SpaceTimeField*>>& cols) {
    std::ostringstream os;
    os << "t,x";
    for (const auto& [name, f] : cols) os << "," << name;
    os << "\n";
    const SpaceTimeField& a = *cols.front().second;
    for (int k = 0; k < a.nt(); ++k)
        for (int i = 0; i < a.nxs; ++i) {
            os << format_number(a.t[k]) << "," << format_number(a.x(i));
            for (const auto& [name, f] : cols) os << "," << format_number(f->at(k, i));
            os << "\n";
        }
    return os.str();
}

void write_solution(const SolutionBundle& s, const fs::path& dir, const std::string& prefix) {
    write_text(dir / (prefix + "centers.csv"),
               fields_csv({{"eta", &s.eta}, {"theta", &s.theta}, {"sigma", &s.sigma}, {"p", &s.p}, {"rho", &s.rho}}));
    write_text(dir / (prefix + "edges.csv"), fields_csv({{"u", &s.u}, {"xe", &s.xe}, {"pi", &s.pi}}));
}

int cmd_solve(const Options& o) {
    const json j = config::load_file(o.config_path);
    const ProblemSpec spec = config::load_problem(j);
    const auto bad = validate(spec);
    if (!bad.empty()) {
        for (const auto& b : bad) std::cerr << "invalid data: " << b << "\n";
        return 2;
    }
    const SolutionBundle sol = solve(spec, config::load_scheme(j));
    const DiagnosticsReport d = diagnostics(sol, spec);
    fs::create_directories(o.out);
    write_solution(sol, o.out, "");
    std::ostringstream diag;
    diag << "t,volume,volume_flux,energy,work,energy_balance\n";
    for (int k = 0; k < sol.eta.nt(); ++k)
        diag << format_number(sol.eta.t[k]) << "," << format_number(sol.volume[k]) << ","
             << format_number(sol.volume_flux[k]) << "," << format_number(sol.energy[k]) << ","
             << format_number(sol.work[k]) << "," << format_number(d.energy_balance[k]) << "\n";
    write_text(fs::path(o.out) / "diagnostics.csv", diag.str());
    std::ostringstream sum;
    sum << "config_hash: " << config::config_hash(j) << "\n"
        << "volume_residual: " << format_number(d.volume_residual) << "\n"
        << "logvol_residual: " << format_number(d.logvol_residual) << "\n"
        << "stress_repr_residual: " << format_number(d.stress_repr_residual) << "\n"
        << "min_eta: " << format_number(d.min_eta) << "\n"
        << "min_theta: " << format_number(d.min_theta) << "\n"
        << "picard_iterations: " << sol.picard_iterations << "\n"
        << "picard_max: " << sol.picard_max << "\n";
    write_text(fs::path(o.out) / "summary.txt", sum.str());
    std::cout << sum.str();
    return 0;
}

int cmd_homogenize(const Options& o) {
    const json j = config::load_file(o.config_path);
    const TwoScaleData data = config::load_two_scale_data(j);
    std::vector<double> eps = o.eps_list.empty() ? std::vector<double>{} : parse_list(o.eps_list);
    if (eps.empty() && j.contains("study") && j["study"].contains("eps_list"))
        eps = j["study"]["eps_list"].get<std::vector<double>>();
    const auto bad = validate(averaged_problem(data));
    if (!bad.empty()) {
        for (const auto& b : bad) std::cerr << "invalid averaged data: " << b << "\n";
        return 2;
    }
    const HomogSolution hs = solve_homogenized(data, config::load_scheme(j));
    fs::create_directories(o.out);
    write_solution(hs.base, o.out, "averaged_");
    write_text(fs::path(o.out) / "B_hat.csv", fields_csv({{"B_hat", &hs.B_hat}, {"J", &hs.J}}));
    const double a_eps = j.contains("study") ? config::detail::number(j["study"], "a_eps", 0.0) : 0.0;
    for (std::size_t k = 0; k < eps.size(); ++k) {
        const SpaceTimeField e = eta_epsilon(hs, data.eta0, {eps[k], a_eps});
        write_text(fs::path(o.out) / ("eta_eps_" + std::to_string(k) + ".csv"), fields_csv({{"eta_eps", &e}}));
    }
    std::cout << "recon_consistency_CL2: " << format_number(lqr_norm(recon_mean(hs, data.eta0) - hs.base.eta, 2.0, inf))
              << "\n";
    return 0;
}

int cmd_norms(const Options& o) {
    const json j = config::load_file(o.config_path);
    const Grid g = config::load_grid(j);
    if (!j.contains("norm")) throw ConfigError("a 'norm' section is required");
    const json& n = j["norm"];
    const std::string kind = n.value("kind", "lq");
    const Loc loc = n.value("loc", "center") == "edge" ? Loc::edge : Loc::center;
    const TwoScaleField w = config::load_two_scale(n.at("field"), "norm.field");
    const double q = config::detail::number(n, "q", 2.0), r = config::detail::number(n, "r", 2.0);
    const int m = config::detail::integer(n, "m", 3);
    std::vector<double> times;
    for (int k = 0; k <= g.nt; ++k) times.push_back(g.t(k));
    auto st = [&]() {
        return SpaceTimeField::sample(loc, g.X, g.nx, times, [&](double x, double t) { return w(0.5, x, t); });
    };
    auto sp = [&]() { return Field::sample(loc, g.X, g.nx, [&](double x) { return w(0.5, x, 0.0); }); };
    double v = 0.0;
    if (kind == "lq") v = lq_norm(sp(), q);
    else if (kind == "lqr") v = lqr_norm(st(), q, r);
    else if (kind == "hm1") v = h_minus_one(sp(), m);
    else if (kind == "hm1_sup") v = h_minus_one_sup(st(), m);
    else if (kind == "v2") v = v2_norm(st());
    else if (kind == "wh") v = w.depends_on_xi() ? wh_seminorm(w, loc, g.X, g.nx) : wh_seminorm(sp());
    else if (kind == "wh_spacetime") v = wh_spacetime(st(), r);
    else if (kind == "v2star") v = v2star_majorant(st());
    else if (kind == "h21star") v = h21star_majorant(st(), m, config::detail::number(n, "kappa_floor", 0.1));
    else throw ConfigError("unknown norm kind '" + kind + "'");
    std::printf("%.17g\n", v);
    return 0;
}

void stamp(ConvergenceTable& t, const json& j, const Options& o) {
    t.metadata["config_hash"] = config::config_hash(j);
    t.metadata["date"] = o.date;
    if (o.seed) t.metadata["seed"] = std::to_string(o.seed);
}

int report(ConvergenceTable& t, const json& j, const Options& o, const std::string& name) {
    stamp(t, j, o);
    write_report(t, (fs::path(o.out) / (name + ".csv")).string());
    std::cout << summary_text(t);
    return table_passes(t) ? 0 : 1;
}

int cmd_study_homog(const Options& o) {
    const json j = config::load_file(o.config_path);
    HomogStudyConfig c = config::load_homog_study(j);
    if (!o.eps_list.empty()) c.eps_list = parse_list(o.eps_list);
    if (o.jobs > 0) c.jobs = o.jobs;
    try {
        HomogStudyResult r = run_homog_study(c);
        return report(r.table, j, o, "homog");
    } catch (StudyAborted& a) {
        report(a.partial, j, o, "homog");
        throw;
    }
}

int cmd_study_lipschitz(const Options& o) {
    const json j = config::load_file(o.config_path);
    LipschitzStudyConfig c = config::load_lipschitz_study(j);
    if (o.jobs > 0) c.jobs = o.jobs;
    try {
        ConvergenceTable t = run_lipschitz_study(c);
        return report(t, j, o, "lipschitz");
    } catch (StudyAborted& a) {
        report(a.partial, j, o, "lipschitz");
        throw;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lagrangian viscous gas solver with homogenization and Lipschitz studies"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--out", o.out, "output directory");
    app.add_option("--eps-list", o.eps_list, "comma-separated eps values");
    app.add_option("--jobs", o.jobs, "worker threads for study sweeps");
    app.add_option("--seed", o.seed, "seed recorded in report metadata");
    app.add_option("--date", o.date, "date string recorded in report metadata");

    struct Sub {
        const char* name;
        const char* help;
        int (*fn)(const Options&);
    };
    const Sub subs[] = {{"solve", "solve one problem", cmd_solve},
                        {"homogenize", "solve the averaged problem and reconstruct eta", cmd_homogenize},
                        {"norms", "evaluate a norm of a DSL field", cmd_norms},
                        {"study-homog", "homogenization error study", cmd_study_homog},
                        {"study-lipschitz", "Lipschitz dependence study", cmd_study_lipschitz}};
    int (*chosen)(const Options&) = nullptr;
    for (const auto& s : subs) {
        CLI::App* sc = app.add_subcommand(s.name, s.help);
        sc->add_option("config", o.config_path, "JSON config")->required();
        sc->fallthrough();
        auto fn = s.fn;
        sc->callback([&chosen, fn]() { chosen = fn; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        return chosen(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
