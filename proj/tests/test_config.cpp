#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "lmc/config.hpp"

using namespace lmc;
using config::json;

namespace {

const char* kPulse = R"j({
  "domain": {"X": 1.0, "T": 0.5},
  "grid": {"nx": 32, "nt": 16},
  "gas": {"nu": 1.0, "k": 1.0, "cV": 2.0, "lambda": 1.0},
  "N": 10,
  "bc": {"m": 3, "p0": 1.0, "pX": "1 + t"},
  "data": {"eta0": "1 + 0.2*x", "u0": "0.1*sin(3.141592653589793*x)", "theta0": "1", "f": "x*t"},
  "scheme": {"snapshot_stride": 4}
})j";

std::string temp_file(const std::string& name, const std::string& text) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << text;
    return p.string();
}

}  // namespace

TEST(Config, LoadProblem) {
    const ProblemSpec s = config::load_problem(json::parse(kPulse));
    EXPECT_EQ(s.grid.nx, 32);
    EXPECT_EQ(s.grid.T, 0.5);
    EXPECT_EQ(s.gas.cV, 2.0);
    EXPECT_EQ(s.bc.m, 3);
    EXPECT_DOUBLE_EQ(s.eta0.v[0], 1 + 0.2 * s.grid.xc(0));
    EXPECT_DOUBLE_EQ(s.bc.pX(0.5), 1.5);
    EXPECT_DOUBLE_EQ(s.f(0.0, 0.5, 0.5), 0.25);
    EXPECT_TRUE(s.g.is_zero());
    EXPECT_EQ(config::load_scheme(json::parse(kPulse)).snapshot_stride, 4);
}

TEST(Config, FileRoundTrip) {
    const std::string path = temp_file("lmc_cfg.json", kPulse);
    const json j = config::load_file(path);
    EXPECT_EQ(config::load_problem(j).grid.nt, 16);
}

TEST(Config, ToJsonRoundTrip) {
    const ProblemSpec s = config::load_problem(json::parse(kPulse));
    const json j = config::to_json(s);
    const ProblemSpec b = config::load_problem(json::parse(j.dump()));
    EXPECT_TRUE(b.grid == s.grid);
    EXPECT_TRUE(b.gas == s.gas);
    EXPECT_EQ(b.eta0.v, s.eta0.v);
    EXPECT_EQ(b.u0.v, s.u0.v);
    EXPECT_EQ(b.theta0.v, s.theta0.v);
    EXPECT_EQ(b.f.text, s.f.text);
    for (std::size_t n = 0; n < s.bc.pX.v.size(); ++n) EXPECT_NEAR(b.bc.pX.v[n], s.bc.pX.v[n], 1e-15);
    EXPECT_EQ(config::to_json(b).dump(), j.dump());
}

TEST(Config, HashIgnoresLayout) {
    const json a = json::parse(R"({"b": 1, "a": {"y": [1, 2], "x": "s"}})");
    const json b = json::parse("{ \"a\": {\"x\": \"s\", \"y\": [1,2]},\n  \"b\": 1 }");
    EXPECT_EQ(config::config_hash(a), config::config_hash(b));
    EXPECT_EQ(config::config_hash(a).size(), 16u);
    EXPECT_NE(config::config_hash(a), config::config_hash(json::parse(R"({"b": 2, "a": {"y": [1, 2], "x": "s"}})")));
}

TEST(Config, Errors) {
    EXPECT_THROW(config::load_file("/nonexistent/lmc.json"), IoError);
    EXPECT_THROW(config::load_file(temp_file("lmc_bad.json", "{ \"a\": ")), ConfigError);

    auto with = [](const char* ptr, json v) {
        json j = json::parse(kPulse);
        j[json::json_pointer(ptr)] = std::move(v);
        return j;
    };
    EXPECT_THROW(config::load_problem(with("/bc/m", 4)), ConfigError);
    EXPECT_THROW(config::load_problem(with("/bc/p0", "1 + x")), ConfigError);
    EXPECT_THROW(config::load_problem(with("/bc/p0", json{{"t", {0.0, 0.0}}, {"v", {1.0, 1.0}}})), ConfigError);
    EXPECT_THROW(config::load_problem(with("/grid/nx", 2)), ConfigError);
    EXPECT_THROW(config::load_problem(with("/grid/nx", 3.5)), ConfigError);
    EXPECT_THROW(config::load_problem(with("/data/u0", "sin(")), ConfigError);
    EXPECT_THROW(config::load_problem(with("/data/u0", json::array({1.0, 2.0}))), ConfigError);
    EXPECT_THROW(config::load_problem(with("/data/eta0", "1 + step(xi - 0.5)")), ConfigError);
    EXPECT_THROW(config::load_lipschitz_study(with("/study", json{{"q_e", 1.5}})), ConfigError);
}

TEST(Config, OscillatingProblem) {
    json j = json::parse(kPulse);
    j["data"]["eta0"] = json{{"expr", "1 + step(xi - 0.5)"}, {"breakpoints_xi", {0.5}}};
    j["oscillation"] = json{{"eps", 0.25}};
    const ProblemSpec s = config::load_problem(j);
    // eps = 1/4 on 32 cells: each period spans 8 cells, half at 1 and half at 2
    for (int i = 0; i < 32; ++i) EXPECT_DOUBLE_EQ(s.eta0.v[i], (i % 8) < 4 ? 1.0 : 2.0) << i;
}

TEST(Config, HomogStudy) {
    json j = json::parse(kPulse);
    j["data"]["eta0"] = json{{"expr", "1 + step(xi - 0.5)"}, {"breakpoints_xi", {0.5}}};
    j["study"] = json{{"eps_list", {0.5, 0.25, 0.125, 0.0625}}, {"min_eps_over_dx", 2}, {"thresholds", {{"decade", 5}}}};
    const HomogStudyConfig c = config::load_homog_study(j);
    EXPECT_EQ(c.eps_list.size(), 4u);
    EXPECT_EQ(c.min_eps_over_dx, 2.0);
    EXPECT_EQ(c.thresholds.decade, 5.0);
    EXPECT_EQ(c.thresholds.monotone, StudyThresholds{}.monotone);
}
