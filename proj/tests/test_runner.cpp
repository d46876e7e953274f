#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "thermoflow/runner.hpp"

namespace fs = std::filesystem;
using namespace thermoflow::cli;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("thermoflow_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

const Artifact* find(const RunResult& r, const std::string& name) {
    for (const auto& a : r.artifacts)
        if (a.name == name) return &a;
    return nullptr;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::size_t column(const std::string& name) const {
        return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
    }
    double num(std::size_t r, const std::string& name) const { return std::stod(rows.at(r).at(column(name))); }
};

Table parse(const std::string& text) {
    Table t;
    std::stringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        if (t.header.empty()) t.header = cells;
        else t.rows.push_back(cells);
    }
    return t;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(THERMOFLOW_CLI) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const char* magnetic = R"({
  "metric": {"kind": "flat_torus", "L1": 1, "L2": 1},
  "lambda": {"constant": 1.0},
  "params": {"T": 5}
})";

} // namespace

TEST(Config, UnknownKeyReportsItsLine) {
    const std::string text = "{\n  \"metric\": {\"kind\": \"flat_torus\"},\n  \"lamda\": {\"constant\": 0}\n}\n";
    try {
        load_config(text, "integrate");
        FAIL() << "accepted an unknown key";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find("lamda"), std::string::npos);
    }
}

TEST(Config, NestedUnknownKeyAndMalformedJson) {
    const std::string nested = "{\n\"metric\": {\"kind\": \"flat_torus\",\n \"L3\": 2}\n}";
    try {
        load_config(nested, "integrate");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    try {
        load_config("{\n\"metric\": {\n\"kind\" \"flat_torus\"}\n}", "integrate");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(Config, DefaultsAreResolvedIntoTheManifest) {
    const auto rc = load_config(R"({"metric": {"kind": "flat_torus"}})", "green");
    EXPECT_EQ(rc.resolved["tolerances"]["rtol"].get<double>(), 1e-9);
    EXPECT_EQ(rc.resolved["tolerances"]["atol"].get<double>(), 1e-12);
    EXPECT_EQ(rc.resolved["lambda"]["constant"].get<double>(), 0.0);
    EXPECT_EQ(rc.resolved["params"]["T_list"].size(), 4u);
    const auto res = execute(rc);
    const auto m = json::parse(find(res, "manifest")->content);
    EXPECT_EQ(m["config"], rc.resolved);
    EXPECT_EQ(m["artifacts"].size(), res.artifacts.size() - 1);
}

TEST(Config, ScenarioTagMustMatchSubcommand) {
    EXPECT_THROW(load_config(R"({"scenario": "green", "metric": {"kind": "flat_torus"}})", "integrate"), ConfigError);
    EXPECT_NO_THROW(load_config(R"({"scenario": "green", "metric": {"kind": "flat_torus"}})", "green"));
}

TEST(Config, SphereRejectsNonConstantLambda) {
    EXPECT_THROW(load_config(R"({"metric": {"kind": "round_sphere"},
        "lambda": {"modes": [{"k": 1, "c": {"modes": [{"k1": 0, "k2": 0, "re": 1}]}}]}})",
                             "integrate"),
                 ConfigError);
}

TEST(Cli, MalformedConfigWritesNothing) {
    const auto dir = scratch("malformed");
    std::ofstream(dir / "bad.json") << R"({"metric": {"kind": "flat_torus", "L1": -1}})";
    EXPECT_EQ(run_cli("integrate --config " + (dir / "bad.json").string() + " --out " + (dir / "out").string()), 2);
    EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Cli, RunWritesSummaryAndManifest) {
    const auto dir = scratch("cli_ok");
    std::ofstream(dir / "mag.json") << magnetic;
    EXPECT_EQ(run_cli("conjugate-scan --config " + (dir / "mag.json").string() + " --out " + (dir / "out").string()),
              0);
    for (const char* f : {"conjugate.csv", "summary.json", "manifest"}) EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
}

TEST(Scenarios, ConjugateScanMagneticIsPi) {
    const auto res = execute(load_config(magnetic, "conjugate-scan"));
    ASSERT_EQ(res.status, 0);
    EXPECT_NEAR(res.summary["metrics"]["first_conjugate_time"].get<double>(), std::numbers::pi, 1e-6);
    const auto d = parse(find(res, "conjugate.csv")->content);
    EXPECT_EQ(d.header, (std::vector<std::string>{"v_q1", "v_q2", "v_theta", "first_conjugate_time"}));
}

TEST(Scenarios, GreenFlatGapVanishes) {
    const auto res = execute(load_config(R"({"metric": {"kind": "flat_torus"}})", "green"));
    ASSERT_EQ(res.status, 0);
    EXPECT_LT(res.summary["metrics"]["gap"].get<double>(), 1e-6);
}

TEST(Scenarios, SyntheticPathFromCsv) {
    const auto dir = scratch("tabulated");
    {
        std::ofstream f(dir / "kappa.csv");
        f << "t,kappa\n";
        for (int i = 0; i <= 400; ++i) f << fmt(-20 + 0.1 * i) << ",-1\n";
    }
    const auto rc = load_config(R"({"path": {"csv": "kappa.csv"}, "params": {"T_list": [2, 4, 8]}})", "green", dir);
    const auto res = execute(rc);
    ASSERT_EQ(res.status, 0) << res.summary.dump();
    EXPECT_NEAR(res.summary["metrics"]["gap"].get<double>(), 2.0, 1e-3);
}

TEST(Scenarios, IntegrateTrajectorySchema) {
    const auto res = execute(load_config(R"({"metric": {"kind": "flat_torus"}, "lambda": {"constant": 1},
        "params": {"tb": 1, "samples": 10}})",
                                         "integrate"));
    ASSERT_EQ(res.status, 0) << res.summary.dump();
    const auto d = parse(find(res, "trajectory.csv")->content);
    EXPECT_EQ(d.header,
              (std::vector<std::string>{"t", "q1", "q2", "theta", "vlam", "KK", "kappa_tilde", "m"}));
    ASSERT_EQ(d.rows.size(), 11u);
    EXPECT_NEAR(d.num(10, "theta"), 1.0, 1e-9);
    EXPECT_NEAR(d.num(10, "KK"), 1.0, 1e-12);
}

TEST(Scenarios, NumericalFailureKeepsPartialArtifacts) {
    // the witness interval is not a conjugate pair: the tent is written, the witness fails
    const auto res = execute(load_config(R"({"metric": {"kind": "flat_torus"}, "lambda": {"constant": 1},
        "params": {"T": 1, "witness": {"a": 0, "b": 2}}})",
                                         "index"));
    EXPECT_EQ(res.status, 1);
    EXPECT_NE(find(res, "tent.csv"), nullptr);
    EXPECT_EQ(res.summary["status"], "failed");
}

TEST(Sweep, MagneticConjugateTimes) {
    const auto res = execute(load_config(R"({"metric": {"kind": "flat_torus"}, "lambda": {"constant": 1},
        "params": {"T": 8}, "sweep": {"parameter": "/lambda/constant", "values": [0.5, 1, 2]}})",
                                         "conjugate-scan"));
    ASSERT_EQ(res.status, 0);
    const auto d = parse(find(res, "sweep.csv")->content);
    ASSERT_LT(d.column("first_conjugate_time"), d.header.size());
    ASSERT_EQ(d.rows.size(), 3u);
    const double pi = std::numbers::pi;
    EXPECT_NEAR(d.num(0, "first_conjugate_time"), 2 * pi, 1e-6);
    EXPECT_NEAR(d.num(1, "first_conjugate_time"), pi, 1e-6);
    EXPECT_NEAR(d.num(2, "first_conjugate_time"), pi / 2, 1e-6);
    EXPECT_EQ(d.rows[1][d.column("status")], "ok");
    EXPECT_NE(find(res, "run_001/conjugate.csv"), nullptr);
}

TEST(Sweep, FlatBoundarySlopes) {
    // one horizon per run: z_T'(0) = -1/T
    const auto res = execute(load_config(R"({"metric": {"kind": "flat_torus"}, "params": {"T_list": [1]},
        "sweep": {"parameter": "/params/T_list/0", "values": [5, 10, 20, 40]}})",
                                         "green"));
    ASSERT_EQ(res.status, 0);
    for (int i = 0; i < 4; ++i) {
        const auto s = json::parse(find(res, "run_00" + std::to_string(i) + "/summary.json")->content);
        const double T = 5.0 * (1 << i);
        EXPECT_NEAR(s["metrics"]["dzT_forward"][0].get<double>(), -1 / T, 1e-10);
    }
}

TEST(Sweep, EmptyValueListIsNoOp) {
    const auto res = execute(load_config(R"({"metric": {"kind": "flat_torus"},
        "sweep": {"parameter": "/lambda/constant", "values": []}})",
                                         "conjugate-scan"));
    EXPECT_EQ(res.status, 0);
    const auto d = parse(find(res, "sweep.csv")->content);
    EXPECT_TRUE(d.rows.empty());
}

TEST(Sweep, FailedSubRunIsRecordedAndSweepContinues) {
    const auto res = execute(load_config(R"({"metric": {"kind": "flat_torus"}, "params": {"T": 4},
        "sweep": {"parameter": "/metric/L1", "values": [1, -1, 2]}})",
                                         "conjugate-scan"));
    EXPECT_EQ(res.status, 1);
    EXPECT_EQ(res.summary["runs"][1]["status"], "config_error");
    EXPECT_EQ(res.summary["runs"][2]["status"], "ok");
}

TEST(Reproducibility, BytewiseAcrossRunsAndThreadCounts) {
    const std::string text = R"({"metric": {"kind": "conformal_torus", "u": {"catalog": "mixed"}},
        "lambda": {"modes": [{"k": 1, "c": {"modes": [{"k1": 1, "k2": 0, "re": 0.1, "im": 0.05}]}}]},
        "random_samples": 4, "seed": 7, "params": {"T": 4},
        "sweep": {"parameter": "/params/T", "values": [3, 4]}})";
    const auto rc = load_config(text, "conjugate-scan");
    const auto a = execute(rc, 1), b = execute(rc, 1), c = execute(rc, 4);
    ASSERT_EQ(a.artifacts.size(), b.artifacts.size());
    ASSERT_EQ(a.artifacts.size(), c.artifacts.size());
    for (std::size_t i = 0; i < a.artifacts.size(); ++i) {
        EXPECT_EQ(a.artifacts[i].content, b.artifacts[i].content) << a.artifacts[i].name;
        EXPECT_EQ(a.artifacts[i].content, c.artifacts[i].content) << a.artifacts[i].name;
    }
}

TEST(Reproducibility, SeedChangesRandomSamples) {
    auto rc = load_config(R"({"metric": {"kind": "flat_torus"}, "random_samples": 2, "params": {"T": 1}})",
                          "conjugate-scan");
    const auto a = execute(rc);
    rc.seed = 8;
    const auto b = execute(rc);
    EXPECT_NE(find(a, "conjugate.csv")->content, find(b, "conjugate.csv")->content);
}

TEST(Format, NonFiniteValuesAreText) {
    EXPECT_EQ(fmt(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(fmt(std::nan("")), "nan");
    EXPECT_EQ(std::stod(fmt(0.1)), 0.1);
}
