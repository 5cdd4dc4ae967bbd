#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "grs/cli.hpp"

namespace fs = std::filesystem;
using grs::cli::json;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("grslab_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& body) {
        const fs::path p = dir_ / name;
        std::ofstream(p) << body;
        return p.string();
    }

    int run(std::vector<std::string> args) {
        args.insert(args.begin(), "grslab");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        out_.str({});
        err_.str({});
        return grs::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p);
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

const char* kShoot = R"({
  "params": {"lambda": 0, "m": 1, "q": 1, "k": 2},
  "shooting": {"eps": 1e-3, "h1": 1, "F0": 1, "f2": -0.5, "horizon": 20}
})";

const char* kBlowup = R"({
  "formulation": "SPECIAL",
  "params": {"m": 1, "k": 0},
  "initial": {"x2": 2, "y1": 1, "y2": 1}
})";

}  // namespace

TEST_F(Cli, VerifyPasses) {
    EXPECT_EQ(run({"verify"}), 0);
    EXPECT_NE(out_.str().find("all checks passed"), std::string::npos);
}

TEST_F(Cli, VerifyTightToleranceFailsByName) {
    EXPECT_EQ(run({"verify", "--tolerance", "1e-16"}), 1);
    EXPECT_NE(out_.str().find("tracking.new_family"), std::string::npos);
    EXPECT_NE(out_.str().find("FAIL"), std::string::npos);
}

TEST_F(Cli, MalformedConfigReportsLine) {
    const std::string cfg = write("bad.json", "{\n  \"params\": {\n    \"m\": ,\n  }\n}\n");
    EXPECT_EQ(run({"integrate", "--config", cfg}), 2);
    EXPECT_NE(err_.str().find(":3:"), std::string::npos) << err_.str();
}

TEST_F(Cli, BadFieldIsNamed) {
    const std::string cfg = write("bad.json", R"({"params": {"m": "one"}})");
    EXPECT_EQ(run({"shoot", "--config", cfg}), 2);
    EXPECT_NE(err_.str().find("params.m"), std::string::npos);
    const std::string rej = write("rej.json", R"({"params": {"q": 3}})");
    EXPECT_EQ(run({"shoot", "--config", rej}), 2);
    EXPECT_NE(err_.str().find("[field: q]"), std::string::npos);
}

TEST_F(Cli, MissingConfigIsUsageError) { EXPECT_EQ(run({"integrate"}), 2); }

TEST_F(Cli, IntegrateWritesExactHeaders) {
    const std::string cfg = write("c.json", kShoot);
    ASSERT_EQ(run({"integrate", "--config", cfg, "--out", (dir_ / "t").string()}), 0) << err_.str();
    const std::string csv = slurp(dir_ / "t" / "integrate.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,H,dH,F,dF,f,df,trL,S,C,C1");
    const json summary = json::parse(slurp(dir_ / "t" / "integrate.json"));
    EXPECT_EQ(summary["termination"]["kind"], "HORIZON");
    EXPECT_LE(summary["drift"]["C"]["relative"].get<double>(), 1e-6);

    const std::string s_cfg = write("s.json", R"({"formulation": "S", "params": {"m": 1, "q": 1, "k": 2},
        "initial": {"alpha": 1, "dalpha": 2, "beta": 1, "dbeta": 1, "horizon": 1}})");
    ASSERT_EQ(run({"integrate", "--config", s_cfg, "--out", (dir_ / "s").string()}), 0) << err_.str();
    const std::string s_csv = slurp(dir_ / "s" / "integrate.csv");
    EXPECT_EQ(s_csv.substr(0, s_csv.find('\n')), "s,alpha,dalpha,beta,dbeta,phi,dphi");

    const std::string x_cfg = write("x.json", R"({"formulation": "SPECIAL", "params": {"m": 1, "k": 1},
        "initial": {"x2": 0.5, "y1": 1, "y2": 1, "horizon": 0.5}})");
    ASSERT_EQ(run({"integrate", "--config", x_cfg, "--out", (dir_ / "x").string()}), 0) << err_.str();
    const std::string x_csv = slurp(dir_ / "x" / "integrate.csv");
    EXPECT_EQ(x_csv.substr(0, x_csv.find('\n')), "s,x2,y1,y2,ratio");
}

TEST_F(Cli, CsvRowsHoldDiagnosticInequalities) {
    const std::string cfg = write("c.json", kShoot);
    ASSERT_EQ(run({"integrate", "--config", cfg, "--out", dir_.string()}), 0);
    std::istringstream csv(slurp(dir_ / "integrate.csv"));
    std::string line;
    std::getline(csv, line);
    int rows = 0;
    while (std::getline(csv, line)) {
        std::vector<double> v;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::stod(cell));
        ASSERT_EQ(v.size(), 11u);
        const double H = v[1], dH = v[2], F = v[3], dF = v[4], trL = v[7];
        const double trL2 = (dH / H) * (dH / H) + 2.0 * (dF / F) * (dF / F);
        EXPECT_GE(trL2 * (1 + 1e-12), trL * trL / 3.0);
        EXPECT_NEAR(v[9] + v[10], 0.0, 1e-9);  // C + C1 = lambda n = 0
        ++rows;
    }
    EXPECT_GT(rows, 10);
}

TEST_F(Cli, DeterministicOutput) {
    const std::string cfg = write("c.json", kShoot);
    ASSERT_EQ(run({"integrate", "--config", cfg, "--out", (dir_ / "a").string()}), 0);
    ASSERT_EQ(run({"integrate", "--config", cfg, "--out", (dir_ / "b").string()}), 0);
    EXPECT_EQ(slurp(dir_ / "a" / "integrate.csv"), slurp(dir_ / "b" / "integrate.csv"));
}

TEST_F(Cli, ToleranceFlagsOverrideConfig) {
    const std::string cfg = write("c.json", kShoot);
    ASSERT_EQ(run({"integrate", "--config", cfg, "--out", (dir_ / "a").string(), "--rtol", "1e-6",
                   "--atol", "1e-8", "--seedless"}),
              0);
    ASSERT_EQ(run({"integrate", "--config", cfg, "--out", (dir_ / "b").string()}), 0);
    EXPECT_NE(slurp(dir_ / "a" / "integrate.csv"), slurp(dir_ / "b" / "integrate.csv"));
}

TEST_F(Cli, ShootReport) {
    const std::string cfg = write("c.json", kShoot);
    ASSERT_EQ(run({"shoot", "--config", cfg, "--out", dir_.string()}), 0) << err_.str();
    const json rep = json::parse(slurp(dir_ / "shoot.json"))["report"];
    EXPECT_TRUE(rep["H_increasing"].get<bool>());
    EXPECT_TRUE(rep["F_extremum_count_le_1"].get<bool>());
    EXPECT_TRUE(rep["trL_in_0_n_over_t"].get<bool>());
    EXPECT_TRUE(rep["S_decreasing"].get<bool>());
    EXPECT_GT(rep["F_growth_factor"].get<double>(), 1.0);
}

TEST_F(Cli, BlowupReport) {
    const std::string cfg = write("b.json", kBlowup);
    ASSERT_EQ(run({"blowup", "--config", cfg, "--out", dir_.string()}), 0) << err_.str();
    const json rep = json::parse(slurp(dir_ / "blowup.json"));
    EXPECT_EQ(rep["bound"].get<double>(), 0.5);
    EXPECT_TRUE(rep["time_le_bound"].get<bool>());
    EXPECT_NEAR(rep["estimate"].get<double>(), 0.5 * std::log(4.0 / 3.0), 1e-3);
    EXPECT_EQ(rep["termination"]["kind"], "BLOWUP");
    EXPECT_TRUE(rep["y2_threshold_witness"]["s_le_bound"].get<bool>());
    EXPECT_LE(rep["closed_form"]["y1_rel_error"].get<double>(), 1e-6);
}

TEST_F(Cli, BlowupHypothesisViolation) {
    const std::string cfg = write("b.json", R"({"formulation": "SPECIAL", "params": {"m": 1, "k": 1},
        "initial": {"x2": -2, "y1": 1, "y2": 1}})");
    EXPECT_EQ(run({"blowup", "--config", cfg, "--out", dir_.string()}), 2);
    EXPECT_NE(err_.str().find("HYPOTHESIS_VIOLATED"), std::string::npos);
    EXPECT_NE(err_.str().find("k in {-1, 0}"), std::string::npos);
}

TEST_F(Cli, TransformWritesBothCoordinates) {
    const std::string cfg = write("t.json", R"({"params": {"m": 1},
        "initial": {"H": 2, "dH": 2, "F": 1, "df": 2, "horizon": 0.5}})");
    ASSERT_EQ(run({"transform", "--config", cfg, "--out", dir_.string()}), 0) << err_.str();
    const json rep = json::parse(slurp(dir_ / "transform.json"));
    EXPECT_LE(rep["roundtrip_error"].get<double>(), 1e-8);
    EXPECT_TRUE(fs::exists(dir_ / "transform_s.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "transform_t.csv"));
}

TEST_F(Cli, EventsFromConfig) {
    const std::string cfg = write("e.json", R"({"params": {"m": 1},
        "initial": {"H": 2, "dH": 2, "F": 1, "df": 2, "horizon": 0.5},
        "events": [{"name": "H3", "component": "H", "trigger": "exceeds", "threshold": 3, "action": "stop"}]})");
    ASSERT_EQ(run({"integrate", "--config", cfg, "--out", dir_.string()}), 0) << err_.str();
    const json rep = json::parse(slurp(dir_ / "integrate.json"));
    EXPECT_EQ(rep["termination"]["kind"], "EVENT");
    // H = 2/(1 - t) = 3 at t = 1/3
    EXPECT_NEAR(rep["termination"]["time"].get<double>(), 1.0 / 3.0, 1e-9);
    const std::string bad = write("bad.json", R"({"params": {"m": 1},
        "initial": {"H": 2, "F": 1, "horizon": 0.5}, "events": [{"component": "Q"}]})");
    EXPECT_EQ(run({"integrate", "--config", bad, "--out", dir_.string()}), 2);
    EXPECT_NE(err_.str().find("events[0].component"), std::string::npos);
}

TEST_F(Cli, SweepIndexIsOrderedAndComplete) {
    const std::string cfg = write("w.json", R"({
      "params": {"lambda": 0, "m": 1, "q": 1, "k": 2},
      "shooting": {"horizon": 5},
      "sweep": {"command": "shoot", "grid": {"shooting.f2": [0, -0.5], "shooting.F0": [1, 2]}}})");
    ASSERT_EQ(run({"sweep", "--config", cfg, "--out", dir_.string()}), 0) << err_.str();
    const json index = json::parse(slurp(dir_ / "index.json"));
    ASSERT_EQ(index["points"].size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        const json& p = index["points"][i];
        EXPECT_EQ(p["index"].get<std::size_t>(), i);
        EXPECT_EQ(p["exit"].get<int>(), 0);
        EXPECT_TRUE(fs::exists(dir_ / p["dir"].get<std::string>() / "shoot.csv"));
    }
    EXPECT_EQ(index["points"][0]["params"]["shooting.F0"].get<double>(), 1.0);
    EXPECT_EQ(index["points"][0]["params"]["shooting.f2"].get<double>(), 0.0);
    EXPECT_EQ(index["points"][1]["params"]["shooting.f2"].get<double>(), -0.5);

    // rerun gives identical per-point output regardless of scheduling
    const std::string first = slurp(dir_ / "point_0003" / "shoot.csv");
    ASSERT_EQ(run({"sweep", "--config", cfg, "--out", dir_.string()}), 0);
    EXPECT_EQ(slurp(dir_ / "point_0003" / "shoot.csv"), first);
}
