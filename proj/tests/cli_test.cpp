// Copyright 2026 The sdiqrng Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "sdiqrng/cli.hpp"

using namespace sdiqrng;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

KeyValues report(const std::string &text) {
    std::istringstream in(text);
    return read_key_values(in);
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("sdiqrng_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override {
        fs::remove_all(dir_);
    }
    std::string path(const std::string &name) const {
        return (dir_ / name).string();
    }
    CliResult simulate(const std::string &name, const std::string &strategy, const std::string &n, int seed = 1) {
        return invoke({"simulate", "--seed", std::to_string(seed), "--n", n, "--strategy", strategy, "--out",
                       path(name)});
    }
    fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateRequiresSeed) {
    CliResult r = invoke({"simulate", "--n", "100", "--out", path("a.csv")});
    EXPECT_EQ(r.code, cli::kUsage);
    EXPECT_NE(r.err.find("seed"), std::string::npos);
    EXPECT_FALSE(fs::exists(path("a.csv")));
}

TEST_F(Cli, RejectsBadValues) {
    EXPECT_EQ(invoke({"simulate", "--seed", "1", "--lambda", "1.5", "--out", path("a.csv")}).code, cli::kUsage);
    EXPECT_EQ(invoke({"simulate", "--seed", "1", "--strategy", "oracle", "--out", path("a.csv")}).code,
              cli::kUsage);
    EXPECT_EQ(invoke({"frobnicate"}).code, cli::kUsage);
    EXPECT_EQ(invoke({"figures", "fig9", "--out-dir", dir_.string()}).code, cli::kUsage);
}

TEST_F(Cli, SimulationIsDeterministic) {
    ASSERT_EQ(simulate("a.csv", "honest", "20000", 7).code, cli::kOk);
    ASSERT_EQ(simulate("b.csv", "honest", "20000", 7).code, cli::kOk);
    ASSERT_EQ(simulate("c.csv", "honest", "20000", 8).code, cli::kOk);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    EXPECT_NE(slurp(path("a.csv")), slurp(path("c.csv")));
    ASSERT_EQ(invoke({"simulate", "--seed", "7", "--n", "20000", "--threads", "3", "--out", path("d.csv")}).code,
              cli::kOk);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("d.csv")));
}

TEST_F(Cli, ConfigEchoReproducesRun) {
    ASSERT_EQ(invoke({"simulate", "--seed", "3", "--n", "5000", "--lambda", "0.5", "--eta", "0.3", "--out",
                      path("a.csv")})
                  .code,
              cli::kOk);
    std::string echo = path("a.csv") + ".config";
    ASSERT_TRUE(fs::exists(echo));
    ASSERT_EQ(invoke({"simulate", "--config", echo, "--out", path("b.csv")}).code, cli::kOk);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    EXPECT_EQ(slurp(echo), slurp(path("b.csv") + ".config"));
    // Explicit flags override the file.
    ASSERT_EQ(invoke({"simulate", "--config", echo, "--seed", "4", "--out", path("c.csv")}).code, cli::kOk);
    EXPECT_EQ(report(slurp(path("c.csv") + ".config")).at("seed"), "4");
}

TEST_F(Cli, HonestLogCertifies) {
    ASSERT_EQ(simulate("h.csv", "honest", "1000000").code, cli::kOk);
    CliResult r = invoke({"certify", "--log", path("h.csv"), "--restarts", "16"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    KeyValues kv = report(r.out);
    EXPECT_EQ(kv.at("verdict"), "pass");
    EXPECT_EQ(kv.at("certified"), "yes");
    EXPECT_EQ(kv.at("lambda"), "0.99");
    EXPECT_GE(std::stod(kv.at("bits_per_event.worst_event")), 0.0);
    EXPECT_GE(std::stod(kv.at("bits_per_event.uniform_average")), std::stod(kv.at("bits_per_event.worst_event")));
    EXPECT_LE(std::stod(kv.at("bits_per_round.uniform_average")),
              std::stod(kv.at("bits_per_event.uniform_average")));
}

TEST_F(Cli, SyncAttackFailsPrivacy) {
    ASSERT_EQ(simulate("s.csv", "sync", "1000000").code, cli::kOk);
    CliResult r = invoke({"certify", "--log", path("s.csv")});
    EXPECT_EQ(r.code, cli::kPrivacyFail);
    KeyValues kv = report(r.out);
    EXPECT_EQ(kv.at("verdict"), "fail");
    EXPECT_EQ(kv.at("certified"), "none");
    EXPECT_EQ(kv.count("bits_per_event.worst_event"), 0u);
}

TEST_F(Cli, MalformedLogsAreDataErrors) {
    ASSERT_EQ(simulate("t.csv", "honest", "1000").code, cli::kOk);
    std::string text = slurp(path("t.csv"));
    std::ofstream(path("cut.csv")) << text.substr(0, text.size() - 4);
    EXPECT_EQ(invoke({"estimate", "--log", path("cut.csv")}).code, cli::kData);
    std::ofstream(path("junk.csv")) << "round_id,x,y,z,blocked,b\n0,02,0.5,0,1,-\n";
    EXPECT_EQ(invoke({"certify", "--log", path("junk.csv")}).code, cli::kData);
    EXPECT_EQ(invoke({"extract", "--log", path("missing.csv"), "--out-dir", dir_.string()}).code, cli::kData);
}

TEST_F(Cli, EstimateWritesBounds) {
    ASSERT_EQ(simulate("e.csv", "honest", "100000").code, cli::kOk);
    CliResult r = invoke({"estimate", "--log", path("e.csv"), "--bounds", path("b.csv")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    KeyValues kv = report(r.out);
    EXPECT_EQ(std::stoull(kv.at("unblocked_rounds")) + std::stoull(kv.at("blocked_rounds")), 100000u);
    std::istringstream csv(slurp(path("b.csv")));
    std::string line;
    int rows = 0;
    while (std::getline(csv, line)) {
        ++rows;
    }
    EXPECT_EQ(rows, 9);
}

TEST_F(Cli, ExtractWritesPackedFiles) {
    ASSERT_EQ(simulate("x.csv", "honest", "50000").code, cli::kOk);
    CliResult r = invoke({"extract", "--log", path("x.csv"), "--out-dir", dir_.string()});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    KeyValues kv = report(r.out);
    auto raw = read_packed_bits(dir_ / "x.raw.bin");
    auto vn = read_packed_bits(dir_ / "x.vn.bin");
    EXPECT_EQ(std::to_string(raw.size()), kv.at("raw_bits"));
    EXPECT_EQ(vn, von_neumann(raw));
}

TEST_F(Cli, EmptyLogExtractsNothing) {
    std::ofstream(path("empty.csv")) << "round_id,x,y,z,blocked,b\n";
    CliResult r = invoke({"extract", "--log", path("empty.csv"), "--out-dir", dir_.string()});
    EXPECT_EQ(r.code, cli::kOk);
    EXPECT_NE(r.err.find("warning"), std::string::npos);
    EXPECT_EQ(fs::file_size(dir_ / "empty.raw.bin"), 0u);
    EXPECT_EQ(fs::file_size(dir_ / "empty.vn.bin"), 0u);
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
    fs::path env_dir = dir_ / "env";
    ::setenv(cli::kOutDirVariable, env_dir.c_str(), 1);
    CliResult r = invoke({"simulate", "--seed", "1", "--n", "100"});
    ::unsetenv(cli::kOutDirVariable);
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_TRUE(fs::exists(env_dir / "rounds.csv"));
    EXPECT_TRUE(fs::exists(env_dir / "rounds.csv.config"));
}

TEST_F(Cli, ThresholdFigure) {
    CliResult r = invoke({"figures", "thresholds", "--beta-step", "0.01", "--eta", "0.06", "--out-dir", dir_.string()});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    std::istringstream csv(slurp(dir_ / "thresholds.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "beta,eta,threshold");
    double last = 0;
    int rows = 0;
    while (std::getline(csv, line)) {
        last = std::stod(line.substr(line.rfind(',') + 1));
        EXPECT_GE(last, 0.5 - 1e-12);
        EXPECT_LE(last, 1.0 + 1e-12);
        ++rows;
    }
    EXPECT_GT(rows, 90);
    EXPECT_NEAR(last, 0.5, 0.02);
}

TEST_F(Cli, ProbabilitiesFigureNeedsLog) {
    EXPECT_EQ(invoke({"figures", "probabilities", "--out-dir", dir_.string()}).code, cli::kUsage);
    ASSERT_EQ(simulate("p.csv", "honest", "100000").code, cli::kOk);
    CliResult r = invoke({"figures", "probabilities", "--log", path("p.csv"), "--out-dir", dir_.string()});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_EQ(slurp(dir_ / "probabilities.csv").substr(0, 41), "x,z,p_lo,p_hat,p_hi,n_detected,p_theory\n0");
}
