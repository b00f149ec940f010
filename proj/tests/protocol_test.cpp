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


#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "sdiqrng/protocol.hpp"
#include "sdiqrng/round_log_io.hpp"

using namespace sdiqrng;
using std::numbers::pi;

namespace {

constexpr double kQrac = 0.85355339059327376220;
// Upper 1% point of chi^2 with 3 degrees of freedom.
constexpr double kChi2Dof3At1Percent = 11.3449;

ProtocolConfig config(double lambda, double eta, uint64_t n, uint64_t seed) {
    ProtocolConfig c;
    c.lambda = lambda;
    c.channel_efficiency = eta;
    c.n_rounds = n;
    c.seed = seed;
    return c;
}

double sigma(double p, double n) {
    return std::sqrt(p * (1 - p) / n);
}

bool success(const RoundRecord &r) {
    return r.b != Outcome::Empty && static_cast<int>(r.b) == r.x.bit(r.z);
}

}  // namespace

TEST(Honest, PreparationAngles) {
    EXPECT_NEAR(honest_preparation(Input::parse("00")).theta, pi / 4, 1e-15);
    EXPECT_NEAR(honest_preparation(Input::parse("01")).theta, 7 * pi / 4, 1e-15);
    EXPECT_NEAR(honest_preparation(Input::parse("10")).theta, 3 * pi / 4, 1e-15);
    EXPECT_NEAR(honest_preparation(Input::parse("11")).theta, 5 * pi / 4, 1e-15);
    EXPECT_NEAR(honest_basis(1).phi, pi / 2, 1e-15);
    EXPECT_THROW(honest_basis(2), DomainError);
    EXPECT_THROW(Input::parse("12"), DomainError);
}

TEST(Honest, EverySuccessProbabilityIsQrac) {
    for (unsigned x : Input::all_values) {
        for (int z = 0; z < 2; ++z) {
            Input in(x);
            double p = born_probability(honest_preparation(in), honest_basis(z), in.bit(z));
            EXPECT_NEAR(p, kQrac, 1e-12) << in.str() << " z=" << z;
        }
    }
    EXPECT_NEAR(overlap(honest_preparation(Input(0)).theta, honest_preparation(Input(3)).theta), 0.0, 1e-15);
}

TEST(SimulateRound, BlockedBelowLambda) {
    auto c = config(0.99, 1, 1, 1);
    RoundRecord r = simulate_round(c, HonestQrac{}, Input(0), 0.5, 0, 17);
    EXPECT_TRUE(r.blocked);
    EXPECT_EQ(r.b, Outcome::Empty);
    EXPECT_EQ(r.round_id, 17u);
}

TEST(SimulateRound, HonestBornFrequency) {
    auto c = config(0, 1, 1, 2);
    const int n = 200000;
    int zeros = 0;
    for (int i = 0; i < n; ++i) {
        zeros += simulate_round(c, HonestQrac{}, Input(0), 0.7, 0, i).b == Outcome::Zero;
    }
    EXPECT_NEAR(zeros / double(n), kQrac, 5 * sigma(kQrac, n));
}

TEST(SimulateRound, ReplayIsExact) {
    auto c = config(0.3, 0.5, 5000, 9);
    RoundLog log = run_protocol(c, HonestQrac{});
    for (const auto &r : log.records) {
        EXPECT_EQ(simulate_round(c, HonestQrac{}, r.x, r.y, r.z, r.round_id), r);
    }
}

TEST(RunProtocol, HonestStatisticsAtFullEfficiency) {
    auto c = config(0, 1, 1000000, 11);
    std::array<uint64_t, 8> n{}, k{};
    for_each_round(c, HonestQrac{}, [&](const RoundRecord &r) {
        unsigned cell = cell_index(r.x.value(), r.z);
        ++n[cell];
        k[cell] += success(r);
    });
    for (unsigned cell = 0; cell < 8; ++cell) {
        double p = double(k[cell]) / double(n[cell]);
        EXPECT_NEAR(p, kQrac, 5 * sigma(kQrac, double(n[cell]))) << "cell " << cell;
    }
}

TEST(RunProtocol, DetectedFractionMatchesChannelEfficiency) {
    auto c = config(0, 0.06, 1000000, 12);
    uint64_t detected = 0;
    for_each_round(c, HonestQrac{}, [&](const RoundRecord &r) { detected += r.b != Outcome::Empty; });
    EXPECT_NEAR(detected / 1e6, 0.06, 5 * sigma(0.06, 1e6));
}

TEST(RunProtocol, BlockedFractionMatchesLambda) {
    auto c = config(0.99, 0.06, 1000000, 13);
    uint64_t blocked = 0;
    for_each_round(c, HonestQrac{}, [&](const RoundRecord &r) {
        blocked += r.blocked;
        ASSERT_TRUE(!r.blocked || r.b == Outcome::Empty);
        ASSERT_EQ(r.blocked, r.y <= c.lambda);
    });
    EXPECT_NEAR(blocked / 1e6, 0.99, 5 * sigma(0.99, 1e6));
}

TEST(RunProtocol, InputMarginalIsUniform) {
    auto c = config(0.5, 1, 1000000, 14);
    std::array<double, 4> counts{};
    for_each_round(c, HonestQrac{}, [&](const RoundRecord &r) { ++counts[r.x.value()]; });
    double chi2 = 0;
    for (double k : counts) {
        chi2 += (k - 250000) * (k - 250000) / 250000;
    }
    EXPECT_LT(chi2, kChi2Dof3At1Percent);
}

TEST(RunProtocol, DeterministicAndThreadIndependent) {
    auto c = config(0.9, 0.3, 200000, 15);
    RoundLog a = run_protocol(c, HonestQrac{});
    RoundLog b = run_protocol(c, HonestQrac{});
    RoundLog t = run_protocol(c, HonestQrac{}, 4);
    EXPECT_EQ(a.records, b.records);
    EXPECT_EQ(a.records, t.records);
    std::ostringstream sa, sb;
    write_round_log(sa, a);
    write_round_log(sb, t);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(RunProtocol, InputsIndependentOfStrategy) {
    auto c = config(0.9, 0.3, 1000, 16);
    RoundLog h = run_protocol(c, HonestQrac{});
    RoundLog s = run_protocol(c, sync_attack_strategy(SyncModel::PerBlock, true));
    for (std::size_t i = 0; i < h.records.size(); ++i) {
        EXPECT_EQ(h.records[i].x.value(), s.records[i].x.value());
        EXPECT_EQ(h.records[i].y, s.records[i].y);
        EXPECT_EQ(h.records[i].z, s.records[i].z);
    }
}

TEST(RunProtocol, EmptyRunRejected) {
    EXPECT_THROW(run_protocol(config(0.5, 1, 0, 1), HonestQrac{}), InvariantViolation);
}

TEST(Config, Validation) {
    EXPECT_THROW(config(1.0, 0.5, 1, 1).validate(), DomainError);
    EXPECT_THROW(config(-0.1, 0.5, 1, 1).validate(), DomainError);
    EXPECT_THROW(config(0.5, 0.0, 1, 1).validate(), DomainError);
    EXPECT_NO_THROW(config(0.0, 1.0, 1, 1).validate());
    EXPECT_THROW(validate_strategy(PrngOnly{{1.5, 0.5}}), InvariantViolation);
}

TEST(Prng, AnswersIndependentOfInput) {
    auto c = config(0, 1, 400000, 17);
    PrngOnly prng{{0.3, 0.6}};
    // counts[z][x][b]
    std::array<std::array<std::array<double, 2>, 4>, 2> counts{};
    for_each_round(c, prng, [&](const RoundRecord &r) { ++counts[r.z][r.x.value()][static_cast<int>(r.b)]; });
    for (int z = 0; z < 2; ++z) {
        double total = 0, ones = 0;
        for (auto &row : counts[z]) {
            total += row[0] + row[1];
            ones += row[1];
        }
        double chi2 = 0;
        for (auto &row : counts[z]) {
            double n = row[0] + row[1];
            double e1 = n * ones / total, e0 = n - e1;
            chi2 += (row[0] - e0) * (row[0] - e0) / e0 + (row[1] - e1) * (row[1] - e1) / e1;
        }
        EXPECT_LT(chi2, kChi2Dof3At1Percent) << "z=" << z;
        EXPECT_NEAR(1 - ones / total, prng.prob_zero[z], 5 * sigma(prng.prob_zero[z], total));
    }
}

TEST(Classical, FollowsAssignment) {
    auto c = config(0, 1, 1000, 18);
    ClassicalDeterministic cl;
    for_each_round(c, cl, [&](const RoundRecord &r) {
        EXPECT_EQ(static_cast<int>(r.b), cl.decoding[r.z][cl.encoding[r.x.value()]]);
    });
}

TEST(Lemma, AdversaryMatchesModelProbabilities) {
    AdversaryParams a;
    a.states = {EquatorialState(0.3), EquatorialState(2.0), EquatorialState(4.0), EquatorialState(5.5)};
    a.measurements = {LemmaStrategy(0.1, 0.2, MeasurementBasis(0)), LemmaStrategy(0.05, 0.0, MeasurementBasis(1.2))};
    auto c = config(0, 1, 800000, 19);
    std::array<double, 8> n{}, k{};
    for_each_round(c, LemmaAdversary{a}, [&](const RoundRecord &r) {
        unsigned cell = cell_index(r.x.value(), r.z);
        ++n[cell];
        k[cell] += success(r);
    });
    auto table = a.success_table();
    for (unsigned cell = 0; cell < 8; ++cell) {
        EXPECT_NEAR(k[cell] / n[cell], table[cell], 5 * sigma(table[cell], n[cell]));
    }
}

namespace {

struct SyncRun {
    uint64_t unblocked = 0;
    uint64_t detected = 0;
    uint64_t successes = 0;
    SyncState state;
};

SyncRun run_sync(double lambda, double eta, uint64_t n, uint64_t seed, SyncModel model, bool hide) {
    auto c = config(lambda, eta, n, seed);
    DeviceStrategy s = sync_attack_strategy(model, hide);
    SyncRun out;
    for (uint64_t i = 0; i < n; ++i) {
        RoundInputs in = draw_inputs(seed, i);
        RoundRecord r = simulate_round(c, s, in.x, in.y, in.z, i, &out.state);
        out.unblocked += !r.blocked;
        out.detected += r.b != Outcome::Empty;
        out.successes += success(r);
    }
    return out;
}

}  // namespace

TEST(SyncAttack, NeverDesynchronizesWithoutBlocking) {
    for (SyncModel m : {SyncModel::PerBlock, SyncModel::PerRun}) {
        SyncRun r = run_sync(0, 0.06, 100000, 20, m, true);
        EXPECT_EQ(r.state.sync_rounds, 0u);
        EXPECT_GT(r.detected, 0u);
        EXPECT_EQ(r.successes, r.detected);
    }
}

TEST(SyncAttack, PerRunSyncFractionIsBeta) {
    SyncRun r = run_sync(0.5, 1, 1000000, 21, SyncModel::PerRun, false);
    double frac = double(r.state.sync_rounds) / double(r.unblocked);
    EXPECT_NEAR(frac, 0.5, 5 * sigma(0.5, double(r.unblocked)));
}

TEST(SyncAttack, PerBlockWithHidingStaysAtThreshold) {
    SyncRun r = run_sync(0.99, 0.06, 1000000, 22, SyncModel::PerBlock, true);
    double observed_eta = double(r.detected) / double(r.unblocked);
    EXPECT_NEAR(observed_eta, 0.06, 0.01);
    double pav = double(r.successes) / double(r.detected);
    EXPECT_LE(pav, 0.5 + 3 * sigma(0.5, double(r.detected)));
}

TEST(SyncAttack, WithoutHidingNearFullBlockingIsACoin) {
    SyncRun r = run_sync(0.99, 0.06, 1000000, 23, SyncModel::PerBlock, false);
    double p = double(r.successes) / double(r.detected);
    EXPECT_NEAR(p, 0.5, 5 * sigma(0.5, double(r.detected)));
}

TEST(SyncAttack, NeedsState) {
    auto c = config(0.5, 1, 1, 1);
    EXPECT_THROW(simulate_round(c, sync_attack_strategy(SyncModel::PerBlock, true), Input(0), 0.9, 0, 0),
                 InvariantViolation);
    EXPECT_TRUE(is_stateful(sync_attack_strategy(SyncModel::PerRun, false)));
    EXPECT_FALSE(is_stateful(HonestQrac{}));
}

TEST(SyncAttack, SequentialEvenWithThreads) {
    auto c = config(0.9, 0.2, 50000, 24);
    auto s = sync_attack_strategy(SyncModel::PerBlock, true);
    EXPECT_EQ(run_protocol(c, s, 1).records, run_protocol(c, s, 4).records);
}

TEST(LogFormat, RoundTrips) {
    RoundLog log = run_protocol(config(0.5, 0.5, 2000, 25), HonestQrac{});
    std::stringstream io;
    write_round_log(io, log);
    EXPECT_EQ(read_round_records(io), log.records);
}

TEST(LogFormat, LineShape) {
    RoundRecord r;
    r.round_id = 3;
    r.x = Input::parse("01");
    r.y = 0.123456789012345;
    r.z = 1;
    r.b = Outcome::One;
    std::ostringstream out;
    write_round(out, r);
    EXPECT_EQ(out.str(), "3,01,0.123456789012345,1,0,1\n");
    r.blocked = true;
    r.b = Outcome::Empty;
    std::ostringstream blocked;
    write_round(blocked, r);
    EXPECT_EQ(blocked.str().substr(blocked.str().size() - 5), ",1,-\n");
}

namespace {

std::size_t parse_error_line(const std::string &text) {
    std::istringstream in(text);
    try {
        read_round_records(in);
    } catch (const ParseError &e) {
        return e.line;
    }
    return 0;
}

}  // namespace

TEST(LogFormat, ErrorsCarryLineNumbers) {
    const std::string h = "round_id,x,y,z,blocked,b\n";
    const std::string ok = "0,00,0.5,0,1,-\n";
    EXPECT_EQ(parse_error_line(""), 1u);
    EXPECT_EQ(parse_error_line("id,x\n"), 1u);
    EXPECT_EQ(parse_error_line(h + ok + "1,02,0.5,0,0,1\n"), 3u);
    EXPECT_EQ(parse_error_line(h + ok + "1,00,0.5,0,0\n"), 3u);
    EXPECT_EQ(parse_error_line(h + ok + "1,00,1.5,0,0,1\n"), 3u);
    EXPECT_EQ(parse_error_line(h + ok + "1,00,0.5,2,0,1\n"), 3u);
    EXPECT_EQ(parse_error_line(h + ok + "1,00,0.5,0,1,1\n"), 3u);
    EXPECT_EQ(parse_error_line(h + ok + "0,00,0.9,0,0,1\n"), 3u);
    EXPECT_EQ(parse_error_line(h + ok + "1,00,0.9,0,0,x\n"), 3u);
    EXPECT_EQ(parse_error_line(h + ok + "1,00,0.9,0,0,1"), 3u);
    EXPECT_EQ(parse_error_line(h + ok + "\n"), 3u);
    EXPECT_EQ(parse_error_line(h + ok), 0u);
    EXPECT_EQ(parse_error_line(h), 0u);
}

TEST(KeyValueFormat, RoundTripsAndSkipsComments) {
    KeyValues kv{{"lambda", "0.99"}, {"seed", "7"}};
    std::stringstream io;
    io << "# comment\n\n";
    write_key_values(io, kv);
    EXPECT_EQ(read_key_values(io), kv);
    std::istringstream bad("novalue\n");
    EXPECT_THROW(read_key_values(bad), ParseError);
}
