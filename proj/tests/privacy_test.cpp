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

#include <gtest/gtest.h>

#include "sdiqrng/privacy.hpp"
#include "sdiqrng/protocol.hpp"

using namespace sdiqrng;

namespace {

struct SyncStats {
    double unblocked = 0;
    double detected = 0;
    double successes = 0;
    double sync_rounds = 0;
};

SyncStats simulate_sync(double beta, double eta, uint64_t n, uint64_t seed, SyncModel model, bool hide) {
    ProtocolConfig c;
    c.lambda = beta;
    c.channel_efficiency = eta;
    c.n_rounds = n;
    c.seed = seed;
    DeviceStrategy s = sync_attack_strategy(model, hide);
    SyncState state;
    SyncStats out;
    for (uint64_t i = 0; i < n; ++i) {
        RoundInputs in = draw_inputs(seed, i);
        RoundRecord r = simulate_round(c, s, in.x, in.y, in.z, i, &state);
        out.unblocked += !r.blocked;
        if (r.b != Outcome::Empty) {
            ++out.detected;
            out.successes += static_cast<int>(r.b) == r.x.bit(r.z);
        }
    }
    out.sync_rounds = double(state.sync_rounds);
    return out;
}

}  // namespace

TEST(SyncOverhead, Examples) {
    EXPECT_EQ(sync_overhead(0, SyncModel::PerBlock), 0.0);
    EXPECT_EQ(sync_overhead(0, SyncModel::PerRun), 0.0);
    EXPECT_DOUBLE_EQ(sync_overhead(0.5, SyncModel::PerRun), 0.5);
    EXPECT_DOUBLE_EQ(sync_overhead(0.99, SyncModel::PerBlock), 1.0);
    EXPECT_DOUBLE_EQ(sync_overhead(0.2, SyncModel::PerBlock), 0.25);
    EXPECT_THROW(sync_overhead(1.0, SyncModel::PerBlock), DomainError);
    EXPECT_THROW(sync_overhead(-0.1, SyncModel::PerRun), DomainError);
}

TEST(SyncOverhead, MatchesSimulatedSyncRounds) {
    for (auto [beta, model] : {std::pair{0.3, SyncModel::PerBlock}, {0.2, SyncModel::PerBlock},
                               {0.5, SyncModel::PerRun}, {0.8, SyncModel::PerRun}}) {
        SyncStats s = simulate_sync(beta, 1, 400000, 31, model, false);
        double frac = s.sync_rounds / s.unblocked;
        double expected = sync_overhead(beta, model);
        // Run counts fluctuate more than a binomial; allow a generous band.
        EXPECT_NEAR(frac, expected, 6 * std::sqrt(expected / s.unblocked) + 1e-3) << beta;
    }
}

TEST(Threshold, Examples) {
    PrivacyThreshold a = privacy_threshold(0.99, 0.06, 0.99, 60000, SyncModel::PerBlock);
    EXPECT_DOUBLE_EQ(a.threshold, 0.5);
    EXPECT_FALSE(a.undetectable());
    EXPECT_DOUBLE_EQ(privacy_threshold(0.99, 0.001, 0.99, 100, SyncModel::PerBlock).threshold, 0.5);
    PrivacyThreshold c = privacy_threshold(0.5, 0.06, 0.99, 100, SyncModel::PerRun);
    EXPECT_DOUBLE_EQ(c.threshold, 1.0);
    EXPECT_TRUE(c.undetectable());
    // Intermediate point: s = 3/7, d = 0.8 - 4/7, T = 1 - d / 1.6.
    EXPECT_NEAR(privacy_threshold(0.3, 0.8, 0.99, 100, SyncModel::PerBlock).threshold, 1 - (0.8 - 4.0 / 7) / 1.6,
                1e-12);
    EXPECT_THROW(privacy_threshold(0.5, 0.0, 0.99, 100, SyncModel::PerBlock), DomainError);
    EXPECT_THROW(privacy_threshold(0.5, 1.5, 0.99, 100, SyncModel::PerBlock), DomainError);
    EXPECT_THROW(privacy_threshold(1.0, 0.5, 0.99, 100, SyncModel::PerBlock), DomainError);
    EXPECT_THROW(privacy_threshold(0.5, 0.5, 0.99, 0, SyncModel::PerBlock), DomainError);
}

TEST(Threshold, BoundedAndNonincreasingInBeta) {
    for (SyncModel model : {SyncModel::PerBlock, SyncModel::PerRun}) {
        for (double eta : {0.001, 0.06, 0.3, 0.5, 1.0}) {
            double previous = 1.0;
            for (int i = 0; i < 1000; ++i) {
                double t = privacy_threshold(i / 1000.0, eta, 0.99, 100, model).threshold;
                EXPECT_GE(t, 0.5);
                EXPECT_LE(t, 1.0);
                EXPECT_LE(t, previous + 1e-15);
                previous = t;
            }
        }
    }
}

TEST(Threshold, TendsToOneHalfAsBlockingSaturates) {
    for (SyncModel model : {SyncModel::PerBlock, SyncModel::PerRun}) {
        for (double eta : {0.001, 0.06, 0.5, 1.0}) {
            EXPECT_NEAR(privacy_threshold(1 - 1e-9, eta, 0.99, 100, model).threshold, 0.5, 1e-6);
        }
    }
}

TEST(Hoeffding, FormulaAndSlope) {
    EXPECT_NEAR(hoeffding_margin(0.99, 60000), std::sqrt(std::log(100.0) / 120000), 1e-15);
    double slope = (std::log(hoeffding_margin(0.99, 1000000)) - std::log(hoeffding_margin(0.99, 100))) /
                   (std::log(1e6) - std::log(1e2));
    EXPECT_NEAR(slope, -0.5, 1e-12);
    EXPECT_LT(hoeffding_margin(0.99, 1000000000), 1e-4);
    EXPECT_THROW(hoeffding_margin(1.0, 10), DomainError);
    EXPECT_THROW(hoeffding_margin(0.99, 0), DomainError);
}

TEST(Verdict, Examples) {
    PrivacyThreshold t = privacy_threshold(0.99, 0.06, 0.99, 60000, SyncModel::PerBlock);
    PrivacyVerdict pass = shared_randomness_test(0.8536, t);
    EXPECT_TRUE(pass.pass);
    EXPECT_DOUBLE_EQ(pass.observed, 0.8536);
    EXPECT_EQ(pass.model, SyncModel::PerBlock);
    EXPECT_FALSE(shared_randomness_test(0.49, t).pass);
    EXPECT_FALSE(shared_randomness_test(0.5 + t.margin, t).pass);
    PrivacyVerdict stuck = shared_randomness_test(1.0, privacy_threshold(0.5, 0.06, 0.99, 100, SyncModel::PerRun));
    EXPECT_FALSE(stuck.pass);
    EXPECT_EQ(stuck.reason, "undetectable regime; increase blocking rate");
}

TEST(Threshold, MatchesSyncAttackSimulation) {
    struct Point {
        double beta, eta;
        SyncModel model;
    };
    for (Point p : {Point{0.99, 0.06, SyncModel::PerBlock}, Point{0.3, 0.8, SyncModel::PerBlock},
                    Point{0.5, 0.9, SyncModel::PerRun}, Point{0.5, 0.06, SyncModel::PerRun},
                    Point{0.9, 0.5, SyncModel::PerRun}}) {
        SyncStats s = simulate_sync(p.beta, p.eta, 2000000, 41, p.model, true);
        double pav = s.successes / s.detected;
        double t = privacy_threshold(p.beta, p.eta, 0.99, 1, p.model).threshold;
        double sd = std::sqrt(std::max(t * (1 - t), 0.25 / s.detected) / s.detected);
        EXPECT_NEAR(pav, t, 3 * sd + 2e-3) << p.beta << "," << p.eta;
        // The attack keeps an O(1/sqrt(n)) reserve of empty outcomes.
        EXPECT_NEAR(s.detected / s.unblocked, p.eta, 5e-3);
    }
}
