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

#ifndef SDIQRNG_PRIVACY_HPP
#define SDIQRNG_PRIVACY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "sdiqrng/errors.hpp"
#include "sdiqrng/types.hpp"

/// Shared-randomness test.
///
/// Model: agents in P and M share a seed and win every round while their
/// round counters agree. A blocked qubit desynchronizes them; each
/// resynchronization costs one unblocked round in which the answer is
/// uncorrelated with x (success 1/2). The agents hide as many sync rounds as
/// they can behind "no detection" outcomes, so only sync rounds exceeding the
/// non-detection budget 1 - eta lower the observed p'_av.
namespace sdiqrng {

/// Expected fraction of unblocked rounds spent resynchronizing at blocking
/// rate `beta`. PerBlock: one sync round per blocked qubit, capped at 1.
/// PerRun: one per maximal run of blocked rounds.
inline double sync_overhead(double beta, SyncModel model) {
    if (!(beta >= 0 && beta < 1)) {
        throw DomainError("blocking rate must lie in [0, 1)");
    }
    if (model == SyncModel::PerRun) {
        return beta;
    }
    return std::min(1.0, beta / (1 - beta));
}

/// One-sided Hoeffding deviation for a mean of n bounded samples.
inline double hoeffding_margin(double confidence, uint64_t n) {
    if (!(confidence > 0 && confidence < 1)) {
        throw DomainError("confidence must lie in (0, 1)");
    }
    if (n == 0) {
        throw DomainError("hoeffding_margin needs at least one sample");
    }
    return std::sqrt(std::log(1 / (1 - confidence)) / (2.0 * static_cast<double>(n)));
}

struct PrivacyThreshold {
    double threshold = 1;
    double margin = 0;
    SyncModel model = SyncModel::PerBlock;
    double beta = 0;
    double eta = 1;

    /// The sync attack reaches p'_av = 1 here; no observation can pass.
    bool undetectable() const {
        return threshold >= 1;
    }
};

/// Largest p'_av the sync attack can produce at (beta, eta) plus the
/// statistical margin for `n_detected` detected rounds.
inline PrivacyThreshold privacy_threshold(double beta, double eta, double confidence, uint64_t n_detected,
                                          SyncModel model) {
    if (!(eta > 0 && eta <= 1)) {
        throw DomainError("detection efficiency must lie in (0, 1]");
    }
    double s = sync_overhead(beta, model);
    double exposed = std::max(0.0, eta - (1 - s));
    PrivacyThreshold t;
    t.threshold = 1 - exposed / (2 * eta);
    t.margin = hoeffding_margin(confidence, n_detected);
    t.model = model;
    t.beta = beta;
    t.eta = eta;
    return t;
}

struct PrivacyVerdict {
    double threshold = 1;
    double margin = 0;
    double observed = 0;
    bool pass = false;
    SyncModel model = SyncModel::PerBlock;
    std::string reason;
};

inline PrivacyVerdict shared_randomness_test(double observed_p_prime_av, const PrivacyThreshold &t) {
    PrivacyVerdict v;
    v.threshold = t.threshold;
    v.margin = t.margin;
    v.observed = observed_p_prime_av;
    v.model = t.model;
    if (t.undetectable()) {
        v.pass = false;
        v.reason = "undetectable regime; increase blocking rate";
        return v;
    }
    v.pass = observed_p_prime_av > t.threshold + t.margin;
    v.reason = v.pass ? "p'_av above threshold" : "p'_av not above threshold + margin; abort";
    return v;
}

}  // namespace sdiqrng

#endif
