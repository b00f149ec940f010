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

#ifndef SDIQRNG_PROTOCOL_HPP
#define SDIQRNG_PROTOCOL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "sdiqrng/adversary.hpp"
#include "sdiqrng/bloch.hpp"
#include "sdiqrng/errors.hpp"
#include "sdiqrng/parallel.hpp"
#include "sdiqrng/privacy.hpp"
#include "sdiqrng/rng.hpp"
#include "sdiqrng/types.hpp"

/// Monte-Carlo simulation of prepare / block / measure rounds.
namespace sdiqrng {

enum class StrategyId { HonestQrac, PrngOnly, ClassicalDeterministic, SharedSeedSync, LemmaAdversary };

inline std::string_view to_string(StrategyId id) {
    switch (id) {
        case StrategyId::HonestQrac:
            return "honest";
        case StrategyId::PrngOnly:
            return "prng";
        case StrategyId::ClassicalDeterministic:
            return "classical";
        case StrategyId::SharedSeedSync:
            return "sync";
        default:
            return "lemma";
    }
}

inline StrategyId parse_strategy_id(std::string_view s) {
    for (auto id : {StrategyId::HonestQrac, StrategyId::PrngOnly, StrategyId::ClassicalDeterministic,
                    StrategyId::SharedSeedSync, StrategyId::LemmaAdversary}) {
        if (to_string(id) == s) {
            return id;
        }
    }
    throw DomainError("unknown strategy '" + std::string(s) + "' (expected honest, prng, classical, sync, lemma)");
}

struct ProtocolConfig {
    double lambda = 0.99;
    double channel_efficiency = 0.06;
    uint64_t n_rounds = 0;
    uint64_t seed = 0;
    StrategyId strategy_id = StrategyId::HonestQrac;
    SyncModel sync_model = SyncModel::PerBlock;

    void validate() const {
        if (!(lambda >= 0 && lambda < 1)) {
            throw DomainError("lambda must lie in [0, 1)");
        }
        if (!(channel_efficiency > 0 && channel_efficiency <= 1)) {
            throw DomainError("channel efficiency must lie in (0, 1]");
        }
    }
};

struct RoundRecord {
    uint64_t round_id = 0;
    double y = 0;
    Input x;
    int z = 0;
    bool blocked = false;
    Outcome b = Outcome::Empty;

    friend bool operator==(const RoundRecord &, const RoundRecord &) = default;
};

struct RoundLog {
    ProtocolConfig config;
    std::vector<RoundRecord> records;
};

/// Honest 2->1 QRAC devices with i.i.d. detection loss.
struct HonestQrac {};

/// M ignores the qubit and answers 0 with probability prob_zero[z].
struct PrngOnly {
    std::array<double, 2> prob_zero{0.5, 0.5};
};

/// P sends the classical bit encoding[x] as a basis state; M answers
/// decoding[z][bit].
struct ClassicalDeterministic {
    std::array<int, 4> encoding{0, 0, 1, 1};
    std::array<std::array<int, 2>, 2> decoding{{{0, 1}, {0, 1}}};
};

/// Shared-seed agents that answer b = x_z while synchronized and must spend
/// one round resynchronizing after blocking events.
struct SharedSeedSync {
    SyncModel model = SyncModel::PerBlock;
    bool hide_in_no_detection = true;
};

/// Arbitrary Lemma-family devices.
struct LemmaAdversary {
    AdversaryParams params;
};

using DeviceStrategy = std::variant<HonestQrac, PrngOnly, ClassicalDeterministic, SharedSeedSync, LemmaAdversary>;

inline StrategyId strategy_kind(const DeviceStrategy &s) {
    return static_cast<StrategyId>(s.index());
}

/// Strategies whose answer depends on the blocking history must run in round
/// order.
inline bool is_stateful(const DeviceStrategy &s) {
    return std::holds_alternative<SharedSeedSync>(s);
}

inline DeviceStrategy sync_attack_strategy(SyncModel model, bool hide_in_no_detection) {
    return SharedSeedSync{model, hide_in_no_detection};
}

inline void validate_strategy(const DeviceStrategy &s) {
    if (auto *p = std::get_if<PrngOnly>(&s)) {
        for (double q : p->prob_zero) {
            if (!(q >= 0 && q <= 1)) {
                throw InvariantViolation("prng_only answer probabilities must lie in [0, 1]");
            }
        }
    }
    if (auto *c = std::get_if<ClassicalDeterministic>(&s)) {
        auto is_bit = [](int v) { return v == 0 || v == 1; };
        bool ok = std::all_of(c->encoding.begin(), c->encoding.end(), is_bit);
        for (auto &row : c->decoding) {
            ok = ok && std::all_of(row.begin(), row.end(), is_bit);
        }
        if (!ok) {
            throw InvariantViolation("classical assignment entries must be bits");
        }
    }
}

/// Honest state for input x: angles pi/4, 7pi/4, 3pi/4, 5pi/4 for 00, 01,
/// 10, 11.
inline EquatorialState honest_preparation(Input x) {
    using std::numbers::pi;
    static constexpr std::array<double, 4> angles{pi / 4, 7 * pi / 4, 3 * pi / 4, 5 * pi / 4};
    return EquatorialState(angles[x.value()]);
}

/// Honest measurement for setting z: phi = 0 for z = 0, pi/2 for z = 1.
inline MeasurementBasis honest_basis(int z) {
    if (z != 0 && z != 1) {
        throw DomainError("setting z must be 0 or 1");
    }
    return MeasurementBasis(z == 0 ? 0.0 : std::numbers::pi / 2);
}

/// Sequential bookkeeping of the sync attack.
struct SyncState {
    uint64_t pending = 0;
    bool previous_blocked = false;
    uint64_t unblocked = 0;
    uint64_t hidden_sync = 0;
    uint64_t hidden_other = 0;
    uint64_t sync_rounds = 0;
};

struct RoundInputs {
    Input x;
    double y = 0;
    int z = 0;
};

/// Uniform x, z and y for round `round_id` from the inputs stream.
inline RoundInputs draw_inputs(uint64_t seed, uint64_t round_id) {
    CounterStream rng(seed, Stream::Inputs, round_id);
    RoundInputs in;
    in.x = Input(rng.bits(2));
    in.z = static_cast<int>(rng.bits(1));
    in.y = rng.uniform();
    return in;
}

namespace detail {

inline Outcome sync_attack_round(const ProtocolConfig &config, const SharedSeedSync &s, Input x, int z,
                                 CounterStream &device, SyncState &state) {
    ++state.unblocked;
    double budget = (1 - config.channel_efficiency) * static_cast<double>(state.unblocked);
    if (state.pending > 0) {
        --state.pending;
        ++state.sync_rounds;
        if (s.hide_in_no_detection && static_cast<double>(state.hidden_sync + state.hidden_other) < budget) {
            ++state.hidden_sync;
            return Outcome::Empty;
        }
        return outcome_from_bit(static_cast<int>(device.bits(1)));
    }
    // Off-sync rounds absorb only the part of the empty budget that sync
    // rounds will not need, keeping a few standard deviations in reserve for
    // bursts of blocking.
    double overhead = sync_overhead(config.lambda, s.model);
    auto u = static_cast<double>(state.unblocked);
    double allowance = (1 - config.channel_efficiency) * u;
    if (s.hide_in_no_detection) {
        allowance = std::max(0.0, 1 - config.channel_efficiency - overhead) * u - 3 * std::sqrt(overhead * u);
    }
    if (static_cast<double>(state.hidden_other) < allowance) {
        ++state.hidden_other;
        return Outcome::Empty;
    }
    return outcome_from_bit(x.bit(z));
}

}  // namespace detail

/// Plays one round. Randomness comes only from (seed, stream, round_id);
/// `sync_state` is required for the sync attack and ignored otherwise.
inline RoundRecord simulate_round(const ProtocolConfig &config, const DeviceStrategy &strategy, Input x, double y,
                                  int z, uint64_t round_id, SyncState *sync_state = nullptr) {
    RoundRecord r;
    r.round_id = round_id;
    r.x = x;
    r.y = y;
    r.z = z;
    r.blocked = y <= config.lambda;
    CounterStream channel(config.seed, Stream::Channel, round_id);
    CounterStream device(config.seed, Stream::Strategy, round_id);

    if (auto *sync = std::get_if<SharedSeedSync>(&strategy)) {
        if (sync_state == nullptr) {
            throw InvariantViolation("sync attack rounds need a SyncState");
        }
        if (r.blocked) {
            if (sync->model == SyncModel::PerBlock || !sync_state->previous_blocked) {
                ++sync_state->pending;
            }
            sync_state->previous_blocked = true;
            r.b = Outcome::Empty;
            return r;
        }
        sync_state->previous_blocked = false;
        r.b = detail::sync_attack_round(config, *sync, x, z, device, *sync_state);
        return r;
    }

    if (r.blocked || !channel.bernoulli(config.channel_efficiency)) {
        r.b = Outcome::Empty;
        return r;
    }
    r.b = std::visit(
        [&](const auto &s) -> Outcome {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, HonestQrac>) {
                double p0 = born_probability(honest_preparation(x), honest_basis(z), 0);
                return device.bernoulli(p0) ? Outcome::Zero : Outcome::One;
            } else if constexpr (std::is_same_v<T, PrngOnly>) {
                return device.bernoulli(s.prob_zero[z]) ? Outcome::Zero : Outcome::One;
            } else if constexpr (std::is_same_v<T, ClassicalDeterministic>) {
                return outcome_from_bit(s.decoding[z][s.encoding[x.value()]]);
            } else if constexpr (std::is_same_v<T, LemmaAdversary>) {
                const LemmaStrategy &m = s.params.measurements[z];
                double u = device.uniform();
                if (u < m.q0) {
                    return Outcome::Zero;
                }
                if (u < m.q0 + m.q1) {
                    return Outcome::One;
                }
                double p0 = born_probability(s.params.states[x.value()], m.basis, 0);
                return device.bernoulli(p0) ? Outcome::Zero : Outcome::One;
            } else {
                return Outcome::Empty;
            }
        },
        strategy);
    return r;
}

/// Streams the records of a full run to `sink` in round order. Stateless
/// strategies are evaluated in parallel blocks when threads > 1.
template <typename Sink>
void for_each_round(const ProtocolConfig &config, const DeviceStrategy &strategy, Sink &&sink, unsigned threads = 1) {
    config.validate();
    validate_strategy(strategy);
    if (is_stateful(strategy) || threads <= 1) {
        SyncState state;
        for (uint64_t i = 0; i < config.n_rounds; ++i) {
            RoundInputs in = draw_inputs(config.seed, i);
            sink(simulate_round(config, strategy, in.x, in.y, in.z, i, &state));
        }
        return;
    }
    constexpr uint64_t kBlock = 1 << 16;
    std::vector<RoundRecord> buffer;
    for (uint64_t start = 0; start < config.n_rounds; start += kBlock) {
        uint64_t count = std::min(kBlock, config.n_rounds - start);
        buffer.assign(count, RoundRecord{});
        parallel_for(count, threads, [&](std::size_t k) {
            uint64_t i = start + k;
            RoundInputs in = draw_inputs(config.seed, i);
            buffer[k] = simulate_round(config, strategy, in.x, in.y, in.z, i);
        });
        for (const auto &r : buffer) {
            sink(r);
        }
    }
}

inline RoundLog run_protocol(const ProtocolConfig &config, const DeviceStrategy &strategy, unsigned threads = 1) {
    if (config.n_rounds == 0) {
        throw InvariantViolation("run_protocol: n_rounds must be positive (empty log)");
    }
    RoundLog log;
    log.config = config;
    log.config.strategy_id = strategy_kind(strategy);
    log.records.reserve(config.n_rounds);
    for_each_round(config, strategy, [&](const RoundRecord &r) { log.records.push_back(r); }, threads);
    return log;
}

}  // namespace sdiqrng

#endif
