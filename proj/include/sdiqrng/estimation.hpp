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

#ifndef SDIQRNG_ESTIMATION_HPP
#define SDIQRNG_ESTIMATION_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <utility>

#include <boost/math/special_functions/beta.hpp>

#include "sdiqrng/errors.hpp"
#include "sdiqrng/protocol.hpp"
#include "sdiqrng/types.hpp"

/// Step-1 and Step-2 statistics of a round log.
namespace sdiqrng {

inline std::string cell_name(unsigned cell) {
    return "x=" + Input(cell / 2).str() + ",z=" + std::to_string(cell % 2);
}

/// Success relabeling: outcome 0 means "b = x_z". Empty stays empty; applying
/// it twice restores the original label.
inline Outcome relabel_success(Outcome b, Input x, int z) {
    if (b == Outcome::Empty) {
        return b;
    }
    return outcome_from_bit(static_cast<int>(b) ^ x.bit(z));
}

/// Outcome counts n(b|x,z) over unblocked rounds.
struct Tally {
    std::array<std::array<uint64_t, 3>, 8> counts{};
    uint64_t unblocked = 0;
    uint64_t blocked = 0;

    void add(const RoundRecord &r) {
        if (r.blocked) {
            ++blocked;
            return;
        }
        ++unblocked;
        ++counts[cell_index(r.x.value(), r.z)][static_cast<unsigned>(r.b)];
    }

    /// Tallies of disjoint logs combine by addition.
    Tally &merge(const Tally &other) {
        for (unsigned c = 0; c < 8; ++c) {
            for (unsigned b = 0; b < 3; ++b) {
                counts[c][b] += other.counts[c][b];
            }
        }
        unblocked += other.unblocked;
        blocked += other.blocked;
        return *this;
    }

    uint64_t detected(unsigned cell) const {
        return counts[cell][0] + counts[cell][1];
    }

    uint64_t detected() const {
        uint64_t n = 0;
        for (unsigned c = 0; c < 8; ++c) {
            n += detected(c);
        }
        return n;
    }

    /// Detected rounds with b = x_z.
    uint64_t successes(unsigned cell) const {
        return counts[cell][Input(cell / 2).bit(static_cast<int>(cell % 2))];
    }
};

inline Tally tally(std::span<const RoundRecord> records) {
    Tally t;
    for (const auto &r : records) {
        t.add(r);
    }
    if (t.unblocked == 0) {
        throw InsufficientData("no unblocked rounds in the log");
    }
    return t;
}

inline Tally tally(const RoundLog &log) {
    if (log.records.empty()) {
        throw InsufficientData("empty round log");
    }
    return tally(std::span<const RoundRecord>(log.records));
}

enum class TableVariant { Raw, DetectedOnly };

/// p(b|x, y > lambda, z) per cell, columns b = 0, 1, empty.
struct ConditionalTable {
    std::array<std::array<double, 3>, 8> p{};
    TableVariant variant = TableVariant::Raw;
};

/// Raw table normalized over {0, 1, empty} and the detected-only table
/// normalized over {0, 1}.
inline std::pair<ConditionalTable, ConditionalTable> conditional_tables(const Tally &t) {
    ConditionalTable raw, detected;
    detected.variant = TableVariant::DetectedOnly;
    for (unsigned c = 0; c < 8; ++c) {
        uint64_t all = t.counts[c][0] + t.counts[c][1] + t.counts[c][2];
        if (all == 0) {
            throw InsufficientData("no unblocked rounds in cell " + cell_name(c));
        }
        uint64_t det = t.detected(c);
        if (det == 0) {
            throw InsufficientData("no detected rounds in cell " + cell_name(c));
        }
        for (unsigned b = 0; b < 3; ++b) {
            raw.p[c][b] = static_cast<double>(t.counts[c][b]) / static_cast<double>(all);
        }
        detected.p[c][0] = static_cast<double>(t.counts[c][0]) / static_cast<double>(det);
        detected.p[c][1] = static_cast<double>(t.counts[c][1]) / static_cast<double>(det);
    }
    return {raw, detected};
}

/// Pr[b = x_z | x, z] from a detected-only table.
inline double success_probability(const ConditionalTable &table, Input x, int z) {
    if (table.variant != TableVariant::DetectedOnly) {
        throw WrongVariant("success_probability needs the detected-only table");
    }
    return table.p[cell_index(x.value(), z)][x.bit(z)];
}

inline double p_prime_average(const ConditionalTable &table) {
    double sum = 0;
    for (unsigned x : Input::all_values) {
        for (int z = 0; z < 2; ++z) {
            sum += success_probability(table, Input(x), z);
        }
    }
    return sum / 8;
}

/// Detected unblocked rounds over all unblocked rounds.
inline double observed_efficiency(const Tally &t) {
    if (t.unblocked == 0) {
        throw InsufficientData("no unblocked rounds");
    }
    return static_cast<double>(t.detected()) / static_cast<double>(t.unblocked);
}

struct Interval {
    double lo = 0;
    double hat = 0;
    double hi = 1;
};

/// Two-sided Clopper-Pearson interval for k successes in n trials with
/// miscoverage `alpha`.
inline Interval clopper_pearson(uint64_t k, uint64_t n, double alpha) {
    if (n == 0 || k > n) {
        throw DomainError("clopper_pearson needs 0 <= k <= n and n > 0");
    }
    if (!(alpha > 0 && alpha < 1)) {
        throw DomainError("alpha must lie in (0, 1)");
    }
    auto kd = static_cast<double>(k);
    auto nd = static_cast<double>(n);
    Interval iv;
    iv.hat = kd / nd;
    iv.lo = k == 0 ? 0.0 : boost::math::ibeta_inv(kd, nd - kd + 1, alpha / 2);
    iv.hi = k == n ? 1.0 : boost::math::ibeta_inv(kd + 1, nd - kd, 1 - alpha / 2);
    return iv;
}

enum class IntervalMethod {
    ClopperPearson,
    /// p_hat +- sqrt(k)/n. Figure error bars only; never used to certify.
    Poisson,
};

/// Success-probability bounds for the 8 cells.
struct ProbabilityBounds {
    std::array<Interval, 8> cells{};
    std::array<uint64_t, 8> n_detected{};
    double confidence = 0.99;
    IntervalMethod method = IntervalMethod::ClopperPearson;
};

/// Clopper-Pearson intervals holding simultaneously for all 8 cells with
/// probability `confidence` (Bonferroni split).
inline ProbabilityBounds probability_bounds(const Tally &t, double confidence,
                                            IntervalMethod method = IntervalMethod::ClopperPearson) {
    if (!(confidence > 0 && confidence < 1)) {
        throw DomainError("confidence must lie in (0, 1)");
    }
    ProbabilityBounds pb;
    pb.confidence = confidence;
    pb.method = method;
    double alpha = (1 - confidence) / 8;
    for (unsigned c = 0; c < 8; ++c) {
        uint64_t n = t.detected(c);
        if (n == 0) {
            throw InsufficientData("no detected rounds in cell " + cell_name(c));
        }
        uint64_t k = t.successes(c);
        pb.n_detected[c] = n;
        if (method == IntervalMethod::ClopperPearson) {
            pb.cells[c] = clopper_pearson(k, n, alpha);
        } else {
            double hat = static_cast<double>(k) / static_cast<double>(n);
            double err = std::sqrt(static_cast<double>(k)) / static_cast<double>(n);
            pb.cells[c] = {std::max(0.0, hat - err), hat, std::min(1.0, hat + err)};
        }
    }
    return pb;
}

inline void write_bounds_csv(std::ostream &out, const ProbabilityBounds &pb) {
    out << "x,z,p_lo,p_hat,p_hi,n_detected\n";
    char buf[128];
    for (unsigned c = 0; c < 8; ++c) {
        const Interval &iv = pb.cells[c];
        std::snprintf(buf, sizeof(buf), "%s,%u,%.10f,%.10f,%.10f,%llu\n", Input(c / 2).str().c_str(), c % 2, iv.lo,
                      iv.hat, iv.hi, static_cast<unsigned long long>(pb.n_detected[c]));
        out << buf;
    }
}

}  // namespace sdiqrng

#endif
