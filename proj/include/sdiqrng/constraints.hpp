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

#ifndef SDIQRNG_CONSTRAINTS_HPP
#define SDIQRNG_CONSTRAINTS_HPP

#include <algorithm>
#include <array>
#include <string>
#include <string_view>

#include "sdiqrng/errors.hpp"
#include "sdiqrng/estimation.hpp"

namespace sdiqrng {

/// Which statistic of the 8 success probabilities the user constrains.
enum class IndicatorMode {
    /// Each of the 8 success probabilities lies in its own interval.
    Vector,
    /// The minimum of the 8 lies in [alpha - delta/2, alpha + delta/2].
    WorstCase,
    /// The mean of the 8 lies in [alpha - delta/2, alpha + delta/2].
    Average,
};

inline std::string_view to_string(IndicatorMode m) {
    switch (m) {
        case IndicatorMode::Vector:
            return "vector";
        case IndicatorMode::WorstCase:
            return "worst_case";
        default:
            return "average";
    }
}

inline IndicatorMode parse_indicator_mode(std::string_view s) {
    if (s == "vector") {
        return IndicatorMode::Vector;
    }
    if (s == "worst_case") {
        return IndicatorMode::WorstCase;
    }
    if (s == "average") {
        return IndicatorMode::Average;
    }
    throw DomainError("unknown indicator mode '" + std::string(s) + "'");
}

/// How the 8 per-event min-entropies are combined.
enum class Aggregate { WorstEvent, UniformAverage };

inline std::string_view to_string(Aggregate a) {
    return a == Aggregate::WorstEvent ? "worst_event" : "uniform_average";
}

inline Aggregate parse_aggregate(std::string_view s) {
    if (s == "worst_event") {
        return Aggregate::WorstEvent;
    }
    if (s == "uniform_average") {
        return Aggregate::UniformAverage;
    }
    throw DomainError("unknown aggregate '" + std::string(s) + "'");
}

struct Bound {
    double lo = 0;
    double hi = 1;
};

struct ConstraintSet {
    IndicatorMode mode = IndicatorMode::Vector;
    /// Per-cell bounds (cell 2x + z), used in vector mode.
    std::array<Bound, 8> cells{};
    /// Center and width of the scalar bound in worst-case / average modes.
    double alpha = 0;
    double delta = 0;

    static ConstraintSet vector(const std::array<Bound, 8> &cells) {
        ConstraintSet c;
        c.mode = IndicatorMode::Vector;
        c.cells = cells;
        c.validate();
        return c;
    }

    /// All 8 cells in [alpha - delta/2, alpha + delta/2].
    static ConstraintSet uniform_vector(double alpha, double delta) {
        ConstraintSet c;
        c.mode = IndicatorMode::Vector;
        c.alpha = alpha;
        c.delta = delta;
        c.cells.fill(c.scalar_bound_unchecked());
        c.validate();
        return c;
    }

    static ConstraintSet scalar(IndicatorMode mode, double alpha, double delta) {
        if (mode == IndicatorMode::Vector) {
            return uniform_vector(alpha, delta);
        }
        ConstraintSet c;
        c.mode = mode;
        c.alpha = alpha;
        c.delta = delta;
        c.validate();
        return c;
    }

    static ConstraintSet from_bounds(const ProbabilityBounds &pb) {
        std::array<Bound, 8> cells{};
        for (unsigned i = 0; i < 8; ++i) {
            cells[i] = {pb.cells[i].lo, pb.cells[i].hi};
        }
        return vector(cells);
    }

    /// [alpha - delta/2, alpha + delta/2] clipped to [0, 1].
    Bound scalar_bound() const {
        return scalar_bound_unchecked();
    }

    void validate() const {
        if (mode == IndicatorMode::Vector) {
            for (unsigned i = 0; i < 8; ++i) {
                const Bound &b = cells[i];
                if (!(0 <= b.lo && b.lo <= b.hi && b.hi <= 1)) {
                    throw InvariantViolation("bound for " + cell_name(i) + " must satisfy 0 <= lo <= hi <= 1");
                }
            }
            return;
        }
        if (!(delta >= 0)) {
            throw InvariantViolation("delta must be nonnegative");
        }
        if (!(alpha >= 0 && alpha <= 1)) {
            throw InvariantViolation("alpha must lie in [0, 1]");
        }
    }

    /// Largest amount by which `success` (cell order) misses the constraints.
    double violation(const std::array<double, 8> &success) const {
        auto miss = [](double v, Bound b) { return std::max({0.0, b.lo - v, v - b.hi}); };
        if (mode == IndicatorMode::Vector) {
            double worst = 0;
            for (unsigned i = 0; i < 8; ++i) {
                worst = std::max(worst, miss(success[i], cells[i]));
            }
            return worst;
        }
        double stat = 0;
        if (mode == IndicatorMode::WorstCase) {
            stat = *std::min_element(success.begin(), success.end());
        } else {
            for (double s : success) {
                stat += s;
            }
            stat /= 8;
        }
        return miss(stat, scalar_bound());
    }

   private:
    Bound scalar_bound_unchecked() const {
        return {std::clamp(alpha - delta / 2, 0.0, 1.0), std::clamp(alpha + delta / 2, 0.0, 1.0)};
    }
};

}  // namespace sdiqrng

#endif
