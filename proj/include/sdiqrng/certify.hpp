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

#ifndef SDIQRNG_CERTIFY_HPP
#define SDIQRNG_CERTIFY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sdiqrng/adversary.hpp"
#include "sdiqrng/constraints.hpp"
#include "sdiqrng/errors.hpp"
#include "sdiqrng/inner_solver.hpp"
#include "sdiqrng/nelder_mead.hpp"
#include "sdiqrng/parallel.hpp"
#include "sdiqrng/rng.hpp"

/// Min-entropy certification against Lemma-family adversaries.
namespace sdiqrng {

/// Min-entropy per round when empty outcomes are recorded as the
/// adversarially known symbol 0: -log2((1 - eta) + eta * 2^-h).
inline double per_round_rate(double per_event_bits, double eta) {
    if (!(eta > 0 && eta <= 1)) {
        throw DomainError("detection efficiency must lie in (0, 1]");
    }
    if (!(per_event_bits >= 0)) {
        throw DomainError("per-event min-entropy must be nonnegative");
    }
    double guess = (1 - eta) + eta * std::exp2(-per_event_bits);
    if (guess <= 0) {
        return kUnboundedEntropy;
    }
    return guess >= 1 ? 0.0 : -std::log2(guess);
}

/// Aggregate of the 8 success-event min-entropies of `params`; unbounded
/// events count as `cap`.
inline double aggregate_entropy(const AdversaryParams &params, Aggregate aggregate,
                                double cap = kUnboundedEntropy) {
    double worst = kUnboundedEntropy;
    double sum = 0;
    for (unsigned x : Input::all_values) {
        for (int z = 0; z < 2; ++z) {
            double h = std::min(params.success_entropy(Input(x), z), cap);
            worst = std::min(worst, h);
            sum += h;
        }
    }
    return aggregate == Aggregate::WorstEvent ? worst : sum / 8;
}

struct CertifyOptions {
    Aggregate aggregate = Aggregate::WorstEvent;
    unsigned restarts = 64;
    uint64_t seed = 0x5eed;
    /// Saturation of -log2(overlap) inside the search.
    double entropy_cap = 20;
    /// Used only to derive the per-round rate.
    double detection_efficiency = 1;
    unsigned threads = 1;
    /// Objective evaluations per restart.
    std::size_t max_evaluations = 6000;
    /// Two restarts must agree on the minimum within this many bits.
    double agreement_tolerance = 1e-4;
    /// Extra batches of `restarts` fresh starts tried before giving up on
    /// agreement.
    unsigned max_extra_batches = 3;
};

struct OptimizerDiagnostics {
    unsigned restarts = 0;
    /// Local minimum reached by each restart (infeasible ones are +inf).
    std::vector<double> restart_minima;
    /// Best value after each restart, in restart order.
    std::vector<double> best_trace;
    std::size_t evaluations = 0;
    unsigned agreeing_restarts = 0;
    bool cap_binding = false;
};

struct CertificationResult {
    double bits_per_event = 0;
    double bits_per_round = 0;
    AdversaryParams minimizer;
    bool feasible = false;
    Aggregate aggregate = Aggregate::WorstEvent;
    OptimizerDiagnostics diagnostics;
};

namespace detail {

using SearchPoint = std::array<double, 5>;

/// Gauge-fixed angles: 4 states and phi_1, with phi_0 = 0.
inline AngleVector expand_angles(const SearchPoint &v) {
    return {v[0], v[1], v[2], v[3], 0.0, v[4]};
}

class CertificationSearch {
   public:
    CertificationSearch(const ConstraintSet &constraints, const CertifyOptions &options)
        : solver_(constraints, options.aggregate, options.entropy_cap),
          options_(options),
          infeasible_offset_(options.entropy_cap + 1) {
    }

    double objective(const SearchPoint &v) const {
        InnerSolution sol = solver_.solve(expand_angles(v));
        return sol.feasible ? sol.value : infeasible_offset_ + sol.violation;
    }

    bool is_feasible_value(double f) const {
        return f < infeasible_offset_;
    }

    /// One restart: Nelder-Mead from a random point, re-seeded with shrinking
    /// simplices while it keeps improving.
    LocalMinimum<5> local_search(unsigned restart) const {
        CounterStream rng(options_.seed, Stream::Optimizer, restart);
        SearchPoint start{};
        for (double &a : start) {
            a = kTwoPi * rng.uniform();
        }
        auto f = [this](const SearchPoint &v) { return objective(v); };
        LocalMinimum<5> best{start, objective(start), 1};
        std::size_t budget = options_.max_evaluations;
        for (double step : {0.8, 0.25, 0.06, 0.015, 0.004}) {
            if (best.evaluations >= budget) {
                break;
            }
            auto run = nelder_mead<5>(f, best.x, step, budget - best.evaluations);
            std::size_t used = best.evaluations + run.evaluations;
            if (run.f < best.f) {
                best = {run.x, run.f, used};
            } else {
                best.evaluations = used;
            }
        }
        return best;
    }

    /// Short re-search from an existing local minimum.
    LocalMinimum<5> polish(const LocalMinimum<5> &from) const {
        auto f = [this](const SearchPoint &v) { return objective(v); };
        LocalMinimum<5> best = from;
        best.evaluations = 0;
        for (double step : {0.1, 0.02, 0.004}) {
            auto run = nelder_mead<5>(f, best.x, step, options_.max_evaluations / 4);
            best.evaluations += run.evaluations;
            if (run.f < best.f) {
                best.x = run.x;
                best.f = run.f;
            }
        }
        return best;
    }

    /// Tries to set each state exactly onto one of its target projectors.
    LocalMinimum<5> snap(LocalMinimum<5> best) const {
        for (unsigned x = 0; x < 4; ++x) {
            for (int z = 0; z < 2; ++z) {
                SearchPoint v = best.x;
                double phi = z == 0 ? 0.0 : v[4];
                v[x] = phi + (Input(x).bit(z) ? std::numbers::pi : 0.0);
                double f = objective(v);
                ++best.evaluations;
                if (f < best.f) {
                    best.x = v;
                    best.f = f;
                }
            }
        }
        return best;
    }

    const InnerSolver &solver() const {
        return solver_;
    }

   private:
    InnerSolver solver_;
    CertifyOptions options_;
    double infeasible_offset_;
};

}  // namespace detail

/// Minimizes the aggregate min-entropy of the 8 success events over every
/// Lemma-family adversary consistent with `constraints`.
///
/// Outer search: multistart Nelder-Mead over the 4 state angles and phi_1
/// (phi_0 = 0 fixes the rotation gauge). Inner problem: exact minimization
/// over (p_z, q_z0, q_z1) for those angles. The returned minimizer is
/// re-checked against the constraints directly.
inline CertificationResult certify_min_entropy(const ConstraintSet &constraints, const CertifyOptions &options = {}) {
    constraints.validate();
    if (options.restarts == 0) {
        throw DomainError("certify_min_entropy needs at least one restart");
    }
    detail::CertificationSearch search(constraints, options);

    CertificationResult result;
    result.aggregate = options.aggregate;
    OptimizerDiagnostics &diag = result.diagnostics;
    std::vector<LocalMinimum<5>> runs;
    std::vector<double> reached;
    std::vector<bool> polished_once;
    LocalMinimum<5> best{};
    for (unsigned batch = 0;; ++batch) {
        std::size_t first = runs.size();
        runs.resize(first + options.restarts);
        parallel_for(options.restarts, options.threads, [&](std::size_t r) {
            runs[first + r] = search.local_search(static_cast<unsigned>(first + r));
        });
        for (std::size_t r = first; r < runs.size(); ++r) {
            diag.evaluations += runs[r].evaluations;
            bool feasible = search.is_feasible_value(runs[r].f);
            diag.restart_minima.push_back(feasible ? runs[r].f : kUnboundedEntropy);
            reached.push_back(diag.restart_minima.back());
            polished_once.push_back(false);
            double so_far = diag.best_trace.empty() ? kUnboundedEntropy : diag.best_trace.back();
            diag.best_trace.push_back(std::min(so_far, diag.restart_minima.back()));
        }
        // Polish the most promising restarts; a restart agrees with the final
        // minimum if either its own or its polished endpoint reaches it.
        std::vector<std::size_t> order(runs.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return runs[a].f < runs[b].f; });
        order.resize(std::min<std::size_t>(order.size(), 8));
        std::erase_if(order, [&](std::size_t i) { return polished_once[i]; });
        std::vector<LocalMinimum<5>> polished(order.size());
        parallel_for(order.size(), options.threads,
                     [&](std::size_t k) { polished[k] = search.polish(runs[order[k]]); });
        for (std::size_t k = 0; k < order.size(); ++k) {
            std::size_t i = order[k];
            polished_once[i] = true;
            diag.evaluations += polished[k].evaluations;
            if (search.is_feasible_value(polished[k].f)) {
                reached[i] = std::min(reached[i], polished[k].f);
            }
            if (polished[k].f < runs[i].f) {
                runs[i].x = polished[k].x;
                runs[i].f = polished[k].f;
            }
        }
        best = *std::min_element(runs.begin(), runs.end(),
                                 [](const auto &a, const auto &b) { return a.f < b.f; });
        std::size_t before_snap = best.evaluations;
        best = search.snap(best);
        diag.evaluations += best.evaluations - before_snap;

        diag.agreeing_restarts = 0;
        for (double m : reached) {
            if (m <= std::max(0.0, best.f) + options.agreement_tolerance) {
                ++diag.agreeing_restarts;
            }
        }
        bool settled = options.restarts < 2 || diag.agreeing_restarts >= 2 || !search.is_feasible_value(best.f);
        if (settled || batch >= options.max_extra_batches) {
            break;
        }
    }
    diag.restarts = static_cast<unsigned>(runs.size());

    if (!search.is_feasible_value(best.f)) {
        throw InfeasibleConstraints("no Lemma-family adversary satisfies the " +
                                    std::string(to_string(constraints.mode)) + " constraints (best violation " +
                                    std::to_string(best.f - options.entropy_cap - 1) + ")");
    }

    detail::AngleVector angles = detail::expand_angles(best.x);
    detail::InnerSolution sol = search.solver().solve(angles);
    result.feasible = true;
    result.minimizer = detail::InnerSolver::to_params(angles, sol.weights);
    result.bits_per_event = std::max(0.0, sol.value);

    double miss = constraints.violation(result.minimizer.success_table());
    if (miss > 1e-9) {
        throw InvariantViolation("certification minimizer violates the constraints by " + std::to_string(miss));
    }
    double direct = aggregate_entropy(result.minimizer, options.aggregate, options.entropy_cap);
    if (std::fabs(direct - result.bits_per_event) > 1e-7) {
        throw InvariantViolation("minimizer entropy " + std::to_string(direct) + " disagrees with the search value " +
                                 std::to_string(result.bits_per_event));
    }
    for (unsigned x : Input::all_values) {
        for (int z = 0; z < 2; ++z) {
            const LemmaStrategy &m = result.minimizer.measurements[z];
            double h = result.minimizer.success_entropy(Input(x), z);
            bool counts = options.aggregate == Aggregate::UniformAverage ||
                          std::fabs(std::min(h, options.entropy_cap) - result.bits_per_event) < 1e-12;
            if (counts && m.p() > 0 && h >= options.entropy_cap) {
                diag.cap_binding = true;
            }
        }
    }

    if (options.restarts >= 2 && diag.agreeing_restarts < 2) {
        throw NonConvergence("certification restarts disagree: only " + std::to_string(diag.agreeing_restarts) +
                                 " of " + std::to_string(diag.restarts) + " reached " +
                                 std::to_string(result.bits_per_event) + " bits within tolerance",
                             diag.restart_minima);
    }
    result.bits_per_round = per_round_rate(result.bits_per_event, options.detection_efficiency);
    return result;
}

struct ScanPoint {
    double alpha = 0;
    double bits = 0;
};

/// Certified bits for each alpha, with every cell / statistic constrained to
/// [alpha - delta/2, alpha + delta/2].
inline std::vector<ScanPoint> indicator_scan(IndicatorMode mode, std::span<const double> alpha_grid, double delta,
                                             const CertifyOptions &options = {}) {
    std::vector<ScanPoint> curve;
    curve.reserve(alpha_grid.size());
    for (double alpha : alpha_grid) {
        if (!(alpha >= 0 && alpha <= 1)) {
            throw DomainError("alpha grid must lie in [0, 1]");
        }
        auto result = certify_min_entropy(ConstraintSet::scalar(mode, alpha, delta), options);
        curve.push_back({alpha, result.bits_per_event});
    }
    return curve;
}

/// Evenly spaced grid from `first` to `last` inclusive.
inline std::vector<double> alpha_grid(double first, double last, double step) {
    std::vector<double> grid;
    auto count = static_cast<long>(std::floor((last - first) / step + 1e-9));
    for (long i = 0; i <= count; ++i) {
        grid.push_back(first + static_cast<double>(i) * step);
    }
    return grid;
}

/// Where an indicator curve starts certifying randomness: the threshold lies
/// in [last_zero, first_positive].
struct ZeroCrossing {
    bool found = false;
    double last_zero = 0;
    double first_positive = 0;
};

inline ZeroCrossing zero_crossing(std::span<const ScanPoint> curve, double zero_tolerance = 1e-6) {
    ZeroCrossing c;
    for (std::size_t i = curve.size(); i-- > 0;) {
        if (curve[i].bits <= zero_tolerance) {
            if (i + 1 < curve.size()) {
                c.found = true;
                c.last_zero = curve[i].alpha;
                c.first_positive = curve[i + 1].alpha;
            }
            return c;
        }
    }
    return c;
}

}  // namespace sdiqrng

#endif
