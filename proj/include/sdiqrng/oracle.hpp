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

#ifndef SDIQRNG_ORACLE_HPP
#define SDIQRNG_ORACLE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sdiqrng/adversary.hpp"
#include "sdiqrng/certify.hpp"
#include "sdiqrng/constraints.hpp"
#include "sdiqrng/errors.hpp"
#include "sdiqrng/parallel.hpp"
#include "sdiqrng/rng.hpp"

/// Grid-and-refine cross-check for the certification search.
///
/// Nothing here touches the inner linear program: every candidate is a full
/// AdversaryParams evaluated through the Born rule, so a bug in the optimizer
/// cannot hide in both places at once. Any feasible point found gives an
/// upper bound on the true minimum.
namespace sdiqrng {

struct OracleOptions {
    unsigned threads = 1;
    double entropy_cap = 20;
    /// Grid cells kept for local refinement.
    std::size_t refine_cells = 100;
    std::size_t refine_evaluations = 20000;
};

struct OracleResult {
    bool feasible = false;
    double bits = kUnboundedEntropy;
    AdversaryParams params;
    std::size_t feasible_cells = 0;
};

namespace detail {

/// Layout: theta_0..theta_3, phi_1, q_00, q_01, q_10, q_11 (phi_0 = 0).
using OraclePoint = std::array<double, 9>;

inline void project_weights(double &q0, double &q1) {
    q0 = std::max(q0, 0.0);
    q1 = std::max(q1, 0.0);
    double excess = q0 + q1 - 1;
    if (excess > 0) {
        q0 = std::clamp(q0 - excess / 2, 0.0, 1.0);
        q1 = std::clamp(q1 - excess / 2, 0.0, 1.0);
        if (q0 + q1 > 1) {
            q1 = 1 - q0;
        }
    }
}

inline AdversaryParams oracle_params(const OraclePoint &v) {
    AdversaryParams a;
    for (unsigned x = 0; x < 4; ++x) {
        a.states[x] = EquatorialState(v[x]);
    }
    a.measurements[0] = LemmaStrategy(v[5], v[6], MeasurementBasis(0));
    a.measurements[1] = LemmaStrategy(v[7], v[8], MeasurementBasis(v[4]));
    return a;
}

/// Sum of per-cell (or per-statistic) misses; zero exactly on the feasible set.
inline double total_violation(const ConstraintSet &cs, const std::array<double, 8> &s) {
    auto miss = [](double v, Bound b) { return std::max(0.0, b.lo - v) + std::max(0.0, v - b.hi); };
    if (cs.mode == IndicatorMode::Vector) {
        double sum = 0;
        for (unsigned c = 0; c < 8; ++c) {
            sum += miss(s[c], cs.cells[c]);
        }
        return sum;
    }
    double stat = 0;
    if (cs.mode == IndicatorMode::WorstCase) {
        stat = *std::min_element(s.begin(), s.end());
    } else {
        for (double v : s) {
            stat += v;
        }
        stat /= 8;
    }
    return miss(stat, cs.scalar_bound());
}

struct GridCell {
    double score;
    uint64_t index;
    OraclePoint point;
};

inline bool cell_before(const GridCell &a, const GridCell &b) {
    return a.score != b.score ? a.score < b.score : a.index < b.index;
}

/// Keeps the `capacity` best cells seen so far.
class CellHeap {
   public:
    explicit CellHeap(std::size_t capacity) : capacity_(capacity) {
    }

    bool admits(double score) const {
        return cells_.size() < capacity_ || score < cells_.front().score;
    }

    void push(const GridCell &c) {
        if (cells_.size() < capacity_) {
            cells_.push_back(c);
            std::push_heap(cells_.begin(), cells_.end(), cell_before);
            return;
        }
        if (!cell_before(c, cells_.front())) {
            return;
        }
        std::pop_heap(cells_.begin(), cells_.end(), cell_before);
        cells_.back() = c;
        std::push_heap(cells_.begin(), cells_.end(), cell_before);
    }

    std::vector<GridCell> &cells() {
        return cells_;
    }

   private:
    std::size_t capacity_;
    std::vector<GridCell> cells_;
};

/// Coordinate pattern search with a few fixed random directions per sweep.
/// Moves are accepted only if `better(candidate)` says so.
template <typename Better>
OraclePoint pattern_search(OraclePoint x, std::array<double, 9> step, double min_step, std::size_t budget,
                           uint64_t seed, Better better) {
    CounterStream rng(seed, Stream::Optimizer, 0);
    std::size_t used = 0;
    auto moved = [&](const OraclePoint &from, const OraclePoint &dir, double scale) {
        OraclePoint y = from;
        for (unsigned i = 0; i < 9; ++i) {
            y[i] += scale * dir[i] * step[i];
        }
        project_weights(y[5], y[6]);
        project_weights(y[7], y[8]);
        return y;
    };
    while (used < budget) {
        bool improved = false;
        std::vector<OraclePoint> dirs;
        for (unsigned i = 0; i < 9; ++i) {
            OraclePoint e{};
            e[i] = 1;
            dirs.push_back(e);
        }
        for (unsigned k = 0; k < 9; ++k) {
            OraclePoint d{};
            for (double &c : d) {
                c = 2 * rng.uniform() - 1;
            }
            dirs.push_back(d);
        }
        for (const auto &d : dirs) {
            for (double sign : {1.0, -1.0}) {
                OraclePoint y = moved(x, d, sign);
                ++used;
                if (better(y)) {
                    x = y;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) {
            double largest = 0;
            for (double &s : step) {
                s /= 2;
                largest = std::max(largest, s);
            }
            if (largest < min_step) {
                break;
            }
        }
    }
    return x;
}

}  // namespace detail

/// Exhaustive grid over the 9 gauge-fixed parameters (angles at multiples of
/// 2 pi / resolution, preprocessing weights at multiples of
/// 1 / (resolution - 1)), followed by pattern-search refinement of the best
/// cells under a penalized score. Only strictly feasible points count.
inline OracleResult brute_force_oracle(const ConstraintSet &constraints, Aggregate aggregate,
                                       unsigned grid_resolution, const OracleOptions &options = {}) {
    constraints.validate();
    if (grid_resolution < 8) {
        throw DomainError("oracle grid resolution must be at least 8");
    }
    const unsigned r = grid_resolution;
    const double angle_step = kTwoPi / r;
    const double weight_step = 1.0 / (r - 1);
    const double cap = options.entropy_cap;
    // Feasibility dominates the ranking of grid cells.
    const double penalty = 10 * (cap + 1);

    std::vector<std::array<double, 2>> weights;
    for (unsigned i = 0; i < r; ++i) {
        for (unsigned j = 0; i + j < r; ++j) {
            weights.push_back({i * weight_step, j * weight_step});
        }
    }
    const std::size_t nw = weights.size();

    // One task per (theta_0, theta_1) pair; the remaining three angles and all
    // weight pairs are enumerated inside.
    std::vector<detail::CellHeap> heaps(static_cast<std::size_t>(r) * r, detail::CellHeap(options.refine_cells));
    std::vector<std::size_t> feasible_counts(heaps.size(), 0);
    parallel_for(heaps.size(), options.threads, [&](std::size_t task) {
        detail::CellHeap &heap = heaps[task];
        std::array<unsigned, 5> k{static_cast<unsigned>(task / r), static_cast<unsigned>(task % r), 0, 0, 0};
        for (k[2] = 0; k[2] < r; ++k[2]) {
            for (k[3] = 0; k[3] < r; ++k[3]) {
                for (k[4] = 0; k[4] < r; ++k[4]) {
                    std::array<double, 4> theta{};
                    for (unsigned x = 0; x < 4; ++x) {
                        theta[x] = k[x] * angle_step;
                    }
                    double phi[2] = {0.0, k[4] * angle_step};
                    // Overlap and capped -log2 overlap of the projector each
                    // success event points at, per (z, x).
                    std::array<std::array<double, 4>, 2> ov{}, bits{};
                    for (int z = 0; z < 2; ++z) {
                        for (unsigned x = 0; x < 4; ++x) {
                            int target = Input(x).bit(z);
                            double o = born_probability(EquatorialState(theta[x]), MeasurementBasis(phi[z]), target);
                            ov[z][x] = o;
                            bits[z][x] = o > 0 ? std::min(cap, -std::log2(o)) : cap;
                        }
                    }
                    for (std::size_t a = 0; a < nw; ++a) {
                        for (std::size_t b = 0; b < nw; ++b) {
                            const std::array<double, 2> *w[2] = {&weights[a], &weights[b]};
                            std::array<double, 8> s{};
                            double worst = cap, sum = 0;
                            for (int z = 0; z < 2; ++z) {
                                double p = 1 - (*w[z])[0] - (*w[z])[1];
                                for (unsigned x = 0; x < 4; ++x) {
                                    s[cell_index(x, z)] = (*w[z])[Input(x).bit(z)] + p * ov[z][x];
                                    double h = p * bits[z][x];
                                    worst = std::min(worst, h);
                                    sum += h;
                                }
                            }
                            double viol = detail::total_violation(constraints, s);
                            double value = aggregate == Aggregate::WorstEvent ? worst : sum / 8;
                            if (viol == 0) {
                                ++feasible_counts[task];
                            }
                            double score = value + penalty * viol;
                            if (!heap.admits(score)) {
                                continue;
                            }
                            uint64_t index = ((((static_cast<uint64_t>(task) * r + k[2]) * r + k[3]) * r + k[4]) * nw + a) * nw + b;
                            detail::OraclePoint pt{theta[0], theta[1], theta[2], theta[3], phi[1],
                                                   weights[a][0], weights[a][1], weights[b][0], weights[b][1]};
                            heap.push({score, index, pt});
                        }
                    }
                }
            }
        }
    });

    std::vector<detail::GridCell> best;
    OracleResult result;
    for (std::size_t t = 0; t < heaps.size(); ++t) {
        auto &c = heaps[t].cells();
        best.insert(best.end(), c.begin(), c.end());
        result.feasible_cells += feasible_counts[t];
    }
    std::sort(best.begin(), best.end(), detail::cell_before);
    best.resize(std::min(best.size(), options.refine_cells));

    auto violation_of = [&](const detail::OraclePoint &v) {
        return detail::total_violation(constraints, detail::oracle_params(v).success_table());
    };
    auto value_of = [&](const detail::OraclePoint &v) {
        return aggregate_entropy(detail::oracle_params(v), aggregate, cap);
    };
    std::vector<detail::OraclePoint> refined(best.size());
    parallel_for(best.size(), options.threads, [&](std::size_t i) {
        std::array<double, 9> step{};
        for (unsigned j = 0; j < 9; ++j) {
            step[j] = j < 5 ? angle_step / 2 : weight_step / 2;
        }
        detail::OraclePoint x = best[i].point;
        double viol = violation_of(x);
        if (viol > 0) {
            x = detail::pattern_search(x, step, 1e-13, options.refine_evaluations, best[i].index,
                                       [&](const detail::OraclePoint &y) {
                                           double v = violation_of(y);
                                           if (v < viol) {
                                               viol = v;
                                               return true;
                                           }
                                           return false;
                                       });
        }
        if (viol > 0) {
            refined[i] = x;
            return;
        }
        double value = value_of(x);
        refined[i] = detail::pattern_search(x, step, 1e-10, options.refine_evaluations, best[i].index + 1,
                                            [&](const detail::OraclePoint &y) {
                                                if (violation_of(y) > 0) {
                                                    return false;
                                                }
                                                double v = value_of(y);
                                                if (v < value) {
                                                    value = v;
                                                    return true;
                                                }
                                                return false;
                                            });
    });

    for (const auto &x : refined) {
        if (violation_of(x) > 0) {
            continue;
        }
        double v = value_of(x);
        if (v < result.bits) {
            result.feasible = true;
            result.bits = v;
            result.params = detail::oracle_params(x);
        }
    }
    return result;
}

/// Throws InconsistencyError when the oracle and the optimizer contradict
/// each other: the optimizer claims feasibility the grid never found, or the
/// optimizer's minimum exceeds a point the grid exhibits.
inline void check_oracle_agreement(const CertificationResult &certified, const OracleResult &oracle,
                                   double tolerance = 1e-3) {
    if (certified.feasible && !oracle.feasible) {
        throw InconsistencyError("optimizer reports a feasible constraint set but the oracle grid found no feasible "
                                 "cell; increase the grid resolution");
    }
    if (oracle.feasible && certified.bits_per_event > oracle.bits + tolerance) {
        throw InconsistencyError("optimizer minimum " + std::to_string(certified.bits_per_event) +
                                 " bits exceeds the oracle's feasible point at " + std::to_string(oracle.bits) +
                                 " bits");
    }
}

}  // namespace sdiqrng

#endif
