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

#ifndef SDIQRNG_NELDER_MEAD_HPP
#define SDIQRNG_NELDER_MEAD_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>

namespace sdiqrng {

template <std::size_t N>
struct LocalMinimum {
    std::array<double, N> x{};
    double f = 0;
    std::size_t evaluations = 0;
};

/// Nelder-Mead simplex search (standard coefficients 1, 2, 1/2, 1/2).
/// Stops when the spread of function values drops below `f_tolerance` and
/// the simplex is smaller than `x_tolerance`, or after `max_evaluations`.
template <std::size_t N, typename F>
LocalMinimum<N> nelder_mead(F &&f, const std::array<double, N> &start, double step, std::size_t max_evaluations,
                            double f_tolerance = 1e-14, double x_tolerance = 1e-10) {
    using Point = std::array<double, N>;
    std::array<Point, N + 1> simplex;
    std::array<double, N + 1> values;
    std::size_t evals = 0;
    auto eval = [&](const Point &p) {
        ++evals;
        return f(p);
    };
    simplex[0] = start;
    values[0] = eval(start);
    for (std::size_t i = 0; i < N; ++i) {
        simplex[i + 1] = start;
        simplex[i + 1][i] += step;
        values[i + 1] = eval(simplex[i + 1]);
    }
    std::array<std::size_t, N + 1> order;
    while (evals < max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::size_t best = order[0];
        std::size_t worst = order[N];
        std::size_t second_worst = order[N - 1];

        double size = 0;
        for (std::size_t i = 0; i <= N; ++i) {
            for (std::size_t d = 0; d < N; ++d) {
                size = std::max(size, std::fabs(simplex[i][d] - simplex[best][d]));
            }
        }
        if (values[worst] - values[best] <= f_tolerance && size <= x_tolerance) {
            break;
        }
        if (size <= 1e-15) {
            break;
        }

        Point centroid{};
        for (std::size_t i = 0; i <= N; ++i) {
            if (i == worst) {
                continue;
            }
            for (std::size_t d = 0; d < N; ++d) {
                centroid[d] += simplex[i][d] / static_cast<double>(N);
            }
        }
        auto along = [&](double t) {
            Point p;
            for (std::size_t d = 0; d < N; ++d) {
                p[d] = centroid[d] + t * (simplex[worst][d] - centroid[d]);
            }
            return p;
        };

        Point reflected = along(-1);
        double fr = eval(reflected);
        if (fr < values[best]) {
            Point expanded = along(-2);
            double fe = eval(expanded);
            if (fe < fr) {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second_worst]) {
            simplex[worst] = reflected;
            values[worst] = fr;
            continue;
        }
        bool outside = fr < values[worst];
        Point contracted = along(outside ? -0.5 : 0.5);
        double fc = eval(contracted);
        if (fc < (outside ? fr : values[worst])) {
            simplex[worst] = contracted;
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= N; ++i) {
            if (i == best) {
                continue;
            }
            for (std::size_t d = 0; d < N; ++d) {
                simplex[i][d] = simplex[best][d] + 0.5 * (simplex[i][d] - simplex[best][d]);
            }
            values[i] = eval(simplex[i]);
        }
    }
    std::size_t best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    return {simplex[best], values[best], evals};
}

}  // namespace sdiqrng

#endif
