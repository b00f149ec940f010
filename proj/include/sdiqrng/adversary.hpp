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

#ifndef SDIQRNG_ADVERSARY_HPP
#define SDIQRNG_ADVERSARY_HPP

#include <array>
#include <numbers>

#include "sdiqrng/bloch.hpp"
#include "sdiqrng/types.hpp"

namespace sdiqrng {

/// A full Lemma-family device pair: one equatorial state per input x and one
/// classical-preprocessing-plus-projective measurement per setting z.
struct AdversaryParams {
    std::array<EquatorialState, 4> states;
    std::array<LemmaStrategy, 2> measurements;

    /// Pr[b = x_z | x, z].
    double success_probability(Input x, int z) const {
        return response_probability(measurements[z], states[x.value()], x.bit(z));
    }

    /// Min-entropy of the success event (b = x_z | x, z).
    double success_entropy(Input x, int z) const {
        return event_min_entropy(measurements[z], states[x.value()], x.bit(z));
    }

    /// Success probabilities in cell order 2x + z.
    std::array<double, 8> success_table() const {
        std::array<double, 8> out{};
        for (unsigned x : Input::all_values) {
            for (int z = 0; z < 2; ++z) {
                out[cell_index(x, z)] = success_probability(Input(x), z);
            }
        }
        return out;
    }

    /// Same devices with every state and basis rotated by `angle`.
    AdversaryParams rotated(double angle) const {
        AdversaryParams r = *this;
        for (auto &s : r.states) {
            s = EquatorialState(s.theta + angle);
        }
        for (auto &m : r.measurements) {
            m.basis = MeasurementBasis(m.basis.phi + angle);
        }
        return r;
    }
};

/// States and bases of the standard 2->1 random access code; every success
/// probability equals cos^2(pi/8).
inline AdversaryParams qrac_params() {
    using std::numbers::pi;
    AdversaryParams a;
    a.states = {EquatorialState(pi / 4), EquatorialState(7 * pi / 4), EquatorialState(3 * pi / 4),
                EquatorialState(5 * pi / 4)};
    a.measurements = {LemmaStrategy(0, 0, MeasurementBasis(0)), LemmaStrategy(0, 0, MeasurementBasis(pi / 2))};
    return a;
}

}  // namespace sdiqrng

#endif
