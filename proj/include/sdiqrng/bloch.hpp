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

#ifndef SDIQRNG_BLOCH_HPP
#define SDIQRNG_BLOCH_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sdiqrng/errors.hpp"

/// Qubit algebra on the equator of the Bloch sphere.
///
/// Every state and projector handled by the protocol lies on the equator, so
/// a single angle describes each of them. The pure state at angle `theta` has
/// Bloch vector (cos theta, sin theta, 0).
namespace sdiqrng {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Min-entropy of an event that the projective branch can never produce.
inline constexpr double kUnboundedEntropy = std::numeric_limits<double>::infinity();

inline bool is_unbounded(double bits) {
    return bits == kUnboundedEntropy;
}

/// Reduces an angle to [0, 2pi). Throws DomainError on NaN or infinity.
inline double canonical_angle(double radians) {
    if (!std::isfinite(radians)) {
        throw DomainError("angle must be finite");
    }
    double r = std::fmod(radians, kTwoPi);
    if (r < 0) {
        r += kTwoPi;
    }
    if (r >= kTwoPi) {
        r = 0;
    }
    return r;
}

/// Distance between two angles on the circle, in [0, pi].
inline double angular_distance(double a, double b) {
    double d = std::fabs(std::fmod(a - b, kTwoPi));
    if (d > std::numbers::pi) {
        d = kTwoPi - d;
    }
    return d;
}

struct EquatorialState {
    EquatorialState() = default;
    explicit EquatorialState(double theta) : theta(canonical_angle(theta)) {
    }
    double theta = 0;
};

/// Two-outcome projective measurement: outcome 0 projects onto the state at
/// `phi`, outcome 1 onto the antipodal state at `phi + pi`.
struct MeasurementBasis {
    MeasurementBasis() = default;
    explicit MeasurementBasis(double phi) : phi(canonical_angle(phi)) {
    }
    double projector_angle(int outcome) const {
        return outcome == 0 ? phi : canonical_angle(phi + std::numbers::pi);
    }
    double phi = 0;
};

/// |<a|b>|^2 for the equatorial states at angles a and b, i.e. cos^2((a-b)/2).
inline double overlap(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("overlap: angles must be finite");
    }
    double d = angular_distance(a, b);
    // sin form keeps relative precision near orthogonality.
    if (d <= std::numbers::pi / 2) {
        double c = std::cos(d / 2);
        return c * c;
    }
    double s = std::sin((std::numbers::pi - d) / 2);
    return s * s;
}

inline void check_outcome(int outcome) {
    if (outcome != 0 && outcome != 1) {
        throw DomainError("outcome must be 0 or 1, got " + std::to_string(outcome));
    }
}

inline double born_probability(const EquatorialState &state, const MeasurementBasis &basis, int outcome) {
    check_outcome(outcome);
    return overlap(state.theta, basis.projector_angle(outcome));
}

/// The outcome-0 element E0 of a two-outcome qubit POVM, written in its
/// eigenbasis: E0 = c |m0><m0| + c_prime |m1><m1| with c >= c_prime.
struct PovmElement {
    PovmElement(double c, double c_prime, MeasurementBasis basis) : c(c), c_prime(c_prime), basis(basis) {
        if (!(0 <= c_prime && c_prime <= c && c <= 1)) {
            throw InvariantViolation(
                "PovmElement requires 0 <= c_prime <= c <= 1, got c=" + std::to_string(c) +
                " c_prime=" + std::to_string(c_prime));
        }
    }

    /// Builds E0 = a |phi><phi| + b |phi+pi><phi+pi| for any a, b in [0,1],
    /// swapping the eigenbasis when b > a so the ordering invariant holds.
    static PovmElement from_eigenvalues(double a, double b, MeasurementBasis basis) {
        if (a >= b) {
            return PovmElement(a, b, basis);
        }
        return PovmElement(b, a, MeasurementBasis(basis.phi + std::numbers::pi));
    }

    /// tr(E0 psi) for a pure equatorial state psi.
    double outcome0_probability(const EquatorialState &state) const {
        return c * born_probability(state, basis, 0) + c_prime * born_probability(state, basis, 1);
    }

    double c;
    double c_prime;
    MeasurementBasis basis;
};

/// Classical preprocessing followed by a projective measurement: answer 0
/// with probability q0, answer 1 with probability q1, otherwise measure in
/// `basis`.
struct LemmaStrategy {
    LemmaStrategy() = default;
    LemmaStrategy(double q0, double q1, MeasurementBasis basis) : q0(q0), q1(q1), basis(basis) {
        if (!(q0 >= 0 && q1 >= 0 && q0 + q1 <= 1 + 1e-12)) {
            throw InvariantViolation(
                "LemmaStrategy requires q0, q1 >= 0 and q0 + q1 <= 1, got q0=" + std::to_string(q0) +
                " q1=" + std::to_string(q1));
        }
    }

    /// Frequency of the projective branch.
    double p() const {
        double r = 1 - q0 - q1;
        return r < 0 ? 0 : r;
    }

    double q(int outcome) const {
        check_outcome(outcome);
        return outcome == 0 ? q0 : q1;
    }

    double q0 = 0;
    double q1 = 0;
    MeasurementBasis basis;
};

/// Rewrites a two-outcome POVM as classical preprocessing plus a projective
/// measurement: q0 = c_prime, q1 = 1 - c, measured in E0's eigenbasis.
inline LemmaStrategy lemma_decompose(const PovmElement &e0) {
    if (e0.c < e0.c_prime) {
        throw InvariantViolation("lemma_decompose: c < c_prime");
    }
    return LemmaStrategy(e0.c_prime, 1 - e0.c, e0.basis);
}

/// p(b|x,z) = q_b + p |<m_b|x>|^2.
inline double response_probability(const LemmaStrategy &strategy, const EquatorialState &state, int outcome) {
    return strategy.q(outcome) + strategy.p() * born_probability(state, strategy.basis, outcome);
}

/// Min-entropy of the event (outcome | state) against an adversary who knows
/// the strategy: -p log2 |<m_b|x>|^2. The classical branch contributes
/// nothing. Returns kUnboundedEntropy when p > 0 and the projective branch
/// can never yield `outcome`.
inline double event_min_entropy(const LemmaStrategy &strategy, const EquatorialState &state, int outcome) {
    double born = born_probability(state, strategy.basis, outcome);
    double p = strategy.p();
    if (p == 0) {
        return 0;
    }
    if (born == 0) {
        return kUnboundedEntropy;
    }
    return -p * std::log2(born);
}

}  // namespace sdiqrng

#endif
