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

#ifndef SDIQRNG_ERRORS_HPP
#define SDIQRNG_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdiqrng {

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// A value type was constructed with parameters violating its invariants.
struct InvariantViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Not enough rounds to estimate the requested statistic.
struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Estimator applied to the wrong kind of conditional table.
struct WrongVariant : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ParseError : std::runtime_error {
    ParseError(std::size_t line, const std::string &what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {
    }
    std::size_t line;
};

/// No adversary strategy reproduces the given constraints.
struct InfeasibleConstraints : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Multistart restarts failed to agree on the minimum.
struct NonConvergence : std::runtime_error {
    NonConvergence(const std::string &what, std::vector<double> restart_minima)
        : std::runtime_error(what), restart_minima(std::move(restart_minima)) {
    }
    std::vector<double> restart_minima;
};

/// The brute-force oracle contradicts the optimizer's feasibility verdict.
struct InconsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace sdiqrng

#endif
