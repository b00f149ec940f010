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

#ifndef SDIQRNG_RNG_HPP
#define SDIQRNG_RNG_HPP

#include <cstdint>

namespace sdiqrng {

/// SplitMix64 finalizer.
constexpr uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Named random streams derived from one master seed.
enum class Stream : uint64_t {
    Inputs = 0x696e70757473ULL,
    Channel = 0x6368616e6e656cULL,
    Strategy = 0x7374726174ULL,
    Optimizer = 0x6f7074696dULL,
};

/// Counter-based generator: draw k of `index` in `stream` is a pure function
/// of (seed, stream, index, k), so any round can be regenerated on its own
/// and adding draws to one stream never shifts another.
class CounterStream {
   public:
    CounterStream(uint64_t seed, Stream stream, uint64_t index)
        : key_(mix64(mix64(seed ^ static_cast<uint64_t>(stream)) + index)) {
    }

    uint64_t next_u64() {
        return mix64(key_ + mix64(counter_++));
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double probability) {
        return uniform() < probability;
    }

    /// Uniform on {0, ..., 2^bits - 1}.
    unsigned bits(unsigned count) {
        return static_cast<unsigned>(next_u64() >> (64 - count));
    }

   private:
    uint64_t key_;
    uint64_t counter_ = 0;
};

}  // namespace sdiqrng

#endif
