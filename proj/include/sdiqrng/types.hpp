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

#ifndef SDIQRNG_TYPES_HPP
#define SDIQRNG_TYPES_HPP

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "sdiqrng/errors.hpp"

namespace sdiqrng {

/// Two-bit preparation input x = x0 x1, written as the string "x0x1".
class Input {
   public:
    constexpr Input() = default;
    /// `value` in [0, 4): x0 is the high bit.
    explicit Input(unsigned value) : value_(static_cast<uint8_t>(value)) {
        if (value > 3) {
            throw DomainError("input x must be one of 00, 01, 10, 11");
        }
    }

    static Input parse(std::string_view text) {
        if (text.size() != 2 || (text[0] != '0' && text[0] != '1') || (text[1] != '0' && text[1] != '1')) {
            throw DomainError("input x must be one of 00, 01, 10, 11, got '" + std::string(text) + "'");
        }
        return Input(static_cast<unsigned>((text[0] - '0') * 2 + (text[1] - '0')));
    }

    constexpr unsigned value() const {
        return value_;
    }

    /// The bit x_z that setting z asks for.
    int bit(int z) const {
        if (z != 0 && z != 1) {
            throw DomainError("setting z must be 0 or 1");
        }
        return z == 0 ? (value_ >> 1) & 1 : value_ & 1;
    }

    std::string str() const {
        return {static_cast<char>('0' + ((value_ >> 1) & 1)), static_cast<char>('0' + (value_ & 1))};
    }

    friend constexpr bool operator==(Input, Input) = default;

    static constexpr std::array<unsigned, 4> all_values{0, 1, 2, 3};

   private:
    uint8_t value_ = 0;
};

/// Measurement outcome b in {0, 1, empty}.
enum class Outcome : uint8_t { Zero = 0, One = 1, Empty = 2 };

inline Outcome outcome_from_bit(int bit) {
    return bit ? Outcome::One : Outcome::Zero;
}

inline char outcome_char(Outcome b) {
    switch (b) {
        case Outcome::Zero:
            return '0';
        case Outcome::One:
            return '1';
        default:
            return '-';
    }
}

/// Index of the (x, z) cell in 8-entry tables: 2 * x + z.
constexpr unsigned cell_index(unsigned x, int z) {
    return 2 * x + static_cast<unsigned>(z);
}

enum class SyncModel { PerBlock, PerRun };

inline std::string_view to_string(SyncModel m) {
    return m == SyncModel::PerBlock ? "per_block" : "per_run";
}

inline SyncModel parse_sync_model(std::string_view s) {
    if (s == "per_block") {
        return SyncModel::PerBlock;
    }
    if (s == "per_run") {
        return SyncModel::PerRun;
    }
    throw DomainError("unknown sync model '" + std::string(s) + "' (expected per_block or per_run)");
}

}  // namespace sdiqrng

#endif
