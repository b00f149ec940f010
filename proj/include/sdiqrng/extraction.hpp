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

#ifndef SDIQRNG_EXTRACTION_HPP
#define SDIQRNG_EXTRACTION_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "sdiqrng/errors.hpp"
#include "sdiqrng/protocol.hpp"
#include "sdiqrng/round_log_io.hpp"

/// The raw string S and its von Neumann post-processing.
namespace sdiqrng {

/// One bit per unblocked round: the outcome if detected, 0 if empty.
struct RawString {
    std::vector<uint8_t> bits;
    uint64_t detected_zero = 0;
    uint64_t detected_one = 0;
    uint64_t empty_as_zero = 0;

    void add(const RoundRecord &r) {
        if (r.blocked) {
            return;
        }
        switch (r.b) {
            case Outcome::Zero:
                ++detected_zero;
                bits.push_back(0);
                break;
            case Outcome::One:
                ++detected_one;
                bits.push_back(1);
                break;
            case Outcome::Empty:
                ++empty_as_zero;
                bits.push_back(0);
                break;
        }
    }

    std::size_t size() const {
        return bits.size();
    }
};

inline RawString build_bit_string(std::span<const RoundRecord> records) {
    RawString s;
    for (const auto &r : records) {
        s.add(r);
    }
    return s;
}

inline RawString build_bit_string(const RoundLog &log) {
    return build_bit_string(std::span<const RoundRecord>(log.records));
}

/// Single pass over non-overlapping pairs: 01 -> 0, 10 -> 1, 00 and 11 are
/// dropped. An odd trailing bit is dropped too.
inline std::vector<uint8_t> von_neumann(std::span<const uint8_t> bits) {
    std::vector<uint8_t> out;
    out.reserve(bits.size() / 4);
    for (std::size_t i = 0; i + 1 < bits.size(); i += 2) {
        if (bits[i] != bits[i + 1]) {
            out.push_back(bits[i]);
        }
    }
    return out;
}

inline std::vector<uint8_t> von_neumann(const RawString &s) {
    return von_neumann(std::span<const uint8_t>(s.bits));
}

/// Path of the sidecar holding `n_bits=<count>` for a packed bit file.
inline std::filesystem::path bit_length_sidecar(const std::filesystem::path &path) {
    return std::filesystem::path(path.string() + ".meta");
}

/// Packs bits most-significant-first, zero-pads the last byte, and records
/// the exact length in the sidecar.
inline void write_packed_bits(const std::filesystem::path &path, std::span<const uint8_t> bits) {
    std::vector<char> bytes((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) {
            bytes[i / 8] = static_cast<char>(bytes[i / 8] | (0x80 >> (i % 8)));
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    std::ofstream meta(bit_length_sidecar(path), std::ios::trunc);
    meta << "n_bits=" << bits.size() << '\n';
    if (!out || !meta) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

inline std::vector<uint8_t> read_packed_bits(const std::filesystem::path &path) {
    std::ifstream meta_in(bit_length_sidecar(path));
    if (!meta_in) {
        throw ParseError(0, "missing sidecar " + bit_length_sidecar(path).string());
    }
    KeyValues meta = read_key_values(meta_in);
    auto it = meta.find("n_bits");
    if (it == meta.end()) {
        throw ParseError(1, "sidecar lacks n_bits");
    }
    auto n = detail::parse_number<uint64_t>(it->second, 1, "n_bits");
    std::ifstream in(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() != (n + 7) / 8) {
        throw ParseError(0, "packed file size does not match n_bits=" + std::to_string(n));
    }
    std::vector<uint8_t> bits(n);
    for (std::size_t i = 0; i < n; ++i) {
        bits[i] = (static_cast<unsigned char>(bytes[i / 8]) >> (7 - i % 8)) & 1;
    }
    return bits;
}

}  // namespace sdiqrng

#endif
