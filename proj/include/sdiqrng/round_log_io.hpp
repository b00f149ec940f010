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

#ifndef SDIQRNG_ROUND_LOG_IO_HPP
#define SDIQRNG_ROUND_LOG_IO_HPP

#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "sdiqrng/errors.hpp"
#include "sdiqrng/protocol.hpp"

/// Text formats: the round log CSV and flat key=value config files.
namespace sdiqrng {

inline constexpr std::string_view kRoundLogHeader = "round_id,x,y,z,blocked,b";

inline void write_round_header(std::ostream &out) {
    out << kRoundLogHeader << '\n';
}

inline void write_round(std::ostream &out, const RoundRecord &r) {
    char y[32];
    std::snprintf(y, sizeof(y), "%.17g", r.y);
    out << r.round_id << ',' << r.x.str() << ',' << y << ',' << r.z << ',' << (r.blocked ? 1 : 0) << ','
        << outcome_char(r.b) << '\n';
}

inline void write_round_log(std::ostream &out, const RoundLog &log) {
    write_round_header(out);
    for (const auto &r : log.records) {
        write_round(out, r);
    }
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char *name) {
    T value{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError(line, std::string("bad ") + name + " '" + std::string(field) + "'");
    }
    return value;
}

}  // namespace detail

/// Parses one data line; `line` is the 1-based line number for errors.
inline RoundRecord parse_round(std::string_view text, std::size_t line) {
    if (!text.empty() && text.back() == '\r') {
        text.remove_suffix(1);
    }
    auto f = detail::split_commas(text);
    if (f.size() != 6) {
        throw ParseError(line, "expected 6 fields, got " + std::to_string(f.size()));
    }
    RoundRecord r;
    r.round_id = detail::parse_number<uint64_t>(f[0], line, "round_id");
    try {
        r.x = Input::parse(f[1]);
    } catch (const DomainError &e) {
        throw ParseError(line, e.what());
    }
    r.y = detail::parse_number<double>(f[2], line, "y");
    if (!(r.y >= 0 && r.y <= 1)) {
        throw ParseError(line, "y outside [0, 1]");
    }
    if (f[3] != "0" && f[3] != "1") {
        throw ParseError(line, "z must be 0 or 1");
    }
    r.z = f[3][0] - '0';
    if (f[4] != "0" && f[4] != "1") {
        throw ParseError(line, "blocked must be 0 or 1");
    }
    r.blocked = f[4] == "1";
    if (f[5] == "0") {
        r.b = Outcome::Zero;
    } else if (f[5] == "1") {
        r.b = Outcome::One;
    } else if (f[5] == "-") {
        r.b = Outcome::Empty;
    } else {
        throw ParseError(line, "b must be 0, 1 or -");
    }
    if (r.blocked && r.b != Outcome::Empty) {
        throw ParseError(line, "blocked round with an outcome");
    }
    return r;
}

/// Streams a round log into `sink`, one record at a time. Round ids must
/// increase strictly; the file must end with a newline so truncation inside
/// the last record is detected. Returns the number of records.
template <typename Sink>
std::size_t for_each_logged_round(std::istream &in, Sink &&sink) {
    std::string text;
    if (!std::getline(in, text)) {
        throw ParseError(1, "missing header");
    }
    if (!text.empty() && text.back() == '\r') {
        text.pop_back();
    }
    if (text != kRoundLogHeader) {
        throw ParseError(1, "expected header '" + std::string(kRoundLogHeader) + "'");
    }
    std::size_t line = 1;
    std::size_t count = 0;
    uint64_t previous = 0;
    while (std::getline(in, text)) {
        ++line;
        if (in.eof()) {
            throw ParseError(line, "truncated record (no trailing newline)");
        }
        if (text.empty()) {
            throw ParseError(line, "empty line");
        }
        RoundRecord r = parse_round(text, line);
        if (count > 0 && r.round_id <= previous) {
            throw ParseError(line, "round_id not strictly increasing");
        }
        previous = r.round_id;
        ++count;
        sink(r);
    }
    return count;
}

inline std::vector<RoundRecord> read_round_records(std::istream &in) {
    std::vector<RoundRecord> records;
    for_each_logged_round(in, [&](const RoundRecord &r) { records.push_back(r); });
    return records;
}

using KeyValues = std::map<std::string, std::string>;

inline void write_key_values(std::ostream &out, const KeyValues &kv) {
    for (const auto &[k, v] : kv) {
        out << k << '=' << v << '\n';
    }
}

/// Flat key=value lines; blank lines and lines starting with '#' are skipped.
inline KeyValues read_key_values(std::istream &in) {
    KeyValues kv;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') {
            text.pop_back();
        }
        if (text.empty() || text[0] == '#') {
            continue;
        }
        auto eq = text.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ParseError(line, "expected key=value");
        }
        kv[text.substr(0, eq)] = text.substr(eq + 1);
    }
    return kv;
}

}  // namespace sdiqrng

#endif
