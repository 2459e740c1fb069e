// Copyright 2026 The vtrack Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vtrack/types.h"

#include "vtrack/error.h"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace vtrack {

namespace {

bool is_hex(char c)
{
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

char to_upper(char c) { return (c >= 'a' && c <= 'f') ? static_cast<char>(c - 'a' + 'A') : c; }
char to_lower(char c) { return (c >= 'A' && c <= 'F') ? static_cast<char>(c - 'A' + 'a') : c; }

bool all_digits(std::string_view s)
{
    if (s.empty()) {
        return false;
    }
    for (char c : s) {
        if (c < '0' || c > '9') {
            return false;
        }
    }
    return true;
}

std::optional<std::string> parse_ipv4(std::string_view raw)
{
    std::string out;
    std::size_t start = 0;
    for (int octet = 0; octet < 4; ++octet) {
        std::size_t end = raw.find('.', start);
        if ((octet < 3) != (end != std::string_view::npos)) {
            return std::nullopt;
        }
        std::string_view part = raw.substr(start, end == std::string_view::npos ? raw.npos : end - start);
        if (!all_digits(part) || part.size() > 3) {
            return std::nullopt;
        }
        int value = 0;
        std::from_chars(part.data(), part.data() + part.size(), value);
        if (value > 255) {
            return std::nullopt;
        }
        if (octet > 0) {
            out.push_back('.');
        }
        out += std::to_string(value);
        start = end + 1;
    }
    return out;
}

std::optional<std::string> parse_mac(std::string_view raw)
{
    if (raw.size() != 17) {
        return std::nullopt;
    }
    std::string out(raw);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (i % 3 == 2) {
            if (out[i] != ':') {
                return std::nullopt;
            }
        }
        else if (!is_hex(out[i])) {
            return std::nullopt;
        }
        else {
            out[i] = to_lower(out[i]);
        }
    }
    return out;
}

bool parse_fixed(std::string_view s, std::size_t pos, std::size_t len, unsigned& out)
{
    std::string_view part = s.substr(pos, len);
    if (part.size() != len || !all_digits(part)) {
        return false;
    }
    std::from_chars(part.data(), part.data() + len, out);
    return true;
}

} // namespace

TagId TagId::parse(std::string_view raw)
{
    if (raw.size() != kLength) {
        throw Error(ErrorCode::MalformedTagId,
                    "expected 10 hex digits, got " + std::to_string(raw.size()) + " characters");
    }
    std::string value(raw);
    for (char& c : value) {
        if (!is_hex(c)) {
            throw Error(ErrorCode::MalformedTagId, "non-hex character in '" + std::string(raw) + "'");
        }
        c = to_upper(c);
    }
    return TagId(std::move(value));
}

NodeId NodeId::parse(std::string_view raw)
{
    if (auto ip = parse_ipv4(raw)) {
        return NodeId(std::move(*ip), Kind::Ipv4);
    }
    if (auto mac = parse_mac(raw)) {
        return NodeId(std::move(*mac), Kind::Mac);
    }
    throw Error(ErrorCode::MalformedNodeId,
                "'" + std::string(raw) + "' is neither a dotted-quad IPv4 nor a colon-hex MAC");
}

Timestamp Timestamp::from_civil(int year, unsigned month, unsigned day,
                                unsigned hour, unsigned minute, unsigned second)
{
    using namespace std::chrono;
    year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok() || hour > 23 || minute > 59 || second > 59) {
        throw Error(ErrorCode::MalformedTimestamp, "calendar field out of range");
    }
    std::int64_t days = sys_days(ymd).time_since_epoch().count();
    return Timestamp(days * 86400 + hour * 3600 + minute * 60 + second);
}

Timestamp Timestamp::parse(std::string_view raw)
{
    // DD-MM-YYYYThh:mm:ss
    if (raw.size() != 19 || raw[2] != '-' || raw[5] != '-' || raw[10] != 'T' || raw[13] != ':'
        || raw[16] != ':') {
        throw Error(ErrorCode::MalformedTimestamp,
                    "'" + std::string(raw) + "' does not match DD-MM-YYYYThh:mm:ss");
    }
    unsigned dd = 0, mm = 0, yyyy = 0, h = 0, m = 0, s = 0;
    if (!parse_fixed(raw, 0, 2, dd) || !parse_fixed(raw, 3, 2, mm) || !parse_fixed(raw, 6, 4, yyyy)
        || !parse_fixed(raw, 11, 2, h) || !parse_fixed(raw, 14, 2, m)
        || !parse_fixed(raw, 17, 2, s)) {
        throw Error(ErrorCode::MalformedTimestamp, "non-digit in '" + std::string(raw) + "'");
    }
    if (yyyy == 0) {
        throw Error(ErrorCode::MalformedTimestamp, "year 0000 is not representable");
    }
    try {
        return from_civil(static_cast<int>(yyyy), mm, dd, h, m, s);
    }
    catch (const Error&) {
        throw Error(ErrorCode::MalformedTimestamp, "'" + std::string(raw) + "' is not a real date/time");
    }
}

std::string Timestamp::format() const
{
    using namespace std::chrono;
    std::int64_t days = s_ >= 0 ? s_ / 86400 : (s_ - 86399) / 86400;
    std::int64_t rem = s_ - days * 86400;
    year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02u-%02u-%04dT%02d:%02d:%02d",
                  static_cast<unsigned>(ymd.day()), static_cast<unsigned>(ymd.month()),
                  static_cast<int>(ymd.year()), static_cast<int>(rem / 3600),
                  static_cast<int>(rem / 60 % 60), static_cast<int>(rem % 60));
    return std::string(buf);
}

RoomId RoomId::parse(std::string_view raw)
{
    if (raw.empty()) {
        throw Error(ErrorCode::MalformedRoomId, "empty room id");
    }
    for (char c : raw) {
        auto u = static_cast<unsigned char>(c);
        if (u <= 0x20 || u == 0x7f) {
            throw Error(ErrorCode::MalformedRoomId, "whitespace or control character in room id");
        }
        switch (c) {
        case '|': case ',': case '<': case '>': case '=': case '#': case '/': case '?': case '&':
        case '%':
            throw Error(ErrorCode::MalformedRoomId,
                        std::string("reserved character '") + c + "' in room id '" + std::string(raw) + "'");
        default: break;
        }
    }
    return RoomId(std::string(raw));
}

std::string_view to_string(Demographic d)
{
    switch (d) {
    case Demographic::Female: return "female";
    case Demographic::Male: return "male";
    case Demographic::Unspecified: return "unspecified";
    }
    return "unspecified";
}

Demographic parse_demographic(std::string_view raw)
{
    if (raw == "female") return Demographic::Female;
    if (raw == "male") return Demographic::Male;
    if (raw == "unspecified") return Demographic::Unspecified;
    throw Error(ErrorCode::InvalidParams, "unknown demographic '" + std::string(raw) + "'");
}

std::string validate_name(std::string_view raw)
{
    if (raw.empty()) {
        throw Error(ErrorCode::MalformedName, "name is empty");
    }
    if (raw.front() == ' ' || raw.back() == ' ') {
        throw Error(ErrorCode::MalformedName, "name has leading or trailing blanks");
    }
    for (char c : raw) {
        auto u = static_cast<unsigned char>(c);
        if (u < 0x20 || u == 0x7f) {
            throw Error(ErrorCode::MalformedName, "control character in name");
        }
        if (c == '|' || c == ',' || c == '<' || c == '>') {
            throw Error(ErrorCode::MalformedName,
                        std::string("reserved character '") + c + "' in name '" + std::string(raw) + "'");
        }
    }
    return std::string(raw);
}

} // namespace vtrack
