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

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace vtrack {

// RFID tag identity: exactly ten hexadecimal digits, stored uppercase.
class TagId {
public:
    static constexpr std::size_t kLength = 10;

    // Throws Error(MalformedTagId).
    static TagId parse(std::string_view raw);

    const std::string& str() const noexcept { return value_; }

    auto operator<=>(const TagId&) const = default;

private:
    explicit TagId(std::string value) : value_(std::move(value)) {}
    std::string value_;
};

// Network identity of a reader node: dotted-quad IPv4 or colon-hex MAC.
class NodeId {
public:
    enum class Kind { Ipv4, Mac };

    // Canonicalizes (MAC lowercased, IPv4 octets without leading zeros).
    // Throws Error(MalformedNodeId).
    static NodeId parse(std::string_view raw);

    const std::string& str() const noexcept { return value_; }
    Kind kind() const noexcept { return kind_; }

    bool operator==(const NodeId& other) const noexcept { return value_ == other.value_; }
    auto operator<=>(const NodeId& other) const noexcept { return value_ <=> other.value_; }

private:
    NodeId(std::string value, Kind kind) : value_(std::move(value)), kind_(kind) {}
    std::string value_;
    Kind kind_;
};

// Wall-clock instant at one-second resolution with no zone. Text form is
// DD-MM-YYYYThh:mm:ss.
class Timestamp {
public:
    constexpr Timestamp() = default;

    static constexpr Timestamp from_seconds(std::int64_t s) { return Timestamp(s); }
    static Timestamp from_civil(int year, unsigned month, unsigned day,
                                unsigned hour = 0, unsigned minute = 0, unsigned second = 0);

    // Throws Error(MalformedTimestamp).
    static Timestamp parse(std::string_view raw);
    std::string format() const;

    // Seconds since 01-01-1970T00:00:00.
    constexpr std::int64_t seconds() const noexcept { return s_; }

    constexpr Timestamp operator+(std::int64_t seconds) const { return Timestamp(s_ + seconds); }
    constexpr Timestamp operator-(std::int64_t seconds) const { return Timestamp(s_ - seconds); }
    constexpr std::int64_t operator-(Timestamp other) const { return s_ - other.s_; }

    auto operator<=>(const Timestamp&) const = default;

private:
    explicit constexpr Timestamp(std::int64_t s) : s_(s) {}
    std::int64_t s_ = 0;
};

inline std::string format_timestamp(Timestamp t) { return t.format(); }
inline Timestamp parse_timestamp(std::string_view raw) { return Timestamp::parse(raw); }

// Room identifier token: non-empty, no whitespace, no grammar characters.
class RoomId {
public:
    // Throws Error(MalformedRoomId).
    static RoomId parse(std::string_view raw);

    const std::string& str() const noexcept { return value_; }

    auto operator<=>(const RoomId&) const = default;

private:
    explicit RoomId(std::string value) : value_(std::move(value)) {}
    std::string value_;
};

enum class Demographic { Female, Male, Unspecified };

std::string_view to_string(Demographic d);
// Accepts female|male|unspecified. Throws Error(InvalidParams).
Demographic parse_demographic(std::string_view raw);

// Human-readable label used for visitor and checkpoint names. Rejects the
// wire-reserved characters '|', ',', '<', '>', control characters, and
// leading or trailing blanks. Throws Error(MalformedName).
std::string validate_name(std::string_view raw);

inline TagId validate_tag_id(std::string_view raw) { return TagId::parse(raw); }
inline NodeId normalize_node_id(std::string_view raw) { return NodeId::parse(raw); }

enum class VisitorStatus { Active, Returned };

struct Visitor {
    TagId tag;
    std::string name;
    Demographic demographic = Demographic::Unspecified;
    Timestamp issued_at;
    VisitorStatus status = VisitorStatus::Active;

    bool operator==(const Visitor&) const = default;
};

struct Checkpoint {
    NodeId node;
    std::string name;
    RoomId location;
    std::optional<Timestamp> last_report;

    bool operator==(const Checkpoint&) const = default;
};

// One observation at a checkpoint. A read without a tag is a bare
// checkpoint measurement (it only refreshes the checkpoint's liveness).
struct ReadEvent {
    std::optional<TagId> tag;
    NodeId node;
    Timestamp observed_at;
    std::uint64_t seq = 0;

    bool operator==(const ReadEvent&) const = default;
};

} // namespace vtrack

template <>
struct std::hash<vtrack::TagId> {
    std::size_t operator()(const vtrack::TagId& t) const noexcept
    {
        return std::hash<std::string>{}(t.str());
    }
};

template <>
struct std::hash<vtrack::NodeId> {
    std::size_t operator()(const vtrack::NodeId& n) const noexcept
    {
        return std::hash<std::string>{}(n.str());
    }
};

template <>
struct std::hash<vtrack::RoomId> {
    std::size_t operator()(const vtrack::RoomId& r) const noexcept
    {
        return std::hash<std::string>{}(r.str());
    }
};
