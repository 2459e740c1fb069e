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

#include "vtrack/types.h"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Text codecs for the reader roster, the checkpoint report, and the frame
// envelope carried between reader nodes and the gateway. Emission is
// canonical and byte-stable; decoding tolerates blanks and line breaks next
// to the delimiters. The grammar is documented in docs/protocol.md.
namespace vtrack::wire {

struct RosterEntry {
    TagId tag;
    std::string name;

    bool operator==(const RosterEntry&) const = default;
};

struct TagRoster {
    std::vector<RosterEntry> entries;

    bool operator==(const TagRoster&) const = default;
};

struct ReportRecord {
    NodeId node;
    std::string name;
    RoomId location;
    Timestamp at;

    bool operator==(const ReportRecord&) const = default;
};

struct CheckpointReport {
    std::vector<ReportRecord> records;

    bool operator==(const CheckpointReport&) const = default;
};

inline constexpr std::string_view kRosterHeader = "<TagId | Name>=<";
// Spelled as deployed readers print it.
inline constexpr std::string_view kReportHeader = "<IpAdress | Name | Location | LastMeasurementTime>=<";

std::string encode_tag_roster(const TagRoster& roster);
// Throws GrammarError.
TagRoster decode_tag_roster(std::string_view text);

std::string encode_checkpoint_report(const CheckpointReport& report);
// Throws GrammarError, or FieldError when a field fails validation.
CheckpointReport decode_checkpoint_report(std::string_view text);

enum class FrameKind { Roster, Report, Heartbeat };

std::string_view to_string(FrameKind kind);

struct Frame {
    FrameKind kind;
    std::string payload;

    bool operator==(const Frame&) const = default;
};

// `KIND LF payload LF LF`. Throws Error(FrameError) if the payload contains
// a blank line or ends with a line feed.
std::string frame_message(FrameKind kind, std::string_view payload);

// Inverse of frame_message for exactly one frame. Throws Error(FrameError).
Frame unframe(std::string_view bytes);

// Incremental splitter for a persistent connection.
class FrameReader {
public:
    static constexpr std::size_t kMaxFrameBytes = 4 << 20;

    void feed(std::string_view bytes) { buffer_.append(bytes); }

    // Next complete frame, or nullopt if more bytes are needed.
    // Throws Error(FrameError) on an unknown kind or an oversized frame.
    std::optional<Frame> next();

    std::size_t buffered() const noexcept { return buffer_.size(); }

private:
    std::string buffer_;
};

// Payload of a report frame:
//   [ "batch " BATCH-ID LF ] checkpoint-report [ LF tag-roster ]
// When the roster is present it pairs 1:1 with the report records: record i
// is the passage of tag i. Records without a tag are bare measurements.
struct ReportPayload {
    std::optional<std::string> batch_id;
    CheckpointReport report;
    std::optional<TagRoster> tags;

    bool operator==(const ReportPayload&) const = default;
};

std::string encode_report_payload(const ReportPayload& payload);
ReportPayload decode_report_payload(std::string_view text);

// The explicit batch id if the payload carries one, otherwise a content id
// derived from the payload bytes.
std::string batch_id_for(const ReportPayload& decoded, std::string_view payload_bytes);

// 64-bit FNV-1a; stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view bytes);

struct Heartbeat {
    NodeId node;
    Timestamp at;

    bool operator==(const Heartbeat&) const = default;
};

// Heartbeat payload is `NODE SP TIMESTAMP`; an empty payload is a keepalive.
std::string encode_heartbeat(const Heartbeat& hb);
std::optional<Heartbeat> decode_heartbeat(std::string_view payload);

// One-line answer on the persistent ingest connection:
//   ack <batch-id> | ok | reject <status> <error text>
struct Reply {
    enum class Kind { Ack, Ok, Reject, Unavailable };
    Kind kind = Kind::Ok;
    int status = 200;
    // Batch id for Ack, error text for Reject and Unavailable.
    std::string detail;

    bool operator==(const Reply&) const = default;
};

// Unavailable is local-only and has no line form.
std::string format_reply(const Reply& reply);
// Throws Error(FrameError).
Reply parse_reply(std::string_view line);

} // namespace vtrack::wire
