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
#include <variant>

namespace vtrack {

// One line of the event log:
//
//   SEQ <TAB> KIND <TAB> field... <TAB> CRC32
//
//   register    TAG  TS  DEMOGRAPHIC  NAME
//   return      TAG  TS
//   read        TAG|-  NODE  TS
//   heartbeat   NODE  TS
//   checkpoint  NODE  NAME  ROOM  TS
//   batch       BATCH-ID  NODE  TS  COUNT
//
// CRC32 is eight lowercase hex digits over every byte before its TAB.
namespace record {

struct Register {
    TagId tag;
    Timestamp at;
    Demographic demographic;
    std::string name;
    bool operator==(const Register&) const = default;
};

struct Return {
    TagId tag;
    Timestamp at;
    bool operator==(const Return&) const = default;
};

struct Read {
    std::optional<TagId> tag;
    NodeId node;
    Timestamp at;
    bool operator==(const Read&) const = default;
};

struct Heartbeat {
    NodeId node;
    Timestamp at;
    bool operator==(const Heartbeat&) const = default;
};

struct CheckpointAdded {
    NodeId node;
    std::string name;
    RoomId room;
    Timestamp at;
    bool operator==(const CheckpointAdded&) const = default;
};

// Opens a group of `count` records ingested together from one report
// frame. A group cut short by a crash is dropped when the log is opened.
struct Batch {
    std::string id;
    NodeId node;
    Timestamp at;
    std::uint32_t count = 0;
    bool operator==(const Batch&) const = default;
};

} // namespace record

using RecordBody = std::variant<record::Register, record::Return, record::Read, record::Heartbeat,
                                record::CheckpointAdded, record::Batch>;

struct LogRecord {
    std::uint64_t seq = 0;
    RecordBody body;

    bool operator==(const LogRecord&) const = default;
};

std::string_view kind_name(const RecordBody& body);
Timestamp time_of(const RecordBody& body);

// Without the trailing line feed.
std::string encode_record(const LogRecord& rec);

// Throws CorruptLogError. `expected_seq` is reported when the line is too
// damaged to yield its own sequence number.
LogRecord decode_record(std::string_view line, std::uint64_t expected_seq);

} // namespace vtrack
