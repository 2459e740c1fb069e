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

#include "vtrack/error.h"

namespace vtrack {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::MalformedTagId: return "MalformedTagId";
    case ErrorCode::MalformedNodeId: return "MalformedNodeId";
    case ErrorCode::MalformedTimestamp: return "MalformedTimestamp";
    case ErrorCode::MalformedName: return "MalformedName";
    case ErrorCode::MalformedRoomId: return "MalformedRoomId";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::GrammarError: return "GrammarError";
    case ErrorCode::FieldError: return "FieldError";
    case ErrorCode::FrameError: return "FrameError";
    case ErrorCode::TagAlreadyActive: return "TagAlreadyActive";
    case ErrorCode::TagNotActive: return "TagNotActive";
    case ErrorCode::UnknownCheckpoint: return "UnknownCheckpoint";
    case ErrorCode::UnknownOrInactiveTag: return "UnknownOrInactiveTag";
    case ErrorCode::QueryBeforeEpoch: return "QueryBeforeEpoch";
    case ErrorCode::InvalidInterval: return "InvalidInterval";
    case ErrorCode::CorruptLog: return "CorruptLog";
    case ErrorCode::CorruptSnapshot: return "CorruptSnapshot";
    case ErrorCode::SeqOutOfRange: return "SeqOutOfRange";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::StorageFull: return "StorageFull";
    case ErrorCode::UnknownRoom: return "UnknownRoom";
    case ErrorCode::UnknownRoomInSnapshot: return "UnknownRoomInSnapshot";
    case ErrorCode::DuplicateNode: return "DuplicateNode";
    case ErrorCode::Unauthorized: return "Unauthorized";
    case ErrorCode::NoChannels: return "NoChannels";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::MissingNode: return "MissingNode";
    case ErrorCode::RejectedUnknownCheckpoint: return "RejectedUnknownCheckpoint";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
: std::runtime_error(std::string(to_string(code)) + ": " + message)
, code_(code)
, detail_(message)
{
}

GrammarError::GrammarError(std::size_t position, std::string expected)
: Error(ErrorCode::GrammarError,
        "expected " + expected + " at position " + std::to_string(position))
, position_(position)
, expected_(std::move(expected))
{
}

FieldError::FieldError(std::size_t record_index, std::string field, const std::string& detail)
: Error(ErrorCode::FieldError,
        "record " + std::to_string(record_index) + " field " + field + ": " + detail)
, record_index_(record_index)
, field_(std::move(field))
{
}

CorruptLogError::CorruptLogError(std::uint64_t seq, const std::string& detail)
: Error(ErrorCode::CorruptLog, "at seq " + std::to_string(seq) + ": " + detail)
, seq_(seq)
{
}

} // namespace vtrack
