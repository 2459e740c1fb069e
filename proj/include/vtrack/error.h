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

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vtrack {

enum class ErrorCode {
    MalformedTagId,
    MalformedNodeId,
    MalformedTimestamp,
    MalformedName,
    MalformedRoomId,
    InvalidGraph,
    GrammarError,
    FieldError,
    FrameError,
    TagAlreadyActive,
    TagNotActive,
    UnknownCheckpoint,
    UnknownOrInactiveTag,
    QueryBeforeEpoch,
    InvalidInterval,
    CorruptLog,
    CorruptSnapshot,
    SeqOutOfRange,
    IoFailure,
    StorageFull,
    UnknownRoom,
    UnknownRoomInSnapshot,
    DuplicateNode,
    Unauthorized,
    NoChannels,
    InvalidParams,
    MissingNode,
    RejectedUnknownCheckpoint,
    InvalidConfig,
};

std::string_view to_string(ErrorCode code);

// Base of every error raised by the library. The code is the stable,
// machine-facing identity; what() is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    // The message without the code prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

class GrammarError : public Error {
public:
    GrammarError(std::size_t position, std::string expected);

    std::size_t position() const noexcept { return position_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t position_;
    std::string expected_;
};

class FieldError : public Error {
public:
    FieldError(std::size_t record_index, std::string field, const std::string& detail);

    std::size_t record_index() const noexcept { return record_index_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t record_index_;
    std::string field_;
};

class CorruptLogError : public Error {
public:
    CorruptLogError(std::uint64_t seq, const std::string& detail);

    // Sequence number of the first record that could not be trusted.
    std::uint64_t seq() const noexcept { return seq_; }

private:
    std::uint64_t seq_;
};

} // namespace vtrack
