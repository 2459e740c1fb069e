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

#include "vtrack/log_record.h"
#include "vtrack/tracking.h"

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace vtrack {

// An open file that only grows.
class AppendFile {
public:
    virtual ~AppendFile() = default;
    // Throws Error(IoFailure) or Error(StorageFull).
    virtual void write(std::string_view data) = 0;
    virtual void sync() = 0;
    virtual void truncate(std::uint64_t size) = 0;
};

// The filesystem operations the store needs. Tests substitute a wrapper that
// fails on demand.
class Storage {
public:
    virtual ~Storage() = default;
    virtual void make_dirs(const std::string& dir) = 0;
    // Plain file names in dir.
    virtual std::vector<std::string> list(const std::string& dir) = 0;
    virtual std::string read_file(const std::string& path) = 0;
    virtual std::uint64_t file_size(const std::string& path) = 0;
    virtual std::unique_ptr<AppendFile> open_append(const std::string& path) = 0;
    // Replaces path in one step (temporary file, sync, rename).
    virtual void write_atomic(const std::string& path, std::string_view data) = 0;
    virtual void truncate(const std::string& path, std::uint64_t size) = 0;
    virtual void remove(const std::string& path) = 0;
};

std::shared_ptr<Storage> posix_storage();

struct StoreOptions {
    std::string dir;
    std::uint64_t segment_bytes = 10ull * 1024 * 1024;
    // fdatasync after every append or group. Off only for throwaway runs.
    bool sync = true;
    // Snapshots kept on disk; older ones are deleted.
    std::size_t keep_snapshots = 2;
};

struct SegmentInfo {
    std::string path;
    std::uint64_t first_seq = 0;
    std::uint64_t last_seq = 0; // first_seq - 1 when empty
    std::uint64_t bytes = 0;
};

struct OpenReport {
    // Bytes cut from the tail of the last segment (torn line or partial group).
    std::uint64_t repaired_bytes = 0;
    std::vector<std::string> removed_temp_files;
};

// Segmented append-only log plus snapshot files in one directory:
//   events-<first_seq>.log   one encoded record per line
//   state-<seq>.snap         serialized TrackingState after record seq
// One writer. Reads touch only flushed data and may run concurrently.
class EventStore {
public:
    // Validates every record. Throws CorruptLogError for damage other than
    // an interrupted final write, which is repaired.
    static std::unique_ptr<EventStore> open(StoreOptions options,
                                            std::shared_ptr<Storage> storage = posix_storage());

    // Durable before returning. Throws Error(IoFailure | StorageFull); after
    // the first failure the store refuses every further append (fail-stop).
    std::uint64_t append(const RecordBody& body);
    // Group commit: one write and one sync. Returns the first seq.
    std::uint64_t append_batch(const std::vector<RecordBody>& bodies);

    std::uint64_t last_seq() const;
    bool failed() const;

    // Records seq..last_seq(). Throws Error(SeqOutOfRange) unless
    // 1 <= seq <= last_seq() + 1, CorruptLogError on damage.
    std::vector<LogRecord> read_from(std::uint64_t seq) const;
    void for_each_from(std::uint64_t seq, const std::function<void(const LogRecord&)>& fn) const;

    void write_snapshot(const TrackingState& state);
    void write_snapshot(std::uint64_t seq, std::string_view text);
    // Newest first.
    std::vector<std::uint64_t> snapshot_seqs() const;
    std::string read_snapshot(std::uint64_t seq) const;

    std::vector<SegmentInfo> segments() const;
    // Bytes of all store files.
    std::uint64_t disk_bytes() const;
    const OpenReport& open_report() const noexcept { return report_; }
    const StoreOptions& options() const noexcept { return options_; }

private:
    EventStore(StoreOptions options, std::shared_ptr<Storage> storage);
    void scan();
    std::uint64_t write_lines(const std::vector<RecordBody>& bodies);
    std::string segment_path(std::uint64_t first_seq) const;
    std::string snapshot_path(std::uint64_t seq) const;

    StoreOptions options_;
    std::shared_ptr<Storage> storage_;
    mutable std::mutex mu_;
    std::vector<SegmentInfo> segments_;
    std::unique_ptr<AppendFile> tail_;
    std::uint64_t last_seq_ = 0;
    bool failed_ = false;
    OpenReport report_;
};

struct RestoreResult {
    TrackingState state;
    // Snapshot the state was built from; 0 for a full replay.
    std::uint64_t from_snapshot = 0;
    std::vector<std::string> warnings;
};

// Newest usable snapshot plus the log tail. A damaged snapshot is reported
// in warnings and the next older one (finally a full replay) is used.
RestoreResult restore(const EventStore& store, std::shared_ptr<const BuildingGraph> graph, EngineConfig config);

} // namespace vtrack
