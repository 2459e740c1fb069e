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

#include "vtrack/building_graph.h"
#include "vtrack/log_record.h"
#include "vtrack/types.h"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace vtrack {

struct EngineConfig {
    // Reads of one tag at one checkpoint closer than this to the previous
    // read of the same pair are duplicates.
    std::int64_t dedup_window_s = 2;
    // A checkpoint silent for more than three periods is reported stale.
    std::int64_t heartbeat_period_s = 10;

    bool operator==(const EngineConfig&) const = default;
};

struct TrackRecord {
    TagId tag;
    RoomId last_room;
    Timestamp last_seen;
    std::vector<std::pair<RoomId, Timestamp>> history;
};

struct OccupancySnapshot {
    Timestamp at;
    std::uint64_t seq = 0;
    // Every room of the graph, in declaration order.
    std::vector<std::pair<RoomId, std::int64_t>> per_room;
    std::int64_t total = 0;
    std::map<Demographic, std::int64_t> by_demographic;
    std::set<NodeId> stale_checkpoints;

    std::int64_t count(const RoomId& room) const;
    bool operator==(const OccupancySnapshot&) const = default;
};

struct IntervalFlow {
    RoomId room;
    Timestamp from;
    Timestamp to;
    std::int64_t entered = 0;
    std::int64_t left = 0;

    bool operator==(const IntervalFlow&) const = default;
};

struct Diagnostics {
    std::uint64_t applied_reads = 0;
    std::uint64_t measurements = 0;
    std::uint64_t duplicates = 0;
    std::uint64_t unknown_checkpoint = 0;
    std::uint64_t unknown_or_inactive_tag = 0;
    std::uint64_t stale_reads = 0;
    std::uint64_t rejected_records = 0;
    std::uint64_t observed_transitions = 0;

    bool operator==(const Diagnostics&) const = default;
};

enum class ApplyOutcome { Applied, Duplicate, Quarantined };

struct ApplyResult {
    ApplyOutcome outcome = ApplyOutcome::Applied;
    std::string reason;
};

// Keeps, per (tag, checkpoint) group, every read that is more than window_s
// after the previous read of the same group (ordered by observed time, ties
// by input order). Survivors keep their input order. Throws
// Error(InvalidParams) for a negative window.
std::vector<ReadEvent> dedupe(std::span<const ReadEvent> events, std::int64_t window_s);

// The event-sourced state: a deterministic fold of log records. apply()
// never throws on semantically invalid records; it quarantines them and
// counts the reason, so any log replays to exactly the state that wrote it.
class TrackingState {
public:
    TrackingState(std::shared_ptr<const BuildingGraph> graph, EngineConfig config);

    const BuildingGraph& graph() const noexcept { return *graph_; }
    std::shared_ptr<const BuildingGraph> graph_ptr() const noexcept { return graph_; }
    const EngineConfig& config() const noexcept { return config_; }

    // Throws CorruptLogError if rec.seq != last_seq() + 1.
    ApplyResult apply(const LogRecord& rec);

    std::uint64_t last_seq() const noexcept { return last_seq_; }
    std::optional<Timestamp> epoch() const noexcept { return epoch_; }
    std::optional<Timestamp> latest() const noexcept { return latest_; }

    // Preconditions checked before a mutation is logged.
    void check_register(const TagId& tag) const;            // TagAlreadyActive
    void check_return(const TagId& tag) const;              // TagNotActive
    void check_checkpoint(const NodeId& node, const RoomId& room) const; // DuplicateNode, UnknownRoom

    // Latest issuance of the tag, if any.
    std::optional<Visitor> visitor(const TagId& tag) const;
    // Every issuance of the tag, oldest first.
    std::vector<Visitor> issuances(const TagId& tag) const;
    std::size_t active_visitors() const noexcept { return active_; }
    std::vector<Visitor> active_visitor_list() const;

    std::optional<Checkpoint> checkpoint(const NodeId& node) const;
    std::vector<Checkpoint> checkpoints() const;
    bool has_batch(const std::string& id) const { return batches_.count(id) != 0; }
    std::size_t batch_count() const noexcept { return batches_.size(); }

    // Current state when `at` is empty. Throws QueryBeforeEpoch.
    OccupancySnapshot occupancy(std::optional<Timestamp> at = std::nullopt) const;

    std::optional<std::pair<RoomId, Timestamp>> last_known(const TagId& tag) const;
    // As known at `at` for the issuance current at that instant.
    std::optional<std::pair<RoomId, Timestamp>> last_known(const TagId& tag, Timestamp at) const;
    std::optional<TrackRecord> track(const TagId& tag) const;

    // Throws InvalidInterval, UnknownRoom.
    IntervalFlow interval_flow(const RoomId& room, Timestamp from, Timestamp to) const;

    const Diagnostics& diagnostics() const noexcept { return diag_; }

    // Canonical text; equal states serialize to identical bytes.
    std::string serialize() const;
    // Throws Error(CorruptSnapshot).
    static TrackingState deserialize(std::shared_ptr<const BuildingGraph> graph, EngineConfig config,
                                     std::string_view text);

private:
    struct Issuance {
        Visitor visitor;
        RoomId current;
        Timestamp last_seen;
        std::vector<std::pair<RoomId, Timestamp>> history;
        std::optional<Timestamp> returned_at;
    };

    struct CheckpointEntry {
        Checkpoint checkpoint;
        Timestamp registered_at;
        std::vector<Timestamp> reports; // sorted
    };

    // Entries into and exits from one bucket (a room or a demographic).
    struct Series {
        std::vector<Timestamp> entries; // sorted
        std::vector<Timestamp> exits;   // sorted
        std::int64_t at(Timestamp t) const;
    };

    Issuance* active_issuance(const TagId& tag);
    const Issuance* issuance_at(const TagId& tag, Timestamp at) const;
    void move(const Issuance& who, const RoomId& from, const RoomId& to, Timestamp at);
    void enter(const Issuance& who, const RoomId& room, Timestamp at);
    void leave(const Issuance& who, const RoomId& room, Timestamp at);
    void note_report(CheckpointEntry& cp, Timestamp at);
    void note_time(Timestamp at);
    void rebuild_series();
    ApplyResult quarantine(std::uint64_t& counter, std::string reason);

    ApplyResult apply_register(const record::Register& r);
    ApplyResult apply_return(const record::Return& r);
    ApplyResult apply_read(const record::Read& r);
    ApplyResult apply_heartbeat(const record::Heartbeat& r);
    ApplyResult apply_checkpoint(const record::CheckpointAdded& r);

    std::shared_ptr<const BuildingGraph> graph_;
    EngineConfig config_;
    std::uint64_t last_seq_ = 0;
    std::optional<Timestamp> epoch_;
    std::optional<Timestamp> latest_;
    std::map<TagId, std::vector<Issuance>> visitors_;
    std::size_t active_ = 0;
    std::map<NodeId, CheckpointEntry> checkpoints_;
    std::map<std::pair<std::string, NodeId>, Timestamp> last_read_; // key: tag text or "-"
    std::set<std::string> batches_;
    std::vector<Series> rooms_; // indexed like graph rooms
    std::map<Demographic, Series> demographics_;
    Diagnostics diag_;
};

// Folds a record sequence starting at seq 1. Throws CorruptLogError.
TrackingState replay(std::shared_ptr<const BuildingGraph> graph, EngineConfig config,
                     std::span<const LogRecord> log);
// Same, from log text (one record per line, every line LF-terminated).
TrackingState replay_text(std::shared_ptr<const BuildingGraph> graph, EngineConfig config, std::string_view text);

} // namespace vtrack
