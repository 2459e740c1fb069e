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

#include "vtrack/event_store.h"
#include "vtrack/tracking.h"
#include "vtrack/wire.h"

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace vtrack {

struct IngestResult {
    std::string batch_id;
    // Batch id seen before: acknowledged, nothing applied.
    bool redelivered = false;
    std::size_t records = 0;
    std::size_t applied = 0;
    std::size_t duplicates = 0;
    std::size_t quarantined = 0;
};

// The single ingest sequence: every mutation is checked against the current
// state, made durable in the store, then applied. Queries read immutable
// published copies and never see a half-applied mutation.
class Engine {
public:
    // Without a store the engine keeps its log in memory only.
    Engine(std::shared_ptr<const BuildingGraph> graph, EngineConfig config,
           std::unique_ptr<EventStore> store = nullptr, std::uint64_t snapshot_every = 10000);

    // Opens (or creates) the store and restores state from it.
    static std::unique_ptr<Engine> open(std::shared_ptr<const BuildingGraph> graph, EngineConfig config,
                                        StoreOptions store, std::uint64_t snapshot_every = 10000,
                                        std::shared_ptr<Storage> storage = posix_storage());

    // Throws TagAlreadyActive.
    Visitor register_visitor(const TagId& tag, const std::string& name, Demographic demographic, Timestamp at);
    // All-or-nothing precondition check, then one group commit.
    std::vector<Visitor> register_roster(const wire::TagRoster& roster, Timestamp at);
    // Throws TagNotActive.
    Visitor return_tag(const TagId& tag, Timestamp at);
    // Throws DuplicateNode, UnknownRoom.
    Checkpoint register_checkpoint(const NodeId& node, const std::string& name, const RoomId& room, Timestamp at);
    // The node of the first record is the reporter; it must be registered
    // (RejectedUnknownCheckpoint). payload_bytes feeds the content batch id.
    IngestResult ingest_report(const wire::ReportPayload& payload, std::string_view payload_bytes);
    // Throws RejectedUnknownCheckpoint.
    void heartbeat(const wire::Heartbeat& hb);

    std::shared_ptr<const TrackingState> snapshot() const;
    std::uint64_t last_seq() const;

    // Set after a storage failure; every mutation then throws IoFailure.
    bool halted() const;
    const std::vector<std::string>& restore_warnings() const noexcept { return restore_warnings_; }
    const EventStore* store() const noexcept { return store_.get(); }
    // In-memory log of a store-less engine.
    std::vector<LogRecord> memory_log() const;

private:
    // Appends and applies; caller holds mu_. Returns apply results.
    std::vector<ApplyResult> commit(const std::vector<RecordBody>& bodies);
    void check_running() const;
    void maybe_snapshot();

    std::shared_ptr<const BuildingGraph> graph_;
    std::unique_ptr<EventStore> store_;
    std::uint64_t snapshot_every_;
    std::vector<std::string> restore_warnings_;

    mutable std::mutex mu_;
    TrackingState state_;
    std::vector<LogRecord> memory_log_;
    bool halted_ = false;
    mutable std::shared_ptr<const TrackingState> published_;
    std::uint64_t last_snapshot_seq_ = 0;
    std::mutex snapshot_mu_;
};

} // namespace vtrack
