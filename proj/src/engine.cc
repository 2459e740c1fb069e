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

#include "vtrack/engine.h"

#include "vtrack/error.h"

#include <algorithm>

namespace vtrack {

Engine::Engine(std::shared_ptr<const BuildingGraph> graph, EngineConfig config, std::unique_ptr<EventStore> store,
               std::uint64_t snapshot_every)
: graph_(graph)
, store_(std::move(store))
, snapshot_every_(snapshot_every)
, state_(graph, config)
{
    if (store_) {
        auto restored = restore(*store_, graph_, config);
        state_ = std::move(restored.state);
        restore_warnings_ = std::move(restored.warnings);
        last_snapshot_seq_ = restored.from_snapshot;
    }
}

std::unique_ptr<Engine> Engine::open(std::shared_ptr<const BuildingGraph> graph, EngineConfig config,
                                     StoreOptions store, std::uint64_t snapshot_every,
                                     std::shared_ptr<Storage> storage)
{
    return std::make_unique<Engine>(std::move(graph), config, EventStore::open(std::move(store), std::move(storage)),
                                    snapshot_every);
}

void Engine::check_running() const
{
    if (halted_) {
        throw Error(ErrorCode::IoFailure, "ingest halted after a storage failure");
    }
}

std::vector<ApplyResult> Engine::commit(const std::vector<RecordBody>& bodies)
{
    std::uint64_t first = state_.last_seq() + 1;
    if (store_) {
        try {
            first = store_->append_batch(bodies);
        }
        catch (const Error&) {
            halted_ = true;
            throw;
        }
    }
    std::vector<ApplyResult> results;
    for (std::size_t i = 0; i < bodies.size(); ++i) {
        LogRecord rec{first + i, bodies[i]};
        results.push_back(state_.apply(rec));
        if (!store_) {
            memory_log_.push_back(std::move(rec));
        }
    }
    published_.reset();
    return results;
}

Visitor Engine::register_visitor(const TagId& tag, const std::string& name, Demographic demographic, Timestamp at)
{
    std::optional<Visitor> v;
    {
        std::lock_guard lock(mu_);
        check_running();
        state_.check_register(tag);
        commit({record::Register{tag, at, demographic, validate_name(name)}});
        v = state_.visitor(tag);
    }
    maybe_snapshot();
    return *v;
}

std::vector<Visitor> Engine::register_roster(const wire::TagRoster& roster, Timestamp at)
{
    std::vector<Visitor> out;
    {
        std::lock_guard lock(mu_);
        check_running();
        std::vector<RecordBody> bodies;
        std::vector<TagId> seen;
        for (const auto& e : roster.entries) {
            state_.check_register(e.tag);
            if (std::find(seen.begin(), seen.end(), e.tag) != seen.end()) {
                throw Error(ErrorCode::TagAlreadyActive, "tag " + e.tag.str() + " listed twice");
            }
            seen.push_back(e.tag);
            bodies.push_back(record::Register{e.tag, at, Demographic::Unspecified, validate_name(e.name)});
        }
        if (bodies.empty()) {
            return out;
        }
        commit(bodies);
        for (const auto& t : seen) {
            out.push_back(*state_.visitor(t));
        }
    }
    maybe_snapshot();
    return out;
}

Visitor Engine::return_tag(const TagId& tag, Timestamp at)
{
    std::optional<Visitor> v;
    {
        std::lock_guard lock(mu_);
        check_running();
        state_.check_return(tag);
        commit({record::Return{tag, at}});
        v = state_.visitor(tag);
    }
    maybe_snapshot();
    return *v;
}

Checkpoint Engine::register_checkpoint(const NodeId& node, const std::string& name, const RoomId& room, Timestamp at)
{
    std::optional<Checkpoint> c;
    {
        std::lock_guard lock(mu_);
        check_running();
        state_.check_checkpoint(node, room);
        commit({record::CheckpointAdded{node, validate_name(name), room, at}});
        c = state_.checkpoint(node);
    }
    maybe_snapshot();
    return *c;
}

IngestResult Engine::ingest_report(const wire::ReportPayload& payload, std::string_view payload_bytes)
{
    IngestResult res;
    res.batch_id = wire::batch_id_for(payload, payload_bytes);
    const auto& recs = payload.report.records;
    res.records = recs.size();
    if (payload.tags && payload.tags->entries.size() != recs.size()) {
        throw Error(ErrorCode::GrammarError, "tag roster does not pair with the report records");
    }
    {
        std::lock_guard lock(mu_);
        check_running();
        if (state_.has_batch(res.batch_id)) {
            res.redelivered = true;
            return res;
        }
        if (recs.empty()) {
            return res;
        }
        if (!state_.checkpoint(recs.front().node)) {
            throw Error(ErrorCode::RejectedUnknownCheckpoint,
                        "node " + recs.front().node.str() + " is not a registered checkpoint");
        }
        Timestamp latest = recs.front().at;
        std::vector<RecordBody> bodies;
        bodies.emplace_back(record::Batch{res.batch_id, recs.front().node, latest,
                                          static_cast<std::uint32_t>(recs.size())});
        for (std::size_t i = 0; i < recs.size(); ++i) {
            std::optional<TagId> tag;
            if (payload.tags) {
                tag = payload.tags->entries[i].tag;
            }
            bodies.emplace_back(record::Read{tag, recs[i].node, recs[i].at});
            latest = std::max(latest, recs[i].at);
        }
        std::get<record::Batch>(bodies.front()).at = latest;
        auto results = commit(bodies);
        for (std::size_t i = 1; i < results.size(); ++i) {
            switch (results[i].outcome) {
            case ApplyOutcome::Applied: ++res.applied; break;
            case ApplyOutcome::Duplicate: ++res.duplicates; break;
            case ApplyOutcome::Quarantined: ++res.quarantined; break;
            }
        }
    }
    maybe_snapshot();
    return res;
}

void Engine::heartbeat(const wire::Heartbeat& hb)
{
    {
        std::lock_guard lock(mu_);
        check_running();
        if (!state_.checkpoint(hb.node)) {
            throw Error(ErrorCode::RejectedUnknownCheckpoint, "node " + hb.node.str() + " is not a registered checkpoint");
        }
        commit({record::Heartbeat{hb.node, hb.at}});
    }
    maybe_snapshot();
}

std::shared_ptr<const TrackingState> Engine::snapshot() const
{
    std::lock_guard lock(mu_);
    if (!published_) {
        published_ = std::make_shared<const TrackingState>(state_);
    }
    return published_;
}

std::uint64_t Engine::last_seq() const
{
    std::lock_guard lock(mu_);
    return state_.last_seq();
}

bool Engine::halted() const
{
    std::lock_guard lock(mu_);
    return halted_;
}

std::vector<LogRecord> Engine::memory_log() const
{
    std::lock_guard lock(mu_);
    return memory_log_;
}

void Engine::maybe_snapshot()
{
    if (!store_ || snapshot_every_ == 0) {
        return;
    }
    std::unique_lock snap_lock(snapshot_mu_, std::try_to_lock);
    if (!snap_lock.owns_lock()) {
        return; // another thread is writing one
    }
    std::shared_ptr<const TrackingState> state;
    {
        std::lock_guard lock(mu_);
        if (halted_ || state_.last_seq() < last_snapshot_seq_ + snapshot_every_) {
            return;
        }
        last_snapshot_seq_ = state_.last_seq();
    }
    state = snapshot();
    try {
        // Serialization and the file write run outside the ingest lock.
        store_->write_snapshot(*state);
    }
    catch (const Error&) {
        // A missing snapshot only costs replay time; the log stays authoritative.
    }
}

} // namespace vtrack
