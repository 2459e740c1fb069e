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
#include "vtrack/wire.h"

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vtrack {

struct DetectionModel {
    double read_range_m = 2.0;
    // Carried as metadata; it does not affect detection.
    double frequency_mhz = 13.56;
    double p_detect = 0.98;
    // Extra reads per passage, uniform in [dup_min, dup_max], spaced apart.
    int dup_min = 0;
    int dup_max = 3;
    std::int64_t dup_spacing_s = 1;

    // Throws Error(InvalidParams).
    void validate() const;
};

struct Observation {
    TagId tag;
    Timestamp at;
    bool operator==(const Observation&) const = default;
};

// Draws exactly two values from a generator seeded with `seed`: the detection
// draw and the duplicate count. So for one seed the passages detected at a
// lower p_detect are a subset of those detected at a higher one.
std::vector<Observation> observe_passage(const TagId& tag, Timestamp at, const DetectionModel& model,
                                         std::uint64_t seed);

struct ReportBatch {
    NodeId node;
    std::string name;
    RoomId room;
    std::vector<Observation> observations; // sorted by time, stable
    Timestamp created_at;
};

// Report payload for a batch: one record per observation plus the paired
// tag roster. The batch id is the content id.
wire::ReportPayload to_payload(const ReportBatch& batch);

class Batcher {
public:
    // Throws Error(InvalidParams) unless window_s >= 1.
    explicit Batcher(std::int64_t window_s);
    void add(const Observation& o);
    // The pending observations once window_s has passed since the earliest.
    std::optional<std::vector<Observation>> flush(Timestamp now);
    std::size_t pending() const noexcept { return pending_.size(); }
    bool empty() const noexcept { return pending_.empty(); }

private:
    std::int64_t window_s_;
    std::vector<Observation> pending_;
};

class GatewayLink {
public:
    virtual ~GatewayLink() = default;
    // Sends one complete frame and waits for the answer. Transport problems
    // come back as Reply::Kind::Unavailable rather than exceptions.
    virtual wire::Reply send(const std::string& frame) = 0;
};

class FunctionLink : public GatewayLink {
public:
    explicit FunctionLink(std::function<wire::Reply(const std::string&)> fn) : fn_(std::move(fn)) {}
    wire::Reply send(const std::string& frame) override { return fn_(frame); }

private:
    std::function<wire::Reply(const std::string&)> fn_;
};

struct ReaderConfig {
    NodeId node = NodeId::parse("127.0.0.1");
    std::string name = "reader";
    RoomId room = RoomId::parse("entrance");
    DetectionModel model;
    std::int64_t window_s = 5;
    std::int64_t heartbeat_s = 10;
    std::uint64_t seed = 1;
    std::int64_t backoff_initial_s = 1;
    std::int64_t backoff_cap_s = 60;
};

struct ReaderStats {
    std::uint64_t passages = 0;
    std::uint64_t observations = 0;
    std::uint64_t batches = 0;
    std::uint64_t acked = 0;
    std::uint64_t retries = 0;
    std::uint64_t heartbeats_sent = 0;
    std::uint64_t heartbeats_failed = 0;
};

// One checkpoint's reader agent, driven by an external clock through tick().
// Observations never leave the node before their own timestamp; batches are
// kept until acknowledged and retried with exponential backoff.
class ReaderNode {
public:
    ReaderNode(ReaderConfig config, std::shared_ptr<GatewayLink> link);

    void passage(const TagId& tag, Timestamp at);
    void tick(Timestamp now);

    bool halted() const noexcept { return halted_; }
    const std::string& halt_reason() const noexcept { return halt_reason_; }
    // Clears a halt after the operator registered the checkpoint.
    void resume();

    // Observations not yet in a delivered batch.
    std::size_t undelivered() const;
    bool idle() const;
    const ReaderStats& stats() const noexcept { return stats_; }
    const ReaderConfig& config() const noexcept { return config_; }

    // Sees every frame handed to the link, in order.
    void set_tap(std::function<void(const std::string&)> tap) { tap_ = std::move(tap); }

private:
    void deliver(Timestamp now);
    wire::Reply send(const std::string& frame);

    ReaderConfig config_;
    std::shared_ptr<GatewayLink> link_;
    std::function<void(const std::string&)> tap_;
    std::multimap<Timestamp, Observation> scheduled_;
    Batcher batcher_;
    std::deque<std::pair<std::string, std::size_t>> outbox_; // frame, observation count
    std::optional<Timestamp> next_heartbeat_;
    Timestamp next_attempt_;
    std::int64_t backoff_s_;
    bool halted_ = false;
    std::string halt_reason_;
    std::uint64_t passage_counter_ = 0;
    ReaderStats stats_;
};

} // namespace vtrack
