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

#include "vtrack/reader_node.h"

#include "vtrack/error.h"
#include "vtrack/simulator.h"

#include <algorithm>
#include <cmath>
#include <random>

namespace vtrack {

void DetectionModel::validate() const
{
    if (!(p_detect >= 0 && p_detect <= 1)) {
        throw Error(ErrorCode::InvalidParams, "p_detect must be within [0, 1]");
    }
    if (!(read_range_m > 0) || !std::isfinite(read_range_m)) {
        throw Error(ErrorCode::InvalidParams, "read range must be positive");
    }
    if (dup_min < 0 || dup_max < dup_min) {
        throw Error(ErrorCode::InvalidParams, "duplicate profile needs 0 <= min <= max");
    }
    if (dup_spacing_s < 1) {
        throw Error(ErrorCode::InvalidParams, "duplicate spacing must be >= 1 s");
    }
}

std::vector<Observation> observe_passage(const TagId& tag, Timestamp at, const DetectionModel& model,
                                         std::uint64_t seed)
{
    model.validate();
    std::mt19937_64 rng(seed);
    const double u = unit_interval(rng());
    const std::uint64_t k_bits = rng();
    if (!(u < model.p_detect)) {
        return {};
    }
    const auto span = static_cast<std::uint64_t>(model.dup_max - model.dup_min + 1);
    const auto extra = static_cast<std::int64_t>(model.dup_min) + static_cast<std::int64_t>(k_bits % span);
    std::vector<Observation> out;
    for (std::int64_t j = 0; j <= extra; ++j) {
        out.push_back(Observation{tag, at + j * model.dup_spacing_s});
    }
    return out;
}

wire::ReportPayload to_payload(const ReportBatch& batch)
{
    wire::ReportPayload p;
    wire::TagRoster tags;
    for (const auto& o : batch.observations) {
        p.report.records.push_back(wire::ReportRecord{batch.node, batch.name, batch.room, o.at});
        tags.entries.push_back(wire::RosterEntry{o.tag, "-"});
    }
    p.tags = std::move(tags);
    return p;
}

Batcher::Batcher(std::int64_t window_s) : window_s_(window_s)
{
    if (window_s < 1) {
        throw Error(ErrorCode::InvalidParams, "batch window must be >= 1 s");
    }
}

void Batcher::add(const Observation& o)
{
    // Keep sorted; equal times stay in arrival order.
    auto it = std::upper_bound(pending_.begin(), pending_.end(), o.at,
                               [](Timestamp t, const Observation& x) { return t < x.at; });
    pending_.insert(it, o);
}

std::optional<std::vector<Observation>> Batcher::flush(Timestamp now)
{
    if (pending_.empty() || now - pending_.front().at < window_s_) {
        return std::nullopt;
    }
    std::vector<Observation> out;
    out.swap(pending_);
    return out;
}

ReaderNode::ReaderNode(ReaderConfig config, std::shared_ptr<GatewayLink> link)
: config_(std::move(config))
, link_(std::move(link))
, batcher_(config_.window_s)
, backoff_s_(config_.backoff_initial_s)
{
    config_.model.validate();
    validate_name(config_.name);
    if (config_.heartbeat_s < 1 || config_.backoff_initial_s < 1 || config_.backoff_cap_s < config_.backoff_initial_s) {
        throw Error(ErrorCode::InvalidParams, "heartbeat and backoff periods must be positive");
    }
}

void ReaderNode::passage(const TagId& tag, Timestamp at)
{
    ++stats_.passages;
    auto obs = observe_passage(tag, at, config_.model, mix_seed(config_.seed, passage_counter_++));
    for (const auto& o : obs) {
        scheduled_.emplace(o.at, o);
    }
    stats_.observations += obs.size();
}

wire::Reply ReaderNode::send(const std::string& frame)
{
    if (tap_) {
        tap_(frame);
    }
    return link_->send(frame);
}

void ReaderNode::tick(Timestamp now)
{
    if (!next_heartbeat_) {
        next_heartbeat_ = now + config_.heartbeat_s;
        next_attempt_ = now;
    }
    while (!scheduled_.empty() && scheduled_.begin()->first <= now) {
        batcher_.add(scheduled_.begin()->second);
        scheduled_.erase(scheduled_.begin());
    }
    if (auto obs = batcher_.flush(now)) {
        ReportBatch b{config_.node, config_.name, config_.room, std::move(*obs), now};
        std::size_t n = b.observations.size();
        outbox_.emplace_back(wire::frame_message(wire::FrameKind::Report, wire::encode_report_payload(to_payload(b))),
                             n);
        ++stats_.batches;
    }
    while (now >= *next_heartbeat_) {
        if (!halted_) {
            auto r = send(wire::frame_message(wire::FrameKind::Heartbeat,
                                              wire::encode_heartbeat({config_.node, *next_heartbeat_})));
            if (r.kind == wire::Reply::Kind::Ok || r.kind == wire::Reply::Kind::Ack) {
                ++stats_.heartbeats_sent;
            }
            else {
                ++stats_.heartbeats_failed; // next period tries again
            }
        }
        next_heartbeat_ = *next_heartbeat_ + config_.heartbeat_s;
    }
    deliver(now);
}

void ReaderNode::deliver(Timestamp now)
{
    while (!halted_ && !outbox_.empty() && now >= next_attempt_) {
        auto r = send(outbox_.front().first);
        switch (r.kind) {
        case wire::Reply::Kind::Ack:
        case wire::Reply::Kind::Ok:
            outbox_.pop_front();
            ++stats_.acked;
            backoff_s_ = config_.backoff_initial_s;
            break;
        case wire::Reply::Kind::Reject:
            if (r.status >= 400 && r.status < 500) {
                // Retrying cannot help; the operator has to act.
                halted_ = true;
                halt_reason_ = std::to_string(r.status) + " " + r.detail;
                return;
            }
            [[fallthrough]];
        case wire::Reply::Kind::Unavailable:
            ++stats_.retries;
            next_attempt_ = now + backoff_s_;
            backoff_s_ = std::min(backoff_s_ * 2, config_.backoff_cap_s);
            return;
        }
    }
}

void ReaderNode::resume()
{
    halted_ = false;
    halt_reason_.clear();
    backoff_s_ = config_.backoff_initial_s;
}

std::size_t ReaderNode::undelivered() const
{
    std::size_t n = scheduled_.size() + batcher_.pending();
    for (const auto& [frame, count] : outbox_) {
        n += count;
    }
    return n;
}

bool ReaderNode::idle() const { return undelivered() == 0; }

} // namespace vtrack
