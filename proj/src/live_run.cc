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

#include "vtrack/live_run.h"

#include "vtrack/error.h"

#include <chrono>
#include <thread>

namespace vtrack {

FeedStats feed(const GroundTruth& gt, const std::map<NodeId, ReaderNode*>& nodes, const Desk& desk,
               const FeedOptions& options)
{
    for (const auto& [node, passages] : gt.passages) {
        if (!passages.empty() && !nodes.count(node)) {
            throw Error(ErrorCode::MissingNode, "no reader node for checkpoint " + node.str());
        }
    }
    FeedStats stats;
    if (gt.visitors.empty()) {
        return stats;
    }

    std::multimap<Timestamp, const Trajectory*> issues;
    std::multimap<Timestamp, const Trajectory*> returns;
    std::multimap<Timestamp, std::pair<ReaderNode*, const Passage*>> passages;
    Timestamp first = gt.visitors.front().issued();
    Timestamp last = first;
    for (const auto& v : gt.visitors) {
        issues.emplace(v.issued(), &v);
        returns.emplace(v.returned(), &v);
        first = std::min(first, v.issued());
        last = std::max(last, v.returned());
    }
    for (const auto& [node, list] : gt.passages) {
        for (const auto& p : list) {
            passages.emplace(p.at, std::make_pair(nodes.at(node), &p));
            last = std::max(last, p.at);
        }
    }
    stats.first = first;

    auto idle = [&] {
        for (const auto& [id, n] : nodes) {
            if (!n->idle()) {
                return false;
            }
        }
        return true;
    };

    const auto wall_start = std::chrono::steady_clock::now();
    Timestamp t = first;
    for (;; t = t + 1) {
        if (t > last && (idle() || t - last > options.drain_s)) {
            break;
        }
        if (options.speed > 0) {
            auto due = wall_start + std::chrono::duration<double>((t - first) / options.speed);
            std::this_thread::sleep_until(due);
        }
        for (auto [it, end] = issues.equal_range(t); it != end; ++it) {
            if (desk.issue) {
                desk.issue(*it->second);
            }
            ++stats.issued;
        }
        for (auto [it, end] = passages.equal_range(t); it != end; ++it) {
            it->second.first->passage(it->second.second->tag, t);
            ++stats.passages;
        }
        for (const auto& [id, n] : nodes) {
            n->tick(t);
        }
        for (auto [it, end] = returns.equal_range(t); it != end; ++it) {
            if (desk.take_back) {
                desk.take_back(*it->second);
            }
            ++stats.returned;
        }
        if (options.on_tick) {
            options.on_tick(t);
        }
    }
    stats.last = t - 1;
    stats.drained = idle();
    return stats;
}

std::map<NodeId, std::unique_ptr<ReaderNode>> make_nodes(const BuildingGraph& g, std::shared_ptr<GatewayLink> link,
                                                         const DetectionModel& model, std::uint64_t seed,
                                                         const ReaderConfig& base)
{
    std::map<NodeId, std::unique_ptr<ReaderNode>> out;
    std::uint64_t i = 0;
    for (const auto& c : g.checkpoints()) {
        ReaderConfig cfg = base;
        cfg.node = c.node;
        cfg.name = c.name;
        cfg.room = c.room;
        cfg.model = model;
        cfg.seed = mix_seed(seed, ++i);
        out.emplace(c.node, std::make_unique<ReaderNode>(cfg, link));
    }
    return out;
}

std::map<NodeId, ReaderNode*> node_view(const std::map<NodeId, std::unique_ptr<ReaderNode>>& nodes)
{
    std::map<NodeId, ReaderNode*> out;
    for (const auto& [id, n] : nodes) {
        out.emplace(id, n.get());
    }
    return out;
}

} // namespace vtrack
