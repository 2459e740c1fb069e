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

#include "vtrack/reader_node.h"
#include "vtrack/simulator.h"

#include <functional>
#include <map>
#include <memory>

namespace vtrack {

// The registration desk: issues tags as visitors arrive and takes them back.
struct Desk {
    std::function<void(const Trajectory&)> issue;
    std::function<void(const Trajectory&)> take_back;
};

struct FeedOptions {
    // Simulated seconds per wall second; 0 runs as fast as possible.
    double speed = 0;
    // Seconds to keep ticking after the last event so buffered batches and
    // retries drain. The run stops early once every node is idle.
    std::int64_t drain_s = 600;
    // Called once per simulated second after the nodes ticked.
    std::function<void(Timestamp)> on_tick;
};

struct FeedStats {
    std::uint64_t passages = 0;
    std::uint64_t issued = 0;
    std::uint64_t returned = 0;
    Timestamp first;
    Timestamp last;
    // False if some node still held undelivered observations at the end.
    bool drained = true;
};

// Plays the ground truth through the desk and the nodes on a simulated
// clock. Within one second: issues, then passages, then node ticks, then
// returns. Throws Error(MissingNode) if a checkpoint with passages has no node.
FeedStats feed(const GroundTruth& gt, const std::map<NodeId, ReaderNode*>& nodes, const Desk& desk,
               const FeedOptions& options = {});

// One node per planned checkpoint of the graph, all talking over `link`.
// Node i gets seed mix_seed(seed, i + 1), so runs that differ only in the
// detection model see the same random draws per passage.
std::map<NodeId, std::unique_ptr<ReaderNode>> make_nodes(const BuildingGraph& g, std::shared_ptr<GatewayLink> link,
                                                         const DetectionModel& model, std::uint64_t seed,
                                                         const ReaderConfig& base = {});

std::map<NodeId, ReaderNode*> node_view(const std::map<NodeId, std::unique_ptr<ReaderNode>>& nodes);

} // namespace vtrack
