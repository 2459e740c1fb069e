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
#include "vtrack/tracking.h"
#include "vtrack/types.h"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vtrack {

enum class VisitPolicy { RandomWalk, TourAllRooms };
std::string_view to_string(VisitPolicy p);
// Throws Error(InvalidParams).
VisitPolicy parse_visit_policy(std::string_view raw);

struct ScenarioParams {
    std::shared_ptr<const BuildingGraph> graph;
    int n_visitors = 50;
    double arrival_mean_s = 60;
    double dwell_mean_s = 300;
    std::int64_t dwell_min_s = 10;
    VisitPolicy policy = VisitPolicy::RandomWalk;
    // Arrivals stop at start + duration; visitors still inside then walk home.
    std::int64_t duration_s = 3600;
    std::uint64_t seed = 1;
    Timestamp start = Timestamp::from_civil(2017, 9, 28, 9, 0, 0);

    // Throws Error(InvalidParams).
    void validate() const;
};

struct Stay {
    RoomId room;
    Timestamp enter;
    Timestamp leave; // exclusive
    bool operator==(const Stay&) const = default;
};

struct Trajectory {
    TagId tag;
    std::string name;
    Demographic demographic = Demographic::Unspecified;
    // Issued at the entrance at stays.front().enter, returned at stays.back().leave.
    std::vector<Stay> stays;
    Timestamp issued() const { return stays.front().enter; }
    Timestamp returned() const { return stays.back().leave; }
    bool operator==(const Trajectory&) const = default;
};

struct Passage {
    TagId tag;
    Timestamp at;
    bool operator==(const Passage&) const = default;
};

struct GroundTruth {
    std::shared_ptr<const BuildingGraph> graph;
    std::vector<Trajectory> visitors; // by arrival
    std::map<NodeId, std::vector<Passage>> passages;
};

// Visitors are issued tags at the entrance and walk only over the entrance
// and rooms with a checkpoint; arriving back at the entrance hands the tag in.
// Every entry into a checkpointed room is one passage at that room's first
// checkpoint. Deterministic in params (including seed).
GroundTruth generate(const ScenarioParams& params);

// Rooms of the graph mapped to the number of visitors with enter <= at < leave.
std::map<RoomId, std::int64_t> truth_occupancy(const GroundTruth& gt, Timestamp at);
// Room and entry time of the stay current at `at` (the last one entered at
// or before `at`), for the visitor holding `tag`.
std::optional<std::pair<RoomId, Timestamp>> truth_last_known(const GroundTruth& gt, const TagId& tag, Timestamp at);
// Entries (stay starts) and exits (stay ends) of `room` in (from, to].
IntervalFlow truth_flow(const GroundTruth& gt, const RoomId& room, Timestamp from, Timestamp to);
// Every arrival, transition and return time, ascending and unique.
std::vector<Timestamp> event_times(const GroundTruth& gt);

// `TAG ROOM ENTER_TS LEAVE_TS` per stay.
std::string render_truth(const GroundTruth& gt);
// `TAGID TIMESTAMP` per passage.
std::string render_trace(const std::vector<Passage>& passages);
// Throws Error(InvalidParams) with the line number.
std::vector<Passage> parse_trace(std::string_view text);

// A floor plan plus parameter lines:
//   VISITORS n   ARRIVAL_MEAN s   DWELL_MEAN s   DWELL_MIN s
//   POLICY random_walk|tour_all_rooms   DURATION s   START ts   SEED n
ScenarioParams parse_scenario(std::string_view text);
ScenarioParams load_scenario(const std::string& path);
std::string render_scenario(const ScenarioParams& params);

// Deterministic 64-bit mixer for deriving independent seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
// Uniform in [0, 1) from 53 random bits.
double unit_interval(std::uint64_t bits);

} // namespace vtrack
