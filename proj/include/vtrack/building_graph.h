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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vtrack {

struct Room {
    RoomId id;
    int floor = 0;

    bool operator==(const Room&) const = default;
};

struct CheckpointPlacement {
    NodeId node;
    std::string name;
    RoomId room;

    bool operator==(const CheckpointPlacement&) const = default;
};

// Rooms connected by doorways and stairways, with the designated exits, the
// single public entrance, and the planned reader placements.
//
// Instances are only produced by Builder::build(), which enforces:
//   - no duplicate rooms, no edge or exit naming an unknown room
//   - no self-loop edges
//   - an entrance is declared and is also an exit
//   - every checkpoint sits in a known room, one placement per node
//   - the graph is connected
class BuildingGraph {
public:
    class Builder {
    public:
        Builder& room(std::string_view id, int floor);
        Builder& edge(std::string_view a, std::string_view b);
        Builder& exit(std::string_view id);
        Builder& entrance(std::string_view id);
        Builder& checkpoint(std::string_view node, std::string_view name, std::string_view room);

        // Throws Error(InvalidGraph) naming the violated rule.
        BuildingGraph build() const;

    private:
        std::vector<Room> rooms_;
        std::vector<std::pair<RoomId, RoomId>> edges_;
        std::vector<RoomId> exits_;
        std::optional<RoomId> entrance_;
        std::vector<CheckpointPlacement> checkpoints_;
    };

    const std::vector<Room>& rooms() const noexcept { return rooms_; }
    std::size_t room_count() const noexcept { return rooms_.size(); }
    bool has_room(const RoomId& id) const { return index_.count(id) != 0; }
    std::size_t index_of(const RoomId& id) const;
    int floor_of(const RoomId& id) const;

    // Neighbours in lexicographic order.
    const std::vector<RoomId>& neighbors(const RoomId& id) const;
    bool adjacent(const RoomId& a, const RoomId& b) const;

    // Undirected edges, each listed once with first < second, sorted.
    const std::vector<std::pair<RoomId, RoomId>>& edges() const noexcept { return edges_; }

    const std::set<RoomId>& exits() const noexcept { return exits_; }
    bool is_exit(const RoomId& id) const { return exits_.count(id) != 0; }
    const RoomId& entrance() const noexcept { return entrance_; }

    const std::vector<CheckpointPlacement>& checkpoints() const noexcept { return checkpoints_; }
    std::optional<RoomId> room_of(const NodeId& node) const;

    bool operator==(const BuildingGraph& other) const;

private:
    BuildingGraph(std::vector<Room> rooms, RoomId entrance) : rooms_(std::move(rooms)), entrance_(std::move(entrance)) {}

    std::vector<Room> rooms_;
    std::map<RoomId, std::size_t> index_;
    std::vector<std::vector<RoomId>> adjacency_;
    std::vector<std::pair<RoomId, RoomId>> edges_;
    std::set<RoomId> exits_;
    RoomId entrance_;
    std::vector<CheckpointPlacement> checkpoints_;
};

// Line-oriented floor-plan file:
//   ROOM <RoomId> <floor>      EDGE <RoomId> <RoomId>     EXIT <RoomId>
//   ENTRANCE <RoomId>          CHECKPOINT <NodeId> <name> <RoomId>
// '#' starts a comment; blank lines are ignored. Throws Error(InvalidGraph)
// with the offending line number on unknown directives or bad arity.
BuildingGraph parse_floor_plan(std::string_view text);
BuildingGraph load_floor_plan(const std::string& path);

// Canonical rendering; parse_floor_plan(render_floor_plan(g)) == g.
std::string render_floor_plan(const BuildingGraph& g);

// The studied house: ground floor with the entrance hall, three public
// rooms and the control room; the first-floor venue reached by stairs.
BuildingGraph default_building();
std::string_view default_floor_plan_text();

} // namespace vtrack
