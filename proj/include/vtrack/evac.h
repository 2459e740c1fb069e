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
#include "vtrack/event_store.h"
#include "vtrack/tracking.h"

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace vtrack {

struct EvacRoute {
    RoomId from;
    std::vector<RoomId> path; // from .. exit
    int hops = 0;
    bool operator==(const EvacRoute&) const = default;
};

// Minimum-hop route to the closest exit. At every step the lexicographically
// smallest neighbour that is one hop closer is taken. Throws UnknownRoom.
EvacRoute nearest_exit(const BuildingGraph& g, const RoomId& room);
// One route per room, in graph order.
std::vector<EvacRoute> all_routes(const BuildingGraph& g);

// "a > b > exit"
std::string route_text(const EvacRoute& r);

struct EvacEntry {
    RoomId room;
    std::int64_t occupancy = 0;
    EvacRoute route;
    bool operator==(const EvacEntry&) const = default;
};

struct EvacReport {
    Timestamp at;
    // Occupied rooms and every exit; descending occupancy, ties by room id.
    std::vector<EvacEntry> per_room;
    std::int64_t total_inside = 0;
    bool operator==(const EvacReport&) const = default;
};

// Throws Error(UnknownRoomInSnapshot).
EvacReport evac_report(const BuildingGraph& g, const OccupancySnapshot& snapshot);

enum class Channel { Email, Sms, Phone };
std::string_view to_string(Channel c);
// Throws Error(InvalidParams).
Channel parse_channel(std::string_view raw);

struct AlertNotification {
    Channel channel = Channel::Email;
    std::string recipient;
    std::string body;
    Timestamp queued_at;
    bool operator==(const AlertNotification&) const = default;
};

// Single line; carries the total and every occupied room.
std::string alert_body(const EvacReport& report);

struct AlertResult {
    bool coalesced = false;
    std::vector<AlertNotification> queued;
};

// Durable append-only notification queue, one line per notification:
//   QUEUED_AT<TAB>CHANNEL<TAB>RECIPIENT<TAB>BODY
class Outbox {
public:
    static constexpr std::int64_t kDefaultCooldownS = 60;

    // Reads back an existing file to restore the cool-down clock.
    Outbox(std::string path, std::int64_t cooldown_s = kDefaultCooldownS,
           std::shared_ptr<Storage> storage = posix_storage());

    // One notification per (channel, recipient). A trigger less than the
    // cool-down after the last one that queued anything is coalesced.
    // Throws Error(NoChannels), Error(InvalidParams), Error(IoFailure).
    AlertResult trigger(const EvacReport& report, const std::vector<Channel>& channels,
                        const std::vector<std::string>& recipients, Timestamp at);

    std::vector<AlertNotification> records() const;
    std::size_t size() const;
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
    std::int64_t cooldown_s_;
    std::shared_ptr<Storage> storage_;
    mutable std::mutex mu_;
    std::optional<Timestamp> last_trigger_;
    std::size_t count_ = 0;
};

std::string encode_notification(const AlertNotification& n);
// Throws Error(InvalidParams).
AlertNotification decode_notification(std::string_view line);

} // namespace vtrack
