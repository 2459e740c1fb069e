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

#include "vtrack/oracle.h"

#include <optional>

namespace vtrack {

std::vector<std::string> oracle_violations(const GroundTruth& gt, const TrackingState& s)
{
    std::vector<std::string> out;
    auto fail = [&](std::string msg) {
        if (out.size() < 20) {
            out.push_back(std::move(msg));
        }
    };
    auto times = event_times(gt);
    const auto& rooms = gt.graph->rooms();
    std::optional<Timestamp> prev;
    for (auto t : times) {
        auto occ = s.occupancy(t);
        auto truth = truth_occupancy(gt, t);
        for (const auto& r : rooms) {
            auto it = truth.find(r.id);
            std::int64_t want = it == truth.end() ? 0 : it->second;
            if (occ.count(r.id) != want) {
                fail("occupancy " + r.id.str() + " at " + t.format() + ": engine " + std::to_string(occ.count(r.id)) +
                     " truth " + std::to_string(want));
            }
            if (prev) {
                auto ef = s.interval_flow(r.id, *prev, t);
                auto tf = truth_flow(gt, r.id, *prev, t);
                if (ef.entered != tf.entered || ef.left != tf.left) {
                    fail("flow " + r.id.str() + " (" + prev->format() + ", " + t.format() + "]");
                }
            }
        }
        prev = t;
    }
    // Per visitor sweep; truth_last_known over all visitors would be quadratic.
    for (const auto& v : gt.visitors) {
        std::size_t k = 0;
        for (auto t : times) {
            std::optional<std::pair<RoomId, Timestamp>> want;
            if (t >= v.issued()) {
                while (k + 1 < v.stays.size() && v.stays[k + 1].enter <= t) {
                    ++k;
                }
                want = std::make_pair(v.stays[k].room, v.stays[k].enter);
            }
            auto got = s.last_known(v.tag, t);
            if (got != want) {
                fail("last_known " + v.tag.str() + " at " + t.format() + ": engine " +
                     (got ? got->first.str() + "@" + got->second.format() : "-") + " truth " +
                     (want ? want->first.str() + "@" + want->second.format() : "-"));
            }
        }
    }
    return out;
}

std::vector<std::string> balance_violations(const GroundTruth& gt, const TrackingState& s)
{
    std::vector<std::string> out;
    auto times = event_times(gt);
    std::optional<OccupancySnapshot> prev;
    for (auto t : times) {
        auto occ = s.occupancy(t);
        std::int64_t sum = 0;
        std::int64_t active = 0;
        for (const auto& [room, n] : occ.per_room) {
            sum += n;
        }
        for (const auto& v : gt.visitors) {
            active += v.issued() <= t && t < v.returned();
        }
        if (sum != active || occ.total != active) {
            out.push_back("conservation at " + t.format() + ": rooms " + std::to_string(sum) + " active " +
                          std::to_string(active));
        }
        if (prev) {
            for (const auto& [room, n] : occ.per_room) {
                auto f = s.interval_flow(room, prev->at, t);
                if (f.entered - f.left != n - prev->count(room)) {
                    out.push_back("flow balance " + room.str() + " at " + t.format());
                }
            }
        }
        prev = occ;
        if (out.size() >= 20) {
            break;
        }
    }
    return out;
}

std::map<TagId, std::set<RoomId>> engine_rooms(const GroundTruth& gt, const TrackingState& s)
{
    std::map<TagId, std::set<RoomId>> out;
    for (const auto& v : gt.visitors) {
        auto& rooms = out[v.tag];
        if (auto tr = s.track(v.tag)) {
            for (const auto& [room, at] : tr->history) {
                rooms.insert(room);
            }
        }
    }
    return out;
}

std::uint64_t observed_transitions(const GroundTruth& gt, const TrackingState& s)
{
    std::uint64_t n = 0;
    for (const auto& v : gt.visitors) {
        if (auto tr = s.track(v.tag)) {
            n += tr->history.empty() ? 0 : tr->history.size() - 1;
        }
    }
    return n;
}

} // namespace vtrack
