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

#include "vtrack/simulator.h"
#include "vtrack/tracking.h"

#include <map>
#include <set>
#include <string>
#include <vector>

// Comparisons of a tracking state against a scenario's ground truth.
// Each returns at most 20 human-readable violations.
namespace vtrack {

// Per-room occupancy and flow between consecutive event times, and
// last_known for every visitor at every event time.
std::vector<std::string> oracle_violations(const GroundTruth& gt, const TrackingState& s);

// Rooms sum to the active visitor count and interval flow matches the
// change in occupancy, at every event time.
std::vector<std::string> balance_violations(const GroundTruth& gt, const TrackingState& s);

// Rooms each visitor was ever placed in.
std::map<TagId, std::set<RoomId>> engine_rooms(const GroundTruth& gt, const TrackingState& s);

// Room changes the engine recorded, summed over the scenario's visitors.
std::uint64_t observed_transitions(const GroundTruth& gt, const TrackingState& s);

} // namespace vtrack
