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

#include "vtrack/evac.h"

#include "vtrack/error.h"

#include <algorithm>
#include <deque>
#include <filesystem>
#include <limits>

namespace vtrack {

namespace {

std::vector<int> exit_distances(const BuildingGraph& g)
{
    std::vector<int> dist(g.room_count(), std::numeric_limits<int>::max());
    std::deque<std::size_t> queue;
    for (const auto& e : g.exits()) {
        dist[g.index_of(e)] = 0;
        queue.push_back(g.index_of(e));
    }
    while (!queue.empty()) {
        std::size_t i = queue.front();
        queue.pop_front();
        for (const auto& n : g.neighbors(g.rooms()[i].id)) {
            std::size_t j = g.index_of(n);
            if (dist[j] == std::numeric_limits<int>::max()) {
                dist[j] = dist[i] + 1;
                queue.push_back(j);
            }
        }
    }
    return dist;
}

EvacRoute walk(const BuildingGraph& g, const std::vector<int>& dist, const RoomId& room)
{
    EvacRoute r{room, {room}, dist[g.index_of(room)]};
    RoomId at = room;
    while (dist[g.index_of(at)] > 0) {
        int want = dist[g.index_of(at)] - 1;
        // neighbors() is sorted, so the first match is the smallest.
        for (const auto& n : g.neighbors(at)) {
            if (dist[g.index_of(n)] == want) {
                at = n;
                break;
            }
        }
        r.path.push_back(at);
    }
    return r;
}

bool single_line_field(std::string_view s)
{
    return std::none_of(s.begin(), s.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; });
}

} // namespace

EvacRoute nearest_exit(const BuildingGraph& g, const RoomId& room)
{
    g.index_of(room);
    return walk(g, exit_distances(g), room);
}

std::vector<EvacRoute> all_routes(const BuildingGraph& g)
{
    auto dist = exit_distances(g);
    std::vector<EvacRoute> out;
    for (const auto& r : g.rooms()) {
        out.push_back(walk(g, dist, r.id));
    }
    return out;
}

std::string route_text(const EvacRoute& r)
{
    std::string out;
    for (const auto& room : r.path) {
        if (!out.empty()) {
            out += " > ";
        }
        out += room.str();
    }
    return out;
}

EvacReport evac_report(const BuildingGraph& g, const OccupancySnapshot& snapshot)
{
    for (const auto& [room, n] : snapshot.per_room) {
        if (!g.has_room(room)) {
            throw Error(ErrorCode::UnknownRoomInSnapshot, "snapshot names room '" + room.str() + "'");
        }
    }
    auto routes = all_routes(g);
    EvacReport report{snapshot.at, {}, 0};
    for (const auto& [room, n] : snapshot.per_room) {
        report.total_inside += n;
        if (n != 0 || g.is_exit(room)) {
            report.per_room.push_back(EvacEntry{room, n, routes[g.index_of(room)]});
        }
    }
    for (const auto& e : g.exits()) {
        bool listed = std::any_of(report.per_room.begin(), report.per_room.end(),
                                  [&](const EvacEntry& x) { return x.room == e; });
        if (!listed) {
            report.per_room.push_back(EvacEntry{e, 0, routes[g.index_of(e)]});
        }
    }
    std::sort(report.per_room.begin(), report.per_room.end(), [](const EvacEntry& a, const EvacEntry& b) {
        if (a.occupancy != b.occupancy) {
            return a.occupancy > b.occupancy;
        }
        return a.room < b.room;
    });
    return report;
}

std::string_view to_string(Channel c)
{
    switch (c) {
    case Channel::Email: return "email";
    case Channel::Sms: return "sms";
    case Channel::Phone: return "phone";
    }
    return "email";
}

Channel parse_channel(std::string_view raw)
{
    if (raw == "email") {
        return Channel::Email;
    }
    if (raw == "sms") {
        return Channel::Sms;
    }
    if (raw == "phone") {
        return Channel::Phone;
    }
    throw Error(ErrorCode::InvalidParams, "unknown channel '" + std::string(raw) + "' (email|sms|phone)");
}

std::string alert_body(const EvacReport& report)
{
    std::string body = "EVACUATION at " + report.at.format() + ": " + std::to_string(report.total_inside) + " inside";
    for (const auto& e : report.per_room) {
        if (e.occupancy != 0) {
            body += "; " + e.room.str() + " " + std::to_string(e.occupancy) + " via " + route_text(e.route);
        }
    }
    return body;
}

std::string encode_notification(const AlertNotification& n)
{
    return n.queued_at.format() + "\t" + std::string(to_string(n.channel)) + "\t" + n.recipient + "\t" + n.body;
}

AlertNotification decode_notification(std::string_view line)
{
    std::vector<std::string_view> f;
    for (int i = 0; i < 3; ++i) {
        auto tab = line.find('\t');
        if (tab == std::string_view::npos) {
            throw Error(ErrorCode::InvalidParams, "outbox line has too few fields");
        }
        f.push_back(line.substr(0, tab));
        line.remove_prefix(tab + 1);
    }
    return AlertNotification{parse_channel(f[1]), std::string(f[2]), std::string(line), Timestamp::parse(f[0])};
}

Outbox::Outbox(std::string path, std::int64_t cooldown_s, std::shared_ptr<Storage> storage)
: path_(std::move(path))
, cooldown_s_(cooldown_s)
, storage_(std::move(storage))
{
    if (cooldown_s_ < 0) {
        throw Error(ErrorCode::InvalidConfig, "alert cool-down must be >= 0");
    }
    if (std::filesystem::exists(path_)) {
        std::string text = storage_->read_file(path_);
        if (!text.empty() && text.back() != '\n') {
            auto nl = text.rfind('\n');
            storage_->truncate(path_, nl == std::string::npos ? 0 : nl + 1);
        }
    }
    for (const auto& n : records()) {
        ++count_;
        if (!last_trigger_ || n.queued_at > *last_trigger_) {
            last_trigger_ = n.queued_at;
        }
    }
}

AlertResult Outbox::trigger(const EvacReport& report, const std::vector<Channel>& channels,
                            const std::vector<std::string>& recipients, Timestamp at)
{
    if (channels.empty()) {
        throw Error(ErrorCode::NoChannels, "an alert needs at least one channel");
    }
    if (recipients.empty()) {
        throw Error(ErrorCode::InvalidParams, "an alert needs at least one recipient");
    }
    for (const auto& r : recipients) {
        if (r.empty() || !single_line_field(r)) {
            throw Error(ErrorCode::InvalidParams, "recipient must be a non-empty single-line value");
        }
    }
    std::lock_guard lock(mu_);
    if (last_trigger_ && at - *last_trigger_ < cooldown_s_) {
        return AlertResult{true, {}};
    }
    AlertResult result;
    std::string data;
    const std::string body = alert_body(report);
    for (auto c : channels) {
        for (const auto& r : recipients) {
            result.queued.push_back(AlertNotification{c, r, body, at});
            data += encode_notification(result.queued.back());
            data += '\n';
        }
    }
    auto parent = std::filesystem::path(path_).parent_path();
    if (!parent.empty()) {
        storage_->make_dirs(parent.string());
    }
    auto file = storage_->open_append(path_);
    file->write(data);
    file->sync();
    last_trigger_ = at;
    count_ += result.queued.size();
    return result;
}

std::vector<AlertNotification> Outbox::records() const
{
    std::vector<AlertNotification> out;
    if (!std::filesystem::exists(path_)) {
        return out;
    }
    std::string text = storage_->read_file(path_);
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) {
            break; // interrupted write
        }
        out.push_back(decode_notification(std::string_view(text).substr(pos, nl - pos)));
        pos = nl + 1;
    }
    return out;
}

std::size_t Outbox::size() const
{
    std::lock_guard lock(mu_);
    return count_;
}

} // namespace vtrack
