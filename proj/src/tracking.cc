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

#include "vtrack/tracking.h"

#include "vtrack/error.h"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <sstream>

namespace vtrack {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void insert_sorted(std::vector<Timestamp>& v, Timestamp t) { v.insert(std::upper_bound(v.begin(), v.end(), t), t); }

std::int64_t count_le(const std::vector<Timestamp>& v, Timestamp t)
{
    return std::upper_bound(v.begin(), v.end(), t) - v.begin();
}

constexpr Demographic kDemographics[] = {Demographic::Female, Demographic::Male, Demographic::Unspecified};

} // namespace

std::int64_t OccupancySnapshot::count(const RoomId& room) const
{
    for (const auto& [id, n] : per_room) {
        if (id == room) {
            return n;
        }
    }
    return 0;
}

std::vector<ReadEvent> dedupe(std::span<const ReadEvent> events, std::int64_t window_s)
{
    if (window_s < 0) {
        throw Error(ErrorCode::InvalidParams, "dedup window must be >= 0");
    }
    std::vector<std::size_t> order(events.size());
    std::iota(order.begin(), order.end(), 0);
    auto group_key = [&](std::size_t i) {
        return std::make_pair(events[i].tag ? events[i].tag->str() : std::string("-"), events[i].node.str());
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        auto ka = group_key(a);
        auto kb = group_key(b);
        if (ka != kb) {
            return ka < kb;
        }
        return events[a].observed_at < events[b].observed_at;
    });
    std::vector<bool> keep(events.size(), false);
    for (std::size_t k = 0; k < order.size(); ++k) {
        std::size_t i = order[k];
        bool first_of_group = k == 0 || group_key(order[k - 1]) != group_key(i);
        keep[i] = first_of_group || events[i].observed_at - events[order[k - 1]].observed_at > window_s;
    }
    std::vector<ReadEvent> out;
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (keep[i]) {
            out.push_back(events[i]);
        }
    }
    return out;
}

std::int64_t TrackingState::Series::at(Timestamp t) const { return count_le(entries, t) - count_le(exits, t); }

TrackingState::TrackingState(std::shared_ptr<const BuildingGraph> graph, EngineConfig config)
: graph_(std::move(graph))
, config_(config)
, rooms_(graph_->room_count())
{
    for (auto d : kDemographics) {
        demographics_[d];
    }
}

ApplyResult TrackingState::quarantine(std::uint64_t& counter, std::string reason)
{
    ++counter;
    return {ApplyOutcome::Quarantined, std::move(reason)};
}

ApplyResult TrackingState::apply(const LogRecord& rec)
{
    if (rec.seq != last_seq_ + 1) {
        throw CorruptLogError(last_seq_ + 1, "record carries seq " + std::to_string(rec.seq));
    }
    last_seq_ = rec.seq;
    note_time(time_of(rec.body));
    return std::visit(overloaded{
                          [&](const record::Register& r) { return apply_register(r); },
                          [&](const record::Return& r) { return apply_return(r); },
                          [&](const record::Read& r) { return apply_read(r); },
                          [&](const record::Heartbeat& r) { return apply_heartbeat(r); },
                          [&](const record::CheckpointAdded& r) { return apply_checkpoint(r); },
                          [&](const record::Batch& r) {
                              batches_.insert(r.id);
                              return ApplyResult{};
                          },
                      },
                      rec.body);
}

void TrackingState::note_time(Timestamp at)
{
    if (!epoch_ || at < *epoch_) {
        epoch_ = at;
    }
    if (!latest_ || at > *latest_) {
        latest_ = at;
    }
}

TrackingState::Issuance* TrackingState::active_issuance(const TagId& tag)
{
    auto it = visitors_.find(tag);
    if (it == visitors_.end() || it->second.back().visitor.status != VisitorStatus::Active) {
        return nullptr;
    }
    return &it->second.back();
}

const TrackingState::Issuance* TrackingState::issuance_at(const TagId& tag, Timestamp at) const
{
    auto it = visitors_.find(tag);
    if (it == visitors_.end()) {
        return nullptr;
    }
    const Issuance* found = nullptr;
    for (const auto& iss : it->second) {
        if (iss.visitor.issued_at <= at) {
            found = &iss;
        }
    }
    return found;
}

void TrackingState::enter(const Issuance&, const RoomId& room, Timestamp at)
{
    insert_sorted(rooms_[graph_->index_of(room)].entries, at);
}

void TrackingState::leave(const Issuance&, const RoomId& room, Timestamp at)
{
    insert_sorted(rooms_[graph_->index_of(room)].exits, at);
}

void TrackingState::move(const Issuance& who, const RoomId& from, const RoomId& to, Timestamp at)
{
    leave(who, from, at);
    enter(who, to, at);
}

void TrackingState::note_report(CheckpointEntry& cp, Timestamp at) { insert_sorted(cp.reports, at); }

ApplyResult TrackingState::apply_register(const record::Register& r)
{
    if (active_issuance(r.tag)) {
        return quarantine(diag_.rejected_records, "TagAlreadyActive");
    }
    Issuance iss{Visitor{r.tag, r.name, r.demographic, r.at, VisitorStatus::Active},
                 graph_->entrance(),
                 r.at,
                 {{graph_->entrance(), r.at}},
                 std::nullopt};
    enter(iss, graph_->entrance(), r.at);
    insert_sorted(demographics_[r.demographic].entries, r.at);
    visitors_[r.tag].push_back(std::move(iss));
    ++active_;
    return {};
}

ApplyResult TrackingState::apply_return(const record::Return& r)
{
    Issuance* iss = active_issuance(r.tag);
    if (!iss) {
        return quarantine(diag_.rejected_records, "TagNotActive");
    }
    // The tag is handed back at the entrance desk; a return stamped before
    // the last accepted read is taken to happen at that read.
    Timestamp at = std::max(r.at, iss->last_seen);
    const RoomId& entrance = graph_->entrance();
    if (iss->current != entrance) {
        move(*iss, iss->current, entrance, at);
        iss->current = entrance;
        iss->history.emplace_back(entrance, at);
    }
    leave(*iss, entrance, at);
    insert_sorted(demographics_[iss->visitor.demographic].exits, at);
    iss->visitor.status = VisitorStatus::Returned;
    iss->returned_at = at;
    iss->last_seen = at;
    --active_;
    return {};
}

ApplyResult TrackingState::apply_read(const record::Read& r)
{
    auto cp = checkpoints_.find(r.node);
    if (cp == checkpoints_.end()) {
        return quarantine(diag_.unknown_checkpoint, "UnknownCheckpoint");
    }
    note_report(cp->second, r.at);

    auto key = std::make_pair(r.tag ? r.tag->str() : std::string("-"), r.node);
    auto last = last_read_.find(key);
    if (last != last_read_.end()) {
        bool duplicate = std::llabs(r.at - last->second) <= config_.dedup_window_s;
        last->second = std::max(last->second, r.at);
        if (duplicate) {
            ++diag_.duplicates;
            return {ApplyOutcome::Duplicate, "duplicate"};
        }
    }
    else {
        last_read_.emplace(key, r.at);
    }

    if (!r.tag) {
        ++diag_.measurements;
        return {};
    }
    Issuance* iss = active_issuance(*r.tag);
    if (!iss) {
        return quarantine(diag_.unknown_or_inactive_tag, "UnknownOrInactiveTag");
    }
    if (r.at < iss->last_seen) {
        return quarantine(diag_.stale_reads, "read older than last position");
    }
    const RoomId& room = cp->second.checkpoint.location;
    if (room != iss->current) {
        move(*iss, iss->current, room, r.at);
        iss->current = room;
        ++diag_.observed_transitions;
    }
    iss->history.emplace_back(room, r.at);
    iss->last_seen = r.at;
    ++diag_.applied_reads;
    return {};
}

ApplyResult TrackingState::apply_heartbeat(const record::Heartbeat& r)
{
    auto cp = checkpoints_.find(r.node);
    if (cp == checkpoints_.end()) {
        return quarantine(diag_.unknown_checkpoint, "UnknownCheckpoint");
    }
    note_report(cp->second, r.at);
    return {};
}

ApplyResult TrackingState::apply_checkpoint(const record::CheckpointAdded& r)
{
    if (checkpoints_.count(r.node) || !graph_->has_room(r.room)) {
        return quarantine(diag_.rejected_records, "checkpoint registration conflicts with state");
    }
    checkpoints_.emplace(r.node, CheckpointEntry{Checkpoint{r.node, r.name, r.room, std::nullopt}, r.at, {}});
    return {};
}

void TrackingState::check_register(const TagId& tag) const
{
    auto it = visitors_.find(tag);
    if (it != visitors_.end() && it->second.back().visitor.status == VisitorStatus::Active) {
        throw Error(ErrorCode::TagAlreadyActive, "tag " + tag.str() + " is already issued");
    }
}

void TrackingState::check_return(const TagId& tag) const
{
    auto it = visitors_.find(tag);
    if (it == visitors_.end() || it->second.back().visitor.status != VisitorStatus::Active) {
        throw Error(ErrorCode::TagNotActive, "tag " + tag.str() + " is not issued");
    }
}

void TrackingState::check_checkpoint(const NodeId& node, const RoomId& room) const
{
    if (checkpoints_.count(node)) {
        throw Error(ErrorCode::DuplicateNode, "node " + node.str() + " is already registered");
    }
    if (!graph_->has_room(room)) {
        throw Error(ErrorCode::UnknownRoom, "room '" + room.str() + "' is not in the building graph");
    }
}

std::optional<Visitor> TrackingState::visitor(const TagId& tag) const
{
    auto it = visitors_.find(tag);
    if (it == visitors_.end()) {
        return std::nullopt;
    }
    return it->second.back().visitor;
}

std::vector<Visitor> TrackingState::issuances(const TagId& tag) const
{
    std::vector<Visitor> out;
    if (auto it = visitors_.find(tag); it != visitors_.end()) {
        for (const auto& iss : it->second) {
            out.push_back(iss.visitor);
        }
    }
    return out;
}

std::vector<Visitor> TrackingState::active_visitor_list() const
{
    std::vector<Visitor> out;
    for (const auto& [tag, list] : visitors_) {
        if (list.back().visitor.status == VisitorStatus::Active) {
            out.push_back(list.back().visitor);
        }
    }
    return out;
}

std::optional<Checkpoint> TrackingState::checkpoint(const NodeId& node) const
{
    auto it = checkpoints_.find(node);
    if (it == checkpoints_.end()) {
        return std::nullopt;
    }
    Checkpoint c = it->second.checkpoint;
    if (!it->second.reports.empty()) {
        c.last_report = it->second.reports.back();
    }
    return c;
}

std::vector<Checkpoint> TrackingState::checkpoints() const
{
    std::vector<Checkpoint> out;
    for (const auto& [node, entry] : checkpoints_) {
        out.push_back(*checkpoint(node));
    }
    return out;
}

OccupancySnapshot TrackingState::occupancy(std::optional<Timestamp> at) const
{
    OccupancySnapshot snap;
    snap.seq = last_seq_;
    if (at && epoch_ && *at < *epoch_) {
        throw Error(ErrorCode::QueryBeforeEpoch,
                    at->format() + " precedes the first event at " + epoch_->format());
    }
    Timestamp t = at ? *at : latest_.value_or(Timestamp{});
    snap.at = t;
    for (std::size_t i = 0; i < graph_->room_count(); ++i) {
        std::int64_t n = rooms_[i].at(t);
        snap.per_room.emplace_back(graph_->rooms()[i].id, n);
        snap.total += n;
    }
    for (auto d : kDemographics) {
        snap.by_demographic[d] = demographics_.at(d).at(t);
    }
    const std::int64_t limit = 3 * config_.heartbeat_period_s;
    for (const auto& [node, cp] : checkpoints_) {
        if (cp.registered_at > t) {
            continue;
        }
        Timestamp last = cp.registered_at;
        auto it = std::upper_bound(cp.reports.begin(), cp.reports.end(), t);
        if (it != cp.reports.begin()) {
            last = std::max(last, *std::prev(it));
        }
        if (t - last > limit) {
            snap.stale_checkpoints.insert(node);
        }
    }
    return snap;
}

std::optional<std::pair<RoomId, Timestamp>> TrackingState::last_known(const TagId& tag) const
{
    auto it = visitors_.find(tag);
    if (it == visitors_.end()) {
        return std::nullopt;
    }
    return it->second.back().history.back();
}

std::optional<std::pair<RoomId, Timestamp>> TrackingState::last_known(const TagId& tag, Timestamp at) const
{
    const Issuance* iss = issuance_at(tag, at);
    if (!iss) {
        return std::nullopt;
    }
    auto it = std::upper_bound(iss->history.begin(), iss->history.end(), at,
                               [](Timestamp t, const auto& h) { return t < h.second; });
    return *std::prev(it);
}

std::optional<TrackRecord> TrackingState::track(const TagId& tag) const
{
    auto it = visitors_.find(tag);
    if (it == visitors_.end()) {
        return std::nullopt;
    }
    const Issuance& iss = it->second.back();
    return TrackRecord{tag, iss.history.back().first, iss.history.back().second, iss.history};
}

IntervalFlow TrackingState::interval_flow(const RoomId& room, Timestamp from, Timestamp to) const
{
    if (from > to) {
        throw Error(ErrorCode::InvalidInterval, "interval start " + from.format() + " is after its end " + to.format());
    }
    const Series& s = rooms_[graph_->index_of(room)];
    return IntervalFlow{room, from, to, count_le(s.entries, to) - count_le(s.entries, from),
                        count_le(s.exits, to) - count_le(s.exits, from)};
}

void TrackingState::rebuild_series()
{
    rooms_.assign(graph_->room_count(), Series{});
    for (auto d : kDemographics) {
        demographics_[d] = Series{};
    }
    active_ = 0;
    for (const auto& [tag, list] : visitors_) {
        for (const auto& iss : list) {
            enter(iss, iss.history.front().first, iss.history.front().second);
            for (std::size_t i = 1; i < iss.history.size(); ++i) {
                if (iss.history[i].first != iss.history[i - 1].first) {
                    move(iss, iss.history[i - 1].first, iss.history[i].first, iss.history[i].second);
                }
            }
            insert_sorted(demographics_[iss.visitor.demographic].entries, iss.visitor.issued_at);
            if (iss.returned_at) {
                leave(iss, iss.history.back().first, *iss.returned_at);
                insert_sorted(demographics_[iss.visitor.demographic].exits, *iss.returned_at);
            }
            else {
                ++active_;
            }
        }
    }
}

namespace {

std::string opt_ts(const std::optional<Timestamp>& t) { return t ? t->format() : "-"; }

std::uint32_t crc_of(std::string_view bytes)
{
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

[[noreturn]] void bad_snapshot(const std::string& why) { throw Error(ErrorCode::CorruptSnapshot, why); }

std::vector<std::string_view> tabs(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t t = line.find('\t', start);
        out.push_back(line.substr(start, t == std::string_view::npos ? line.npos : t - start));
        if (t == std::string_view::npos) {
            return out;
        }
        start = t + 1;
    }
}

std::uint64_t to_u64(std::string_view s)
{
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        bad_snapshot("bad number '" + std::string(s) + "'");
    }
    return v;
}

std::optional<Timestamp> from_opt_ts(std::string_view s)
{
    if (s == "-") {
        return std::nullopt;
    }
    return Timestamp::parse(s);
}

} // namespace

std::string TrackingState::serialize() const
{
    std::ostringstream out;
    out << "vtrack-state\t1\n";
    out << "config\t" << config_.dedup_window_s << '\t' << config_.heartbeat_period_s << '\n';
    out << "seq\t" << last_seq_ << '\n';
    out << "epoch\t" << opt_ts(epoch_) << '\n';
    out << "latest\t" << opt_ts(latest_) << '\n';
    out << "diag\t" << diag_.applied_reads << '\t' << diag_.measurements << '\t' << diag_.duplicates << '\t'
        << diag_.unknown_checkpoint << '\t' << diag_.unknown_or_inactive_tag << '\t' << diag_.stale_reads << '\t'
        << diag_.rejected_records << '\t' << diag_.observed_transitions << '\n';
    for (const auto& [node, cp] : checkpoints_) {
        out << "checkpoint\t" << node.str() << '\t' << cp.checkpoint.name << '\t' << cp.checkpoint.location.str()
            << '\t' << cp.registered_at.format();
        for (auto t : cp.reports) {
            out << '\t' << t.format();
        }
        out << '\n';
    }
    for (const auto& [tag, list] : visitors_) {
        for (const auto& iss : list) {
            const Visitor& v = iss.visitor;
            out << "visitor\t" << tag.str() << '\t' << v.name << '\t' << to_string(v.demographic) << '\t'
                << v.issued_at.format() << '\t' << (v.status == VisitorStatus::Active ? "active" : "returned")
                << '\t' << iss.last_seen.format() << '\t' << opt_ts(iss.returned_at);
            for (const auto& [room, t] : iss.history) {
                out << '\t' << room.str() << '\t' << t.format();
            }
            out << '\n';
        }
    }
    for (const auto& [key, t] : last_read_) {
        out << "lastread\t" << key.first << '\t' << key.second.str() << '\t' << t.format() << '\n';
    }
    for (const auto& id : batches_) {
        out << "batch\t" << id << '\n';
    }
    std::string body = out.str();
    char crc[24];
    std::snprintf(crc, sizeof crc, "end\t%08x\n", crc_of(body));
    return body + crc;
}

TrackingState TrackingState::deserialize(std::shared_ptr<const BuildingGraph> graph, EngineConfig config,
                                         std::string_view text)
{
    std::size_t end_pos = text.rfind("end\t");
    if (end_pos == std::string_view::npos || (end_pos != 0 && text[end_pos - 1] != '\n')) {
        bad_snapshot("missing end marker");
    }
    std::string_view body = text.substr(0, end_pos);
    std::string_view trailer = text.substr(end_pos + 4);
    if (trailer.size() != 9 || trailer.back() != '\n') {
        bad_snapshot("malformed end marker");
    }
    std::uint32_t stored = 0;
    auto [p, ec] = std::from_chars(trailer.data(), trailer.data() + 8, stored, 16);
    if (ec != std::errc() || p != trailer.data() + 8 || stored != crc_of(body)) {
        bad_snapshot("checksum mismatch");
    }

    TrackingState s(std::move(graph), config);
    try {
        std::size_t pos = 0;
        bool header = false;
        while (pos < body.size()) {
            std::size_t nl = body.find('\n', pos);
            if (nl == std::string_view::npos) {
                bad_snapshot("unterminated line");
            }
            auto f = tabs(body.substr(pos, nl - pos));
            pos = nl + 1;
            const auto& kind = f[0];
            auto need = [&](std::size_t n) {
                if (f.size() < n) {
                    bad_snapshot("short '" + std::string(kind) + "' line");
                }
            };
            if (kind == "vtrack-state") {
                need(2);
                if (f[1] != "1") {
                    bad_snapshot("unsupported snapshot version");
                }
                header = true;
            }
            else if (kind == "config") {
                need(3);
                if (static_cast<std::int64_t>(to_u64(f[1])) != config.dedup_window_s
                    || static_cast<std::int64_t>(to_u64(f[2])) != config.heartbeat_period_s) {
                    bad_snapshot("snapshot was written under a different engine configuration");
                }
            }
            else if (kind == "seq") {
                need(2);
                s.last_seq_ = to_u64(f[1]);
            }
            else if (kind == "epoch") {
                need(2);
                s.epoch_ = from_opt_ts(f[1]);
            }
            else if (kind == "latest") {
                need(2);
                s.latest_ = from_opt_ts(f[1]);
            }
            else if (kind == "diag") {
                need(9);
                s.diag_ = Diagnostics{to_u64(f[1]), to_u64(f[2]), to_u64(f[3]), to_u64(f[4]),
                                      to_u64(f[5]), to_u64(f[6]), to_u64(f[7]), to_u64(f[8])};
            }
            else if (kind == "checkpoint") {
                need(5);
                auto node = NodeId::parse(f[1]);
                CheckpointEntry cp{Checkpoint{node, validate_name(f[2]), RoomId::parse(f[3]), std::nullopt},
                                   Timestamp::parse(f[4]),
                                   {}};
                if (!s.graph_->has_room(cp.checkpoint.location)) {
                    bad_snapshot("checkpoint in unknown room");
                }
                for (std::size_t i = 5; i < f.size(); ++i) {
                    cp.reports.push_back(Timestamp::parse(f[i]));
                }
                if (!std::is_sorted(cp.reports.begin(), cp.reports.end())) {
                    bad_snapshot("checkpoint report times out of order");
                }
                s.checkpoints_.emplace(node, std::move(cp));
            }
            else if (kind == "visitor") {
                need(10);
                if ((f.size() - 8) % 2 != 0) {
                    bad_snapshot("odd visitor history");
                }
                auto tag = TagId::parse(f[1]);
                Issuance iss{Visitor{tag, validate_name(f[2]), parse_demographic(f[3]), Timestamp::parse(f[4]),
                                     f[5] == "active" ? VisitorStatus::Active : VisitorStatus::Returned},
                             s.graph_->entrance(),
                             Timestamp::parse(f[6]),
                             {},
                             from_opt_ts(f[7])};
                if (f[5] != "active" && f[5] != "returned") {
                    bad_snapshot("bad visitor status");
                }
                for (std::size_t i = 8; i + 1 < f.size(); i += 2) {
                    RoomId room = RoomId::parse(f[i]);
                    if (!s.graph_->has_room(room)) {
                        bad_snapshot("history names unknown room");
                    }
                    iss.history.emplace_back(room, Timestamp::parse(f[i + 1]));
                }
                iss.current = iss.history.back().first;
                if ((iss.visitor.status == VisitorStatus::Returned) != iss.returned_at.has_value()) {
                    bad_snapshot("visitor status and return time disagree");
                }
                s.visitors_[tag].push_back(std::move(iss));
            }
            else if (kind == "lastread") {
                need(4);
                s.last_read_.emplace(std::make_pair(std::string(f[1]), NodeId::parse(f[2])), Timestamp::parse(f[3]));
            }
            else if (kind == "batch") {
                need(2);
                s.batches_.insert(std::string(f[1]));
            }
            else {
                bad_snapshot("unknown line kind '" + std::string(kind) + "'");
            }
        }
        if (!header) {
            bad_snapshot("missing header");
        }
    }
    catch (const Error& e) {
        if (e.code() == ErrorCode::CorruptSnapshot) {
            throw;
        }
        bad_snapshot(e.what());
    }
    s.rebuild_series();
    return s;
}

TrackingState replay(std::shared_ptr<const BuildingGraph> graph, EngineConfig config, std::span<const LogRecord> log)
{
    TrackingState s(std::move(graph), config);
    for (const auto& rec : log) {
        s.apply(rec);
    }
    return s;
}

TrackingState replay_text(std::shared_ptr<const BuildingGraph> graph, EngineConfig config, std::string_view text)
{
    TrackingState s(std::move(graph), config);
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            throw CorruptLogError(s.last_seq() + 1, "record truncated (no line feed)");
        }
        s.apply(decode_record(text.substr(pos, nl - pos), s.last_seq() + 1));
        pos = nl + 1;
    }
    return s;
}

} // namespace vtrack
