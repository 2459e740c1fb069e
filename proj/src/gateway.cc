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

#include "vtrack/gateway.h"

#include <chrono>
#include <ctime>

namespace vtrack {

namespace {

// A request field that failed validation; carries the underlying code.
class BadField : public Error {
public:
    BadField(std::string field, const Error& cause) : Error(cause.code(), cause.detail()), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct NotFound {
    std::string what;
};

struct MethodNotAllowed {};

template <class F>
auto parse_field(const std::string& name, F&& f) -> decltype(f())
{
    try {
        return f();
    }
    catch (const BadField&) {
        throw;
    }
    catch (const Error& e) {
        throw BadField(name, e);
    }
}

class Fields {
public:
    explicit Fields(const TextDoc& doc) : doc_(doc) {}
    Fields(const std::map<std::string, std::string>& query) : query_(&query) {}

    std::optional<std::string> opt(const std::string& key) const
    {
        if (query_) {
            auto it = query_->find(key);
            return it == query_->end() ? std::nullopt : std::optional(it->second);
        }
        return doc_.get(key);
    }
    std::string need(const std::string& key) const
    {
        auto v = opt(key);
        if (!v || v->empty()) {
            throw BadField(key, Error(ErrorCode::InvalidParams, "missing field '" + key + "'"));
        }
        return *v;
    }
    std::optional<Timestamp> time(const std::string& key) const
    {
        auto v = opt(key);
        if (!v || v->empty()) {
            return std::nullopt;
        }
        return parse_field(key, [&] { return Timestamp::parse(*v); });
    }

private:
    TextDoc doc_;
    const std::map<std::string, std::string>* query_ = nullptr;
};

std::vector<std::string> split_path(std::string_view path)
{
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < path.size()) {
        if (path[i] == '/') {
            ++i;
            continue;
        }
        auto j = path.find('/', i);
        out.emplace_back(path.substr(i, j == std::string_view::npos ? std::string_view::npos : j - i));
        i = j == std::string_view::npos ? path.size() : j;
    }
    return out;
}

std::vector<std::string> split_list(std::string_view s)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto comma = s.find(',', start);
        auto item = s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!item.empty() && item.front() == ' ') {
            item.remove_prefix(1);
        }
        while (!item.empty() && item.back() == ' ') {
            item.remove_suffix(1);
        }
        if (!item.empty()) {
            out.emplace_back(item);
        }
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

std::string ts_or_dash(const std::optional<Timestamp>& t) { return t ? t->format() : "-"; }

void put_visitor(TextDoc& doc, const Visitor& v)
{
    doc.set("tag", v.tag.str());
    doc.set("name", v.name);
    doc.set("demographic", std::string(to_string(v.demographic)));
    doc.set("issued_at", v.issued_at.format());
    doc.set("status", v.status == VisitorStatus::Active ? "active" : "returned");
}

void put_occupancy(TextDoc& doc, const BuildingGraph& g, const OccupancySnapshot& s)
{
    doc.set("seq", static_cast<std::int64_t>(s.seq));
    doc.set("total", s.total);
    for (const auto& [d, n] : s.by_demographic) {
        doc.set(std::string(to_string(d)), n);
    }
    auto& rooms = doc.table("rooms", {"room", "floor", "count"});
    for (const auto& [room, n] : s.per_room) {
        rooms.rows.push_back({room.str(), std::to_string(g.floor_of(room)), std::to_string(n)});
    }
    auto& stale = doc.table("stale", {"node"});
    for (const auto& node : s.stale_checkpoints) {
        stale.rows.push_back({node.str()});
    }
}

void put_evac(TextDoc& doc, const EvacReport& r)
{
    doc.set("total_inside", r.total_inside);
    auto& t = doc.table("routes", {"room", "occupancy", "hops", "route"});
    for (const auto& e : r.per_room) {
        t.rows.push_back({e.room.str(), std::to_string(e.occupancy), std::to_string(e.route.hops), route_text(e.route)});
    }
}

ApiResponse reply(int status, const TextDoc& doc) { return ApiResponse{status, doc.render()}; }

} // namespace

std::string_view to_string(Role r) { return r == Role::Manager ? "manager" : "viewer"; }

int http_status(ErrorCode code)
{
    switch (code) {
    case ErrorCode::TagAlreadyActive:
    case ErrorCode::DuplicateNode: return 409;
    case ErrorCode::TagNotActive:
    case ErrorCode::UnknownOrInactiveTag:
    case ErrorCode::UnknownRoom:
    case ErrorCode::UnknownCheckpoint: return 404;
    case ErrorCode::RejectedUnknownCheckpoint: return 403;
    case ErrorCode::Unauthorized: return 401;
    case ErrorCode::IoFailure:
    case ErrorCode::StorageFull: return 503;
    case ErrorCode::CorruptLog:
    case ErrorCode::CorruptSnapshot:
    case ErrorCode::SeqOutOfRange:
    case ErrorCode::UnknownRoomInSnapshot:
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidGraph: return 500;
    default: return 400;
    }
}

Timestamp wall_clock()
{
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    ::localtime_r(&now, &tm);
    return Timestamp::from_civil(tm.tm_year + 1900, static_cast<unsigned>(tm.tm_mon + 1), static_cast<unsigned>(tm.tm_mday),
                                 static_cast<unsigned>(tm.tm_hour), static_cast<unsigned>(tm.tm_min),
                                 static_cast<unsigned>(tm.tm_sec));
}

Gateway::Gateway(std::shared_ptr<Engine> engine, std::shared_ptr<Outbox> outbox, Credentials credentials, Clock clock)
: engine_(std::move(engine)), outbox_(std::move(outbox)), credentials_(std::move(credentials)), clock_(std::move(clock))
{
    if (credentials_.manager_token.empty()) {
        throw Error(ErrorCode::InvalidConfig, "a manager token is required");
    }
    if (credentials_.viewer_token == credentials_.manager_token) {
        throw Error(ErrorCode::InvalidConfig, "viewer and manager tokens must differ");
    }
}

std::optional<Role> Gateway::authenticate(std::string_view authorization) const
{
    constexpr std::string_view kBearer = "Bearer ";
    if (authorization.substr(0, kBearer.size()) != kBearer) {
        return std::nullopt;
    }
    auto token = authorization.substr(kBearer.size());
    if (token == credentials_.manager_token) {
        return Role::Manager;
    }
    if (!credentials_.viewer_token.empty() && token == credentials_.viewer_token) {
        return Role::Viewer;
    }
    return std::nullopt;
}

wire::Reply Gateway::handle_frame(std::string_view frame_bytes, std::optional<Role> role)
{
    wire::Frame frame;
    try {
        frame = wire::unframe(frame_bytes);
    }
    catch (const Error& e) {
        return wire::Reply{wire::Reply::Kind::Reject, http_status(e.code()),
                           std::string(to_string(e.code())) + " " + e.detail()};
    }
    return handle_frame(frame, role);
}

wire::Reply Gateway::handle_frame(const wire::Frame& frame, std::optional<Role> role)
{
    auto reject = [](const Error& e) {
        return wire::Reply{wire::Reply::Kind::Reject, http_status(e.code()),
                           std::string(to_string(e.code())) + " " + e.detail()};
    };
    try {
        switch (frame.kind) {
        case wire::FrameKind::Report: {
            auto payload = wire::decode_report_payload(frame.payload);
            auto r = engine_->ingest_report(payload, frame.payload);
            return wire::Reply{wire::Reply::Kind::Ack, 200, r.batch_id};
        }
        case wire::FrameKind::Heartbeat:
            if (auto hb = wire::decode_heartbeat(frame.payload)) {
                engine_->heartbeat(*hb);
            }
            return wire::Reply{wire::Reply::Kind::Ok, 200, ""};
        case wire::FrameKind::Roster:
            if (role != Role::Manager) {
                auto r = reject(Error(ErrorCode::Unauthorized, "roster registration needs the manager token"));
                r.status = role ? 403 : 401;
                return r;
            }
            engine_->register_roster(wire::decode_tag_roster(frame.payload), clock_());
            return wire::Reply{wire::Reply::Kind::Ok, 200, ""};
        }
    }
    catch (const Error& e) {
        auto r = reject(e);
        if (e.code() == ErrorCode::Unauthorized && role) {
            r.status = 403;
        }
        return r;
    }
    return wire::Reply{wire::Reply::Kind::Reject, 400, "FrameError unknown frame"};
}

ApiResponse Gateway::handle(const ApiRequest& request)
{
    auto role = authenticate(request.authorization);
    auto at_now = [this] {
        auto s = engine_->snapshot();
        return s->latest() ? s->latest()->format() : Timestamp{}.format();
    };
    auto error = [&](int status, std::string_view code, const std::string& message,
                     const std::string& field = {}) {
        TextDoc doc;
        doc.set("at", at_now());
        doc.set("error", std::string(code));
        doc.set("message", message);
        if (!field.empty()) {
            doc.set("field", field);
        }
        return reply(status, doc);
    };
    try {
        return route(request, role);
    }
    catch (const BadField& e) {
        return error(http_status(e.code()), to_string(e.code()), e.detail(), e.field());
    }
    catch (const Error& e) {
        int status = http_status(e.code());
        if (e.code() == ErrorCode::Unauthorized && role) {
            status = 403;
        }
        return error(status, to_string(e.code()), e.detail());
    }
    catch (const NotFound& e) {
        return error(404, "NotFound", e.what);
    }
    catch (const MethodNotAllowed&) {
        return error(405, "MethodNotAllowed", request.method + " is not supported on " + request.path);
    }
}

ApiResponse Gateway::route(const ApiRequest& req, std::optional<Role> role)
{
    auto parts = split_path(req.path);
    if (parts.size() < 2 || parts[0] != "v1") {
        throw NotFound{"no resource at " + req.path};
    }
    parts.erase(parts.begin());
    const bool get = req.method == "GET";
    const bool post = req.method == "POST";
    if (!get && !post) {
        throw MethodNotAllowed{};
    }
    auto need_method = [&](bool is_get) {
        if (is_get ? !get : !post) {
            throw MethodNotAllowed{};
        }
    };
    auto need_viewer = [&] {
        if (!role) {
            throw Error(ErrorCode::Unauthorized, "a bearer token is required");
        }
    };
    auto need_manager = [&] {
        need_viewer();
        if (*role != Role::Manager) {
            throw Error(ErrorCode::Unauthorized, "this action needs the manager role");
        }
    };
    auto body = [&] {
        try {
            return TextDoc::parse(req.body);
        }
        catch (const Error& e) {
            throw BadField("body", e);
        }
    };
    Fields query(req.query);
    const auto& p0 = parts[0];

    if (p0 == "health" && parts.size() == 1) {
        need_method(true);
        auto s = engine_->snapshot();
        TextDoc doc;
        doc.set("at", ts_or_dash(s->latest()));
        doc.set("status", engine_->halted() ? "halted" : "ok");
        doc.set("seq", static_cast<std::int64_t>(s->last_seq()));
        return reply(200, doc);
    }

    if (p0 == "ingest" && parts.size() == 1) {
        need_method(false);
        if (!req.authorization.empty() && !role) {
            throw Error(ErrorCode::Unauthorized, "unknown token");
        }
        auto r = handle_frame(req.body, role);
        TextDoc doc;
        doc.set("at", engine_->snapshot()->occupancy().at.format());
        doc.set("reply", wire::format_reply(r));
        return reply(r.status, doc);
    }

    need_viewer();
    auto snap_at = [](const std::shared_ptr<const TrackingState>& s) { return s->occupancy().at.format(); };

    if (p0 == "checkpoints" && parts.size() == 1) {
        if (post) {
            need_manager();
            Fields f(body());
            auto node = parse_field("node", [&] { return NodeId::parse(f.need("node")); });
            auto name = parse_field("name", [&] { return validate_name(f.need("name")); });
            auto room = parse_field("room", [&] { return RoomId::parse(f.need("room")); });
            auto at = f.time("at").value_or(clock_());
            Checkpoint c = [&] {
                try {
                    return engine_->register_checkpoint(node, name, room, at);
                }
                catch (const Error& e) {
                    if (e.code() == ErrorCode::UnknownRoom) {
                        throw BadField("room", e);
                    }
                    if (e.code() == ErrorCode::DuplicateNode) {
                        throw BadField("node", e);
                    }
                    throw;
                }
            }();
            TextDoc doc;
            doc.set("at", snap_at(engine_->snapshot()));
            doc.set("node", c.node.str());
            doc.set("name", c.name);
            doc.set("room", c.location.str());
            return reply(201, doc);
        }
        auto s = engine_->snapshot();
        auto occ = s->occupancy();
        TextDoc doc;
        doc.set("at", occ.at.format());
        doc.set("count", static_cast<std::int64_t>(s->checkpoints().size()));
        auto& t = doc.table("checkpoints", {"node", "name", "room", "last_report", "stale"});
        for (const auto& c : s->checkpoints()) {
            t.rows.push_back({c.node.str(), c.name, c.location.str(), ts_or_dash(c.last_report),
                              occ.stale_checkpoints.count(c.node) ? "yes" : "no"});
        }
        return reply(200, doc);
    }

    if (p0 == "visitors") {
        if (parts.size() == 1) {
            if (post) {
                need_manager();
                Fields f(body());
                auto tag = parse_field("tag", [&] { return TagId::parse(f.need("tag")); });
                auto name = parse_field("name", [&] { return validate_name(f.need("name")); });
                auto demo = parse_field("demographic",
                                        [&] { return parse_demographic(f.opt("demographic").value_or("unspecified")); });
                auto at = f.time("at").value_or(clock_());
                Visitor v = [&] {
                    try {
                        return engine_->register_visitor(tag, name, demo, at);
                    }
                    catch (const Error& e) {
                        if (e.code() == ErrorCode::TagAlreadyActive) {
                            throw BadField("tag", e);
                        }
                        throw;
                    }
                }();
                TextDoc doc;
                doc.set("at", snap_at(engine_->snapshot()));
                put_visitor(doc, v);
                return reply(201, doc);
            }
            auto s = engine_->snapshot();
            TextDoc doc;
            doc.set("at", snap_at(s));
            auto list = s->active_visitor_list();
            doc.set("active", static_cast<std::int64_t>(list.size()));
            auto& t = doc.table("visitors", {"tag", "name", "demographic", "issued_at", "room", "last_seen"});
            for (const auto& v : list) {
                auto lk = s->last_known(v.tag);
                t.rows.push_back({v.tag.str(), v.name, std::string(to_string(v.demographic)), v.issued_at.format(),
                                  lk ? lk->first.str() : "-", lk ? lk->second.format() : "-"});
            }
            return reply(200, doc);
        }
        auto tag = parse_field("tag", [&] { return TagId::parse(parts[1]); });
        if (parts.size() == 3 && parts[2] == "return") {
            need_method(false);
            need_manager();
            Fields f(body());
            auto at = f.time("at").value_or(clock_());
            auto v = engine_->return_tag(tag, at);
            TextDoc doc;
            doc.set("at", snap_at(engine_->snapshot()));
            put_visitor(doc, v);
            return reply(200, doc);
        }
        if (parts.size() == 3 && parts[2] == "last-position") {
            need_method(true);
            auto s = engine_->snapshot();
            auto at = query.time("at");
            auto v = s->visitor(tag);
            auto lk = at ? s->last_known(tag, *at) : s->last_known(tag);
            if (!v || !lk) {
                throw Error(ErrorCode::UnknownOrInactiveTag, "no visitor with tag " + tag.str() +
                                                                 (at ? " at " + at->format() : std::string()));
            }
            TextDoc doc;
            doc.set("at", at ? at->format() : snap_at(s));
            doc.set("tag", tag.str());
            doc.set("name", v->name);
            doc.set("status", v->status == VisitorStatus::Active ? "active" : "returned");
            doc.set("room", lk->first.str());
            doc.set("since", lk->second.format());
            return reply(200, doc);
        }
        throw NotFound{"no resource at " + req.path};
    }

    if (p0 == "occupancy" && parts.size() == 1) {
        need_method(true);
        auto s = engine_->snapshot();
        auto occ = s->occupancy(query.time("at"));
        TextDoc doc;
        doc.set("at", occ.at.format());
        put_occupancy(doc, s->graph(), occ);
        return reply(200, doc);
    }

    if (p0 == "rooms" && parts.size() == 3 && parts[2] == "flow") {
        need_method(true);
        auto room = parse_field("room", [&] { return RoomId::parse(parts[1]); });
        auto from = query.time("from");
        auto to = query.time("to");
        if (!from || !to) {
            throw BadField(from ? "to" : "from", Error(ErrorCode::InvalidParams, "flow needs from and to"));
        }
        auto s = engine_->snapshot();
        auto flow = s->interval_flow(room, *from, *to);
        TextDoc doc;
        doc.set("at", snap_at(s));
        doc.set("room", flow.room.str());
        doc.set("from", flow.from.format());
        doc.set("to", flow.to.format());
        doc.set("entered", flow.entered);
        doc.set("left", flow.left);
        return reply(200, doc);
    }

    if (p0 == "evac" && parts.size() == 2) {
        if (parts[1] == "report") {
            need_method(true);
            auto s = engine_->snapshot();
            auto r = evac_report(s->graph(), s->occupancy(query.time("at")));
            TextDoc doc;
            doc.set("at", r.at.format());
            put_evac(doc, r);
            return reply(200, doc);
        }
        if (parts[1] == "alert") {
            need_method(false);
            need_manager();
            if (!outbox_) {
                throw Error(ErrorCode::IoFailure, "no outbox configured");
            }
            Fields f(body());
            std::vector<Channel> channels;
            for (const auto& c : split_list(f.opt("channels").value_or(""))) {
                channels.push_back(parse_field("channels", [&] { return parse_channel(c); }));
            }
            auto recipients = split_list(f.opt("recipients").value_or(""));
            auto at = f.time("at").value_or(clock_());
            auto s = engine_->snapshot();
            auto report = evac_report(s->graph(), s->occupancy());
            AlertResult result = [&] {
                try {
                    return outbox_->trigger(report, channels, recipients, at);
                }
                catch (const Error& e) {
                    if (e.code() == ErrorCode::NoChannels) {
                        throw BadField("channels", e);
                    }
                    if (e.code() == ErrorCode::InvalidParams) {
                        throw BadField("recipients", e);
                    }
                    throw;
                }
            }();
            TextDoc doc;
            doc.set("at", report.at.format());
            doc.set("coalesced", result.coalesced ? "yes" : "no");
            doc.set("queued", static_cast<std::int64_t>(result.queued.size()));
            doc.set("outbox", static_cast<std::int64_t>(outbox_->size()));
            put_evac(doc, report);
            return reply(200, doc);
        }
        if (parts[1] == "outbox") {
            need_method(true);
            TextDoc doc;
            doc.set("at", snap_at(engine_->snapshot()));
            if (!outbox_) {
                doc.set("size", 0);
                doc.table("outbox", {"queued_at", "channel", "recipient", "body"});
                return reply(200, doc);
            }
            auto recs = outbox_->records();
            doc.set("size", static_cast<std::int64_t>(recs.size()));
            auto& t = doc.table("outbox", {"queued_at", "channel", "recipient", "body"});
            for (const auto& n : recs) {
                t.rows.push_back({n.queued_at.format(), std::string(to_string(n.channel)), n.recipient, n.body});
            }
            return reply(200, doc);
        }
    }

    if (p0 == "diagnostics" && parts.size() == 1) {
        need_method(true);
        auto s = engine_->snapshot();
        const auto& d = s->diagnostics();
        TextDoc doc;
        doc.set("at", snap_at(s));
        doc.set("seq", static_cast<std::int64_t>(s->last_seq()));
        doc.set("batches", static_cast<std::int64_t>(s->batch_count()));
        doc.set("applied_reads", static_cast<std::int64_t>(d.applied_reads));
        doc.set("measurements", static_cast<std::int64_t>(d.measurements));
        doc.set("duplicates", static_cast<std::int64_t>(d.duplicates));
        doc.set("unknown_checkpoint", static_cast<std::int64_t>(d.unknown_checkpoint));
        doc.set("unknown_or_inactive_tag", static_cast<std::int64_t>(d.unknown_or_inactive_tag));
        doc.set("stale_reads", static_cast<std::int64_t>(d.stale_reads));
        doc.set("rejected_records", static_cast<std::int64_t>(d.rejected_records));
        doc.set("observed_transitions", static_cast<std::int64_t>(d.observed_transitions));
        doc.set("halted", engine_->halted() ? "yes" : "no");
        return reply(200, doc);
    }

    throw NotFound{"no resource at " + req.path};
}

} // namespace vtrack
