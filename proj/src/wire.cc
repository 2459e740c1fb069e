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

#include "vtrack/wire.h"

#include "vtrack/error.h"

#include <algorithm>
#include <charconv>
#include <cstdio>

namespace vtrack::wire {

namespace {

bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::string_view trim(std::string_view s)
{
    while (!s.empty() && is_blank(s.front())) {
        s.remove_prefix(1);
    }
    while (!s.empty() && is_blank(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

class Scanner {
public:
    explicit Scanner(std::string_view text, std::size_t pos = 0) : text_(text), pos_(pos) {}

    std::size_t pos() const { return pos_; }

    void skip_blanks()
    {
        while (pos_ < text_.size() && is_blank(text_[pos_])) {
            ++pos_;
        }
    }

    bool at_end()
    {
        skip_blanks();
        return pos_ >= text_.size();
    }

    char peek()
    {
        skip_blanks();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    void expect(char c)
    {
        if (peek() != c) {
            throw GrammarError(pos_, std::string("'") + c + "'");
        }
        ++pos_;
    }

    void expect_word(std::string_view word)
    {
        skip_blanks();
        if (text_.substr(pos_, word.size()) != word) {
            throw GrammarError(pos_, "'" + std::string(word) + "'");
        }
        pos_ += word.size();
    }

    // Raw field up to (not including) the next delimiter, with blanks trimmed.
    std::string_view field(std::size_t& start)
    {
        skip_blanks();
        start = pos_;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '|' || c == ',' || c == '<' || c == '>') {
                break;
            }
            ++pos_;
        }
        return trim(text_.substr(start, pos_ - start));
    }

    // A literal "..." standing as the final list item, as in printed
    // listings that elide the tail. Consumed and ignored.
    bool elision()
    {
        skip_blanks();
        if (text_.substr(pos_, 3) != "...") {
            return false;
        }
        Scanner probe(text_, pos_ + 3);
        if (probe.peek() != '>') {
            return false;
        }
        pos_ += 3;
        return true;
    }

    void expect_list_continue_or_close(bool& more)
    {
        char c = peek();
        if (c == ',') {
            ++pos_;
            more = true;
        }
        else if (c == '>') {
            more = false;
        }
        else {
            throw GrammarError(pos_, "',' or '>'");
        }
    }

private:
    std::string_view text_;
    std::size_t pos_;
};

TagRoster parse_roster(Scanner& sc)
{
    sc.expect('<');
    sc.expect_word("TagId");
    sc.expect('|');
    sc.expect_word("Name");
    sc.expect('>');
    sc.expect('=');
    sc.expect('<');

    TagRoster roster;
    bool more = sc.peek() != '>';
    while (more) {
        if (sc.elision()) {
            break;
        }
        std::size_t start = 0;
        std::string_view tag_text = sc.field(start);
        std::optional<TagId> tag;
        try {
            tag = TagId::parse(tag_text);
        }
        catch (const Error&) {
            throw GrammarError(start, "TagId (10 hex digits)");
        }
        sc.expect('|');
        std::string_view name_text = sc.field(start);
        std::string name;
        try {
            name = validate_name(name_text);
        }
        catch (const Error&) {
            throw GrammarError(start, "visitor name");
        }
        roster.entries.push_back({*tag, std::move(name)});
        sc.expect_list_continue_or_close(more);
    }
    sc.expect('>');
    return roster;
}

template <typename F>
auto field_or_throw(std::size_t index, const char* name, F&& parse)
{
    try {
        return parse();
    }
    catch (const FieldError&) {
        throw;
    }
    catch (const Error& e) {
        throw FieldError(index, name, e.what());
    }
}

CheckpointReport parse_report(Scanner& sc)
{
    sc.expect('<');
    sc.expect_word("IpAdress");
    sc.expect('|');
    sc.expect_word("Name");
    sc.expect('|');
    sc.expect_word("Location");
    sc.expect('|');
    sc.expect_word("LastMeasurementTime");
    sc.expect('>');
    sc.expect('=');
    sc.expect('<');

    CheckpointReport report;
    bool more = sc.peek() != '>';
    while (more) {
        if (sc.elision()) {
            break;
        }
        const std::size_t index = report.records.size();
        std::size_t start = 0;
        auto node_text = sc.field(start);
        sc.expect('|');
        auto name_text = sc.field(start);
        sc.expect('|');
        auto room_text = sc.field(start);
        sc.expect('|');
        auto time_text = sc.field(start);

        ReportRecord rec{
            field_or_throw(index, "node", [&] { return NodeId::parse(node_text); }),
            field_or_throw(index, "name", [&] { return validate_name(name_text); }),
            field_or_throw(index, "location", [&] { return RoomId::parse(room_text); }),
            field_or_throw(index, "time", [&] { return Timestamp::parse(time_text); }),
        };
        report.records.push_back(std::move(rec));
        sc.expect_list_continue_or_close(more);
    }
    sc.expect('>');
    return report;
}

void expect_end(Scanner& sc)
{
    if (!sc.at_end()) {
        throw GrammarError(sc.pos(), "end of input");
    }
}

std::optional<FrameKind> parse_kind(std::string_view token)
{
    if (token == "roster") return FrameKind::Roster;
    if (token == "report") return FrameKind::Report;
    if (token == "heartbeat") return FrameKind::Heartbeat;
    return std::nullopt;
}

} // namespace

std::string encode_tag_roster(const TagRoster& roster)
{
    std::string out(kRosterHeader);
    for (std::size_t i = 0; i < roster.entries.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += roster.entries[i].tag.str();
        out += " | ";
        out += roster.entries[i].name;
    }
    out += '>';
    return out;
}

TagRoster decode_tag_roster(std::string_view text)
{
    Scanner sc(text);
    TagRoster roster = parse_roster(sc);
    expect_end(sc);
    return roster;
}

std::string encode_checkpoint_report(const CheckpointReport& report)
{
    std::string out(kReportHeader);
    for (std::size_t i = 0; i < report.records.size(); ++i) {
        const auto& r = report.records[i];
        if (i > 0) {
            out += " , ";
        }
        out += r.node.str();
        out += "| ";
        out += r.name;
        out += " | ";
        out += r.location.str();
        out += " |";
        out += r.at.format();
    }
    out += '>';
    return out;
}

CheckpointReport decode_checkpoint_report(std::string_view text)
{
    Scanner sc(text);
    CheckpointReport report = parse_report(sc);
    expect_end(sc);
    return report;
}

std::string_view to_string(FrameKind kind)
{
    switch (kind) {
    case FrameKind::Roster: return "roster";
    case FrameKind::Report: return "report";
    case FrameKind::Heartbeat: return "heartbeat";
    }
    return "report";
}

std::string frame_message(FrameKind kind, std::string_view payload)
{
    if (payload.find("\n\n") != std::string_view::npos) {
        throw Error(ErrorCode::FrameError, "payload contains a blank line");
    }
    if (!payload.empty() && payload.back() == '\n') {
        throw Error(ErrorCode::FrameError, "payload ends with a line feed");
    }
    std::string out(to_string(kind));
    out += '\n';
    out += payload;
    out += "\n\n";
    return out;
}

std::optional<Frame> FrameReader::next()
{
    std::size_t nl = buffer_.find('\n');
    if (nl == std::string::npos) {
        if (buffer_.size() > 16) {
            throw Error(ErrorCode::FrameError, "no frame kind line");
        }
        return std::nullopt;
    }
    auto kind = parse_kind(std::string_view(buffer_).substr(0, nl));
    if (!kind) {
        throw Error(ErrorCode::FrameError, "unknown frame kind '" + buffer_.substr(0, nl) + "'");
    }
    std::size_t end = buffer_.find("\n\n", nl + 1);
    if (end == std::string::npos) {
        if (buffer_.size() > kMaxFrameBytes) {
            throw Error(ErrorCode::FrameError, "frame exceeds size limit");
        }
        return std::nullopt;
    }
    Frame f{*kind, buffer_.substr(nl + 1, end - nl - 1)};
    buffer_.erase(0, end + 2);
    return f;
}

Frame unframe(std::string_view bytes)
{
    FrameReader reader;
    reader.feed(bytes);
    auto f = reader.next();
    if (!f) {
        throw Error(ErrorCode::FrameError, "missing blank-line terminator");
    }
    if (reader.buffered() != 0) {
        throw Error(ErrorCode::FrameError, "trailing bytes after frame");
    }
    return *f;
}

std::string encode_report_payload(const ReportPayload& payload)
{
    std::string out;
    if (payload.batch_id) {
        out += "batch ";
        out += *payload.batch_id;
        out += '\n';
    }
    out += encode_checkpoint_report(payload.report);
    if (payload.tags) {
        out += '\n';
        out += encode_tag_roster(*payload.tags);
    }
    return out;
}

ReportPayload decode_report_payload(std::string_view text)
{
    ReportPayload out;
    std::size_t pos = 0;
    if (text.substr(0, 6) == "batch ") {
        std::size_t nl = text.find('\n');
        if (nl == std::string_view::npos) {
            throw GrammarError(text.size(), "line feed after batch id");
        }
        std::string_view id = trim(text.substr(6, nl - 6));
        if (id.empty()) {
            throw GrammarError(6, "batch id");
        }
        for (char c : id) {
            if (is_blank(c)) {
                throw GrammarError(6, "batch id without blanks");
            }
        }
        out.batch_id = std::string(id);
        pos = nl + 1;
    }
    Scanner sc(text, pos);
    out.report = parse_report(sc);
    if (!sc.at_end()) {
        std::size_t roster_pos = sc.pos();
        out.tags = parse_roster(sc);
        expect_end(sc);
        if (out.tags->entries.size() != out.report.records.size()) {
            throw GrammarError(roster_pos, "tag roster with " + std::to_string(out.report.records.size())
                                               + " entries (one per record)");
        }
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string batch_id_for(const ReportPayload& decoded, std::string_view payload_bytes)
{
    if (decoded.batch_id) {
        return *decoded.batch_id;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "fnv-%016llx", static_cast<unsigned long long>(fnv1a64(payload_bytes)));
    return buf;
}

std::string encode_heartbeat(const Heartbeat& hb) { return hb.node.str() + ' ' + hb.at.format(); }

std::optional<Heartbeat> decode_heartbeat(std::string_view payload)
{
    if (payload.empty()) {
        return std::nullopt;
    }
    std::size_t sp = payload.find(' ');
    if (sp == std::string_view::npos) {
        throw GrammarError(payload.size(), "' ' between node and timestamp");
    }
    try {
        return Heartbeat{NodeId::parse(payload.substr(0, sp)), Timestamp::parse(payload.substr(sp + 1))};
    }
    catch (const Error&) {
        throw GrammarError(0, "NODE TIMESTAMP");
    }
}

std::string format_reply(const Reply& reply)
{
    switch (reply.kind) {
    case Reply::Kind::Ack: return "ack " + reply.detail;
    case Reply::Kind::Ok: return "ok";
    case Reply::Kind::Reject:
    case Reply::Kind::Unavailable: break;
    }
    std::string detail = reply.detail;
    std::replace(detail.begin(), detail.end(), '\n', ' ');
    return "reject " + std::to_string(reply.status) + " " + detail;
}

Reply parse_reply(std::string_view line)
{
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    if (line == "ok") {
        return Reply{Reply::Kind::Ok, 200, ""};
    }
    if (line.substr(0, 4) == "ack " && line.size() > 4) {
        return Reply{Reply::Kind::Ack, 200, std::string(line.substr(4))};
    }
    if (line.substr(0, 7) == "reject ") {
        auto rest = line.substr(7);
        int status = 0;
        auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), status);
        if (ec == std::errc() && status >= 100 && status <= 599) {
            std::string_view detail(p, rest.data() + rest.size() - p);
            if (!detail.empty() && detail.front() == ' ') {
                detail.remove_prefix(1);
            }
            return Reply{Reply::Kind::Reject, status, std::string(detail)};
        }
    }
    throw Error(ErrorCode::FrameError, "unrecognised reply line '" + std::string(line) + "'");
}

} // namespace vtrack::wire
