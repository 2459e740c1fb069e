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

#include "vtrack/log_record.h"

#include "vtrack/error.h"

#include <zlib.h>

#include <charconv>
#include <cstdio>
#include <vector>

namespace vtrack {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint32_t crc_of(std::string_view bytes)
{
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

std::vector<std::string_view> split_tabs(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

} // namespace

std::string_view kind_name(const RecordBody& body)
{
    return std::visit(overloaded{
                          [](const record::Register&) { return std::string_view("register"); },
                          [](const record::Return&) { return std::string_view("return"); },
                          [](const record::Read&) { return std::string_view("read"); },
                          [](const record::Heartbeat&) { return std::string_view("heartbeat"); },
                          [](const record::CheckpointAdded&) { return std::string_view("checkpoint"); },
                          [](const record::Batch&) { return std::string_view("batch"); },
                      },
                      body);
}

Timestamp time_of(const RecordBody& body)
{
    return std::visit([](const auto& r) { return r.at; }, body);
}

std::string encode_record(const LogRecord& rec)
{
    std::string line = std::to_string(rec.seq);
    line += '\t';
    line += kind_name(rec.body);
    auto field = [&line](std::string_view f) {
        line += '\t';
        line += f;
    };
    std::visit(overloaded{
                   [&](const record::Register& r) {
                       field(r.tag.str());
                       field(r.at.format());
                       field(to_string(r.demographic));
                       field(r.name);
                   },
                   [&](const record::Return& r) {
                       field(r.tag.str());
                       field(r.at.format());
                   },
                   [&](const record::Read& r) {
                       field(r.tag ? std::string_view(r.tag->str()) : std::string_view("-"));
                       field(r.node.str());
                       field(r.at.format());
                   },
                   [&](const record::Heartbeat& r) {
                       field(r.node.str());
                       field(r.at.format());
                   },
                   [&](const record::CheckpointAdded& r) {
                       field(r.node.str());
                       field(r.name);
                       field(r.room.str());
                       field(r.at.format());
                   },
                   [&](const record::Batch& r) {
                       field(r.id);
                       field(r.node.str());
                       field(r.at.format());
                       field(std::to_string(r.count));
                   },
               },
               rec.body);
    char crc[12];
    std::snprintf(crc, sizeof crc, "\t%08x", crc_of(line));
    line += crc;
    return line;
}

LogRecord decode_record(std::string_view line, std::uint64_t expected_seq)
{
    auto corrupt = [&](const std::string& why) -> CorruptLogError { return CorruptLogError(expected_seq, why); };

    std::size_t last_tab = line.rfind('\t');
    if (last_tab == std::string_view::npos || line.size() - last_tab - 1 != 8) {
        throw corrupt("missing checksum");
    }
    std::uint32_t stored = 0;
    auto crc_text = line.substr(last_tab + 1);
    auto [p, ec] = std::from_chars(crc_text.data(), crc_text.data() + crc_text.size(), stored, 16);
    if (ec != std::errc() || p != crc_text.data() + crc_text.size()) {
        throw corrupt("malformed checksum");
    }
    std::string_view payload = line.substr(0, last_tab);
    if (crc_of(payload) != stored) {
        throw corrupt("checksum mismatch");
    }

    auto f = split_tabs(payload);
    if (f.size() < 2) {
        throw corrupt("too few fields");
    }
    std::uint64_t seq = 0;
    std::optional<RecordBody> body;
    auto [sp, sec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), seq);
    if (sec != std::errc() || sp != f[0].data() + f[0].size()) {
        throw corrupt("malformed sequence number");
    }
    if (seq != expected_seq) {
        throw corrupt("sequence gap: found " + std::to_string(seq));
    }
    auto arity = [&](std::size_t n) {
        if (f.size() != n + 2) {
            throw corrupt(std::string(f[1]) + " record has " + std::to_string(f.size() - 2) + " fields");
        }
    };
    try {
        if (f[1] == "register") {
            arity(4);
            body = record::Register{TagId::parse(f[2]), Timestamp::parse(f[3]), parse_demographic(f[4]),
                                        validate_name(f[5])};
        }
        else if (f[1] == "return") {
            arity(2);
            body = record::Return{TagId::parse(f[2]), Timestamp::parse(f[3])};
        }
        else if (f[1] == "read") {
            arity(3);
            std::optional<TagId> tag;
            if (f[2] != "-") {
                tag = TagId::parse(f[2]);
            }
            body = record::Read{tag, NodeId::parse(f[3]), Timestamp::parse(f[4])};
        }
        else if (f[1] == "heartbeat") {
            arity(2);
            body = record::Heartbeat{NodeId::parse(f[2]), Timestamp::parse(f[3])};
        }
        else if (f[1] == "checkpoint") {
            arity(4);
            body = record::CheckpointAdded{NodeId::parse(f[2]), validate_name(f[3]), RoomId::parse(f[4]),
                                               Timestamp::parse(f[5])};
        }
        else if (f[1] == "batch") {
            arity(4);
            if (f[2].empty()) {
                throw corrupt("empty batch id");
            }
            std::uint32_t count = 0;
            auto [cp, cec] = std::from_chars(f[5].data(), f[5].data() + f[5].size(), count);
            if (cec != std::errc() || cp != f[5].data() + f[5].size()) {
                throw corrupt("malformed batch count");
            }
            body = record::Batch{std::string(f[2]), NodeId::parse(f[3]), Timestamp::parse(f[4]), count};
        }
        else {
            throw corrupt("unknown record kind '" + std::string(f[1]) + "'");
        }
    }
    catch (const CorruptLogError&) {
        throw;
    }
    catch (const Error& e) {
        throw corrupt(e.what());
    }
    return LogRecord{seq, std::move(*body)};
}

} // namespace vtrack
