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

#include "vtrack/text_doc.h"

#include "vtrack/error.h"

#include <algorithm>

namespace vtrack {

namespace {

std::string clean(std::string s, bool cell)
{
    for (char& c : s) {
        if (c == '\n' || c == '\r' || (cell && c == '\t')) {
            c = ' ';
        }
    }
    return s;
}

std::vector<std::string> split_tabs(std::string_view line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto tab = line.find('\t', start);
        out.emplace_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
        if (tab == std::string_view::npos) {
            return out;
        }
        start = tab + 1;
    }
}

} // namespace

TextDoc& TextDoc::set(std::string key, std::string value)
{
    fields_.emplace_back(clean(std::move(key), false), clean(std::move(value), false));
    return *this;
}

TextTable& TextDoc::table(std::string name, std::vector<std::string> columns)
{
    for (auto& c : columns) {
        c = clean(std::move(c), true);
    }
    tables_.push_back(TextTable{clean(std::move(name), false), std::move(columns), {}});
    return tables_.back();
}

std::optional<std::string> TextDoc::get(std::string_view key) const
{
    for (const auto& [k, v] : fields_) {
        if (k == key) {
            return v;
        }
    }
    return std::nullopt;
}

const TextTable* TextDoc::find_table(std::string_view name) const
{
    for (const auto& t : tables_) {
        if (t.name == name) {
            return &t;
        }
    }
    return nullptr;
}

std::string TextDoc::render() const
{
    std::string out;
    for (const auto& [k, v] : fields_) {
        out += k;
        out += ": ";
        out += v;
        out += '\n';
    }
    for (const auto& t : tables_) {
        out += '[' + t.name + "]\n";
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) {
                    out += '\t';
                }
                out += clean(cells[i], true);
            }
            out += '\n';
        };
        line(t.columns);
        for (const auto& r : t.rows) {
            line(r);
        }
    }
    return out;
}

TextDoc TextDoc::parse(std::string_view text)
{
    TextDoc doc;
    TextTable* current = nullptr;
    bool want_header = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.size() >= 2 && line.front() == '[' && line.back() == ']') {
            doc.tables_.push_back(TextTable{std::string(line.substr(1, line.size() - 2)), {}, {}});
            current = &doc.tables_.back();
            want_header = true;
            continue;
        }
        if (current) {
            if (want_header) {
                current->columns = split_tabs(line);
                want_header = false;
            }
            else if (!line.empty()) {
                auto cells = split_tabs(line);
                if (cells.size() != current->columns.size()) {
                    throw Error(ErrorCode::InvalidParams, "line " + std::to_string(line_no) + ": expected " +
                                                              std::to_string(current->columns.size()) + " cells");
                }
                current->rows.push_back(std::move(cells));
            }
            continue;
        }
        if (line.empty()) {
            continue;
        }
        auto colon = line.find(':');
        if (colon == std::string_view::npos || colon == 0) {
            throw Error(ErrorCode::InvalidParams, "line " + std::to_string(line_no) + ": expected 'key: value'");
        }
        auto value = line.substr(colon + 1);
        if (!value.empty() && value.front() == ' ') {
            value.remove_prefix(1);
        }
        doc.fields_.emplace_back(std::string(line.substr(0, colon)), std::string(value));
    }
    return doc;
}

} // namespace vtrack
