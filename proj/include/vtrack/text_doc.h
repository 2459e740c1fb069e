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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vtrack {

// Line-oriented response and request body format:
//
//   key: value
//   ...
//   [table]
//   col<TAB>col...
//   cell<TAB>cell...
//
// Fields come first, in insertion order, then the tables. A table runs to
// the next "[name]" line or the end. Keys and values hold no line feeds;
// cells hold no tabs or line feeds.
struct TextTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    bool operator==(const TextTable&) const = default;
};

class TextDoc {
public:
    TextDoc& set(std::string key, std::string value);
    TextDoc& set(std::string key, std::int64_t value) { return set(std::move(key), std::to_string(value)); }
    TextTable& table(std::string name, std::vector<std::string> columns);

    // First value of key.
    std::optional<std::string> get(std::string_view key) const;
    const TextTable* find_table(std::string_view name) const;
    const std::vector<std::pair<std::string, std::string>>& fields() const noexcept { return fields_; }
    const std::vector<TextTable>& tables() const noexcept { return tables_; }

    std::string render() const;
    // Throws Error(InvalidParams) with the line number.
    static TextDoc parse(std::string_view text);

    bool operator==(const TextDoc&) const = default;

private:
    std::vector<std::pair<std::string, std::string>> fields_;
    std::vector<TextTable> tables_;
};

} // namespace vtrack
