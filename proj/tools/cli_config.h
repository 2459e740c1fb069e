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

#include "vtrack/error.h"

#include <CLI11.hpp>

#include <algorithm>
#include <string>

namespace vtrack::tools {

// Fills options of `cmd` from an INI file whose keys are the long option
// names without dashes ("manager-token = x"; '_' may stand for '-').
// Options given on the command line win. Unknown keys are errors unless
// `skip_unknown` (a command reading a file written for another). Throws
// Error(InvalidConfig).
inline void apply_config(CLI::App* cmd, const std::string& path, bool skip_unknown = false)
{
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigINI().from_file(path);
    }
    catch (const CLI::Error& e) {
        throw Error(ErrorCode::InvalidConfig, "config " + path + ": " + e.what());
    }
    for (const auto& item : items) {
        std::string name = item.name;
        std::replace(name.begin(), name.end(), '_', '-');
        if (name == "config") {
            continue;
        }
        auto* op = cmd->get_option_no_throw("--" + name);
        if (!op && skip_unknown) {
            continue;
        }
        if (!op) {
            throw Error(ErrorCode::InvalidConfig, "config " + path + ": unknown key '" + item.name + "'");
        }
        if (op->count() > 0) {
            continue;
        }
        try {
            op->add_result(item.inputs);
            op->run_callback();
        }
        catch (const CLI::Error& e) {
            throw Error(ErrorCode::InvalidConfig, "config " + path + ": " + item.name + ": " + e.what());
        }
    }
}

} // namespace vtrack::tools
