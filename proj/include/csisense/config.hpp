// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The csisense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "csisense/channel.hpp"

namespace csisense::config {

/// Scenario files are JSON objects. Angles are given in degrees; unknown keys
/// are rejected with InvalidConfig.
channel::Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const channel::Scenario& scenario);

/// Reads and validates a scenario file. Throws Io if unreadable and
/// InvalidConfig if malformed.
channel::Scenario load_scenario(const std::filesystem::path& path);

/// Built-in deployments: 1 (L=3), 2 (L=2), 3 (L=1). The files under
/// presets/ carry the same content.
channel::Scenario preset(int which);
std::string preset_text(int which);

}  // namespace csisense::config
