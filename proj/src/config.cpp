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

#include "csisense/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>
#include <string_view>

#include "csisense/error.hpp"

namespace csisense::config {

namespace {

using nlohmann::json;

constexpr double kDeg = std::numbers::pi / 180.0;

// Preset deployments in a 5 m x 5 m room. The transmitter sits low on the left
// wall; receivers face into the room from the right and bottom walls, leaving
// the upper-left corner more than 3 m from every device.
constexpr std::string_view kPreset1 = R"({
  "name": "scenario1",
  "room_side": 5.0,
  "tx": {"x": 0.0, "y": 1.0},
  "receivers": [
    {"x": 5.0, "y": 1.0, "boresight_deg": 180.0},
    {"x": 2.0, "y": 0.0, "boresight_deg": 90.0},
    {"x": 5.0, "y": 3.0, "boresight_deg": 180.0}
  ],
  "n_antennas": 8,
  "beam_angles_deg": [-90.0, -60.0, -30.0, 0.0, 30.0, 60.0, 90.0],
  "channel": {
    "n_clusters": 3,
    "n_rays": 5,
    "n_scatter": 1,
    "intra_cluster_scale_deg": 5.0,
    "grid_pitch": 0.25,
    "los": true,
    "snr_db": 20.0,
    "scatter_coeff": 1.0,
    "environment": "fixed",
    "environment_seed": 1,
    "fading_jitter": 0.1
  }
}
)";

constexpr std::string_view kPreset2 = R"({
  "name": "scenario2",
  "room_side": 5.0,
  "tx": {"x": 0.0, "y": 1.0},
  "receivers": [
    {"x": 5.0, "y": 1.0, "boresight_deg": 180.0},
    {"x": 2.0, "y": 0.0, "boresight_deg": 90.0}
  ],
  "n_antennas": 8,
  "beam_angles_deg": [-90.0, -60.0, -30.0, 0.0, 30.0, 60.0, 90.0],
  "channel": {
    "n_clusters": 3,
    "n_rays": 5,
    "n_scatter": 1,
    "intra_cluster_scale_deg": 5.0,
    "grid_pitch": 0.25,
    "los": true,
    "snr_db": 20.0,
    "scatter_coeff": 1.0,
    "environment": "fixed",
    "environment_seed": 1,
    "fading_jitter": 0.1
  }
}
)";

constexpr std::string_view kPreset3 = R"({
  "name": "scenario3",
  "room_side": 5.0,
  "tx": {"x": 0.0, "y": 1.0},
  "receivers": [
    {"x": 5.0, "y": 1.0, "boresight_deg": 180.0}
  ],
  "n_antennas": 8,
  "beam_angles_deg": [-90.0, -60.0, -30.0, 0.0, 30.0, 60.0, 90.0],
  "channel": {
    "n_clusters": 3,
    "n_rays": 5,
    "n_scatter": 1,
    "intra_cluster_scale_deg": 5.0,
    "grid_pitch": 0.25,
    "los": true,
    "snr_db": 20.0,
    "scatter_coeff": 1.0,
    "environment": "fixed",
    "environment_seed": 1,
    "fading_jitter": 0.1
  }
}
)";

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); }

void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed)
{
    if (!j.is_object()) bad(std::string(where) + " must be an object");
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            bad("unknown key '" + key + "' in " + std::string(where));
        }
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        bad(std::string("bad value for '") + key + "': " + e.what());
    }
}

geometry::Point2D point(const json& j, std::string_view where)
{
    check_keys(j, where, {"x", "y"});
    if (!j.contains("x") || !j.contains("y")) bad(std::string(where) + " needs x and y");
    return {get_or(j, "x", 0.0), get_or(j, "y", 0.0)};
}

}  // namespace

channel::Scenario scenario_from_json(const json& j)
{
    check_keys(j, "scenario",
               {"name", "room_side", "tx", "tx_omni", "receivers", "n_antennas", "beam_angles_deg", "narrowband",
                "channel"});
    channel::Scenario s;
    s.name = get_or<std::string>(j, "name", s.name);
    s.room_side = get_or(j, "room_side", s.room_side);
    if (!j.contains("tx")) bad("scenario needs a tx position");
    s.tx = point(j.at("tx"), "tx");
    s.tx_omni = get_or(j, "tx_omni", true);
    s.narrowband = get_or(j, "narrowband", true);
    s.n_antennas = get_or(j, "n_antennas", s.n_antennas);

    if (!j.contains("receivers") || !j.at("receivers").is_array()) bad("scenario needs a receivers array");
    for (const auto& r : j.at("receivers")) {
        check_keys(r, "receiver", {"x", "y", "boresight_deg"});
        channel::Receiver rx;
        rx.position = {get_or(r, "x", 0.0), get_or(r, "y", 0.0)};
        rx.boresight = geometry::wrap_angle(get_or(r, "boresight_deg", 0.0) * kDeg);
        s.receivers.push_back(rx);
    }

    if (j.contains("beam_angles_deg")) {
        for (double deg : get_or<std::vector<double>>(j, "beam_angles_deg", {})) s.beam_angles.push_back(deg * kDeg);
    } else {
        s.beam_angles = channel::default_beam_angles();
    }

    if (j.contains("channel")) {
        const json& c = j.at("channel");
        check_keys(c, "channel",
                   {"n_clusters", "n_rays", "n_scatter", "intra_cluster_scale_deg", "grid_pitch", "los", "snr_db",
                    "scatter_coeff", "environment", "environment_seed", "fading_jitter"});
        auto& cfg = s.channel;
        cfg.n_clusters = get_or(c, "n_clusters", cfg.n_clusters);
        cfg.n_rays = get_or(c, "n_rays", cfg.n_rays);
        cfg.n_scatter = get_or(c, "n_scatter", cfg.n_scatter);
        cfg.intra_cluster_scale = get_or(c, "intra_cluster_scale_deg", cfg.intra_cluster_scale / kDeg) * kDeg;
        cfg.grid_pitch = get_or(c, "grid_pitch", cfg.grid_pitch);
        cfg.los = get_or(c, "los", cfg.los);
        cfg.snr_db = get_or(c, "snr_db", cfg.snr_db);
        cfg.scatter_coeff = get_or(c, "scatter_coeff", cfg.scatter_coeff);
        const auto env = get_or<std::string>(c, "environment", "fixed");
        if (env == "fixed") {
            cfg.environment = channel::EnvironmentMode::Fixed;
        } else if (env == "per_record") {
            cfg.environment = channel::EnvironmentMode::PerRecord;
        } else {
            bad("environment must be 'fixed' or 'per_record'");
        }
        cfg.environment_seed = get_or<std::uint64_t>(c, "environment_seed", cfg.environment_seed);
        cfg.fading_jitter = get_or(c, "fading_jitter", cfg.fading_jitter);
    }
    s.validate();
    return s;
}

json scenario_to_json(const channel::Scenario& s)
{
    json receivers = json::array();
    for (const auto& rx : s.receivers) {
        receivers.push_back({{"x", rx.position.x}, {"y", rx.position.y}, {"boresight_deg", rx.boresight / kDeg}});
    }
    std::vector<double> beams;
    for (double a : s.beam_angles) beams.push_back(a / kDeg);
    const auto& c = s.channel;
    return {
        {"name", s.name},
        {"room_side", s.room_side},
        {"tx", {{"x", s.tx.x}, {"y", s.tx.y}}},
        {"tx_omni", s.tx_omni},
        {"narrowband", s.narrowband},
        {"receivers", receivers},
        {"n_antennas", s.n_antennas},
        {"beam_angles_deg", beams},
        {"channel",
         {{"n_clusters", c.n_clusters},
          {"n_rays", c.n_rays},
          {"n_scatter", c.n_scatter},
          {"intra_cluster_scale_deg", c.intra_cluster_scale / kDeg},
          {"grid_pitch", c.grid_pitch},
          {"los", c.los},
          {"snr_db", c.snr_db},
          {"scatter_coeff", c.scatter_coeff},
          {"environment", c.environment == channel::EnvironmentMode::Fixed ? "fixed" : "per_record"},
          {"environment_seed", c.environment_seed},
          {"fading_jitter", c.fading_jitter}}},
    };
}

channel::Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open scenario file " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        bad(path.string() + ": " + e.what());
    }
    return scenario_from_json(j);
}

std::string preset_text(int which)
{
    switch (which) {
    case 1: return std::string(kPreset1);
    case 2: return std::string(kPreset2);
    case 3: return std::string(kPreset3);
    default: bad("unknown preset " + std::to_string(which));
    }
}

channel::Scenario preset(int which) { return scenario_from_json(json::parse(preset_text(which))); }

}  // namespace csisense::config
