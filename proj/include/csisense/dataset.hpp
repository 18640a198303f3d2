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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "csisense/channel.hpp"
#include "csisense/frame.hpp"

namespace csisense::dataset {

using geometry::Point2D;

enum class Hypothesis { Null = 0, Target = 1 };
enum class Protocol { Resolution, Coverage, Positioning };

std::string to_string(Protocol p);
Protocol protocol_from_string(const std::string& s);

struct SampleRecord {
    frame::FrameTensor tensor;
    Hypothesis hyp = Hypothesis::Null;
    std::optional<Point2D> position;
    std::optional<double> sigma;
    std::uint64_t seed = 0;
    int bin = -1;  // bin index for binned protocols
};

struct DatasetManifest {
    channel::Scenario scenario;
    Protocol protocol = Protocol::Resolution;
    double sigma = 0.0;
    std::size_t n_null = 0;
    std::size_t n_target = 0;
    double train_fraction = 0.7;
    double validation_fraction = 0.3;
    double grid_pitch = 0.0;  // 0 for unbinned sets
    bool bin_jitter = false;
    std::uint64_t master_seed = 0;
};

struct Dataset {
    DatasetManifest manifest;
    std::vector<SampleRecord> records;

    int links() const { return static_cast<int>(manifest.scenario.links()); }
    int n_antennas() const { return manifest.scenario.n_antennas; }
};

/// Clearance kept between a target rim and any device.
inline constexpr double kDeviceClearance = 0.05;

/// Frame observed for `seed`, with or without the target. A null and a target
/// frame with the same seed share the channel realization but not the noise.
frame::CsiFrame simulate_frame(const channel::Scenario& scenario, const std::optional<geometry::Target>& target,
                               std::uint64_t seed);

/// True if a target of diameter sigma centred at p keeps sigma/2 from the walls
/// and sigma/2 + kDeviceClearance from every device.
bool placement_allowed(const channel::Scenario& scenario, Point2D p, double sigma);

/// Uniform admissible target center (rejection sampling).
Point2D sample_position(const channel::Scenario& scenario, double sigma, Rng& rng);

struct Bin {
    int index = 0;  // iy * nx + ix
    int ix = 0;
    int iy = 0;
    Point2D center;
};

/// All bins of side `pitch` tiling the room from the origin. Throws InvalidPitch.
std::vector<Bin> bin_grid(double room_side, double pitch);

/// Bins whose center is an admissible placement for sigma.
std::vector<Bin> valid_bins(const channel::Scenario& scenario, double sigma, double pitch);

/// n null + n target records, targets uniform over admissible positions.
Dataset gen_resolution_set(const channel::Scenario& scenario, double sigma, std::size_t n, std::uint64_t master_seed);

/// Per valid bin, n target records at the bin center (or uniform within the bin
/// when `jitter`) and n null records.
Dataset gen_binned_set(const channel::Scenario& scenario, double sigma, std::size_t n_per_bin, double pitch,
                       std::uint64_t master_seed, Protocol protocol = Protocol::Coverage, bool jitter = false);

/// Stratified split by hypothesis and bin. Returns (train, validation).
std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, std::uint64_t seed);

/// Writes manifest.json, frames.bin and labels.csv into `dir`.
void save(const Dataset& data, const std::filesystem::path& dir);
Dataset load(const std::filesystem::path& dir);

}  // namespace csisense::dataset
