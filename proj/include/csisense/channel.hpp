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

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "csisense/geometry.hpp"
#include "csisense/rng.hpp"

namespace csisense::channel {

using geometry::Point2D;
using geometry::Target;
using cvec = std::vector<std::complex<double>>;

/// How the multipath environment relates to individual CSI records.
enum class EnvironmentMode {
    /// One ray population per deployment, drawn from `environment_seed`.
    /// Records differ by small-scale fading jitter, noise and the target.
    Fixed,
    /// A fresh ray population per record.
    PerRecord,
};

/// Stochastic single-bounce cluster model constants.
struct ChannelConfig {
    int n_clusters = 3;
    int n_rays = 5;
    int n_scatter = 1;
    double intra_cluster_scale = 5.0 * 0.017453292519943295;  // Laplace scale of ray AoD offsets
    double grid_pitch = 0.25;
    bool los = true;
    double snr_db = 20.0;
    double scatter_coeff = 1.0;
    EnvironmentMode environment = EnvironmentMode::Fixed;
    std::uint64_t environment_seed = 1;
    double fading_jitter = 0.1;  // relative std of per-record ray gain perturbation
};

struct Receiver {
    Point2D position;
    double boresight = 0.0;  // global bearing of the array normal
};

/// Deployment: square room with one omni transmitter and L ULA receivers.
struct Scenario {
    std::string name = "custom";
    double room_side = 5.0;
    Point2D tx;
    bool tx_omni = true;
    std::vector<Receiver> receivers;
    int n_antennas = 8;
    std::vector<double> beam_angles;  // receiver-local, ascending
    bool narrowband = true;
    ChannelConfig channel;

    std::size_t links() const { return receivers.size(); }
    std::size_t beams() const { return beam_angles.size(); }

    /// Per-element noise variance relative to unit mean path power.
    double noise_variance() const;

    bool in_room(Point2D p) const;

    /// Throws InvalidConfig describing the first violated invariant.
    void validate() const;
};

/// The seven beam angles {-pi/2, -pi/3, ..., pi/2}.
std::vector<double> default_beam_angles();

struct Ray {
    int link = 0;
    int cluster = 0;  // 1..N_cl; 0 for the line-of-sight ray
    int ray = 0;      // 1..N_rays; 0 for the line-of-sight ray
    std::complex<double> gain;
    double aod = 0.0;  // transmitter frame (= global frame)
    double aoa = 0.0;  // receiver-local bearing toward the arriving wave
    Point2D scatter;   // grid point; unused for the line-of-sight ray
    bool is_los = false;
    bool blocked = false;
};

struct RaySet {
    int n_clusters = 0;
    int n_rays = 0;
    std::vector<std::vector<Ray>> links;
};

struct ScatterRay {
    std::complex<double> gain;
    double aoa = 0.0;  // receiver-local
    double aod = 0.0;  // bearing transmitter -> target center
};

/// Receive array response, element k = exp(j pi k sin(theta)).
cvec array_response(double theta, int n_antennas);

/// Conjugate-beamformer amplitude gain |a(theta)^H a(phi)| / N, in [0, 1].
double beam_gain(double phi, double theta, int n_antennas);

/// Receiver-local angle of a global bearing.
double to_local(const Receiver& rx, double global_bearing);

/// Result of snapping a raw departure angle onto the scatter grid.
struct QuantizedRay {
    double aod = 0.0;
    double aoa = 0.0;
    Point2D scatter;
};

/// In-room lattice points {k * pitch} sorted by bearing from the transmitter,
/// for nearest-angle lookup.
class AngularGrid {
public:
    /// Points closer than 1e-9 m to any of `excluded` are left out.
    /// Throws InvalidPitch for pitch <= 0 and EmptyGrid if nothing remains.
    AngularGrid(Point2D tx, double pitch, double room_side, const std::vector<Point2D>& excluded);

    /// Grid point whose bearing is closest to `raw_aod`; equal angular
    /// distances resolve toward the point nearer the transmitter.
    Point2D nearest(double raw_aod) const;

    Point2D tx() const { return tx_; }
    std::size_t size() const { return entries_.size(); }

private:
    struct Entry {
        double angle;
        double dist;
        Point2D point;
    };
    Point2D tx_;
    std::vector<Entry> entries_;
};

QuantizedRay quantize_ray(Point2D tx, double raw_aod, const Receiver& rx, double pitch, double room_side);

/// Interval [lo, hi] of bearings from `from` spanned by the room corners.
std::pair<double, double> room_angular_span(Point2D from, double room_side);

/// Null-hypothesis ray population of every link.
RaySet draw_null_rays(const Scenario& scenario, std::uint64_t seed);

/// Ray population seen by one record: the deployment's environment (or a
/// fresh draw in PerRecord mode) with per-record fading jitter.
RaySet realize_channel(const Scenario& scenario, std::uint64_t record_seed);

struct TargetEffect {
    RaySet rays;
    std::vector<std::vector<ScatterRay>> scatter;  // per link
};

/// Zeroes every ray whose path touches the target and appends the target's
/// scattered rays.
TargetEffect apply_target(const RaySet& rays, const Target& target, const Scenario& scenario, std::uint64_t seed);

/// CSI of one link observed through the beam steered to `theta`. `noise` may
/// be null when `noise_variance` is zero.
cvec beam_csi(const std::vector<Ray>& rays, const std::vector<ScatterRay>& scatter, double theta, int n_antennas,
              double noise_variance, Rng* noise);

/// Ray dump as CSV: link,cluster,ray,re,im,aod,aoa,sx,sy,blocked.
void write_ray_dump(std::ostream& out, const RaySet& rays);

}  // namespace csisense::channel
