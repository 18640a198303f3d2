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

#include "csisense/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "csisense/error.hpp"

namespace csisense::channel {

namespace {

using geometry::bearing;
using geometry::distance;
using geometry::wrap_angle;

constexpr double kCoincident = 1e-9;
constexpr double kAngleTie = 1e-12;

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag) { return stream_seed(seed, tag); }

}  // namespace

double Scenario::noise_variance() const
{
    if (!std::isfinite(channel.snr_db)) {
        return 0.0;
    }
    return std::pow(10.0, -channel.snr_db / 10.0);
}

bool Scenario::in_room(Point2D p) const
{
    return p.x >= 0.0 && p.y >= 0.0 && p.x <= room_side && p.y <= room_side;
}

void Scenario::validate() const
{
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
    if (!(room_side > 0.0)) fail("room_side must be positive");
    if (!in_room(tx)) fail("transmitter outside the room");
    if (receivers.empty()) fail("at least one receiver is required");
    for (const auto& rx : receivers) {
        if (!in_room(rx.position)) fail("receiver outside the room");
        if (distance(rx.position, tx) < kCoincident) fail("receiver coincides with transmitter");
    }
    if (n_antennas < 1) fail("n_antennas must be >= 1");
    if (beam_angles.empty()) fail("at least one beam angle is required");
    if (!std::is_sorted(beam_angles.begin(), beam_angles.end())) fail("beam angles must be ascending");
    for (double a : beam_angles) {
        if (a < -std::numbers::pi / 2 - 1e-12 || a > std::numbers::pi / 2 + 1e-12) {
            fail("beam angles must lie in [-pi/2, pi/2]");
        }
    }
    if (!tx_omni) fail("only omnidirectional transmitters are supported");
    if (!narrowband) fail("only narrowband channels are supported");
    const auto& c = channel;
    if (c.n_clusters < 1 || c.n_rays < 1) fail("n_clusters and n_rays must be >= 1");
    if (c.n_scatter < 0) fail("n_scatter must be >= 0");
    if (!(c.intra_cluster_scale >= 0.0)) fail("intra_cluster_scale must be >= 0");
    if (!(c.grid_pitch > 0.0)) fail("grid_pitch must be positive");
    if (!(c.scatter_coeff >= 0.0)) fail("scatter_coeff must be >= 0");
    if (!(c.fading_jitter >= 0.0)) fail("fading_jitter must be >= 0");
}

std::vector<double> default_beam_angles()
{
    constexpr double pi = std::numbers::pi;
    return {-pi / 2, -pi / 3, -pi / 6, 0.0, pi / 6, pi / 3, pi / 2};
}

cvec array_response(double theta, int n_antennas)
{
    cvec a(static_cast<std::size_t>(n_antennas));
    const double phase = std::numbers::pi * std::sin(theta);
    for (int k = 0; k < n_antennas; ++k) {
        a[k] = std::polar(1.0, phase * k);
    }
    return a;
}

double beam_gain(double phi, double theta, int n_antennas)
{
    // a(theta)^H a(phi) = sum_k exp(j pi k (sin phi - sin theta))
    const double delta = std::numbers::pi * (std::sin(phi) - std::sin(theta));
    std::complex<double> acc{0.0, 0.0};
    for (int k = 0; k < n_antennas; ++k) {
        acc += std::polar(1.0, delta * k);
    }
    return std::min(1.0, std::abs(acc) / n_antennas);
}

double to_local(const Receiver& rx, double global_bearing) { return wrap_angle(global_bearing - rx.boresight); }

AngularGrid::AngularGrid(Point2D tx, double pitch, double room_side, const std::vector<Point2D>& excluded) : tx_(tx)
{
    if (!(pitch > 0.0)) {
        throw Error(ErrorCode::InvalidPitch, "grid pitch must be positive");
    }
    const int n = static_cast<int>(std::floor(room_side / pitch + 1e-9));
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            const Point2D p{i * pitch, j * pitch};
            if (distance(p, tx) < kCoincident) continue;
            const bool skip = std::any_of(excluded.begin(), excluded.end(),
                                          [&](Point2D e) { return distance(p, e) < kCoincident; });
            if (skip) continue;
            entries_.push_back({bearing(tx, p), distance(tx, p), p});
        }
    }
    if (entries_.empty()) {
        throw Error(ErrorCode::EmptyGrid, "no grid point available for scattering");
    }
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.angle != b.angle ? a.angle < b.angle : a.dist < b.dist; });
}

Point2D AngularGrid::nearest(double raw_aod) const
{
    const double raw = wrap_angle(raw_aod);
    const std::size_t n = entries_.size();
    const auto it = std::lower_bound(entries_.begin(), entries_.end(), raw,
                                     [](const Entry& e, double v) { return e.angle < v; });
    const std::size_t hi = static_cast<std::size_t>(it - entries_.begin()) % n;
    const std::size_t lo = (hi + n - 1) % n;

    // Collect the two neighbouring angle groups, widened by the tie tolerance.
    std::vector<std::size_t> candidates;
    for (std::size_t k = 0, j = lo; k < n; ++k, j = (j + n - 1) % n) {
        if (std::abs(wrap_angle(entries_[j].angle - entries_[lo].angle)) > 2 * kAngleTie) break;
        candidates.push_back(j);
    }
    for (std::size_t k = 0, j = hi; k < n; ++k, j = (j + 1) % n) {
        if (std::abs(wrap_angle(entries_[j].angle - entries_[hi].angle)) > 2 * kAngleTie) break;
        candidates.push_back(j);
    }

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j : candidates) {
        best = std::min(best, std::abs(wrap_angle(entries_[j].angle - raw)));
    }
    const Entry* pick = nullptr;
    for (std::size_t j : candidates) {
        if (std::abs(wrap_angle(entries_[j].angle - raw)) <= best + kAngleTie &&
            (pick == nullptr || entries_[j].dist < pick->dist)) {
            pick = &entries_[j];
        }
    }
    return pick->point;
}

QuantizedRay quantize_ray(Point2D tx, double raw_aod, const Receiver& rx, double pitch, double room_side)
{
    const AngularGrid grid(tx, pitch, room_side, {rx.position});
    const Point2D s = grid.nearest(raw_aod);
    return {bearing(tx, s), to_local(rx, bearing(rx.position, s)), s};
}

std::pair<double, double> room_angular_span(Point2D from, double room_side)
{
    const Point2D center{room_side / 2, room_side / 2};
    if (distance(from, center) < kCoincident) {
        return {-std::numbers::pi, std::numbers::pi};
    }
    const double ref = bearing(from, center);
    double lo = 0.0;
    double hi = 0.0;
    const Point2D corners[] = {{0, 0}, {room_side, 0}, {room_side, room_side}, {0, room_side}};
    for (Point2D c : corners) {
        if (distance(from, c) < kCoincident) continue;
        const double off = wrap_angle(bearing(from, c) - ref);
        lo = std::min(lo, off);
        hi = std::max(hi, off);
    }
    return {ref + lo, ref + hi};
}

RaySet draw_null_rays(const Scenario& scenario, std::uint64_t seed)
{
    const auto& cfg = scenario.channel;
    std::vector<Point2D> devices;
    for (const auto& rx : scenario.receivers) devices.push_back(rx.position);
    const AngularGrid grid(scenario.tx, cfg.grid_pitch, scenario.room_side, devices);
    const auto [span_lo, span_hi] = room_angular_span(scenario.tx, scenario.room_side);

    // Exponential inter-cluster power decay, normalized to unit total power.
    std::vector<double> cluster_power(static_cast<std::size_t>(cfg.n_clusters));
    double total = 0.0;
    for (int v = 1; v <= cfg.n_clusters; ++v) {
        cluster_power[v - 1] = std::exp(-static_cast<double>(v));
        total += cluster_power[v - 1];
    }
    for (double& p : cluster_power) p /= total;

    Rng rng(seed);
    RaySet set;
    set.n_clusters = cfg.n_clusters;
    set.n_rays = cfg.n_rays;
    set.links.resize(scenario.links());
    for (std::size_t l = 0; l < scenario.links(); ++l) {
        const Receiver& rx = scenario.receivers[l];
        auto& rays = set.links[l];
        if (cfg.los) {
            Ray los;
            los.link = static_cast<int>(l);
            los.gain = {1.0 / distance(scenario.tx, rx.position), 0.0};
            los.aod = bearing(scenario.tx, rx.position);
            los.aoa = to_local(rx, bearing(rx.position, scenario.tx));
            los.scatter = rx.position;
            los.is_los = true;
            rays.push_back(los);
        }
        for (int v = 1; v <= cfg.n_clusters; ++v) {
            const double center = rng.uniform(span_lo, span_hi);
            const double ray_power = cluster_power[v - 1] / cfg.n_rays;
            for (int u = 1; u <= cfg.n_rays; ++u) {
                const double raw = center + rng.laplace(cfg.intra_cluster_scale);
                const Point2D s = grid.nearest(raw);
                Ray r;
                r.link = static_cast<int>(l);
                r.cluster = v;
                r.ray = u;
                r.gain = rng.complex_normal(ray_power);
                r.aod = bearing(scenario.tx, s);
                r.aoa = to_local(rx, bearing(rx.position, s));
                r.scatter = s;
                rays.push_back(r);
            }
        }
    }
    return set;
}

RaySet realize_channel(const Scenario& scenario, std::uint64_t record_seed)
{
    const auto& cfg = scenario.channel;
    if (cfg.environment == EnvironmentMode::PerRecord) {
        return draw_null_rays(scenario, sub_seed(record_seed, 0));
    }
    RaySet set = draw_null_rays(scenario, cfg.environment_seed);
    if (cfg.fading_jitter > 0.0) {
        Rng rng(sub_seed(record_seed, 1));
        for (auto& link : set.links) {
            for (auto& r : link) {
                if (r.is_los) continue;
                r.gain *= 1.0 + cfg.fading_jitter * rng.complex_normal(1.0);
            }
        }
    }
    return set;
}

TargetEffect apply_target(const RaySet& rays, const Target& target, const Scenario& scenario, std::uint64_t seed)
{
    using geometry::segment_blocked;
    // Surface precondition violations (target covering a device) early.
    geometry::occlusion_interval(scenario.tx, target);
    for (const auto& rx : scenario.receivers) geometry::occlusion_interval(rx.position, target);

    TargetEffect out{rays, {}};
    for (std::size_t l = 0; l < out.rays.links.size(); ++l) {
        const Point2D rxp = scenario.receivers[l].position;
        for (auto& r : out.rays.links[l]) {
            const bool hit = r.is_los ? segment_blocked(scenario.tx, rxp, target)
                                      : segment_blocked(scenario.tx, r.scatter, target) ||
                                            segment_blocked(r.scatter, rxp, target);
            if (hit) {
                r.gain = {0.0, 0.0};
                r.blocked = true;
            }
        }
    }

    const auto& cfg = scenario.channel;
    const double d_tx = distance(scenario.tx, target.center);
    const double aod = bearing(scenario.tx, target.center);
    Rng rng(seed);
    out.scatter.resize(scenario.links());
    for (std::size_t l = 0; l < scenario.links(); ++l) {
        const Receiver& rx = scenario.receivers[l];
        const double d_rx = distance(target.center, rx.position);
        const double amplitude = cfg.scatter_coeff * target.radius() / (d_tx * d_rx);
        const int ns = cfg.n_scatter;
        for (int s = 0; s < ns; ++s) {
            // One ray leaves from the center; several spread over the rim facing the receiver.
            Point2D origin = target.center;
            if (ns > 1) {
                const double facing = bearing(target.center, rx.position);
                const double off = (static_cast<double>(s) / (ns - 1) - 0.5) * std::numbers::pi;
                origin = target.center + target.radius() * Point2D{std::cos(facing + off), std::sin(facing + off)};
            }
            const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
            ScatterRay sr;
            sr.gain = std::polar(amplitude / std::sqrt(static_cast<double>(ns)), phase);
            sr.aoa = to_local(rx, bearing(rx.position, origin));
            sr.aod = aod;
            out.scatter[l].push_back(sr);
        }
    }
    return out;
}

cvec beam_csi(const std::vector<Ray>& rays, const std::vector<ScatterRay>& scatter, double theta, int n_antennas,
              double noise_variance, Rng* noise)
{
    cvec h(static_cast<std::size_t>(n_antennas), {0.0, 0.0});
    auto accumulate = [&](std::complex<double> gain, double phi) {
        if (gain == std::complex<double>{0.0, 0.0}) return;
        const double b = beam_gain(phi, theta, n_antennas);
        const double phase = std::numbers::pi * std::sin(phi);
        for (int k = 0; k < n_antennas; ++k) {
            h[k] += gain * b * std::polar(1.0, phase * k);
        }
    };
    for (const auto& r : rays) accumulate(r.gain, r.aoa);
    for (const auto& s : scatter) accumulate(s.gain, s.aoa);
    if (noise_variance > 0.0) {
        for (auto& e : h) e += noise->complex_normal(noise_variance);
    }
    return h;
}

void write_ray_dump(std::ostream& out, const RaySet& rays)
{
    out << "link,cluster,ray,re,im,aod,aoa,sx,sy,blocked\n";
    out.precision(17);
    for (const auto& link : rays.links) {
        for (const auto& r : link) {
            out << r.link << ',' << r.cluster << ',' << r.ray << ',' << r.gain.real() << ',' << r.gain.imag() << ','
                << r.aod << ',' << r.aoa << ',';
            if (r.is_los) {
                out << "nan,nan,";
            } else {
                out << r.scatter.x << ',' << r.scatter.y << ',';
            }
            out << (r.blocked ? 1 : 0) << '\n';
        }
    }
}

}  // namespace csisense::channel
