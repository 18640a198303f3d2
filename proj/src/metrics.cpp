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

#include "csisense/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "csisense/dataset.hpp"
#include "csisense/error.hpp"
#include "csisense/parallel.hpp"
#include "csisense/rng.hpp"

namespace csisense::metrics {

namespace {

constexpr std::uint64_t kPositionStream = 5;

frame::FrameTensor observe(const channel::Scenario& scenario, const std::optional<geometry::Target>& target,
                           std::uint64_t seed)
{
    return frame::to_tensor(dataset::simulate_frame(scenario, target, seed));
}

}  // namespace

void ConfusionCounts::add(bool truth_target, bool predicted_target)
{
    if (truth_target) {
        ++(predicted_target ? target_target : target_null);
    } else {
        ++(predicted_target ? null_target : null_null);
    }
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o)
{
    null_null += o.null_null;
    null_target += o.null_target;
    target_null += o.target_null;
    target_target += o.target_target;
    return *this;
}

double accuracy_score(const ConfusionCounts& c, std::optional<Priors> priors)
{
    const double n_null = static_cast<double>(c.null_null + c.null_target);
    const double n_target = static_cast<double>(c.target_null + c.target_target);
    if (n_null == 0.0 || n_target == 0.0) {
        throw Error(ErrorCode::MissingClass, "accuracy needs samples of both hypotheses");
    }
    const Priors p = priors.value_or(Priors{n_null / (n_null + n_target), n_target / (n_null + n_target)});
    const double false_alarm = static_cast<double>(c.null_target) / n_null;
    const double miss = static_cast<double>(c.target_null) / n_target;
    return std::clamp(1.0 - (false_alarm * p.null + miss * p.target), 0.0, 1.0);
}

std::vector<Drop> random_drops(const channel::Scenario& scenario, double sigma, std::size_t n, std::uint64_t seed)
{
    std::vector<Drop> drops(n);
    for (std::size_t i = 0; i < n; ++i) {
        drops[i].seed = stream_seed(seed, i);
        Rng rng(stream_seed(drops[i].seed, kPositionStream));
        drops[i].target = {dataset::sample_position(scenario, sigma, rng), sigma};
    }
    return drops;
}

ConfusionCounts detection_counts(const sensenet::Model& model, const channel::Scenario& scenario,
                                 std::span<const Drop> drops, double threshold)
{
    std::vector<ConfusionCounts> per_drop(drops.size());
    parallel_for(drops.size(), [&](std::size_t i) {
        const auto& d = drops[i];
        per_drop[i].add(false, sensenet::predict_detect(model, observe(scenario, std::nullopt, d.seed)) > threshold);
        per_drop[i].add(true, sensenet::predict_detect(model, observe(scenario, d.target, d.seed)) > threshold);
    });
    ConfusionCounts total;
    for (const auto& c : per_drop) total += c;
    return total;
}

std::optional<double> threshold_crossing(std::span<const ResolutionPoint> points, double gamma)
{
    for (const auto& p : points) {
        if (p.accuracy > gamma) return p.sigma;
    }
    return std::nullopt;
}

ResolutionCurve resolution_curve(const sensenet::Model& model, const channel::Scenario& scenario,
                                 std::span<const double> sigmas, std::size_t drops_per_sigma, double gamma,
                                 std::uint64_t seed, double threshold)
{
    if (!std::is_sorted(sigmas.begin(), sigmas.end())) {
        throw Error(ErrorCode::InvalidConfig, "sigma list must be ascending");
    }
    ResolutionCurve curve;
    for (std::size_t s = 0; s < sigmas.size(); ++s) {
        const auto drops = random_drops(scenario, sigmas[s], drops_per_sigma, stream_seed(seed, s));
        const auto counts = detection_counts(model, scenario, drops, threshold);
        curve.points.push_back({sigmas[s], accuracy_score(counts), drops_per_sigma});
    }
    curve.resolution = threshold_crossing(curve.points, gamma);
    return curve;
}

CoverageMap coverage_map(const sensenet::Model& model, const channel::Scenario& scenario, double sigma,
                         std::size_t drops_per_bin, double pitch, std::uint64_t seed, double threshold)
{
    const auto grid = dataset::bin_grid(scenario.room_side, pitch);
    CoverageMap map;
    map.pitch = pitch;
    map.n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(grid.size()))));
    for (const auto& b : grid) {
        map.bins.push_back({b.ix, b.iy, b.center, std::numeric_limits<double>::quiet_NaN(), 0});
    }
    std::vector<ConfusionCounts> counts(grid.size());
    const std::size_t jobs = grid.size() * drops_per_bin;
    std::vector<ConfusionCounts> per_job(jobs);
    parallel_for(jobs, [&](std::size_t j) {
        const auto& b = grid[j / drops_per_bin];
        if (!dataset::placement_allowed(scenario, b.center, sigma)) return;
        const std::uint64_t s = stream_seed(stream_seed(seed, static_cast<std::uint64_t>(b.index)), j % drops_per_bin);
        const geometry::Target target{b.center, sigma};
        per_job[j].add(false, sensenet::predict_detect(model, observe(scenario, std::nullopt, s)) > threshold);
        per_job[j].add(true, sensenet::predict_detect(model, observe(scenario, target, s)) > threshold);
    });
    for (std::size_t j = 0; j < jobs; ++j) counts[j / drops_per_bin] += per_job[j];
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (counts[i].total() == 0) continue;
        map.bins[i].accuracy = accuracy_score(counts[i]);
        map.bins[i].count = counts[i].total() / 2;
    }
    return map;
}

double device_distance(const channel::Scenario& scenario, Point2D p)
{
    double d = geometry::distance(p, scenario.tx);
    for (const auto& rx : scenario.receivers) d = std::min(d, geometry::distance(p, rx.position));
    return d;
}

void write_coverage_csv(std::ostream& out, const CoverageMap& map)
{
    out << "x,y,P,n\n";
    out.precision(10);
    for (const auto& b : map.bins) {
        out << b.center.x << ',' << b.center.y << ',';
        if (b.count > 0) {
            out << b.accuracy;
        } else {
            out << "nan";
        }
        out << ',' << b.count << '\n';
    }
}

void write_coverage_pgm(std::ostream& out, const CoverageMap& map)
{
    out << "P2\n" << map.n << ' ' << map.n << "\n255\n";
    for (int iy = map.n - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < map.n; ++ix) {
            const auto& b = map.bins[static_cast<std::size_t>(iy) * map.n + ix];
            const long v = b.count > 0 ? std::lround(255.0 * std::clamp(b.accuracy, 0.0, 1.0)) : 0;
            out << v << (ix + 1 < map.n ? ' ' : '\n');
        }
    }
}

double percentile(std::span<const double> sorted, double q)
{
    if (sorted.empty()) throw Error(ErrorCode::InvalidSize, "percentile of an empty sample");
    const double rank = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (rank - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ErrorSummary summarize_errors(std::vector<double> errors)
{
    if (errors.empty()) throw Error(ErrorCode::InvalidSize, "no errors to summarize");
    ErrorSummary s;
    std::sort(errors.begin(), errors.end());
    s.sorted = std::move(errors);
    s.mean = std::accumulate(s.sorted.begin(), s.sorted.end(), 0.0) / static_cast<double>(s.sorted.size());
    s.median = percentile(s.sorted, 0.5);
    s.p90 = percentile(s.sorted, 0.9);
    return s;
}

ErrorSummary error_summary(std::span<const Point2D> estimates, std::span<const Point2D> truths)
{
    if (estimates.size() != truths.size()) {
        throw Error(ErrorCode::LengthMismatch, "estimates and truths differ in length");
    }
    std::vector<double> errors;
    for (std::size_t i = 0; i < estimates.size(); ++i) errors.push_back(geometry::distance(estimates[i], truths[i]));
    return summarize_errors(std::move(errors));
}

double cdf(const ErrorSummary& s, double x)
{
    const auto it = std::upper_bound(s.sorted.begin(), s.sorted.end(), x);
    return static_cast<double>(it - s.sorted.begin()) / static_cast<double>(s.sorted.size());
}

double layer_cake_mean(const ErrorSummary& s)
{
    // 1 - CDF is constant between consecutive order statistics.
    const double n = static_cast<double>(s.sorted.size());
    double area = 0.0;
    double prev = 0.0;
    for (std::size_t k = 0; k < s.sorted.size(); ++k) {
        area += (s.sorted[k] - prev) * (n - static_cast<double>(k)) / n;
        prev = s.sorted[k];
    }
    return area;
}

std::vector<double> positioning_errors(const sensenet::Model& model, const channel::Scenario& scenario,
                                       std::span<const Drop> drops, bool clamp)
{
    std::vector<double> errors(drops.size());
    parallel_for(drops.size(), [&](std::size_t i) {
        Point2D est = sensenet::predict_locate(model, observe(scenario, drops[i].target, drops[i].seed));
        if (clamp) est = baseline::clamp_to_room(est, scenario.room_side);
        errors[i] = geometry::distance(est, drops[i].target.center);
    });
    return errors;
}

std::vector<double> baseline_errors(const channel::Scenario& scenario, std::span<const Drop> drops,
                                    const baseline::BeamBank& bank, std::vector<Point2D>* estimates)
{
    std::vector<double> errors(drops.size());
    std::vector<Point2D> est(drops.size());
    parallel_for(drops.size(), [&](std::size_t i) {
        const auto null_frame = dataset::simulate_frame(scenario, std::nullopt, drops[i].seed);
        const auto alt_frame = dataset::simulate_frame(scenario, drops[i].target, drops[i].seed);
        est[i] = scenario.links() >= 2 ? baseline::estimate_position(null_frame, alt_frame, scenario, bank).position
                                       : baseline::estimate_single_link(null_frame, alt_frame, scenario, bank).position;
        errors[i] = geometry::distance(est[i], drops[i].target.center);
    });
    if (estimates) *estimates = std::move(est);
    return errors;
}

BootstrapInterval paired_bootstrap(std::span<const double> a, std::span<const double> b, std::size_t resamples,
                                   double level, std::uint64_t seed)
{
    if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "paired samples differ in length");
    if (a.empty() || resamples == 0) throw Error(ErrorCode::InvalidSize, "bootstrap needs data and resamples");
    const std::size_t n = a.size();
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
    BootstrapInterval out;
    out.mean_difference = std::accumulate(diff.begin(), diff.end(), 0.0) / static_cast<double>(n);
    Rng rng(seed);
    std::vector<double> means(resamples);
    for (auto& m : means) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += diff[rng.index(n)];
        m = sum / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());
    out.lower = percentile(means, (1.0 - level) / 2.0);
    out.upper = percentile(means, 1.0 - (1.0 - level) / 2.0);
    return out;
}

}  // namespace csisense::metrics
