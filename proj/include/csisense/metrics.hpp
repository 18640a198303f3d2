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
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "csisense/baseline.hpp"
#include "csisense/channel.hpp"
#include "csisense/geometry.hpp"
#include "csisense/sensenet.hpp"

namespace csisense::metrics {

using geometry::Point2D;

/// Confusion counts, named truth_prediction.
struct ConfusionCounts {
    std::size_t null_null = 0;
    std::size_t null_target = 0;
    std::size_t target_null = 0;
    std::size_t target_target = 0;

    void add(bool truth_target, bool predicted_target);
    std::size_t total() const { return null_null + null_target + target_null + target_target; }
    ConfusionCounts& operator+=(const ConfusionCounts& o);
};

struct Priors {
    double null = 0.5;
    double target = 0.5;
};

/// P = 1 - (p(target|null) p(null) + p(null|target) p(target)). Priors default
/// to the empirical class fractions. Throws MissingClass.
double accuracy_score(const ConfusionCounts& counts, std::optional<Priors> priors = std::nullopt);

/// Paired null/target evaluation drop.
struct Drop {
    std::uint64_t seed = 0;
    geometry::Target target;
};

/// n drops with admissible uniform target positions; drop i uses seed
/// stream_seed(seed, i) for its channel.
std::vector<Drop> random_drops(const channel::Scenario& scenario, double sigma, std::size_t n, std::uint64_t seed);

/// Classifies the null and target frame of every drop at `threshold`.
ConfusionCounts detection_counts(const sensenet::Model& model, const channel::Scenario& scenario,
                                 std::span<const Drop> drops, double threshold = 0.5);

struct ResolutionPoint {
    double sigma = 0.0;
    double accuracy = 0.0;
    std::size_t drops = 0;
};

struct ResolutionCurve {
    std::vector<ResolutionPoint> points;
    std::optional<double> resolution;  // smallest sigma with P > gamma
};

/// Smallest sigma whose accuracy exceeds gamma.
std::optional<double> threshold_crossing(std::span<const ResolutionPoint> points, double gamma);

/// Evaluates the detector on fresh drops at every sigma (ascending).
ResolutionCurve resolution_curve(const sensenet::Model& model, const channel::Scenario& scenario,
                                 std::span<const double> sigmas, std::size_t drops_per_sigma, double gamma,
                                 std::uint64_t seed, double threshold = 0.5);

struct CoverageBin {
    int ix = 0;
    int iy = 0;
    Point2D center;
    double accuracy = 0.0;  // NaN when count == 0
    std::size_t count = 0;  // drops evaluated
};

struct CoverageMap {
    double pitch = 0.0;
    int n = 0;  // bins per side
    std::vector<CoverageBin> bins;  // index iy * n + ix

    /// Mean P over bins with data that satisfy `pred`; NaN if none do.
    template <typename Pred>
    double mean_accuracy(Pred pred) const
    {
        double sum = 0.0;
        std::size_t k = 0;
        for (const auto& b : bins) {
            if (b.count > 0 && pred(b)) {
                sum += b.accuracy;
                ++k;
            }
        }
        return k ? sum / static_cast<double>(k) : std::numeric_limits<double>::quiet_NaN();
    }
};

/// Per bin, drops_per_bin paired null/target drops with the target at the bin
/// center. Bins where the target does not fit are left empty. Throws InvalidPitch.
CoverageMap coverage_map(const sensenet::Model& model, const channel::Scenario& scenario, double sigma,
                         std::size_t drops_per_bin, double pitch, std::uint64_t seed, double threshold = 0.5);

/// Shortest distance from a point to any device of the scenario.
double device_distance(const channel::Scenario& scenario, Point2D p);

/// CSV with header "x,y,P,n"; empty bins report P as nan.
void write_coverage_csv(std::ostream& out, const CoverageMap& map);
/// Plain PGM (P2), P scaled to 0..255, top row = highest y; empty bins are 0.
void write_coverage_pgm(std::ostream& out, const CoverageMap& map);

struct ErrorSummary {
    double mean = 0.0;
    double median = 0.0;
    double p90 = 0.0;
    std::vector<double> sorted;  // ascending per-drop errors
};

/// Linear interpolation between order statistics at rank q (n - 1).
double percentile(std::span<const double> sorted, double q);

/// Summary of Euclidean errors. Throws LengthMismatch or InvalidSize (empty).
ErrorSummary error_summary(std::span<const Point2D> estimates, std::span<const Point2D> truths);
ErrorSummary summarize_errors(std::vector<double> errors);

/// Empirical CDF: fraction of errors <= x.
double cdf(const ErrorSummary& s, double x);

/// Integral of 1 - CDF over [0, max error].
double layer_cake_mean(const ErrorSummary& s);

/// Per-drop errors of the position model on the drops.
std::vector<double> positioning_errors(const sensenet::Model& model, const channel::Scenario& scenario,
                                       std::span<const Drop> drops, bool clamp = true);

/// Per-drop errors of the triangulation baseline on the same drops.
std::vector<double> baseline_errors(const channel::Scenario& scenario, std::span<const Drop> drops,
                                    const baseline::BeamBank& bank, std::vector<Point2D>* estimates = nullptr);

struct BootstrapInterval {
    double mean_difference = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

/// Percentile bootstrap interval of mean(a - b) for paired samples.
BootstrapInterval paired_bootstrap(std::span<const double> a, std::span<const double> b, std::size_t resamples,
                                   double level, std::uint64_t seed);

}  // namespace csisense::metrics
