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

#include "csisense/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "csisense/config.hpp"
#include "csisense/error.hpp"
#include "csisense/parallel.hpp"

namespace csisense::dataset {

namespace {

using nlohmann::json;

constexpr std::uint64_t kPositionStream = 5;

SampleRecord make_record(const channel::Scenario& scenario, Hypothesis hyp, std::optional<Point2D> position,
                         double sigma, std::uint64_t seed, int bin)
{
    SampleRecord r;
    r.hyp = hyp;
    r.seed = seed;
    r.bin = bin;
    std::optional<geometry::Target> target;
    if (hyp == Hypothesis::Target) {
        r.position = position;
        r.sigma = sigma;
        target = geometry::Target{*position, sigma};
    }
    r.tensor = frame::to_tensor(simulate_frame(scenario, target, seed));
    return r;
}

void check_sigma(double sigma)
{
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw Error(ErrorCode::InvalidSize, "target diameter must be positive, got " + std::to_string(sigma));
    }
}

std::string format_double(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::string to_string(Protocol p)
{
    switch (p) {
    case Protocol::Resolution: return "resolution";
    case Protocol::Coverage: return "coverage";
    case Protocol::Positioning: return "positioning";
    }
    return "resolution";
}

Protocol protocol_from_string(const std::string& s)
{
    if (s == "resolution") return Protocol::Resolution;
    if (s == "coverage") return Protocol::Coverage;
    if (s == "positioning") return Protocol::Positioning;
    throw Error(ErrorCode::InvalidConfig, "unknown protocol '" + s + "'");
}

frame::CsiFrame simulate_frame(const channel::Scenario& scenario, const std::optional<geometry::Target>& target,
                               std::uint64_t seed)
{
    channel::RaySet rays = channel::realize_channel(scenario, stream_seed(seed, 1));
    std::vector<std::vector<channel::ScatterRay>> scatter(scenario.links());
    if (target) {
        auto effect = channel::apply_target(rays, *target, scenario, stream_seed(seed, 2));
        rays = std::move(effect.rays);
        scatter = std::move(effect.scatter);
    }
    Rng noise(stream_seed(seed, target ? 4 : 3));
    const double noise_var = scenario.noise_variance();
    std::vector<std::vector<channel::cvec>> csi(scenario.links());
    for (std::size_t l = 0; l < scenario.links(); ++l) {
        for (double theta : scenario.beam_angles) {
            csi[l].push_back(channel::beam_csi(rays.links[l], scatter[l], theta, scenario.n_antennas, noise_var, &noise));
        }
    }
    auto f = frame::assemble_frame(csi);
    f.scenario = scenario.name;
    f.seed = seed;
    return f;
}

bool placement_allowed(const channel::Scenario& scenario, Point2D p, double sigma)
{
    const double r = sigma / 2;
    if (p.x < r || p.y < r || p.x > scenario.room_side - r || p.y > scenario.room_side - r) {
        return false;
    }
    if (geometry::distance(p, scenario.tx) < r + kDeviceClearance) return false;
    for (const auto& rx : scenario.receivers) {
        if (geometry::distance(p, rx.position) < r + kDeviceClearance) return false;
    }
    return true;
}

Point2D sample_position(const channel::Scenario& scenario, double sigma, Rng& rng)
{
    check_sigma(sigma);
    const double r = sigma / 2;
    if (2 * r >= scenario.room_side) {
        throw Error(ErrorCode::InvalidSize, "target does not fit in the room");
    }
    for (int attempt = 0; attempt < 100000; ++attempt) {
        const Point2D p{rng.uniform(r, scenario.room_side - r), rng.uniform(r, scenario.room_side - r)};
        if (placement_allowed(scenario, p, sigma)) return p;
    }
    throw Error(ErrorCode::InvalidSize, "no admissible target position found");
}

std::vector<Bin> bin_grid(double room_side, double pitch)
{
    if (!(pitch > 0.0) || pitch > room_side + 1e-9) {
        throw Error(ErrorCode::InvalidPitch, "bin pitch must lie in (0, room_side]");
    }
    const int n = std::max(1, static_cast<int>(std::floor(room_side / pitch + 1e-9)));
    std::vector<Bin> bins;
    bins.reserve(static_cast<std::size_t>(n) * n);
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            bins.push_back({iy * n + ix, ix, iy, {(ix + 0.5) * pitch, (iy + 0.5) * pitch}});
        }
    }
    return bins;
}

std::vector<Bin> valid_bins(const channel::Scenario& scenario, double sigma, double pitch)
{
    auto bins = bin_grid(scenario.room_side, pitch);
    std::erase_if(bins, [&](const Bin& b) { return !placement_allowed(scenario, b.center, sigma); });
    return bins;
}

Dataset gen_resolution_set(const channel::Scenario& scenario, double sigma, std::size_t n, std::uint64_t master_seed)
{
    check_sigma(sigma);
    if (n == 0) throw Error(ErrorCode::InvalidSize, "record count must be positive");
    scenario.validate();
    Dataset data;
    data.manifest = {scenario, Protocol::Resolution, sigma, n, n, 0.7, 0.3, 0.0, false, master_seed};
    data.records.resize(2 * n);
    parallel_for(2 * n, [&](std::size_t i) {
        const std::uint64_t seed = stream_seed(master_seed, i);
        if (i < n) {
            data.records[i] = make_record(scenario, Hypothesis::Null, std::nullopt, sigma, seed, -1);
        } else {
            Rng rng(stream_seed(seed, kPositionStream));
            data.records[i] = make_record(scenario, Hypothesis::Target, sample_position(scenario, sigma, rng), sigma,
                                          seed, -1);
        }
    });
    return data;
}

Dataset gen_binned_set(const channel::Scenario& scenario, double sigma, std::size_t n_per_bin, double pitch,
                       std::uint64_t master_seed, Protocol protocol, bool jitter)
{
    check_sigma(sigma);
    if (n_per_bin == 0) throw Error(ErrorCode::InvalidSize, "records per bin must be positive");
    scenario.validate();
    const auto bins = valid_bins(scenario, sigma, pitch);
    if (bins.empty()) throw Error(ErrorCode::InvalidPitch, "no bin center admits the target");

    Dataset data;
    data.manifest = {scenario, protocol, sigma, n_per_bin * bins.size(), n_per_bin * bins.size(), 0.7, 0.3, pitch,
                     jitter, master_seed};
    const std::size_t per_bin = 2 * n_per_bin;
    data.records.resize(per_bin * bins.size());
    parallel_for(data.records.size(), [&](std::size_t i) {
        const Bin& bin = bins[i / per_bin];
        const std::size_t k = i % per_bin;
        const std::uint64_t seed = stream_seed(master_seed, i);
        if (k < n_per_bin) {
            Point2D p = bin.center;
            if (jitter) {
                Rng rng(stream_seed(seed, kPositionStream));
                for (int attempt = 0; attempt < 1000; ++attempt) {
                    const Point2D q{bin.center.x + rng.uniform(-pitch / 2, pitch / 2),
                                    bin.center.y + rng.uniform(-pitch / 2, pitch / 2)};
                    if (placement_allowed(scenario, q, sigma)) {
                        p = q;
                        break;
                    }
                }
            }
            data.records[i] = make_record(scenario, Hypothesis::Target, p, sigma, seed, bin.index);
        } else {
            data.records[i] = make_record(scenario, Hypothesis::Null, std::nullopt, sigma, seed, bin.index);
        }
    });
    return data;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, std::uint64_t seed)
{
    if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "train fraction must lie in [0, 1]");
    }
    std::map<std::pair<int, int>, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < data.records.size(); ++i) {
        strata[{static_cast<int>(data.records[i].hyp), data.records[i].bin}].push_back(i);
    }
    Dataset train{data.manifest, {}};
    Dataset val{data.manifest, {}};
    train.manifest.train_fraction = val.manifest.train_fraction = train_fraction;
    train.manifest.validation_fraction = val.manifest.validation_fraction = 1.0 - train_fraction;
    Rng rng(seed);
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> val_idx;
    for (auto& [key, idx] : strata) {
        rng.shuffle(idx.begin(), idx.end());
        const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(idx.size())));
        train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        val_idx.insert(val_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    }
    // Keep the original record order within each part.
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
    for (std::size_t i : train_idx) train.records.push_back(data.records[i]);
    for (std::size_t i : val_idx) val.records.push_back(data.records[i]);
    auto recount = [](Dataset& d) {
        d.manifest.n_null = d.manifest.n_target = 0;
        for (const auto& r : d.records) (r.hyp == Hypothesis::Null ? d.manifest.n_null : d.manifest.n_target)++;
    };
    recount(train);
    recount(val);
    return {std::move(train), std::move(val)};
}

void save(const Dataset& data, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());

    const auto& m = data.manifest;
    const int rows = data.links() * data.n_antennas();
    const int cols = static_cast<int>(m.scenario.beams());
    json manifest = {
        {"format", "csisense-dataset"},
        {"version", 1},
        {"scenario", config::scenario_to_json(m.scenario)},
        {"protocol", to_string(m.protocol)},
        {"sigma", m.sigma},
        {"counts", {{"null", m.n_null}, {"target", m.n_target}}},
        {"split", {{"train", m.train_fraction}, {"validation", m.validation_fraction}}},
        {"grid_pitch", m.grid_pitch},
        {"bin_jitter", m.bin_jitter},
        {"master_seed", m.master_seed},
        {"records", data.records.size()},
        {"frame", {{"rows", rows}, {"cols", cols}}},
    };
    {
        std::ofstream out(dir / "manifest.json");
        out << manifest.dump(2) << '\n';
        if (!out) throw Error(ErrorCode::Io, "cannot write manifest.json");
    }
    {
        std::ofstream out(dir / "frames.bin", std::ios::binary);
        for (const auto& r : data.records) {
            auto f = frame::from_tensor(r.tensor, data.links(), data.n_antennas());
            frame::write_frame(out, f);
        }
        if (!out) throw Error(ErrorCode::Io, "cannot write frames.bin");
    }
    {
        std::ofstream out(dir / "labels.csv");
        out << "index,hyp,x,y,sigma,seed,bin\n";
        for (std::size_t i = 0; i < data.records.size(); ++i) {
            const auto& r = data.records[i];
            out << i << ',' << (r.hyp == Hypothesis::Target ? "target" : "null") << ',';
            if (r.position) {
                out << format_double(r.position->x) << ',' << format_double(r.position->y) << ','
                    << format_double(*r.sigma);
            } else {
                out << ",,";
            }
            out << ',' << r.seed << ',' << r.bin << '\n';
        }
        if (!out) throw Error(ErrorCode::Io, "cannot write labels.csv");
    }
}

Dataset load(const std::filesystem::path& dir)
{
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw Error(ErrorCode::Io, "cannot open " + (dir / "manifest.json").string());
    json j;
    try {
        j = json::parse(mf);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Io, std::string("malformed manifest.json: ") + e.what());
    }

    Dataset data;
    auto& m = data.manifest;
    try {
        m.scenario = config::scenario_from_json(j.at("scenario"));
        m.protocol = protocol_from_string(j.at("protocol").get<std::string>());
        m.sigma = j.at("sigma").get<double>();
        m.n_null = j.at("counts").at("null").get<std::size_t>();
        m.n_target = j.at("counts").at("target").get<std::size_t>();
        m.train_fraction = j.at("split").at("train").get<double>();
        m.validation_fraction = j.at("split").at("validation").get<double>();
        m.grid_pitch = j.at("grid_pitch").get<double>();
        m.bin_jitter = j.at("bin_jitter").get<bool>();
        m.master_seed = j.at("master_seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Io, std::string("malformed manifest.json: ") + e.what());
    }
    const auto n = j.value("records", std::size_t{0});

    std::ifstream labels(dir / "labels.csv");
    if (!labels) throw Error(ErrorCode::Io, "cannot open labels.csv");
    std::ifstream frames(dir / "frames.bin", std::ios::binary);
    if (!frames) throw Error(ErrorCode::Io, "cannot open frames.bin");

    std::string line;
    std::getline(labels, line);  // header
    data.records.reserve(n);
    while (std::getline(labels, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        while (cells.size() < 7) cells.emplace_back();
        SampleRecord r;
        try {
            r.hyp = cells[1] == "target" ? Hypothesis::Target : Hypothesis::Null;
            if (r.hyp == Hypothesis::Target) {
                r.position = Point2D{std::stod(cells[2]), std::stod(cells[3])};
                r.sigma = std::stod(cells[4]);
            }
            r.seed = std::stoull(cells[5]);
            r.bin = std::stoi(cells[6]);
        } catch (const std::exception&) {
            throw Error(ErrorCode::Io, "malformed labels.csv line: " + line);
        }
        r.tensor = frame::to_tensor(frame::read_frame(frames));
        data.records.push_back(std::move(r));
    }
    if (data.records.size() != n) {
        throw Error(ErrorCode::Io, "labels.csv record count disagrees with manifest");
    }
    return data;
}

}  // namespace csisense::dataset
