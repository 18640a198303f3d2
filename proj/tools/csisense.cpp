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

// csisense command-line tool: dataset generation, training and evaluation.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "csisense/baseline.hpp"
#include "csisense/config.hpp"
#include "csisense/dataset.hpp"
#include "csisense/error.hpp"
#include "csisense/metrics.hpp"
#include "csisense/sensenet.hpp"

namespace fs = std::filesystem;
using namespace csisense;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kIo = 3, kNumeric = 4 };

// Scenario selection and channel variant flags shared by most commands.
struct ScenarioOptions {
    std::string file;
    int preset = 1;
    bool no_los = false;
    bool per_record = false;
    std::optional<double> snr_db;
    std::optional<double> scatter_coeff;

    void add(CLI::App* cmd)
    {
        auto* f = cmd->add_option("--scenario", file, "Scenario file (JSON)");
        cmd->add_option("--preset", preset, "Built-in deployment: 1 (L=3), 2 (L=2), 3 (L=1)")
            ->check(CLI::Range(1, 3))
            ->excludes(f);
        cmd->add_flag("--no-los", no_los, "Disable the line-of-sight ray");
        cmd->add_flag("--per-record", per_record, "Draw a fresh multipath environment for every record");
        cmd->add_option("--snr-db", snr_db, "Measurement SNR in dB");
        cmd->add_option("--scatter-coeff", scatter_coeff, "Target scattering coefficient");
    }

    channel::Scenario load() const
    {
        channel::Scenario s = file.empty() ? config::preset(preset) : config::load_scenario(file);
        if (no_los) s.channel.los = false;
        if (per_record) s.channel.environment = channel::EnvironmentMode::PerRecord;
        if (snr_db) s.channel.snr_db = *snr_db;
        if (scatter_coeff) s.channel.scatter_coeff = *scatter_coeff;
        s.validate();
        return s;
    }
};

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out.precision(10);
    return out;
}

void require_positive(double v, const char* what)
{
    if (!(v > 0.0)) throw Error(ErrorCode::InvalidConfig, std::string(what) + " must be positive");
}

void write_summary(std::ostream& out, const metrics::ErrorSummary& s)
{
    out << "mean,median,p90,layer_cake_mean,n\n"
        << s.mean << ',' << s.median << ',' << s.p90 << ',' << metrics::layer_cake_mean(s) << ',' << s.sorted.size()
        << '\n';
}

// gen ------------------------------------------------------------------------

struct GenOptions {
    ScenarioOptions scenario;
    std::string protocol = "resolution";
    double sigma = 0.8;
    std::optional<std::size_t> n;
    double pitch = 0.25;
    bool jitter = false;
    bool full_scale = false;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_gen(const GenOptions& o)
{
    require_positive(o.sigma, "sigma");
    const auto s = o.scenario.load();
    const auto protocol = dataset::protocol_from_string(o.protocol);
    dataset::Dataset d;
    if (protocol == dataset::Protocol::Resolution) {
        const std::size_t n = o.n.value_or(o.full_scale ? 2000 : 200);
        d = dataset::gen_resolution_set(s, o.sigma, n, o.seed);
    } else {
        const std::size_t n = o.n.value_or(o.full_scale ? 2000 : 20);
        d = dataset::gen_binned_set(s, o.sigma, n, o.pitch, o.seed, protocol, o.jitter);
    }
    dataset::save(d, o.out);
    std::cout << "wrote " << d.records.size() << " records (" << d.manifest.n_null << " null, " << d.manifest.n_target
              << " target) to " << o.out << '\n';
    return kOk;
}

// train ----------------------------------------------------------------------

struct TrainOptions {
    std::string data;
    std::string head = "detect";
    std::string out;
    std::string log;
    double train_fraction = 0.7;
    sensenet::TrainConfig config;
    sensenet::Architecture arch;
    bool tanh = false;
};

int cmd_train(TrainOptions o)
{
    if (o.head != "detect" && o.head != "locate") throw Error(ErrorCode::InvalidConfig, "head must be detect or locate");
    require_positive(o.config.learning_rate, "learning rate");
    const auto data = dataset::load(o.data);
    const auto [tr, va] = dataset::split(data, o.train_fraction, o.config.seed);
    o.arch.head = o.head == "detect" ? sensenet::Head::Detect : sensenet::Head::Locate;
    o.arch.activation = o.tanh ? sensenet::Activation::Tanh : sensenet::Activation::ReLU;
    const bool detect = o.arch.head == sensenet::Head::Detect;
    const auto train_set = detect ? sensenet::detection_examples(tr) : sensenet::positioning_examples(tr);
    const auto val_set = detect ? sensenet::detection_examples(va) : sensenet::positioning_examples(va);
    if (train_set.inputs.empty()) throw Error(ErrorCode::InvalidSize, "dataset has no usable training records");

    const auto res = sensenet::train(train_set, val_set, o.arch, o.config);
    const fs::path out = o.out;
    if (out.has_parent_path()) ensure_dir(out.parent_path());
    sensenet::save_model(res.model, out);
    const fs::path log = o.log.empty() ? fs::path(out).replace_extension(".log.csv") : fs::path(o.log);
    auto log_out = open_out(log);
    sensenet::write_log_csv(log_out, res.log);

    const auto& best = res.log[static_cast<std::size_t>(res.best_epoch - 1)];
    std::cout << "trained " << sensenet::to_string(o.arch.head) << " model on " << train_set.inputs.size()
              << " examples; best epoch " << res.best_epoch;
    if (val_set.inputs.empty()) {
        std::cout << " (train loss " << best.train_loss << ", no validation records)\n";
    } else {
        std::cout << " (val loss " << best.val_loss << ", val " << (detect ? "accuracy " : "mean error ")
                  << best.val_metric << ")\n";
    }
    return kOk;
}

// eval -----------------------------------------------------------------------

struct EvalOptions {
    ScenarioOptions scenario;
    std::string model;
    std::vector<double> sigmas{0.2, 0.5, 0.8, 1.2};
    std::optional<std::size_t> drops;
    double gamma = 0.9;
    double threshold = 0.5;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_eval(const EvalOptions& o)
{
    const auto s = o.scenario.load();
    const auto model = sensenet::load_model(o.model);
    ensure_dir(o.out);
    for (double sigma : o.sigmas) require_positive(sigma, "sigma");
    if (model.params.arch.head == sensenet::Head::Detect) {
        const std::size_t drops = o.drops.value_or(700);
        auto sigmas = o.sigmas;
        std::sort(sigmas.begin(), sigmas.end());
        const auto curve = metrics::resolution_curve(model, s, sigmas, drops, o.gamma, o.seed, o.threshold);
        auto out = open_out(fs::path(o.out) / "resolution.csv");
        out << "sigma,P,n\n";
        for (const auto& p : curve.points) {
            out << p.sigma << ',' << p.accuracy << ',' << p.drops << '\n';
            std::cout << "sigma " << p.sigma << ": P = " << p.accuracy << '\n';
        }
        if (curve.resolution) {
            std::cout << "resolution at gamma " << o.gamma << ": " << *curve.resolution << " m\n";
        } else {
            std::cout << "no sigma reaches P > " << o.gamma << '\n';
        }
        return kOk;
    }

    const std::size_t drops = o.drops.value_or(1000);
    const double sigma = o.sigmas.size() == 1 ? o.sigmas.front() : 0.8;
    const auto d = metrics::random_drops(s, sigma, drops, o.seed);
    const auto errors = metrics::positioning_errors(model, s, d);
    auto out = open_out(fs::path(o.out) / "positioning.csv");
    out << "drop,err\n";
    for (std::size_t i = 0; i < errors.size(); ++i) out << i << ',' << errors[i] << '\n';
    const auto summary = metrics::summarize_errors(errors);
    auto sum_out = open_out(fs::path(o.out) / "positioning_summary.csv");
    write_summary(sum_out, summary);
    std::cout << "positioning over " << drops << " drops (sigma " << sigma << "): mean " << summary.mean
              << " m, p90 " << summary.p90 << " m\n";
    return kOk;
}

// coverage -------------------------------------------------------------------

struct CoverageOptions {
    ScenarioOptions scenario;
    std::string model;
    double sigma = 0.8;
    double pitch = 0.5;
    std::size_t drops = 30;
    double threshold = 0.5;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_coverage(const CoverageOptions& o)
{
    require_positive(o.sigma, "sigma");
    const auto s = o.scenario.load();
    const auto model = sensenet::load_model(o.model);
    ensure_dir(o.out);
    const auto map = metrics::coverage_map(model, s, o.sigma, o.drops, o.pitch, o.seed, o.threshold);
    auto csv = open_out(fs::path(o.out) / "coverage.csv");
    metrics::write_coverage_csv(csv, map);
    auto pgm = open_out(fs::path(o.out) / "coverage.pgm");
    metrics::write_coverage_pgm(pgm, map);
    std::cout << "coverage over " << map.bins.size() << " bins: mean P = "
              << map.mean_accuracy([](const metrics::CoverageBin&) { return true; }) << '\n';
    return kOk;
}

// baseline -------------------------------------------------------------------

struct BaselineOptions {
    ScenarioOptions scenario;
    double sigma = 0.8;
    std::size_t drops = 1000;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_baseline(const BaselineOptions& o)
{
    require_positive(o.sigma, "sigma");
    const auto s = o.scenario.load();
    ensure_dir(o.out);
    const auto d = metrics::random_drops(s, o.sigma, o.drops, o.seed);
    auto out = open_out(fs::path(o.out) / "baseline.csv");
    out << "drop,true_x,true_y,est_x,est_y,err,variant\n";
    auto sum_out = open_out(fs::path(o.out) / "baseline_summary.csv");
    sum_out << "variant,mean,median,p90,n\n";
    for (const auto& bank : {baseline::swept_bank(s), baseline::overlapped_bank()}) {
        std::vector<geometry::Point2D> est;
        const auto errors = metrics::baseline_errors(s, d, bank, &est);
        const char* name = baseline::to_string(bank.variant);
        for (std::size_t i = 0; i < d.size(); ++i) {
            out << i << ',' << d[i].target.center.x << ',' << d[i].target.center.y << ',' << est[i].x << ','
                << est[i].y << ',' << errors[i] << ',' << name << '\n';
        }
        const auto summary = metrics::summarize_errors(errors);
        sum_out << name << ',' << summary.mean << ',' << summary.median << ',' << summary.p90 << ','
                << summary.sorted.size() << '\n';
        std::cout << name << ": mean " << summary.mean << " m, p90 " << summary.p90 << " m\n";
    }
    return kOk;
}

// raydump --------------------------------------------------------------------

struct RaydumpOptions {
    ScenarioOptions scenario;
    std::uint64_t seed = 1;
    std::optional<double> sigma;
    double x = 2.5;
    double y = 2.5;
    std::string out;
};

int cmd_raydump(const RaydumpOptions& o)
{
    const auto s = o.scenario.load();
    auto rays = channel::realize_channel(s, stream_seed(o.seed, 1));
    if (o.sigma) {
        require_positive(*o.sigma, "sigma");
        rays = channel::apply_target(rays, geometry::Target{{o.x, o.y}, *o.sigma}, s, stream_seed(o.seed, 2)).rays;
    }
    if (o.out.empty()) {
        channel::write_ray_dump(std::cout, rays);
    } else {
        auto out = open_out(o.out);
        channel::write_ray_dump(out, rays);
    }
    return kOk;
}

int exit_code(const Error& e)
{
    switch (e.code()) {
    case ErrorCode::Io: return kIo;
    case ErrorCode::NonFiniteLoss: return kNumeric;
    default: return kConfig;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Passive target sensing over multistatic CSI: simulation, training and evaluation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "csisense 0.1.0");

    GenOptions gen;
    auto* g = app.add_subcommand("gen", "Generate a labelled dataset");
    gen.scenario.add(g);
    g->add_option("--protocol", gen.protocol, "resolution | coverage | positioning")
        ->check(CLI::IsMember({"resolution", "coverage", "positioning"}));
    g->add_option("--sigma", gen.sigma, "Target diameter in m");
    g->add_option("--n", gen.n, "Records per hypothesis (resolution) or per bin and hypothesis (binned)");
    g->add_option("--pitch", gen.pitch, "Bin pitch in m for binned protocols");
    g->add_flag("--jitter", gen.jitter, "Place binned targets uniformly inside the bin");
    g->add_flag("--full-scale", gen.full_scale, "Use the full-scale record counts");
    g->add_option("--seed", gen.seed, "Master seed");
    g->add_option("--out", gen.out, "Output directory")->required();

    TrainOptions train;
    auto* t = app.add_subcommand("train", "Train a detection or positioning model");
    t->add_option("--data", train.data, "Dataset directory")->required();
    t->add_option("--head", train.head, "detect | locate");
    t->add_option("--out", train.out, "Model file")->required();
    t->add_option("--log", train.log, "Training log CSV (default: <model>.log.csv)");
    t->add_option("--train-fraction", train.train_fraction, "Share of records used for training");
    t->add_option("--epochs", train.config.epochs);
    t->add_option("--batch", train.config.batch_size)->check(CLI::PositiveNumber);
    t->add_option("--lr", train.config.learning_rate);
    t->add_option("--patience", train.config.patience, "Early-stop patience in epochs (0 disables)");
    t->add_option("--seed", train.config.seed);
    t->add_option("--conv1", train.arch.conv1_filters);
    t->add_option("--conv2", train.arch.conv2_filters);
    t->add_option("--dense", train.arch.dense_units);
    t->add_flag("--tanh", train.tanh, "Use tanh instead of ReLU activations");

    EvalOptions eval;
    auto* e = app.add_subcommand("eval", "Evaluate a model on fresh drops");
    eval.scenario.add(e);
    e->add_option("--model", eval.model)->required();
    e->add_option("--sigma", eval.sigmas, "Target diameters (detection) or one diameter (positioning)");
    e->add_option("--drops", eval.drops, "Drops per sigma (default 700 detection, 1000 positioning)");
    e->add_option("--gamma", eval.gamma, "Accuracy threshold for the resolution");
    e->add_option("--threshold", eval.threshold, "Decision threshold on the detector output");
    e->add_option("--seed", eval.seed);
    e->add_option("--out", eval.out, "Output directory")->required();

    CoverageOptions cov;
    auto* c = app.add_subcommand("coverage", "Accuracy map over room bins");
    cov.scenario.add(c);
    c->add_option("--model", cov.model)->required();
    c->add_option("--sigma", cov.sigma);
    c->add_option("--pitch", cov.pitch);
    c->add_option("--drops", cov.drops, "Drops per bin and hypothesis");
    c->add_option("--threshold", cov.threshold);
    c->add_option("--seed", cov.seed);
    c->add_option("--out", cov.out, "Output directory")->required();

    BaselineOptions base;
    auto* b = app.add_subcommand("baseline", "Angle triangulation baseline, swept and overlapped beams");
    base.scenario.add(b);
    b->add_option("--sigma", base.sigma);
    b->add_option("--drops", base.drops);
    b->add_option("--seed", base.seed);
    b->add_option("--out", base.out, "Output directory")->required();

    RaydumpOptions dump;
    auto* r = app.add_subcommand("raydump", "Dump the ray population of one record");
    dump.scenario.add(r);
    r->add_option("--seed", dump.seed, "Record seed");
    r->add_option("--sigma", dump.sigma, "Apply a target of this diameter");
    r->add_option("--x", dump.x);
    r->add_option("--y", dump.y);
    r->add_option("--out", dump.out, "Output CSV (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*g) return cmd_gen(gen);
        if (*t) return cmd_train(train);
        if (*e) return cmd_eval(eval);
        if (*c) return cmd_coverage(cov);
        if (*b) return cmd_baseline(base);
        if (*r) return cmd_raydump(dump);
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return exit_code(err);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kFailure;
    }
    return kFailure;
}
