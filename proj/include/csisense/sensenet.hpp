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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "csisense/dataset.hpp"
#include "csisense/frame.hpp"
#include "csisense/geometry.hpp"

namespace csisense::sensenet {

enum class Head { Detect, Locate };
enum class Activation { ReLU, Tanh };
enum class LossKind { Bce, Mse };

std::string to_string(Head h);

/// Layer stack shared by both heads:
///   conv(k x k, conv1 filters) -> act -> conv(k x k, conv2 filters) -> act
///   -> maxpool 2x2 -> flatten -> dense -> act -> head
/// Convolutions use stride 1 and zero padding k/2, so they keep the frame size.
struct Architecture {
    int in_rows = 24;
    int in_cols = 7;
    int in_channels = 2;
    int kernel = 3;
    int conv1_filters = 16;
    int conv2_filters = 32;
    int dense_units = 64;
    Head head = Head::Detect;
    Activation activation = Activation::ReLU;

    int outputs() const { return head == Head::Detect ? 1 : 2; }
    int pooled_rows() const { return in_rows / 2; }
    int pooled_cols() const { return in_cols / 2; }
    int flat_size() const { return pooled_rows() * pooled_cols() * conv2_filters; }

    /// Throws ShapeMismatch for inputs the stack cannot process.
    void validate() const;

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Offsets of each parameter block inside the flat parameter vector.
/// Weight matrices are row-major: conv weights are (k*k*C_in) x C_out with
/// row index (ky*k + kx)*C_in + c, dense is flat x units, head is units x outputs.
struct Layout {
    std::size_t conv1_w, conv1_b, conv2_w, conv2_b, dense_w, dense_b, head_w, head_b, total;

    explicit Layout(const Architecture& arch);
};

struct ModelParams {
    Architecture arch;
    std::vector<double> values;

    ModelParams() = default;
    /// Zero-initialized parameters.
    explicit ModelParams(const Architecture& a);

    Layout layout() const { return Layout(arch); }
};

/// Glorot-uniform weights, zero biases.
ModelParams glorot_init(const Architecture& arch, std::uint64_t seed);

/// Detection probability in (0, 1). Throws ShapeMismatch.
double forward_detect(const ModelParams& params, const frame::FrameTensor& input);

/// Linear (x, y) estimate. Throws ShapeMismatch.
geometry::Point2D forward_locate(const ModelParams& params, const frame::FrameTensor& input);

/// Raw head outputs (logit or coordinates).
std::vector<double> forward_raw(const ModelParams& params, const frame::FrameTensor& input);

/// Intermediate values of one forward pass. Feature maps are stored
/// position-major: index (r * cols + c) * channels + ch.
struct LayerTrace {
    std::vector<double> z1, a1;  // conv1 pre-activation and activation
    std::vector<double> z2, a2;  // conv2
    std::vector<double> pooled;
    std::vector<double> z3, a3;  // dense
    std::vector<double> out;     // raw head output
    std::vector<int> argmax;     // index into a2 chosen by each pooled value
};

LayerTrace forward_trace(const ModelParams& params, const frame::FrameTensor& input);

/// Backpropagated signals of one sample for a given d(loss)/d(out).
struct LayerGrads {
    std::vector<double> d_z1, d_a2, d_z2, d_z3;
    std::vector<double> params;
};

LayerGrads backward_trace(const ModelParams& params, const frame::FrameTensor& input, std::span<const double> d_out);

/// Batch of inputs with targets laid out sample-major (1 value for BCE, 2 for MSE).
struct Batch {
    std::vector<const frame::FrameTensor*> inputs;
    std::vector<double> targets;

    std::size_t size() const { return inputs.size(); }
};

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;  // same layout as ModelParams::values
};

inline constexpr double kProbClamp = 1e-7;

/// Mean loss over the batch and its exact gradient. BCE uses the sigmoid
/// output clamped to [1e-7, 1 - 1e-7]; MSE is the mean squared Euclidean error.
/// Gradients are accumulated in fixed-size chunks combined pairwise, so any
/// worker count gives bit-identical results.
LossGrad loss_and_grads(const ModelParams& params, const Batch& batch, LossKind kind,
                        std::size_t workers = 1);

struct TrainConfig {
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int epochs = 40;
    int patience = 8;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
};

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_metric = 0.0;  // accuracy (detect) or mean error in m (locate)
};

/// Trained parameters together with the frozen input standardization.
struct Model {
    ModelParams params;
    frame::NormStats stats;
};

double predict_detect(const Model& model, const frame::FrameTensor& raw_input);
geometry::Point2D predict_locate(const Model& model, const frame::FrameTensor& raw_input);

/// Examples for one head, with unnormalized inputs.
struct LabeledSet {
    std::vector<frame::FrameTensor> inputs;
    std::vector<double> targets;
};

LabeledSet detection_examples(const dataset::Dataset& data);
/// Target records only.
LabeledSet positioning_examples(const dataset::Dataset& data);

struct TrainResult {
    Model model;
    std::vector<EpochLog> log;
    int best_epoch = 0;
};

/// Adam on mini-batches; returns the checkpoint with the lowest validation
/// loss (training loss when `val` is empty). Throws NonFiniteLoss.
TrainResult train(const LabeledSet& train_set, const LabeledSet& val, const Architecture& arch,
                  const TrainConfig& config);

/// Accuracy at threshold 0.5 (detect) or mean Euclidean error (locate).
double evaluate_metric(const Model& model, const LabeledSet& set);

/// "CSNN" artifact: magic, u16 version, architecture, normalization stats,
/// u64 parameter count, float64 parameters; all little-endian.
void write_model(std::ostream& out, const Model& model);
Model read_model(std::istream& in);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

void write_log_csv(std::ostream& out, const std::vector<EpochLog>& log);

inline constexpr std::uint16_t kModelVersion = 1;

}  // namespace csisense::sensenet
