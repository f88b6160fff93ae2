// Copyright 2026 The citeprint Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Fusion classifier: a text feature path and a reference-histogram MLP,
// concatenated into a two-layer classification head that emits logits.

#ifndef CITEPRINT_MODEL_HPP_
#define CITEPRINT_MODEL_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace citeprint::model {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Mode { kContent, kReferences, kRefNoSelf, kRefCont };

const char *ModeName(Mode mode);
Mode ParseMode(const std::string &name);  // accepts '-' or '_' spellings
bool UsesContent(Mode mode);
bool UsesReferences(Mode mode);

struct ModelConfig {
  int d_text = 256;
  int n_hist = 0;
  int n_labels = 0;
  int hidden = 512;
  bool use_content = true;
  bool use_references = true;
  bool use_projection = false;  // optional affine d_text -> d_text adapter
  bool l1_normalize = false;    // histogram counts scaled to sum 1
};

// Parameter slots. Biases are stored as column vectors (n x 1 matrices).
enum Param {
  kRheW1,
  kRheB1,
  kRheW2,
  kRheB2,
  kProjW,
  kProjB,
  kHeadW1,
  kHeadB1,
  kHeadW2,
  kHeadB2,
  kNumParams,
};

const char *ParamName(int slot);

using Tensors = std::vector<MatrixXd>;

struct FusionModel {
  ModelConfig config;
  Tensors params;  // kNumParams entries; projection slots empty when unused

  int rhe_hidden() const;
  int concat_size() const;
  // Zero-filled tensors with the model's shapes.
  Tensors ZeroLike() const;
};

// Uniform fan-in initialization U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for
// weights and biases, drawn from a 64-bit Mersenne Twister seeded with `seed`.
FusionModel Initialize(const ModelConfig &config, uint64_t seed);
FusionModel Zeros(const ModelConfig &config);

void Validate(const ModelConfig &config);

// Histogram MLP alone: n_hist -> floor((n_hist+128)/2) -> 128 with ReLU
// between the two affine layers.
VectorXd RheForward(const FusionModel &model, const VectorXd &histogram);

struct Example {
  std::optional<VectorXd> text;
  std::optional<VectorXd> histogram;
  int label = 0;
};

// Absent inputs and modalities disabled by the config are replaced by zeros
// at the concatenation. Throws when both inputs are absent.
VectorXd Forward(const FusionModel &model, const std::optional<VectorXd> &text,
                 const std::optional<VectorXd> &histogram);

// -log softmax(logits)[label], computed without overflow.
double Loss(const VectorXd &logits, int label);
VectorXd Softmax(const VectorXd &logits);

// Exact gradients of the mean loss over `batch`. Returns the mean loss.
double Gradients(const FusionModel &model, const std::vector<const Example *> &batch,
                 Tensors *grads);

struct TrainConfig {
  double learning_rate = 1e-4;
  int epochs = 10;
  int batch_size = 32;
  uint64_t seed = 0;
  Mode mode = Mode::kRefCont;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct AdamState {
  Tensors m;
  Tensors v;
  int64_t step = 0;
  int64_t epochs_done = 0;
};

struct TrainResult {
  FusionModel model;
  AdamState adam;
  std::vector<double> epoch_loss;
};

// Table defaults: (learning rate, epochs) for a mode and dataset variant.
TrainConfig DefaultTrainConfig(Mode mode, bool chunked);

// Minibatch Adam over `examples` for config.epochs epochs, continuing from
// `start` and `adam` when given. Single-threaded and deterministic given the
// seed. Throws kNumeric on a non-finite loss.
TrainResult Train(const std::vector<Example> &examples, FusionModel start,
                  const TrainConfig &config, std::optional<AdamState> adam = {},
                  const std::function<void(int, double)> &on_epoch = {});

}  // namespace citeprint::model

#endif  // CITEPRINT_MODEL_HPP_
