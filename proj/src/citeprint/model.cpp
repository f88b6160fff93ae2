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

#include "citeprint/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "citeprint/error.hpp"
#include "citeprint/features.hpp"
#include "citeprint/text.hpp"

namespace citeprint::model {
namespace {

struct Shape {
  int rows;
  int cols;
};

std::vector<Shape> Shapes(const ModelConfig &c) {
  const int h = features::RheHiddenSize(c.n_hist);
  const int out = features::kRheOutputSize;
  const int concat = c.d_text + out;
  std::vector<Shape> s(kNumParams);
  s[kRheW1] = {h, c.n_hist};
  s[kRheB1] = {h, 1};
  s[kRheW2] = {out, h};
  s[kRheB2] = {out, 1};
  s[kProjW] = c.use_projection ? Shape{c.d_text, c.d_text} : Shape{0, 0};
  s[kProjB] = c.use_projection ? Shape{c.d_text, 1} : Shape{0, 0};
  s[kHeadW1] = {c.hidden, concat};
  s[kHeadB1] = {c.hidden, 1};
  s[kHeadW2] = {c.n_labels, c.hidden};
  s[kHeadB2] = {c.n_labels, 1};
  return s;
}

int FanIn(int slot, const std::vector<Shape> &s) {
  switch (slot) {
    case kRheB1: return s[kRheW1].cols;
    case kRheB2: return s[kRheW2].cols;
    case kProjB: return s[kProjW].cols;
    case kHeadB1: return s[kHeadW1].cols;
    case kHeadB2: return s[kHeadW2].cols;
    default: return s[slot].cols;
  }
}

double Uniform01(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

VectorXd Relu(const VectorXd &z) { return z.cwiseMax(0.0); }

// Activations kept for the backward pass.
struct Trace {
  VectorXd text_in;   // d_text
  VectorXd hist;      // n_hist (normalized if configured)
  VectorXd rhe_z1;    // rhe hidden pre-activation
  VectorXd rhe_a1;
  VectorXd concat;
  VectorXd head_z1;
  VectorXd head_a1;
  VectorXd logits;
  bool text_on = false;
  bool refs_on = false;
};

Trace Run(const FusionModel &m, const std::optional<VectorXd> &text,
          const std::optional<VectorXd> &histogram) {
  const ModelConfig &c = m.config;
  if (!text && !histogram) throw UsageError("forward needs at least one input modality");
  const auto &p = m.params;
  Trace t;
  t.text_on = c.use_content;
  t.refs_on = c.use_references;
  const int out = features::kRheOutputSize;

  t.concat = VectorXd::Zero(c.d_text + out);
  if (text && text->size() != c.d_text) {
    throw UsageError("text embedding has dimension " + std::to_string(text->size()) +
                     ", model expects " + std::to_string(c.d_text));
  }
  if (histogram && histogram->size() != c.n_hist) {
    throw UsageError("histogram has length " + std::to_string(histogram->size()) +
                     ", model expects " + std::to_string(c.n_hist));
  }
  t.text_in = text ? *text : VectorXd::Zero(c.d_text);
  if (t.text_on) {
    if (c.use_projection) {
      t.concat.head(c.d_text) = p[kProjW] * t.text_in + p[kProjB].col(0);
    } else {
      t.concat.head(c.d_text) = t.text_in;
    }
  }
  t.hist = histogram ? *histogram : VectorXd::Zero(c.n_hist);
  if (c.l1_normalize) {
    double s = t.hist.cwiseAbs().sum();
    if (s > 0.0) t.hist /= s;
  }
  if (t.refs_on) {
    t.rhe_z1 = p[kRheW1] * t.hist + p[kRheB1].col(0);
    t.rhe_a1 = Relu(t.rhe_z1);
    t.concat.tail(out) = p[kRheW2] * t.rhe_a1 + p[kRheB2].col(0);
  }
  t.head_z1 = p[kHeadW1] * t.concat + p[kHeadB1].col(0);
  t.head_a1 = Relu(t.head_z1);
  t.logits = p[kHeadW2] * t.head_a1 + p[kHeadB2].col(0);
  return t;
}

VectorXd ReluMask(const VectorXd &z) {
  return (z.array() > 0.0).cast<double>().matrix();
}

}  // namespace

const char *ModeName(Mode mode) {
  switch (mode) {
    case Mode::kContent: return "content";
    case Mode::kReferences: return "references";
    case Mode::kRefNoSelf: return "ref_no_self";
    case Mode::kRefCont: return "ref_cont";
  }
  return "unknown";
}

Mode ParseMode(const std::string &name) {
  std::string n = name;
  std::replace(n.begin(), n.end(), '-', '_');
  if (n == "content") return Mode::kContent;
  if (n == "references") return Mode::kReferences;
  if (n == "ref_no_self") return Mode::kRefNoSelf;
  if (n == "ref_cont") return Mode::kRefCont;
  throw UsageError("unknown mode '" + name +
                   "' (expected content, references, ref-no-self or ref-cont)");
}

bool UsesContent(Mode mode) { return mode == Mode::kContent || mode == Mode::kRefCont; }
bool UsesReferences(Mode mode) { return mode != Mode::kContent; }

const char *ParamName(int slot) {
  static const char *kNames[kNumParams] = {
      "rhe.w1", "rhe.b1", "rhe.w2", "rhe.b2", "proj.w",
      "proj.b", "head.w1", "head.b1", "head.w2", "head.b2"};
  return kNames[slot];
}

int FusionModel::rhe_hidden() const { return features::RheHiddenSize(config.n_hist); }

int FusionModel::concat_size() const {
  return config.d_text + features::kRheOutputSize;
}

Tensors FusionModel::ZeroLike() const {
  Tensors t(kNumParams);
  for (int i = 0; i < kNumParams; ++i) {
    t[i] = MatrixXd::Zero(params[i].rows(), params[i].cols());
  }
  return t;
}

void Validate(const ModelConfig &c) {
  if (!c.use_content && !c.use_references) {
    throw UsageError("model must use content, references or both");
  }
  if (c.d_text < 1) throw UsageError("text dimension must be >= 1");
  if (c.n_hist < 0) throw UsageError("histogram size must be >= 0");
  if (c.n_labels < 1) throw UsageError("label space is empty");
  if (c.hidden < 1) throw UsageError("hidden size must be >= 1");
}

FusionModel Zeros(const ModelConfig &config) {
  Validate(config);
  FusionModel m;
  m.config = config;
  auto shapes = Shapes(config);
  m.params.resize(kNumParams);
  for (int i = 0; i < kNumParams; ++i) {
    m.params[i] = MatrixXd::Zero(shapes[i].rows, shapes[i].cols);
  }
  return m;
}

FusionModel Initialize(const ModelConfig &config, uint64_t seed) {
  FusionModel m = Zeros(config);
  auto shapes = Shapes(config);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < kNumParams; ++i) {
    int fan_in = FanIn(i, shapes);
    if (fan_in == 0) continue;
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    MatrixXd &w = m.params[i];
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        w(r, c) = (2.0 * Uniform01(rng) - 1.0) * bound;
      }
    }
  }
  return m;
}

VectorXd RheForward(const FusionModel &m, const VectorXd &histogram) {
  if (histogram.size() != m.config.n_hist) {
    throw UsageError("histogram has length " + std::to_string(histogram.size()) +
                     ", model expects " + std::to_string(m.config.n_hist));
  }
  const auto &p = m.params;
  VectorXd a1 = Relu(p[kRheW1] * histogram + p[kRheB1].col(0));
  return p[kRheW2] * a1 + p[kRheB2].col(0);
}

VectorXd Forward(const FusionModel &model, const std::optional<VectorXd> &text,
                 const std::optional<VectorXd> &histogram) {
  return Run(model, text, histogram).logits;
}

VectorXd Softmax(const VectorXd &logits) {
  // Scalar exp so that equal logits give bitwise-equal probabilities.
  double mx = logits.maxCoeff();
  VectorXd e(logits.size());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    e[i] = std::exp(logits[i] - mx);
    sum += e[i];
  }
  for (Eigen::Index i = 0; i < e.size(); ++i) e[i] /= sum;
  return e;
}

double Loss(const VectorXd &logits, int label) {
  if (label < 0 || label >= logits.size()) throw UsageError("label index out of range");
  Eigen::Index arg = 0;
  double mx = logits.maxCoeff(&arg);
  double rest = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (i != arg) rest += std::exp(logits[i] - mx);
  }
  return std::log1p(rest) + (mx - logits[label]);
}

double Gradients(const FusionModel &model, const std::vector<const Example *> &batch,
                 Tensors *grads) {
  if (batch.empty()) throw UsageError("gradient batch is empty");
  const ModelConfig &c = model.config;
  const auto &p = model.params;
  *grads = model.ZeroLike();
  Tensors &g = *grads;
  const int out = features::kRheOutputSize;
  double total = 0.0;
  for (const Example *ex : batch) {
    Trace t = Run(model, ex->text, ex->histogram);
    total += Loss(t.logits, ex->label);
    VectorXd d_logits = Softmax(t.logits);
    d_logits[ex->label] -= 1.0;

    g[kHeadW2].noalias() += d_logits * t.head_a1.transpose();
    g[kHeadB2].col(0) += d_logits;
    VectorXd d_z1 = (p[kHeadW2].transpose() * d_logits).cwiseProduct(ReluMask(t.head_z1));
    g[kHeadW1].noalias() += d_z1 * t.concat.transpose();
    g[kHeadB1].col(0) += d_z1;
    VectorXd d_concat = p[kHeadW1].transpose() * d_z1;

    if (t.text_on && c.use_projection) {
      VectorXd d_text = d_concat.head(c.d_text);
      g[kProjW].noalias() += d_text * t.text_in.transpose();
      g[kProjB].col(0) += d_text;
    }
    if (t.refs_on) {
      VectorXd d_rhe = d_concat.tail(out);
      g[kRheW2].noalias() += d_rhe * t.rhe_a1.transpose();
      g[kRheB2].col(0) += d_rhe;
      VectorXd d_rz1 = (p[kRheW2].transpose() * d_rhe).cwiseProduct(ReluMask(t.rhe_z1));
      g[kRheW1].noalias() += d_rz1 * t.hist.transpose();
      g[kRheB1].col(0) += d_rz1;
    }
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (auto &m : g) m *= scale;
  return total * scale;
}

TrainConfig DefaultTrainConfig(Mode mode, bool chunked) {
  TrainConfig cfg;
  cfg.mode = mode;
  cfg.epochs = 10;
  switch (mode) {
    case Mode::kContent: cfg.learning_rate = 1e-4; break;
    case Mode::kReferences:
    case Mode::kRefNoSelf: cfg.learning_rate = 8e-4; break;
    case Mode::kRefCont: cfg.learning_rate = chunked ? 5e-5 : 3e-4; break;
  }
  return cfg;
}

TrainResult Train(const std::vector<Example> &examples, FusionModel start,
                  const TrainConfig &config, std::optional<AdamState> adam,
                  const std::function<void(int, double)> &on_epoch) {
  if (!(config.learning_rate > 0.0)) throw UsageError("learning rate must be > 0");
  if (config.epochs < 1) throw UsageError("epochs must be >= 1");
  if (config.batch_size < 1) throw UsageError("batch size must be >= 1");
  if (examples.empty()) throw DataError("no training examples");
  Validate(start.config);

  TrainResult result{std::move(start), {}, {}};
  FusionModel &m = result.model;
  if (adam) {
    result.adam = std::move(*adam);
  } else {
    result.adam.m = m.ZeroLike();
    result.adam.v = m.ZeroLike();
  }
  AdamState &st = result.adam;

  std::vector<size_t> order(examples.size());
  Tensors grads;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const int64_t global_epoch = st.epochs_done;
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(SplitMix64(config.seed ^ SplitMix64(static_cast<uint64_t>(global_epoch))));
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng() % i]);
    }
    double epoch_loss = 0.0;
    size_t seen = 0;
    for (size_t start_i = 0; start_i < order.size(); start_i += config.batch_size) {
      size_t end = std::min(order.size(), start_i + static_cast<size_t>(config.batch_size));
      std::vector<const Example *> batch;
      for (size_t k = start_i; k < end; ++k) batch.push_back(&examples[order[k]]);
      double loss = Gradients(m, batch, &grads);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "non-finite training loss at epoch " << global_epoch + 1 << ", step "
            << st.step + 1 << " (learning rate " << config.learning_rate
            << " is likely too high)";
        throw NumericError(msg.str());
      }
      epoch_loss += loss * static_cast<double>(batch.size());
      seen += batch.size();

      ++st.step;
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(st.step));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(st.step));
      for (int i = 0; i < kNumParams; ++i) {
        if (m.params[i].size() == 0) continue;
        st.m[i] = config.beta1 * st.m[i] + (1.0 - config.beta1) * grads[i];
        st.v[i] = config.beta2 * st.v[i] +
                  (1.0 - config.beta2) * grads[i].cwiseProduct(grads[i]);
        m.params[i].array() -= config.learning_rate * (st.m[i].array() / bc1) /
                               ((st.v[i].array() / bc2).sqrt() + config.adam_eps);
      }
    }
    ++st.epochs_done;
    double mean = epoch_loss / static_cast<double>(seen);
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(static_cast<int>(st.epochs_done), mean);
  }
  return result;
}

}  // namespace citeprint::model
