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

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "citeprint/error.hpp"
#include "citeprint/model.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

namespace citeprint::model {
namespace {

ModelConfig Small(bool content, bool refs) {
  ModelConfig c;
  c.d_text = 4;
  c.n_hist = 3;
  c.n_labels = 3;
  c.hidden = 6;
  c.use_content = content;
  c.use_references = refs;
  return c;
}

bool SameParams(const FusionModel &a, const FusionModel &b) {
  for (int i = 0; i < kNumParams; ++i) {
    if (a.params[i].rows() != b.params[i].rows() || a.params[i].cols() != b.params[i].cols()) {
      return false;
    }
    if (a.params[i].size() && a.params[i] != b.params[i]) return false;
  }
  return true;
}

// Three labels, each owning one histogram bucket and one text direction.
std::vector<Example> Separable(int per_label, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<Example> out;
  for (int l = 0; l < 3; ++l) {
    for (int i = 0; i < per_label; ++i) {
      Example e;
      VectorXd t = VectorXd::Zero(4), h = VectorXd::Zero(3);
      for (int k = 0; k < 4; ++k) t[k] = noise(rng);
      t[l] += 1.0;
      h[l] = 2.0 + static_cast<double>(rng() % 3);
      e.text = t;
      e.histogram = h;
      e.label = l;
      out.push_back(e);
    }
  }
  return out;
}

TEST_SUITE("model") {

TEST_CASE("forward matches the dense oracle") {
  for (uint64_t seed = 1; seed <= 200; ++seed) {
    FusionModel m = oracles::RandomSmallModel(seed);
    auto ex = oracles::RandomExamples(m.config, 2, seed + 1000);
    for (const auto &e : ex) {
      auto want = oracles::Forward(m, oracles::ToVec(*e.text), oracles::ToVec(*e.histogram));
      auto got = oracles::ToVec(Forward(m, e.text, e.histogram));
      CHECK(oracles::MaxRelativeError(got, want) < 1e-6);
      if (m.config.use_references && !m.config.l1_normalize) {
        auto rw = oracles::RheForward(m, oracles::ToVec(*e.histogram));
        auto rg = oracles::ToVec(RheForward(m, *e.histogram));
        CHECK(oracles::MaxRelativeError(rg, rw) < 1e-6);
      }
    }
  }
}

TEST_CASE("forward at realistic sizes matches the dense oracle") {
  ModelConfig c;
  c.d_text = 256;
  c.n_hist = 300;
  c.n_labels = 7;
  c.hidden = 512;
  c.use_projection = true;
  FusionModel m = Initialize(c, 42);
  auto ex = oracles::RandomExamples(c, 3, 43);
  for (const auto &e : ex) {
    auto want = oracles::Forward(m, oracles::ToVec(*e.text), oracles::ToVec(*e.histogram));
    CHECK(oracles::MaxRelativeError(oracles::ToVec(Forward(m, e.text, e.histogram)), want) < 1e-6);
  }
}

TEST_CASE("zero model and masking") {
  FusionModel z = Zeros(Small(true, true));
  VectorXd logits = Forward(z, VectorXd::Zero(4), VectorXd::Zero(3));
  CHECK(logits.isZero(0.0));

  FusionModel refs = Initialize(Small(false, true), 3);
  VectorXd h(3);
  h << 1, 0, 2;
  VectorXd e = VectorXd::Random(4);
  CHECK(Forward(refs, e, h) == Forward(refs, VectorXd::Zero(4), h));
  CHECK(Forward(refs, std::nullopt, h) == Forward(refs, e, h));

  FusionModel text = Initialize(Small(true, false), 3);
  CHECK(Forward(text, e, h) == Forward(text, e, VectorXd::Zero(3)));
  CHECK_THROWS(Forward(text, std::nullopt, std::nullopt));
  CHECK_THROWS(Forward(text, VectorXd::Zero(5), h));
  CHECK_THROWS(Zeros(Small(false, false)));
}

TEST_CASE("loss") {
  for (int n : {1, 2, 5, 100}) {
    CHECK(Loss(VectorXd::Constant(n, 0.3), 0) == doctest::Approx(std::log(n)).epsilon(1e-12));
  }
  VectorXd gap(3);
  gap << 50, 0, 0;
  CHECK(Loss(gap, 0) < 1e-20);
  CHECK(Loss(gap, 0) >= 0.0);
  VectorXd huge(2);
  huge << 1e4, -1e4;
  CHECK(std::isfinite(Loss(huge, 1)));
  CHECK(Loss(huge, 1) == doctest::Approx(2e4));

  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int t = 0; t < 1000; ++t) {
    int n = 2 + static_cast<int>(rng() % 8);
    VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = g(rng);
    int label = static_cast<int>(rng() % n);
    double direct = 0.0;
    for (int i = 0; i < n; ++i) direct += std::exp(z[i]);
    direct = std::log(direct) - z[label];
    CHECK(Loss(z, label) == doctest::Approx(direct).epsilon(1e-10));
    CHECK(Loss(z, label) >= 0.0);
    double c = g(rng) * 10.0;
    VectorXd shifted = (z.array() + c).matrix();
    CHECK(std::fabs(Loss(shifted, label) - Loss(z, label)) < 1e-12 * (1.0 + std::fabs(c)));
    CHECK((Softmax(shifted) - Softmax(z)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(Softmax(z).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("gradients match central differences on 100 random models") {
  double worst = 0.0;
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    auto r = oracles::GradientCheck(seed);
    CAPTURE(seed);
    CHECK(r.max_rel_error < 1e-4);
    worst = std::max(worst, r.max_rel_error);
  }
  MESSAGE("worst relative error " << worst);
}

TEST_CASE("analytic head-bias gradient at zero parameters") {
  FusionModel z = Zeros(Small(true, true));
  std::vector<Example> batch(3);
  for (int i = 0; i < 3; ++i) {
    batch[i].text = VectorXd::Zero(4);
    batch[i].histogram = VectorXd::Zero(3);
    batch[i].label = i;
  }
  std::vector<const Example *> ptrs = {&batch[0], &batch[1], &batch[2]};
  Tensors g;
  double loss = Gradients(z, ptrs, &g);
  CHECK(loss == doctest::Approx(std::log(3.0)));
  // mean(softmax - onehot) = 1/3 - 1/3 for a balanced batch.
  for (int i = 0; i < 3; ++i) CHECK(std::fabs(g[kHeadB2](i, 0)) < 1e-15);
  std::vector<const Example *> first = {&batch[0], &batch[0]};
  Gradients(z, first, &g);
  CHECK(g[kHeadB2](0, 0) == doctest::Approx(1.0 / 3.0 - 1.0));
  CHECK(g[kHeadB2](1, 0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("unused modalities receive zero gradient") {
  auto ex = Separable(2, 1);
  std::vector<const Example *> ptrs;
  for (const auto &e : ex) ptrs.push_back(&e);
  Tensors g;
  ModelConfig text_only = Small(true, false);
  text_only.use_projection = true;
  Gradients(Initialize(text_only, 5), ptrs, &g);
  for (int s : {kRheW1, kRheB1, kRheW2, kRheB2}) CHECK(g[s].isZero(0.0));
  CHECK_FALSE(g[kProjW].isZero(0.0));
  ModelConfig refs_only = Small(false, true);
  refs_only.use_projection = true;
  Gradients(Initialize(refs_only, 5), ptrs, &g);
  for (int s : {kProjW, kProjB}) CHECK(g[s].isZero(0.0));
  CHECK_FALSE(g[kRheW1].isZero(0.0));
}

TEST_CASE("separable toy set is learned") {
  auto ex = Separable(30, 2);
  for (bool content : {true, false}) {
    FusionModel start = Initialize(Small(content, !content), 11);
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.epochs = 10;
    cfg.batch_size = 8;
    cfg.seed = 3;
    TrainResult r = Train(ex, start, cfg);
    int correct = 0;
    for (const auto &e : ex) {
      VectorXd z = Forward(r.model, e.text, e.histogram);
      Eigen::Index arg;
      z.maxCoeff(&arg);
      correct += arg == e.label;
    }
    CHECK(correct >= static_cast<int>(0.99 * ex.size()));
    REQUIRE(r.epoch_loss.size() == 10);
    CHECK(r.epoch_loss.back() < r.epoch_loss.front());
  }
}

TEST_CASE("training is deterministic and resumable") {
  auto ex = Separable(10, 4);
  TrainConfig cfg;
  cfg.learning_rate = 5e-3;
  cfg.epochs = 4;
  cfg.batch_size = 4;
  cfg.seed = 9;
  FusionModel start = Initialize(Small(true, true), 1);
  TrainResult a = Train(ex, start, cfg);
  TrainResult b = Train(ex, start, cfg);
  CHECK(SameParams(a.model, b.model));
  CHECK(a.epoch_loss == b.epoch_loss);

  TrainConfig half = cfg;
  half.epochs = 2;
  TrainResult first = Train(ex, start, half);
  TrainResult rest = Train(ex, first.model, half, first.adam);
  CHECK(SameParams(rest.model, a.model));
  CHECK(rest.adam.epochs_done == 4);

  cfg.seed = 10;
  CHECK_FALSE(SameParams(Train(ex, start, cfg).model, a.model));
}

TEST_CASE("non-finite loss aborts training") {
  auto ex = Separable(3, 5);
  ex[0].text = VectorXd::Constant(4, std::numeric_limits<double>::quiet_NaN());
  TrainConfig cfg;
  cfg.epochs = 1;
  try {
    Train(ex, Initialize(Small(true, true), 1), cfg);
    FAIL("expected a numeric error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kNumeric);
  }
}

TEST_CASE("default learning rates") {
  CHECK(DefaultTrainConfig(Mode::kReferences, false).learning_rate == doctest::Approx(8e-4));
  CHECK(DefaultTrainConfig(Mode::kReferences, false).epochs == 10);
  CHECK(DefaultTrainConfig(Mode::kRefCont, false).learning_rate == doctest::Approx(3e-4));
  CHECK(DefaultTrainConfig(Mode::kRefCont, true).learning_rate == doctest::Approx(5e-5));
  CHECK(ParseMode("ref-cont") == Mode::kRefCont);
  CHECK(ParseMode("ref_no_self") == Mode::kRefNoSelf);
  CHECK_THROWS(ParseMode("everything"));
}

}  // TEST_SUITE

}  // namespace
}  // namespace citeprint::model
