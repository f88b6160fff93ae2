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

#include "citeprint/encoder.hpp"

#include <cmath>
#include <map>

#include "citeprint/error.hpp"
#include "citeprint/sidecar.hpp"
#include "citeprint/text.hpp"

namespace citeprint {

NativeEncoder::NativeEncoder(NativeEncoderConfig config) : config_(config) {
  if (config_.dim < 1) throw UsageError("native encoder dimension must be >= 1");
  if (!config_.word_unigrams && !config_.char_trigrams) {
    throw UsageError("native encoder needs at least one feature family");
  }
}

std::string NativeEncoder::id() const {
  std::string id = "native-v1-d" + std::to_string(config_.dim) + "-s" +
                   std::to_string(config_.seed);
  if (!config_.word_unigrams) id += "-nowords";
  if (!config_.char_trigrams) id += "-notrigrams";
  return id;
}

std::vector<double> NativeEncoder::Encode(std::string_view text) {
  std::map<std::string, int> tf;
  for (const auto &raw : SplitWhitespace(text)) {
    std::string tok = ToLowerUtf8(raw);
    if (config_.word_unigrams) ++tf["w:" + tok];
    if (config_.char_trigrams) {
      std::vector<std::string> cps{"<"};
      size_t pos = 0;
      while (pos < tok.size()) {
        size_t before = pos;
        NextCodePoint(tok, pos);
        cps.emplace_back(tok.substr(before, pos - before));
      }
      cps.emplace_back(">");
      for (size_t i = 0; i + 3 <= cps.size(); ++i) {
        ++tf["c:" + cps[i] + cps[i + 1] + cps[i + 2]];
      }
    }
  }
  std::vector<double> v(config_.dim, 0.0);
  for (const auto &[feature, n] : tf) {
    uint64_t h = KeyedHash(feature, config_.seed);
    double w = 1.0 + std::log(static_cast<double>(n));
    v[h % static_cast<uint64_t>(config_.dim)] += (h >> 63) ? -w : w;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double &x : v) x /= norm;
  }
  return v;
}

std::unique_ptr<TextEncoder> MakeEncoder(const EncoderSpec &spec) {
  if (spec.kind == EncoderKind::kNative) {
    return std::make_unique<NativeEncoder>(spec.native);
  }
  return std::make_unique<SidecarEncoder>(spec.sidecar_endpoint,
                                          spec.sidecar_timeout_ms);
}

}  // namespace citeprint
