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

// Fixed-size text encoders.

#ifndef CITEPRINT_ENCODER_HPP_
#define CITEPRINT_ENCODER_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace citeprint {

class TextEncoder {
 public:
  virtual ~TextEncoder() = default;

  // Stable identifier; embedding caches and checkpoints are keyed by it.
  virtual std::string id() const = 0;
  virtual int dim() const = 0;
  virtual std::vector<double> Encode(std::string_view text) = 0;
};

struct NativeEncoderConfig {
  int dim = 256;
  uint64_t seed = 0x6369746570726e74ULL;
  bool word_unigrams = true;
  bool char_trigrams = true;
};

// Hashed bag of features. Each lowercased whitespace token contributes the
// feature "w:<token>" and the code-point trigrams "c:<tri>" of "<token>".
// A feature f with term frequency tf adds sign(h) * (1 + ln tf) to bucket
// h mod dim, with h = KeyedHash(f, seed) and sign from the top bit of h. The
// result is L2-normalized; empty text maps to the zero vector.
class NativeEncoder : public TextEncoder {
 public:
  explicit NativeEncoder(NativeEncoderConfig config = {});

  std::string id() const override;
  int dim() const override { return config_.dim; }
  std::vector<double> Encode(std::string_view text) override;

  const NativeEncoderConfig &config() const { return config_; }

 private:
  NativeEncoderConfig config_;
};

enum class EncoderKind { kNative, kSidecar };

struct EncoderSpec {
  EncoderKind kind = EncoderKind::kNative;
  NativeEncoderConfig native;
  std::string sidecar_endpoint;
  int sidecar_timeout_ms = 30000;
};

std::unique_ptr<TextEncoder> MakeEncoder(const EncoderSpec &spec);

}  // namespace citeprint

#endif  // CITEPRINT_ENCODER_HPP_
