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

// Client for the out-of-process transformer embedding service.
//
// Wire format (docs/sidecar_protocol.md): every record is a 4-byte
// big-endian payload length followed by that many bytes of UTF-8 JSON. The
// server speaks first with a handshake record.

#ifndef CITEPRINT_SIDECAR_HPP_
#define CITEPRINT_SIDECAR_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "citeprint/encoder.hpp"

namespace citeprint {
namespace sidecar {

inline constexpr uint32_t kMaxFrameBytes = 16u << 20;
inline constexpr int kProtocolVersion = 1;

struct Handshake {
  int protocol = 0;
  std::string model;
  int dim = 0;
  std::string pooling;
  int max_tokens = 0;
};

struct EmbedResponse {
  std::string request_id;
  std::vector<double> vector;
  bool truncated = false;
};

std::string EncodeFrame(std::string_view payload);
// Returns false when `buffer` does not yet hold a complete frame. Consumed
// bytes are removed from `buffer`.
bool DecodeFrame(std::string &buffer, std::string *payload);

std::string EmbedRequest(std::string_view request_id, std::string_view text);
// Inverse of EmbedRequest, used by peers and tests.
void ParseEmbedRequest(std::string_view payload, std::string *request_id,
                       std::string *text);
Handshake ParseHandshake(std::string_view payload);
// Throws kSidecarEncoder for error records, kSidecarTransport for malformed
// ones.
EmbedResponse ParseResponse(std::string_view payload, int expected_dim);

}  // namespace sidecar

class SidecarEncoder : public TextEncoder {
 public:
  // Endpoint forms: "tcp://host:port", "unix:/path/to/socket".
  SidecarEncoder(const std::string &endpoint, int timeout_ms = 30000,
                 int connect_attempts = 3);
  // Takes ownership of an already connected stream socket.
  static SidecarEncoder FromFd(int fd, int timeout_ms = 30000);

  SidecarEncoder(SidecarEncoder &&other) noexcept;
  SidecarEncoder &operator=(SidecarEncoder &&) = delete;
  ~SidecarEncoder() override;

  std::string id() const override;
  int dim() const override { return handshake_.dim; }
  std::vector<double> Encode(std::string_view text) override;
  sidecar::EmbedResponse Request(std::string_view text);

  const sidecar::Handshake &handshake() const { return handshake_; }

 private:
  SidecarEncoder() = default;
  void ReadHandshake();
  void SendAll(std::string_view bytes);
  std::string ReadFrame();

  int fd_ = -1;
  int timeout_ms_ = 30000;
  uint64_t next_id_ = 1;
  std::string buffer_;
  sidecar::Handshake handshake_;
};

}  // namespace citeprint

#endif  // CITEPRINT_SIDECAR_HPP_
