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

#include "citeprint/sidecar.hpp"

#include <netdb.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <thread>

#include "citeprint/error.hpp"
#include "citeprint/text.hpp"
#include "json.hpp"

namespace citeprint {
namespace sidecar {
namespace {

using nlohmann::json;

Error TransportError(const std::string &m) {
  return Error(ErrorKind::kSidecarTransport, "sidecar transport: " + m);
}

json ParseRecord(std::string_view payload) {
  json j = json::parse(payload, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("type") ||
      !j["type"].is_string()) {
    throw TransportError("malformed record");
  }
  return j;
}

}  // namespace

std::string EncodeFrame(std::string_view payload) {
  if (payload.size() > kMaxFrameBytes) throw TransportError("record too large");
  uint32_t n = static_cast<uint32_t>(payload.size());
  std::string out;
  out.reserve(4 + payload.size());
  out += static_cast<char>((n >> 24) & 0xFF);
  out += static_cast<char>((n >> 16) & 0xFF);
  out += static_cast<char>((n >> 8) & 0xFF);
  out += static_cast<char>(n & 0xFF);
  out.append(payload);
  return out;
}

bool DecodeFrame(std::string &buffer, std::string *payload) {
  if (buffer.size() < 4) return false;
  auto b = [&](int i) { return static_cast<uint32_t>(static_cast<unsigned char>(buffer[i])); };
  uint32_t n = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
  if (n > kMaxFrameBytes) throw TransportError("record too large");
  if (buffer.size() < 4 + static_cast<size_t>(n)) return false;
  payload->assign(buffer, 4, n);
  buffer.erase(0, 4 + static_cast<size_t>(n));
  return true;
}

std::string EmbedRequest(std::string_view request_id, std::string_view text) {
  json j;
  j["type"] = "embed";
  j["request_id"] = std::string(request_id);
  j["text"] = std::string(text);
  try {
    return j.dump();
  } catch (const json::type_error &) {
    throw DataError("text is not valid UTF-8");
  }
}

void ParseEmbedRequest(std::string_view payload, std::string *request_id,
                       std::string *text) {
  json j = ParseRecord(payload);
  if (j["type"] != "embed" || !j.contains("request_id") || !j.contains("text")) {
    throw TransportError("not an embed request");
  }
  *request_id = j["request_id"].get<std::string>();
  *text = j["text"].get<std::string>();
}

Handshake ParseHandshake(std::string_view payload) {
  json j = ParseRecord(payload);
  if (j["type"] != "handshake") throw TransportError("expected handshake record");
  Handshake h;
  try {
    h.protocol = j.at("protocol").get<int>();
    h.model = j.at("model").get<std::string>();
    h.dim = j.at("dim").get<int>();
    h.pooling = j.at("pooling").get<std::string>();
    h.max_tokens = j.value("max_tokens", 0);
  } catch (const json::exception &e) {
    throw TransportError(std::string("bad handshake: ") + e.what());
  }
  if (h.protocol != kProtocolVersion) {
    throw TransportError("unsupported protocol " + std::to_string(h.protocol));
  }
  if (h.dim < 1) throw TransportError("handshake dimension must be positive");
  return h;
}

EmbedResponse ParseResponse(std::string_view payload, int expected_dim) {
  json j = ParseRecord(payload);
  std::string type = j["type"].get<std::string>();
  if (type == "error") {
    throw Error(ErrorKind::kSidecarEncoder,
                "sidecar encoder: " + j.value("message", std::string("unknown error")) +
                    " (request " + j.value("request_id", std::string("?")) + ")");
  }
  if (type != "embedding") throw TransportError("unexpected record type " + type);
  EmbedResponse r;
  try {
    r.request_id = j.at("request_id").get<std::string>();
    r.vector = j.at("vector").get<std::vector<double>>();
    r.truncated = j.at("truncated").get<bool>();
  } catch (const json::exception &e) {
    throw TransportError(std::string("bad embedding record: ") + e.what());
  }
  if (static_cast<int>(r.vector.size()) != expected_dim) {
    throw TransportError("embedding has " + std::to_string(r.vector.size()) +
                         " entries, handshake said " + std::to_string(expected_dim));
  }
  for (double x : r.vector) {
    if (!std::isfinite(x)) throw Error(ErrorKind::kSidecarEncoder, "sidecar encoder: non-finite embedding");
  }
  return r;
}

}  // namespace sidecar

namespace {

Error TransportError(const std::string &m) {
  return Error(ErrorKind::kSidecarTransport, "sidecar transport: " + m);
}

int ConnectOnce(const std::string &endpoint) {
  if (StartsWith(endpoint, "unix:")) {
    std::string path = endpoint.substr(5);
    while (StartsWith(path, "//")) path.erase(0, 1);
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    if (path.size() >= sizeof(addr.sun_path)) throw UsageError("unix socket path too long");
    std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
    int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (fd < 0) return -1;
    if (::connect(fd, reinterpret_cast<sockaddr *>(&addr), sizeof(addr)) != 0) {
      ::close(fd);
      return -1;
    }
    return fd;
  }
  if (StartsWith(endpoint, "tcp://")) {
    std::string rest = endpoint.substr(6);
    size_t colon = rest.rfind(':');
    if (colon == std::string::npos) throw UsageError("sidecar endpoint needs host:port");
    std::string host = rest.substr(0, colon), port = rest.substr(colon + 1);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo *res = nullptr;
    if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0) return -1;
    int fd = -1;
    for (addrinfo *p = res; p; p = p->ai_next) {
      fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
      ::close(fd);
      fd = -1;
    }
    ::freeaddrinfo(res);
    return fd;
  }
  throw UsageError("sidecar endpoint must start with tcp:// or unix:");
}

void SetTimeout(int fd, int timeout_ms) {
  timeval tv{};
  tv.tv_sec = timeout_ms / 1000;
  tv.tv_usec = (timeout_ms % 1000) * 1000;
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

}  // namespace

SidecarEncoder::SidecarEncoder(const std::string &endpoint, int timeout_ms,
                               int connect_attempts)
    : timeout_ms_(timeout_ms) {
  if (endpoint.empty()) throw UsageError("sidecar endpoint is empty");
  for (int attempt = 0; attempt < connect_attempts && fd_ < 0; ++attempt) {
    if (attempt) std::this_thread::sleep_for(std::chrono::milliseconds(100 << attempt));
    fd_ = ConnectOnce(endpoint);
  }
  if (fd_ < 0) throw TransportError("cannot connect to " + endpoint);
  SetTimeout(fd_, timeout_ms_);
  ReadHandshake();
}

SidecarEncoder SidecarEncoder::FromFd(int fd, int timeout_ms) {
  SidecarEncoder enc;
  enc.fd_ = fd;
  enc.timeout_ms_ = timeout_ms;
  SetTimeout(fd, timeout_ms);
  enc.ReadHandshake();
  return enc;
}

SidecarEncoder::SidecarEncoder(SidecarEncoder &&other) noexcept
    : fd_(other.fd_),
      timeout_ms_(other.timeout_ms_),
      next_id_(other.next_id_),
      buffer_(std::move(other.buffer_)),
      handshake_(std::move(other.handshake_)) {
  other.fd_ = -1;
}

SidecarEncoder::~SidecarEncoder() {
  if (fd_ >= 0) ::close(fd_);
}

std::string SidecarEncoder::id() const {
  return "sidecar-" + handshake_.model + "-" + handshake_.pooling + "-d" +
         std::to_string(handshake_.dim);
}

void SidecarEncoder::ReadHandshake() {
  handshake_ = sidecar::ParseHandshake(ReadFrame());
}

void SidecarEncoder::SendAll(std::string_view bytes) {
  while (!bytes.empty()) {
    ssize_t n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("send failed: ") + std::strerror(errno));
    }
    bytes.remove_prefix(static_cast<size_t>(n));
  }
}

std::string SidecarEncoder::ReadFrame() {
  std::string payload;
  char chunk[65536];
  while (!sidecar::DecodeFrame(buffer_, &payload)) {
    ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n == 0) throw TransportError("peer closed the connection");
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) throw TransportError("timed out");
      throw TransportError(std::string("recv failed: ") + std::strerror(errno));
    }
    buffer_.append(chunk, static_cast<size_t>(n));
  }
  return payload;
}

sidecar::EmbedResponse SidecarEncoder::Request(std::string_view text) {
  if (fd_ < 0) throw TransportError("not connected");
  std::string id = "r" + std::to_string(next_id_++);
  SendAll(sidecar::EncodeFrame(sidecar::EmbedRequest(id, text)));
  sidecar::EmbedResponse r = sidecar::ParseResponse(ReadFrame(), handshake_.dim);
  if (r.request_id != id) {
    throw TransportError("response for " + r.request_id + " while waiting for " + id);
  }
  return r;
}

std::vector<double> SidecarEncoder::Encode(std::string_view text) {
  return Request(text).vector;
}

}  // namespace citeprint
