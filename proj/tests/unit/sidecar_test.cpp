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

#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cstring>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "citeprint/error.hpp"
#include "citeprint/sidecar.hpp"
#include "citeprint/text.hpp"
#include "doctest.h"
#include "json.hpp"

namespace citeprint {
namespace {

using nlohmann::json;

constexpr int kDim = 768;
constexpr int kMaxTokens = 512;

// In-process stand-in for the embedding service. It records every text it
// receives and answers with a vector derived from the text bytes.
class MockPeer {
 public:
  explicit MockPeer(int fd) : fd_(fd), thread_([this] { Run(); }) {}
  ~MockPeer() {
    thread_.join();
    ::close(fd_);
  }

  std::vector<std::string> received() {
    std::lock_guard<std::mutex> lock(mu_);
    return received_;
  }

 private:
  void Send(const json &j) {
    std::string frame = sidecar::EncodeFrame(j.dump());
    size_t off = 0;
    while (off < frame.size()) {
      ssize_t n = ::send(fd_, frame.data() + off, frame.size() - off, MSG_NOSIGNAL);
      if (n <= 0) return;
      off += static_cast<size_t>(n);
    }
  }

  bool Read(std::string *payload) {
    char chunk[4096];
    while (!sidecar::DecodeFrame(buffer_, payload)) {
      ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
      if (n <= 0) return false;
      buffer_.append(chunk, static_cast<size_t>(n));
    }
    return true;
  }

  void Run() {
    Send({{"type", "handshake"}, {"protocol", 1}, {"model", "mock-minilm"}, {"dim", kDim},
          {"pooling", "mean"}, {"max_tokens", kMaxTokens}});
    std::string payload;
    while (Read(&payload)) {
      std::string id, text;
      sidecar::ParseEmbedRequest(payload, &id, &text);
      {
        std::lock_guard<std::mutex> lock(mu_);
        received_.push_back(text);
      }
      if (text == "CLOSE") return;
      if (text == "ERROR") {
        Send({{"type", "error"}, {"request_id", id}, {"message", "model failed"}});
        continue;
      }
      int dim = text == "WRONGDIM" ? kDim - 1 : kDim;
      std::vector<double> v(dim, 0.0);
      uint64_t h = Fnv1a64(text);
      for (int i = 0; i < dim; ++i) {
        h = SplitMix64(h);
        v[i] = static_cast<double>(h >> 11) / 9007199254740992.0 - 0.5;
      }
      bool truncated = static_cast<int>(SplitWhitespace(text).size()) > kMaxTokens;
      Send({{"type", "embedding"}, {"request_id", id}, {"vector", v}, {"truncated", truncated}});
    }
  }

  int fd_;
  std::string buffer_;
  std::mutex mu_;
  std::vector<std::string> received_;
  std::thread thread_;
};

struct Pair {
  int client = -1;
  int server = -1;
};

Pair SocketPair() {
  int fds[2];
  REQUIRE(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) == 0);
  return {fds[0], fds[1]};
}

std::string RandomUnicode(std::mt19937_64 &rng) {
  std::string s;
  int n = static_cast<int>(rng() % 40);
  for (int i = 0; i < n; ++i) {
    char32_t cp;
    switch (rng() % 5) {
      case 0: cp = 0x20 + rng() % 0x5F; break;
      case 1: cp = 0x80 + rng() % 0x780; break;
      case 2: cp = 0x800 + rng() % 0xD000; break;   // below the surrogates
      case 3: cp = 0xE000 + rng() % 0x1FFE; break;
      default: cp = 0x10000 + rng() % 0xFFFFF; break;
    }
    if (cp >= 0xD800 && cp <= 0xDFFF) cp = 0x263A;
    AppendUtf8(s, cp);
  }
  if (s == "CLOSE" || s == "ERROR" || s == "WRONGDIM") s += "!";
  return s;
}

ErrorKind KindOf(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.kind();
  }
  return ErrorKind::kInternal;
}

TEST_SUITE("sidecar") {

TEST_CASE("frames are length-prefixed big-endian") {
  std::string f = sidecar::EncodeFrame("abc");
  REQUIRE(f.size() == 7);
  CHECK(f.substr(0, 4) == std::string("\0\0\0\x03", 4));
  std::string big = sidecar::EncodeFrame(std::string(0x01020304 & 0xFFFF, 'x'));
  CHECK(static_cast<unsigned char>(big[2]) == 0x03);
  CHECK(static_cast<unsigned char>(big[3]) == 0x04);

  std::string buffer = f.substr(0, 2);
  std::string payload;
  CHECK_FALSE(sidecar::DecodeFrame(buffer, &payload));
  buffer += f.substr(2) + sidecar::EncodeFrame("");
  CHECK(sidecar::DecodeFrame(buffer, &payload));
  CHECK(payload == "abc");
  CHECK(sidecar::DecodeFrame(buffer, &payload));
  CHECK(payload.empty());
  CHECK(buffer.empty());

  std::string oversized("\xFF\xFF\xFF\xFF", 4);
  CHECK(KindOf([&] { sidecar::DecodeFrame(oversized, &payload); }) ==
        ErrorKind::kSidecarTransport);
}

TEST_CASE("records") {
  std::string id, text;
  sidecar::ParseEmbedRequest(sidecar::EmbedRequest("r7", "h\xC3\xA9llo"), &id, &text);
  CHECK(id == "r7");
  CHECK(text == "h\xC3\xA9llo");
  CHECK(KindOf([] { sidecar::EmbedRequest("r", "\xFF\xFE"); }) == ErrorKind::kData);
  CHECK(KindOf([] { sidecar::ParseHandshake("not json"); }) == ErrorKind::kSidecarTransport);
  CHECK(KindOf([] {
          sidecar::ParseHandshake(
              R"({"type":"handshake","protocol":2,"model":"m","dim":4,"pooling":"mean"})");
        }) == ErrorKind::kSidecarTransport);
  CHECK(KindOf([] {
          sidecar::ParseResponse(R"({"type":"error","request_id":"r1","message":"oom"})", 4);
        }) == ErrorKind::kSidecarEncoder);
  CHECK(KindOf([] {
          sidecar::ParseResponse(
              R"({"type":"embedding","request_id":"r1","vector":[1,2],"truncated":false})", 4);
        }) == ErrorKind::kSidecarTransport);
}

TEST_CASE("handshake, determinism and truncation against a mock peer") {
  Pair p = SocketPair();
  MockPeer peer(p.server);
  {
    SidecarEncoder enc = SidecarEncoder::FromFd(p.client, 5000);
    CHECK(enc.handshake().dim == kDim);
    CHECK(enc.dim() == kDim);
    CHECK(enc.handshake().protocol == sidecar::kProtocolVersion);
    CHECK(enc.id() == "sidecar-mock-minilm-mean-d768");

    auto a = enc.Encode("the same text");
    auto b = enc.Encode("the same text");
    REQUIRE(a.size() == static_cast<size_t>(kDim));
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
    CHECK(enc.Encode("other text") != a);

    std::string long_text;
    for (int i = 0; i < 1000; ++i) long_text += "word ";
    CHECK(enc.Request(long_text).truncated);
    CHECK_FALSE(enc.Request("short").truncated);

    CHECK(KindOf([&] { enc.Encode("ERROR"); }) == ErrorKind::kSidecarEncoder);
    CHECK(enc.Encode("still usable").size() == static_cast<size_t>(kDim));
    CHECK(KindOf([&] { enc.Encode("WRONGDIM"); }) == ErrorKind::kSidecarTransport);
    CHECK(KindOf([&] { enc.Encode("CLOSE"); }) == ErrorKind::kSidecarTransport);
  }
}

TEST_CASE("random Unicode round-trips losslessly") {
  Pair p = SocketPair();
  std::vector<std::string> sent;
  {
    MockPeer peer(p.server);
    {
      SidecarEncoder enc = SidecarEncoder::FromFd(p.client, 5000);
      std::mt19937_64 rng(99);
      for (int i = 0; i < 300; ++i) {
        sent.push_back(RandomUnicode(rng));
        enc.Encode(sent.back());
      }
    }
    // Closing the client ends the peer loop.
    auto got = peer.received();
    REQUIRE(got.size() == sent.size());
    for (size_t i = 0; i < sent.size(); ++i) CHECK(got[i] == sent[i]);
  }
}

TEST_CASE("unix endpoint") {
  std::string path = "/tmp/citeprint-sidecar-test-" + std::to_string(::getpid()) + ".sock";
  ::unlink(path.c_str());
  int listener = ::socket(AF_UNIX, SOCK_STREAM, 0);
  REQUIRE(listener >= 0);
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  std::strncpy(addr.sun_path, path.c_str(), sizeof(addr.sun_path) - 1);
  REQUIRE(::bind(listener, reinterpret_cast<sockaddr *>(&addr), sizeof(addr)) == 0);
  REQUIRE(::listen(listener, 1) == 0);
  std::unique_ptr<MockPeer> peer;
  std::thread acceptor([&] { peer = std::make_unique<MockPeer>(::accept(listener, nullptr, nullptr)); });
  {
    SidecarEncoder enc("unix:" + path, 5000, 1);
    acceptor.join();
    CHECK(enc.dim() == kDim);
    CHECK(enc.Encode("hello").size() == static_cast<size_t>(kDim));
  }
  peer.reset();
  ::close(listener);
  ::unlink(path.c_str());

  CHECK(KindOf([&] { SidecarEncoder("unix:" + path, 200, 1); }) ==
        ErrorKind::kSidecarTransport);
  CHECK(KindOf([] { SidecarEncoder("http://x", 200, 1); }) == ErrorKind::kUsage);
}

}  // TEST_SUITE

}  // namespace
}  // namespace citeprint
