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

#ifndef CITEPRINT_ERROR_HPP_
#define CITEPRINT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace citeprint {

// Failure classes. The numeric values double as CLI exit codes.
enum class ErrorKind {
  kUsage = 1,
  kData = 2,
  kNumeric = 3,
  kIo = 4,
  kSidecarTransport = 5,
  kSidecarEncoder = 6,
  kInternal = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// A manuscript that could not be segmented or parsed with full confidence.
// The pipeline drops the manuscript and records `stage`.
class FailFast : public Error {
 public:
  FailFast(std::string stage, const std::string &reason)
      : Error(ErrorKind::kData, stage + ": " + reason),
        stage_(std::move(stage)),
        reason_(reason) {}

  const std::string &stage() const { return stage_; }
  const std::string &reason() const { return reason_; }

 private:
  std::string stage_;
  std::string reason_;
};

inline Error UsageError(const std::string &m) { return Error(ErrorKind::kUsage, m); }
inline Error DataError(const std::string &m) { return Error(ErrorKind::kData, m); }
inline Error NumericError(const std::string &m) { return Error(ErrorKind::kNumeric, m); }
inline Error IoError(const std::string &m) { return Error(ErrorKind::kIo, m); }

}  // namespace citeprint

#endif  // CITEPRINT_ERROR_HPP_
