// Copyright 2026 The Curate Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CURATE_ERRORS_H_
#define CURATE_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace curate {

// Caller passed arguments outside an operation's documented domain.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Image bytes could not be decoded.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A data file (features, manifest, ratings) is malformed. `row` is the
// zero-based record index, or npos when the problem is not row specific.
class IngestError : public std::runtime_error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  IngestError(const std::string& what, std::size_t row = npos)
      : std::runtime_error(row == npos ? what
                                       : what + " (row " + std::to_string(row) + ")"),
        row_(row) {}

  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// Pipeline orchestration failure: missing upstream stage, digest conflict.
class StageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace curate

#endif  // CURATE_ERRORS_H_
