// Copyright 2026 The amodal-synth Authors
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace amodal {

enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  empty_mask,
  degenerate_bbox,
  malformed_file,
  io,
  invalid_spec,
  completer_failed,
  config,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by every decoder. `offset` is the byte position in the input at
/// which decoding could not continue.
class MalformedFileError : public Error {
 public:
  MalformedFileError(std::size_t offset, const std::string& what)
      : Error(ErrorCode::malformed_file, what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace amodal
