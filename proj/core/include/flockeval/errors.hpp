/* Copyright 2026 The Flockeval Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef FLOCKEVAL_ERRORS_HPP_
#define FLOCKEVAL_ERRORS_HPP_

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace flockeval {

// Base class of all errors thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Geometry input breaks a precondition (non-finite coordinates, empty box).
class InvalidGeometry : public Error {
 public:
  using Error::Error;
};

// Structurally broken input file. Carries the byte offset (for JSON) or the
// 1-based row/line number (for CSV and NDJSON) when known.
class ParseError : public Error {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  explicit ParseError(const std::string& msg, std::size_t byte_offset = npos,
                      std::size_t row = npos)
      : Error(msg), byte_offset_(byte_offset), row_(row) {}

  std::size_t byte_offset() const { return byte_offset_; }
  std::size_t row() const { return row_; }

 private:
  std::size_t byte_offset_;
  std::size_t row_;
};

// Well-formed input that does not fit the expected schema (unknown column,
// unknown class label, missing field).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Ground-truth sources cannot be joined (duplicate bird id in one frame).
class MergeError : public Error {
 public:
  using Error::Error;
};

class InvalidFoldCount : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class EmptyGroundTruth : public Error {
 public:
  using Error::Error;
};

// Ground truth and predictions share no frame keys at all.
class EmptyIntersection : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace flockeval

#endif  // FLOCKEVAL_ERRORS_HPP_
