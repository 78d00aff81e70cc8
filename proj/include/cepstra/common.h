// include/cepstra/common.h

// Copyright 2026  The Cepstra Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef CEPSTRA_COMMON_H_
#define CEPSTRA_COMMON_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cepstra {

/// Categories of failure. Every exception thrown by the library carries one,
/// so callers (and the CLI) can tell a bad file from a bad argument.
enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kUnsupportedCodec,
  kTruncatedHeader,
  kNoSamples,
  kOutOfRange,
  kSilentSignal,
  kRateMismatch,
  kDimensionMismatch,
  kUnstableFilter,
  kRootFinding,
  kInsufficientData,
  kNonFinite,
  kFormat,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string &message);

inline void Require(bool condition, ErrorCode code, const std::string &message) {
  if (!condition) Fail(code, message);
}

/// Dense row-major matrix of doubles. Rows are frames, columns are
/// coefficients/bins/channels throughout the code base.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const Matrix &other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Mixes a 64-bit state (splitmix64 finalizer).
std::uint64_t MixBits(std::uint64_t x);

/// Routes library logging to stderr at level warn, or at the level named by
/// CEPSTRA_LOG (error, warn, info, debug). Safe to call more than once.
void InitLogging();

/// Stable 64-bit FNV-1a hash of a byte string.
std::uint64_t HashString(std::string_view s);

/// Derives a child seed from a parent seed and a list of labels. The result
/// depends only on the values, never on call order, so work units can be
/// scheduled in any order.
std::uint64_t DeriveSeed(std::uint64_t seed,
                         std::initializer_list<std::string_view> labels);

}  // namespace cepstra

#endif  // CEPSTRA_COMMON_H_
