// src/common.cc

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

#include "cepstra/common.h"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <string>

namespace cepstra {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kUnsupportedCodec: return "unsupported-codec";
    case ErrorCode::kTruncatedHeader: return "truncated-header";
    case ErrorCode::kNoSamples: return "no-samples";
    case ErrorCode::kOutOfRange: return "out-of-range";
    case ErrorCode::kSilentSignal: return "silent-signal";
    case ErrorCode::kRateMismatch: return "rate-mismatch";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kUnstableFilter: return "unstable-filter";
    case ErrorCode::kRootFinding: return "root-finding";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kFormat: return "format";
  }
  return "unknown";
}

void Fail(ErrorCode code, const std::string &message) {
  throw Error(code, message);
}

std::uint64_t MixBits(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t HashString(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t DeriveSeed(std::uint64_t seed,
                         std::initializer_list<std::string_view> labels) {
  std::uint64_t h = MixBits(seed);
  for (std::string_view label : labels) h = MixBits(h ^ HashString(label));
  return h;
}

void InitLogging() {
  auto logger = spdlog::get("cepstra");
  if (!logger) {
    logger = spdlog::stderr_color_mt("cepstra");
    logger->set_pattern("%^%l%$: %v");
  }
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char *env = std::getenv("CEPSTRA_LOG")) {
    const std::string v = env;
    if (v == "error") spdlog::set_level(spdlog::level::err);
    else if (v == "warn") spdlog::set_level(spdlog::level::warn);
    else if (v == "info") spdlog::set_level(spdlog::level::info);
    else if (v == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::warn("CEPSTRA_LOG={} not recognized; use error, warn, info or debug", v);
  }
}

}  // namespace cepstra
