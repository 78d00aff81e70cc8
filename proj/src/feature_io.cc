// src/feature_io.cc

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

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>

#include "cepstra/binary_io.h"
#include "cepstra/features.h"

namespace cepstra {

namespace {
constexpr char kFeatureMagic[4] = {'C', 'B', 'F', 'M'};
constexpr std::uint16_t kFeatureVersion = 1;
}  // namespace

void WriteFeatureFile(const FeatureMatrix &features, const std::filesystem::path &path) {
  ByteWriter w;
  w.Bytes(kFeatureMagic, 4);
  w.U16(kFeatureVersion);
  w.U8(static_cast<std::uint8_t>(features.kind()));
  w.U32(static_cast<std::uint32_t>(features.dim()));
  w.U32(static_cast<std::uint32_t>(features.num_frames()));
  w.F32(static_cast<float>(features.frame_rate()));
  for (double v : features.values().data()) w.F32(static_cast<float>(v));
  w.WriteTo(path);
}

FeatureMatrix ReadFeatureFile(const std::filesystem::path &path) {
  ByteReader r(path);
  char magic[4];
  r.Bytes(magic, 4);
  Require(std::memcmp(magic, kFeatureMagic, 4) == 0, ErrorCode::kFormat,
          path.string() + " is not a feature file");
  const std::uint16_t version = r.U16();
  Require(version == kFeatureVersion, ErrorCode::kFormat,
          "unsupported feature file version " + std::to_string(version));
  const std::uint8_t tag = r.U8();
  Require(tag <= static_cast<std::uint8_t>(FeatureKind::kCombo), ErrorCode::kFormat,
          "unknown feature label tag " + std::to_string(tag));
  const std::uint32_t dim = r.U32();
  const std::uint32_t n_frames = r.U32();
  const float rate = r.F32();
  Matrix values(n_frames, dim);
  for (double &v : values.data()) v = r.F32();
  r.ExpectEnd();
  return FeatureMatrix(std::move(values), static_cast<FeatureKind>(tag), rate);
}

void WriteFeatureCsv(const FeatureMatrix &features, const std::filesystem::path &path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  Require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  for (std::size_t c = 0; c < features.dim(); ++c) out << (c ? "," : "") << 'c' << c;
  out << '\n' << std::setprecision(9);
  for (std::size_t t = 0; t < features.num_frames(); ++t) {
    const auto row = features.values().row(t);
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  }
  Require(out.good(), ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace cepstra
