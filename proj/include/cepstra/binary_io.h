// include/cepstra/binary_io.h

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

// Little-endian helpers for the feature and model file formats.

#ifndef CEPSTRA_BINARY_IO_H_
#define CEPSTRA_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "cepstra/common.h"

namespace cepstra {

class ByteWriter {
 public:
  void Bytes(const void *p, std::size_t n) {
    const auto *c = static_cast<const char *>(p);
    buf_.append(c, n);
  }
  void U8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void U16(std::uint16_t v) { Le(v); }
  void U32(std::uint32_t v) { Le(v); }
  void F32(float v) { Le(std::bit_cast<std::uint32_t>(v)); }
  void F64(double v) { Le(std::bit_cast<std::uint64_t>(v)); }

  void WriteTo(const std::filesystem::path &path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    Require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
    out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    Require(out.good(), ErrorCode::kIo, "write failed for " + path.string());
  }

 private:
  template <typename T>
  void Le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
      buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::filesystem::path &path) : path_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    Require(in.good(), ErrorCode::kIo, "cannot open " + path_);
    buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  void Bytes(void *p, std::size_t n) {
    Need(n);
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::uint8_t U8() { return static_cast<std::uint8_t>(Le<std::uint8_t>()); }
  std::uint16_t U16() { return Le<std::uint16_t>(); }
  std::uint32_t U32() { return Le<std::uint32_t>(); }
  float F32() { return std::bit_cast<float>(Le<std::uint32_t>()); }
  double F64() { return std::bit_cast<double>(Le<std::uint64_t>()); }

  void ExpectEnd() const {
    Require(pos_ == buf_.size(), ErrorCode::kFormat,
            "trailing bytes after payload in " + path_);
  }

 private:
  void Need(std::size_t n) const {
    Require(pos_ + n <= buf_.size(), ErrorCode::kTruncatedHeader,
            "unexpected end of file in " + path_);
  }
  template <typename T>
  T Le() {
    Need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<T>(static_cast<T>(static_cast<unsigned char>(buf_[pos_ + i]))
                          << (8 * i));
    pos_ += sizeof(T);
    return v;
  }
  std::string path_;
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

}  // namespace cepstra

#endif  // CEPSTRA_BINARY_IO_H_
