// tests/unit/common_test.cc


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

#include <gtest/gtest.h>

#include <set>

#include "cepstra/common.h"
#include "cepstra/text.h"

namespace cepstra {
namespace {

TEST(MatrixTest, RowMajorAccess) {
  Matrix m(2, 3, 1.5);
  m(1, 2) = 4.0;
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m.data()[5], 4.0);
  EXPECT_EQ(m.row(1)[2], 4.0);
  EXPECT_EQ(m.row(0)[0], 1.5);
}

TEST(ErrorTest, CarriesCode) {
  try {
    Fail(ErrorCode::kRootFinding, "frame 3");
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kRootFinding);
    EXPECT_STREQ(e.what(), "frame 3");
  }
  EXPECT_NO_THROW(Require(true, ErrorCode::kIo, "unused"));
  EXPECT_FALSE(ErrorCodeName(ErrorCode::kSilentSignal).empty());
}

TEST(SeedTest, DeriveIsStableAndLabelSensitive) {
  const auto a = DeriveSeed(42, {"spk01", "u0"});
  EXPECT_EQ(a, DeriveSeed(42, {"spk01", "u0"}));
  EXPECT_NE(a, DeriveSeed(42, {"spk01", "u1"}));
  EXPECT_NE(a, DeriveSeed(43, {"spk01", "u0"}));
  // Label boundaries matter: ("ab", "c") differs from ("a", "bc").
  EXPECT_NE(DeriveSeed(1, {"ab", "c"}), DeriveSeed(1, {"a", "bc"}));
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(DeriveSeed(7, {std::to_string(i)}));
  EXPECT_EQ(seen.size(), 1000u);
}

// FNV-1a 64-bit reference values.
TEST(SeedTest, HashStringIsFnv1a) {
  EXPECT_EQ(HashString(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(HashString("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(TextTest, SplitTrimJoin) {
  EXPECT_EQ(SplitList(" a, b ,,c "), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(SplitFields("a,,b"), (std::vector<std::string>{"a", "", "b"}));
  EXPECT_EQ(JoinList({"x", "y"}), "x, y");
  EXPECT_EQ(Trim("\t q \n"), "q");
}

TEST(TextTest, NumbersParseStrictly) {
  EXPECT_EQ(ParseInt(" 12 ", "n"), 12);
  EXPECT_DOUBLE_EQ(ParseDouble("-6", "snr"), -6.0);
  EXPECT_DOUBLE_EQ(ParseDouble("+1e-5", "tol"), 1e-5);
  EXPECT_THROW(ParseDouble("6dB", "snr"), Error);
  EXPECT_THROW(ParseInt("1.5", "n"), Error);
  EXPECT_THROW(ParseUint64("", "seed"), Error);
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(FormatDouble(-6.0), "-6");
  EXPECT_EQ(FormatFixed(4.8333, 2), "4.83");
  EXPECT_EQ(FormatFixed(100.0, 2), "100.00");
}

}  // namespace
}  // namespace cepstra
