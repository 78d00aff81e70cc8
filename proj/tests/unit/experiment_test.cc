// tests/unit/experiment_test.cc


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

#include <atomic>
#include <fstream>
#include <random>
#include <sstream>

#include "cepstra/experiment.h"
#include "test_support.h"

namespace cepstra {
namespace {

GmmModel Spherical(double center, std::size_t d) {
  return GmmModel({1.0}, Matrix(1, d, center), Matrix(1, d, 1.0));
}

Matrix Frames(double center, std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(center, 1.0);
  Matrix m(n, d);
  for (double &v : m.data()) v = g(rng);
  return m;
}

// Enrollment and identification ---------------------------------------------

TEST(IdentifyTest, PicksGeneratingModel) {
  SpeakerModels models = {{"a", Spherical(0.0, 3)}, {"b", Spherical(4.0, 3)},
                          {"c", Spherical(-4.0, 3)}};
  EXPECT_EQ(Identify(models, Frames(4.0, 50, 3, 1)).speaker, "b");
  EXPECT_EQ(Identify(models, Frames(-4.0, 50, 3, 2)).speaker, "c");
  const auto id = Identify(models, Frames(0.0, 50, 3, 3));
  EXPECT_EQ(id.speaker, "a");
  EXPECT_GT(id.margin, 0.0);
  EXPECT_DOUBLE_EQ(id.score, ScoreUtterance(models.at("a"), Frames(0.0, 50, 3, 3)));
}

TEST(IdentifyTest, TieGoesToSmallestId) {
  SpeakerModels models = {{"spk07", Spherical(1.0, 2)}, {"spk03", Spherical(1.0, 2)},
                          {"spk09", Spherical(-5.0, 2)}};
  const auto id = Identify(models, Frames(1.0, 20, 2, 4));
  EXPECT_EQ(id.speaker, "spk03");
  EXPECT_EQ(id.margin, 0.0);
}

TEST(IdentifyTest, MarginNonNegativeAndErrors) {
  std::mt19937_64 rng(5);
  SpeakerModels models;
  for (int s = 0; s < 5; ++s) models.emplace("s" + std::to_string(s), Spherical(s, 2));
  for (int t = 0; t < 50; ++t) EXPECT_GE(Identify(models, Frames(t % 7 - 1.0, 5, 2, t)).margin, 0.0);
  try {
    Identify(models, Frames(0.0, 5, 3, 1));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
  SpeakerModels single = {{"x", Spherical(0.0, 2)}};
  EXPECT_THROW(Identify(single, Frames(0.0, 5, 2, 1)), Error);
}

TEST(EnrollTest, SingleComponentIsSpeakerStatistics) {
  std::map<std::string, std::vector<FeatureMatrix>> by_speaker;
  Matrix a = Frames(2.0, 60, 13, 6), b = Frames(-1.0, 70, 13, 7);
  by_speaker["only"] = {FeatureMatrix(a, FeatureKind::kMfcc, 100.0),
                        FeatureMatrix(b, FeatureKind::kMfcc, 100.0)};
  EmOptions opt;
  opt.num_components = 1;
  const auto models = EnrollFeatures(by_speaker, "mfcc", opt, 1);
  ASSERT_EQ(models.size(), 1u);
  for (std::size_t i = 0; i < 13; ++i) {
    long double mean = 0.0L;
    for (std::size_t t = 0; t < 60; ++t) mean += a(t, i);
    for (std::size_t t = 0; t < 70; ++t) mean += b(t, i);
    EXPECT_NEAR(models.at("only").means()(0, i), static_cast<double>(mean / 130), 1e-12);
  }
}

TEST(EnrollTest, OneModelPerSpeakerDeterministic) {
  const Corpus corpus = SynthCorpus({4, 1, 1.0, 16000}, 8);
  EmOptions opt;
  opt.num_components = 2;
  const auto spec = FeatureSpec::Parse("mfcc");
  const auto m1 = Enroll(corpus, spec, FeatureConfig(), opt, 9, 1);
  const auto m2 = Enroll(corpus, spec, FeatureConfig(), opt, 9, 3);
  EXPECT_EQ(m1.size(), 4u);
  EXPECT_EQ(m1, m2);
  for (const auto &u : corpus) {
    const auto x = spec.Extract(u.audio, FeatureConfig());
    EXPECT_EQ(Identify(m1, x.values()).speaker, u.speaker);
  }
}

TEST(EnrollTest, TooFewFramesNamesSpeaker) {
  std::map<std::string, std::vector<FeatureMatrix>> by_speaker;
  by_speaker["tiny"] = {FeatureMatrix(Frames(0.0, 20, 13, 1), FeatureKind::kMfcc, 100.0)};
  EmOptions opt;
  opt.num_components = 16;
  try {
    EnrollFeatures(by_speaker, "mfcc", opt, 1);
    FAIL();
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("tiny"), std::string::npos);
  }
}

TEST(RateTest, Values) {
  std::vector<Decision> d(62, Decision{"a", "b", 0.0});
  d[0].predicted = "a";
  EXPECT_NEAR(IdentificationRate(d), 1.6129, 1e-4);
  for (int i = 0; i < 45; ++i) d[i].predicted = "a";
  EXPECT_NEAR(IdentificationRate(d), 72.58, 5e-3);
  for (auto &x : d) x.predicted = "a";
  EXPECT_EQ(IdentificationRate(d), 100.0);
  EXPECT_THROW(IdentificationRate({}), Error);
}

// Configuration -------------------------------------------------------------

TEST(ConfigTest, ParsesAllSections) {
  const auto cfg = ExperimentConfig::Parse(R"(
; comment
[corpus]
source = synth
speakers = 6
utterances = 4
seconds = 1.5
[split]
train = 3
trials = per-utterance
[features]
list = plp, gfcc+pncc
[noise]
seconds = 5
hum = synth:pink
crowd = noises/crowd.wav
[snr]
levels = -3, 12
[gmm]
mixtures = 4
max_iter = 7
tol = 1e-3
var_floor = 1e-3
[run]
seed = 99
output = out
)",
                                           "/base");
  EXPECT_EQ(cfg.synth.num_speakers, 6);
  EXPECT_EQ(cfg.synth.utterances_per_speaker, 4);
  EXPECT_DOUBLE_EQ(cfg.synth.utterance_seconds, 1.5);
  EXPECT_EQ(cfg.train_count, 3);
  EXPECT_EQ(cfg.trials, TrialMode::kPerUtterance);
  EXPECT_EQ(cfg.features, (std::vector<std::string>{"plp", "gfcc+pncc"}));
  ASSERT_EQ(cfg.noises.size(), 2u);
  EXPECT_EQ(cfg.noises[0].name, "hum");
  EXPECT_EQ(cfg.noises[1].source, "/base/noises/crowd.wav");
  EXPECT_DOUBLE_EQ(cfg.noise_seconds, 5.0);
  EXPECT_EQ(cfg.snr.levels(), (std::vector<double>{-3.0, 12.0}));
  EXPECT_EQ(cfg.em.num_components, 4u);
  EXPECT_EQ(cfg.em.max_iter, 7);
  EXPECT_EQ(cfg.seed, 99u);
  EXPECT_EQ(cfg.output_dir, "/base/out");
}

TEST(ConfigTest, DefaultsAndRoundTrip) {
  const auto cfg = ExperimentConfig::Parse("[noise]\nwhite = synth:white\n");
  EXPECT_EQ(cfg.features.size(), 5u);
  EXPECT_EQ(cfg.em.num_components, 16u);
  EXPECT_EQ(cfg.snr.levels(), SnrGrid::Default().levels());
  EXPECT_FALSE(cfg.seed.has_value());
  const auto again = ExperimentConfig::Parse(cfg.ToText());
  EXPECT_EQ(again.ToText(), cfg.ToText());
  const auto bench = ExperimentConfig::Load(std::filesystem::path(CEPSTRA_SOURCE_DIR) /
                                            "configs/benchmark.ini");
  EXPECT_EQ(ExperimentConfig::Parse(bench.ToText()).ToText(), bench.ToText());
}

TEST(ConfigTest, Errors) {
  const char *bad[] = {
      "[corpus]\nspeakers = ten\n",
      "[corpus]\nspeakers = 1\n",
      "[features]\nlist = mfcc, mfcc2\n",
      "[features]\nlist = \n",
      "[bogus]\nx = 1\n",
      "[gmm]\nmixtures = 0\n",
      "[gmm]\nunknown = 1\n",
      "[split]\ntrain = 3\n",  // no utterances left for testing
      "[split]\ntrials = sometimes\n",
      "[noise]\nx = synth:purple\n",
      "[snr]\nlevels = 0, abc\n",
      "[snr]\nlevels = 6, 0\n",
      "[run]\nseed = -1\n",
      "not an ini [",
  };
  for (const char *text : bad) EXPECT_THROW(ExperimentConfig::Parse(text), Error) << text;
  EXPECT_THROW(ExperimentConfig::Load("/nonexistent/config.ini"), Error);
}

// Splitting -------------------------------------------------------------------

Corpus Toy() {
  Corpus c;
  for (const char *spk : {"b", "a"})
    for (const char *utt : {"u2", "u0", "u1"})
      c.push_back({spk, utt, AudioBuffer(std::vector<double>(10, utt[1] - '0'), 16000)});
  return c;
}

TEST(SplitTest, ConcatenatedTrials) {
  const auto split = SplitCorpus(Toy(), 2, TrialMode::kConcatenated);
  ASSERT_EQ(split.train.size(), 4u);
  EXPECT_EQ(split.train[0].speaker, "a");
  EXPECT_EQ(split.train[0].utterance, "u0");
  EXPECT_EQ(split.train[1].utterance, "u1");
  ASSERT_EQ(split.test.size(), 2u);
  EXPECT_EQ(split.test[0].utterance, "test");
  EXPECT_EQ(split.test[0].audio.size(), 10u);
  EXPECT_EQ(split.test[0].audio.samples()[0], 2.0);
  const auto one = SplitCorpus(Toy(), 1, TrialMode::kConcatenated);
  EXPECT_EQ(one.test[1].audio.size(), 20u);
}

TEST(SplitTest, PerUtteranceAndDisjoint) {
  const auto split = SplitCorpus(Toy(), 1, TrialMode::kPerUtterance);
  EXPECT_EQ(split.train.size(), 2u);
  EXPECT_EQ(split.test.size(), 4u);
  for (const auto &t : split.test)
    for (const auto &r : split.train)
      EXPECT_FALSE(t.speaker == r.speaker && t.utterance == r.utterance);
  EXPECT_THROW(SplitCorpus(Toy(), 3, TrialMode::kPerUtterance), Error);
  EXPECT_THROW(SplitCorpus(Toy(), 0, TrialMode::kPerUtterance), Error);
}

TEST(SplitTest, InputOrderDoesNotMatter) {
  auto c = Toy();
  std::mt19937_64 rng(3);
  const auto ref = SplitCorpus(c, 2, TrialMode::kConcatenated);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(c.begin(), c.end(), rng);
    const auto s = SplitCorpus(c, 2, TrialMode::kConcatenated);
    ASSERT_EQ(s.train.size(), ref.train.size());
    for (std::size_t k = 0; k < s.train.size(); ++k) {
      EXPECT_EQ(s.train[k].utterance, ref.train[k].utterance);
      EXPECT_EQ(s.train[k].audio, ref.train[k].audio);
    }
    EXPECT_EQ(s.test[0].audio, ref.test[0].audio);
  }
}

// Reports ---------------------------------------------------------------------

EvalReport HandReport() {
  EvalReport r;
  r.features = {"mfcc", "gfcc"};
  r.conditions = {{"clean", std::nullopt}, {"white", -6.0}, {"white", 0.0}};
  r.seed = 42;
  r.config_hash = "0123456789abcdef";
  const double irs[] = {100.0, 100.0, 1.0 / 62 * 100, 10.0, 72.58064516129032, 72.58064516129031};
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t f = 0; f < 2; ++f) {
      EvalCell cell;
      cell.noise = r.conditions[c].noise;
      cell.snr_db = r.conditions[c].snr_db;
      cell.feature = r.features[f];
      cell.trials = 62;
      cell.ir = irs[c * 2 + f];
      cell.correct = static_cast<std::size_t>(std::lround(cell.ir * 62 / 100));
      r.cells.push_back(cell);
    }
  return r;
}

TEST(ReportTest, CsvLayout) {
  EXPECT_EQ(RenderReport(HandReport(), ReportFormat::kCsv),
            "noise,snr_db,mfcc,gfcc\n"
            "clean,,100.00,100.00\n"
            "white,-6,1.61,10.00\n"
            "white,0,72.58,72.58\n");
}

TEST(ReportTest, MarkdownBoldsRowMaximum) {
  const auto md = RenderReport(HandReport(), ReportFormat::kMarkdown);
  EXPECT_NE(md.find("seed: 42"), std::string::npos);
  EXPECT_NE(md.find("0123456789abcdef"), std::string::npos);
  EXPECT_NE(md.find("| clean | - | **100.00** | **100.00** |"), std::string::npos);
  EXPECT_NE(md.find("| white | -6 | 1.61 | **10.00** |"), std::string::npos);
  // Values that print the same are both bold.
  EXPECT_NE(md.find("| white | 0 | **72.58** | **72.58** |"), std::string::npos);
}

TEST(ReportTest, CellsRoundTrip) {
  const auto r = HandReport();
  const auto text = RenderCells(r);
  const auto back = ParseCells(text);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.config_hash, r.config_hash);
  EXPECT_EQ(back.features, r.features);
  EXPECT_EQ(back.conditions, r.conditions);
  for (std::size_t i = 0; i < r.cells.size(); ++i) EXPECT_EQ(back.cells[i].ir, r.cells[i].ir);
  EXPECT_EQ(RenderCells(back), text);
  EXPECT_EQ(RenderReport(back, ReportFormat::kCsv), RenderReport(r, ReportFormat::kCsv));
  EXPECT_THROW(ParseCells("noise,snr\n"), Error);
  EXPECT_THROW(ParseCells("noise,snr_db,feature,trials,correct,ir\nwhite,,mfcc,1,1,100\n"), Error);
  EXPECT_THROW(ParseCells(text + "white,6,mfcc,62,1,1.6\n"), Error);
}

// Grid ------------------------------------------------------------------------

ExperimentConfig TinyConfig() {
  auto cfg = ExperimentConfig::Parse(R"(
[corpus]
speakers = 4
utterances = 3
seconds = 1
[features]
list = mfcc, gfcc+pncc
[noise]
seconds = 3
white = synth:white
babble = synth:babble
[snr]
levels = -6, 6
[gmm]
mixtures = 2
[run]
seed = 5
)");
  return cfg;
}

TEST(GridTest, ShapeOrderAndDeterminism) {
  const auto cfg = TinyConfig();
  const auto r1 = RunGrid(cfg, 1);
  ASSERT_EQ(r1.conditions.size(), 5u);
  EXPECT_TRUE(r1.conditions[0].clean());
  EXPECT_EQ(r1.conditions[1].Label(), "white_-6dB");
  EXPECT_EQ(r1.conditions[2].Label(), "white_6dB");
  EXPECT_EQ(r1.conditions[3].noise, "babble");
  EXPECT_EQ(r1.cells.size(), 10u);
  for (const auto &c : r1.cells) {
    EXPECT_EQ(c.trials, 4u);
    EXPECT_LE(c.correct, c.trials);
    EXPECT_EQ(c.decisions.size(), 4u);
    EXPECT_GE(c.ir, 0.0);
    EXPECT_LE(c.ir, 100.0);
  }
  EXPECT_EQ(r1.at({"clean", std::nullopt}, "mfcc").ir, 100.0);
  EXPECT_EQ(r1.seed, 5u);
  EXPECT_EQ(r1.config_hash.size(), 16u);

  const auto r2 = RunGrid(cfg, 3);
  EXPECT_EQ(RenderCells(r1), RenderCells(r2));
  for (std::size_t i = 0; i < r1.cells.size(); ++i)
    for (std::size_t k = 0; k < 4; ++k)
      EXPECT_EQ(r1.cells[i].decisions[k].margin, r2.cells[i].decisions[k].margin);
}

TEST(GridTest, CleanOnlyWithoutNoises) {
  auto cfg = TinyConfig();
  cfg.noises.clear();
  const auto r = RunGrid(cfg, 1);
  ASSERT_EQ(r.conditions.size(), 1u);
  EXPECT_EQ(r.cells.size(), 2u);
  EXPECT_EQ(RenderReport(r, ReportFormat::kCsv).substr(0, 24), "noise,snr_db,mfcc,gfcc+p");
}

TEST(GridTest, WritesOutputs) {
  auto cfg = TinyConfig();
  cfg.noises.resize(1);
  cfg.snr = SnrGrid({0.0});
  const auto r = RunGrid(cfg, 1);
  const auto dir = testing::TempDir("run_outputs");
  WriteRunOutputs(r, cfg, dir);
  for (const char *f : {"report.csv", "report.md", "cells.csv", "config.lock", "run_info.txt"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  EXPECT_TRUE(std::filesystem::exists(dir / "decisions" / "white_0_mfcc.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "decisions" / "clean_inf_gfcc+pncc.csv"));
  std::ifstream lock(dir / "config.lock");
  std::stringstream ss;
  ss << lock.rdbuf();
  EXPECT_EQ(ss.str(), cfg.ToText());
}

TEST(ParallelForTest, CoversRangeAndRethrowsLowestIndex) {
  std::vector<std::atomic<int>> hits(100);
  ParallelFor(100, 4, [&](std::size_t i) { hits[i]++; });
  for (auto &h : hits) EXPECT_EQ(h.load(), 1);
  try {
    ParallelFor(50, 3, [](std::size_t i) {
      if (i == 7 || i == 30) Fail(ErrorCode::kInvalidArgument, "boom " + std::to_string(i));
    });
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(std::string(e.what()), "boom 7");
  }
}

}  // namespace
}  // namespace cepstra
