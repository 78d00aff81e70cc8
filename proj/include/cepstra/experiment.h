// include/cepstra/experiment.h

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

#ifndef CEPSTRA_EXPERIMENT_H_
#define CEPSTRA_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cepstra/audio.h"
#include "cepstra/features.h"
#include "cepstra/gmm.h"
#include "cepstra/noise.h"

namespace cepstra {

using SpeakerModels = std::map<std::string, GmmModel>;

// Enrollment and identification ---------------------------------------------

/// Trains one GMM per speaker on the concatenation of that speaker's feature
/// matrices. The EM seed of each speaker is derived from `seed`, the feature
/// name and the speaker id.
SpeakerModels EnrollFeatures(const std::map<std::string, std::vector<FeatureMatrix>> &by_speaker,
                             const std::string &feature_name, const EmOptions &options,
                             std::uint64_t seed, int jobs = 1);

/// Extracts `spec` features from every utterance and enrolls each speaker.
SpeakerModels Enroll(const Corpus &train, const FeatureSpec &spec, const FeatureConfig &cfg,
                     const EmOptions &options, std::uint64_t seed, int jobs = 1);

struct Identification {
  std::string speaker;
  double score = 0.0;   // best average log-likelihood
  double margin = 0.0;  // best minus second best, >= 0
};

/// Closed-set decision: the speaker whose model gives the highest average
/// log-likelihood. Ties go to the lexicographically smallest id. Requires at
/// least two models.
Identification Identify(const SpeakerModels &models, const Matrix &features);

struct Decision {
  std::string truth;
  std::string predicted;
  double margin = 0.0;
};

/// 100 * correct / total.
double IdentificationRate(const std::vector<Decision> &decisions);

// Configuration -------------------------------------------------------------

enum class TrialMode { kConcatenated, kPerUtterance };

struct NoiseSource {
  std::string name;
  std::string source;  // "synth:white", "synth:pink", "synth:babble" or a WAV path
};

/// Experiment description, read from an INI-style file:
///
///   [corpus]   source = synth | <dir>; speakers, utterances, seconds
///   [split]    train = <n first utterances per speaker>; trials = concatenated | per-utterance
///   [features] list = mfcc, gfcc, ...
///   [noise]    <name> = synth:white | synth:pink | synth:babble | <path.wav>; seconds
///   [snr]      levels = -6, 0, 6, 12, 18
///   [gmm]      mixtures, max_iter, tol, var_floor
///   [run]      seed, output
struct ExperimentConfig {
  std::string corpus_source = "synth";
  CorpusSpec synth;
  int train_count = 2;
  TrialMode trials = TrialMode::kConcatenated;
  std::vector<std::string> features;
  std::vector<NoiseSource> noises;
  double noise_seconds = 20.0;
  SnrGrid snr = SnrGrid::Default();
  EmOptions em;
  FeatureConfig feature_config;
  std::optional<std::uint64_t> seed;
  std::string output_dir = "cepstra-out";

  ExperimentConfig();

  /// Relative paths in the file are resolved against `base_dir`.
  static ExperimentConfig Parse(const std::string &text,
                                const std::filesystem::path &base_dir = {});
  static ExperimentConfig Load(const std::filesystem::path &path);

  /// Resolved configuration in the same file format (written as config.lock).
  std::string ToText() const;
  void Validate() const;
};

/// Loads `<dir>/<speaker>/<utterance>.wav`, resampled to `sample_rate`, in
/// sorted order.
Corpus LoadCorpusDir(const std::filesystem::path &dir, int sample_rate);

struct CorpusSplit {
  Corpus train;
  Corpus test;  // one trial per entry
};

/// First `train_count` utterances of each speaker (sorted by id) for
/// training, the rest for testing. In concatenated mode each speaker's test
/// utterances are joined into a single trial named "test".
CorpusSplit SplitCorpus(const Corpus &corpus, int train_count, TrialMode mode);

// Evaluation ----------------------------------------------------------------

struct EvalCell {
  std::string noise;  // "clean" for the uncorrupted condition
  std::optional<double> snr_db;
  std::string feature;
  std::size_t trials = 0;
  std::size_t correct = 0;
  double ir = 0.0;
  std::vector<Decision> decisions;
};

struct EvalReport {
  std::vector<std::string> features;       // column order
  std::vector<Condition> conditions;       // row order, clean first
  std::vector<EvalCell> cells;             // row-major over (condition, feature)
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string timestamp;

  const EvalCell &at(const Condition &condition, const std::string &feature) const;
};

/// Runs the whole noise x SNR x feature grid: enroll every feature stream on
/// clean training data, corrupt the test trials, identify and score. The
/// result does not depend on `jobs`.
EvalReport RunGrid(const ExperimentConfig &config, int jobs = 1);

enum class ReportFormat { kCsv, kMarkdown };

/// Rows are (noise, snr) with the clean row first, columns are features, and
/// values are identification rates with two decimals. Markdown bolds the row
/// maximum.
std::string RenderReport(const EvalReport &report, ReportFormat format);

/// Long-format cell table (noise, snr_db, feature, trials, correct, ir).
std::string RenderCells(const EvalReport &report);
EvalReport ParseCells(const std::string &text);

/// Writes report.csv, report.md, cells.csv, config.lock, run_info.txt and
/// decisions/<noise>_<snr>_<feature>.csv under `dir`.
void WriteRunOutputs(const EvalReport &report, const ExperimentConfig &config,
                     const std::filesystem::path &dir);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Exceptions are
/// rethrown (the one from the lowest index wins).
void ParallelFor(std::size_t n, int jobs, const std::function<void(std::size_t)> &fn);

}  // namespace cepstra

#endif  // CEPSTRA_EXPERIMENT_H_
