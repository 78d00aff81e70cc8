// include/cepstra/noise.h

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

#ifndef CEPSTRA_NOISE_H_
#define CEPSTRA_NOISE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cepstra/audio.h"

namespace cepstra {

/// Name of the uncorrupted condition in corrupted-corpus maps and reports.
inline constexpr std::string_view kCleanCondition = "clean";

/// Noise recordings by name, all at the speech sample rate.
class NoiseInventory {
 public:
  /// Resamples to `speech_rate` if needed. Entries shorter than one second
  /// are rejected.
  void Add(const std::string &name, const AudioBuffer &noise, int speech_rate);

  const AudioBuffer &at(const std::string &name) const;
  bool empty() const noexcept { return order_.empty(); }
  std::size_t size() const noexcept { return order_.size(); }
  /// Names in insertion order.
  const std::vector<std::string> &names() const noexcept { return order_; }

 private:
  std::map<std::string, AudioBuffer> entries_;
  std::vector<std::string> order_;
};

/// Strictly increasing list of SNR levels in dB.
class SnrGrid {
 public:
  SnrGrid() = default;
  explicit SnrGrid(std::vector<double> levels);
  /// -6, 0, 6, 12, 18 dB.
  static SnrGrid Default();

  const std::vector<double> &levels() const noexcept { return levels_; }
  bool empty() const noexcept { return levels_.empty(); }

 private:
  std::vector<double> levels_;
};

/// 10 log10(mean(x^2)). Returns nullopt for all-zero input; throws
/// kNoSamples for an empty buffer.
std::optional<double> MeasurePowerDb(std::span<const double> samples);
std::optional<double> MeasurePowerDb(const AudioBuffer &buffer);

struct Mixture {
  AudioBuffer audio;   // speech + gain * noise segment; not re-normalized
  double gain = 0.0;   // linear gain applied to the noise segment
  std::size_t offset = 0;  // start of the noise segment (wraps around)
  double achieved_snr_db = 0.0;
};

/// Cuts a speech-length noise segment at a seed-determined offset (wrapping
/// if the noise is shorter) and adds it at the gain that makes the
/// full-utterance RMS SNR equal `snr_db`.
///
/// Errors: kRateMismatch, kSilentSignal (speech or noise segment all zeros).
Mixture MixAtSnr(const AudioBuffer &speech, const AudioBuffer &noise,
                 double snr_db, std::uint64_t seed);

/// Noise gain for the given RMS powers in dB: P_s - (P_n + 20 log10 g) = snr.
double NoiseGainForSnr(double speech_db, double noise_db, double snr_db);

/// Corrupted copy of a corpus under one condition.
struct Condition {
  std::string noise;           // kCleanCondition for the clean copy
  std::optional<double> snr_db;  // nullopt for clean

  bool clean() const { return !snr_db.has_value(); }
  std::string Label() const;  // "clean" or "<noise>_<snr>dB"
  auto operator<=>(const Condition &) const = default;
};

/// Applies MixAtSnr to every utterance for every (noise, snr) pair. The
/// per-utterance seed is DeriveSeed(seed, {speaker, utterance}) so the order
/// in which utterances are processed never affects the output. The clean
/// corpus is kept under the "clean" condition.
std::map<Condition, Corpus> CorruptCorpus(const Corpus &corpus,
                                          const NoiseInventory &inventory,
                                          const SnrGrid &grid,
                                          std::uint64_t seed);

std::uint64_t UtteranceSeed(std::uint64_t seed, const std::string &speaker,
                            const std::string &utterance);

/// Stationary white Gaussian noise at the given RMS level.
AudioBuffer SynthWhiteNoise(double seconds, int sample_rate, std::uint64_t seed,
                            double rms = 0.1);

/// Pink (1/f) noise: white Gaussian noise through a fixed pinking filter,
/// normalized to the given RMS.
AudioBuffer SynthPinkNoise(double seconds, int sample_rate, std::uint64_t seed,
                           double rms = 0.1);

/// Babble: several synthetic talkers (disjoint from any corpus generated with
/// a different seed) summed and normalized to the given RMS.
AudioBuffer SynthBabble(double seconds, int sample_rate, std::uint64_t seed,
                        int talkers = 6, double rms = 0.1);

}  // namespace cepstra

#endif  // CEPSTRA_NOISE_H_
