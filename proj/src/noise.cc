// src/noise.cc

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

#include "cepstra/noise.h"

#include <cmath>
#include <random>
#include <sstream>

namespace cepstra {

void NoiseInventory::Add(const std::string &name, const AudioBuffer &noise,
                         int speech_rate) {
  Require(!name.empty() && name != kCleanCondition, ErrorCode::kInvalidArgument,
          "noise name must be nonempty and not 'clean'");
  Require(!entries_.contains(name), ErrorCode::kInvalidArgument,
          "duplicate noise name '" + name + "'");
  AudioBuffer resampled = Resample(noise, speech_rate);
  Require(resampled.size() >= static_cast<std::size_t>(speech_rate),
          ErrorCode::kInvalidArgument,
          "noise '" + name + "' is shorter than one second");
  entries_.emplace(name, std::move(resampled));
  order_.push_back(name);
}

const AudioBuffer &NoiseInventory::at(const std::string &name) const {
  auto it = entries_.find(name);
  Require(it != entries_.end(), ErrorCode::kInvalidArgument,
          "unknown noise '" + name + "'");
  return it->second;
}

SnrGrid::SnrGrid(std::vector<double> levels) : levels_(std::move(levels)) {
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    Require(std::isfinite(levels_[i]), ErrorCode::kInvalidArgument,
            "SNR levels must be finite");
    if (i > 0)
      Require(levels_[i] > levels_[i - 1], ErrorCode::kInvalidArgument,
              "SNR levels must be strictly increasing");
  }
}

SnrGrid SnrGrid::Default() { return SnrGrid({-6, 0, 6, 12, 18}); }

std::optional<double> MeasurePowerDb(std::span<const double> samples) {
  Require(!samples.empty(), ErrorCode::kNoSamples, "cannot measure an empty buffer");
  double sum = 0.0;
  for (double x : samples) sum += x * x;
  if (sum == 0.0) return std::nullopt;
  return 10.0 * std::log10(sum / static_cast<double>(samples.size()));
}

std::optional<double> MeasurePowerDb(const AudioBuffer &buffer) {
  return MeasurePowerDb(buffer.samples());
}

double NoiseGainForSnr(double speech_db, double noise_db, double snr_db) {
  return std::pow(10.0, (speech_db - noise_db - snr_db) / 20.0);
}

Mixture MixAtSnr(const AudioBuffer &speech, const AudioBuffer &noise,
                 double snr_db, std::uint64_t seed) {
  Require(speech.sample_rate() == noise.sample_rate(), ErrorCode::kRateMismatch,
          "speech at " + std::to_string(speech.sample_rate()) + " Hz, noise at " +
              std::to_string(noise.sample_rate()) + " Hz");
  Require(!noise.empty(), ErrorCode::kNoSamples, "empty noise buffer");
  const auto s = speech.samples();
  const auto v = noise.samples();
  const auto speech_db = MeasurePowerDb(s);
  Require(speech_db.has_value(), ErrorCode::kSilentSignal, "speech is silent");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
  const std::size_t offset = pick(rng);
  std::vector<double> segment(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) segment[i] = v[(offset + i) % v.size()];
  const auto noise_db = MeasurePowerDb(segment);
  Require(noise_db.has_value(), ErrorCode::kSilentSignal,
          "noise segment at offset " + std::to_string(offset) + " is silent");

  const double gain = NoiseGainForSnr(*speech_db, *noise_db, snr_db);
  std::vector<double> mixed(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    segment[i] *= gain;
    mixed[i] = s[i] + segment[i];
  }
  const double achieved = *speech_db - *MeasurePowerDb(segment);
  return {AudioBuffer(std::move(mixed), speech.sample_rate()), gain, offset, achieved};
}

std::string Condition::Label() const {
  if (clean()) return std::string(kCleanCondition);
  std::ostringstream os;
  os << noise << '_' << *snr_db << "dB";
  return os.str();
}

std::uint64_t UtteranceSeed(std::uint64_t seed, const std::string &speaker,
                            const std::string &utterance) {
  return DeriveSeed(seed, {speaker, utterance});
}

std::map<Condition, Corpus> CorruptCorpus(const Corpus &corpus,
                                          const NoiseInventory &inventory,
                                          const SnrGrid &grid,
                                          std::uint64_t seed) {
  std::map<Condition, Corpus> out;
  out.emplace(Condition{std::string(kCleanCondition), std::nullopt}, corpus);
  for (const auto &name : inventory.names()) {
    const AudioBuffer &noise = inventory.at(name);
    for (double snr : grid.levels()) {
      Corpus corrupted;
      corrupted.reserve(corpus.size());
      for (const auto &utt : corpus) {
        try {
          Mixture mix = MixAtSnr(utt.audio, noise, snr,
                                 UtteranceSeed(seed, utt.speaker, utt.utterance));
          corrupted.push_back({utt.speaker, utt.utterance, std::move(mix.audio)});
        } catch (const Error &e) {
          Fail(e.code(), "mixing " + utt.speaker + "/" + utt.utterance + " with " +
                             name + " at " + std::to_string(snr) + " dB: " + e.what());
        }
      }
      out.emplace(Condition{name, snr}, std::move(corrupted));
    }
  }
  return out;
}

AudioBuffer SynthWhiteNoise(double seconds, int sample_rate, std::uint64_t seed,
                            double rms) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, rms);
  std::vector<double> x(static_cast<std::size_t>(std::llround(seconds * sample_rate)));
  for (double &v : x) v = gauss(rng);
  return AudioBuffer(std::move(x), sample_rate);
}

AudioBuffer SynthPinkNoise(double seconds, int sample_rate, std::uint64_t seed,
                           double rms) {
  const AudioBuffer white = SynthWhiteNoise(seconds, sample_rate, seed, 1.0);
  std::vector<double> x(white.samples().begin(), white.samples().end());
  // Kellet's economy filter: three one-pole sections give about -3 dB/octave
  // over the audio band.
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  for (double &v : x) {
    b0 = 0.99765 * b0 + v * 0.0990460;
    b1 = 0.96300 * b1 + v * 0.2965164;
    b2 = 0.57000 * b2 + v * 1.0526913;
    v = b0 + b1 + b2 + v * 0.1848;
  }
  double power = 0.0;
  for (double v : x) power += v * v;
  const double scale = rms / std::sqrt(power / static_cast<double>(x.size()));
  for (double &v : x) v *= scale;
  return AudioBuffer(std::move(x), sample_rate);
}

AudioBuffer SynthBabble(double seconds, int sample_rate, std::uint64_t seed,
                        int talkers, double rms) {
  Require(talkers >= 2, ErrorCode::kInvalidArgument, "babble needs at least two talkers");
  // One long "utterance" per talker, each from its own voice.
  CorpusSpec spec;
  spec.num_speakers = talkers;
  spec.utterances_per_speaker = 1;
  spec.utterance_seconds = seconds;
  spec.sample_rate = sample_rate;
  const Corpus voices = SynthCorpus(spec, DeriveSeed(seed, {"babble"}));
  std::vector<double> sum(voices.front().audio.size(), 0.0);
  for (const auto &v : voices) {
    const auto s = v.audio.samples();
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += s[i];
  }
  const auto db = MeasurePowerDb(sum);
  const double scale = rms / std::pow(10.0, *db / 20.0);
  for (double &v : sum) v *= scale;
  return AudioBuffer(std::move(sum), sample_rate);
}

}  // namespace cepstra
