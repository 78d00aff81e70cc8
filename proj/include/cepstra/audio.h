// include/cepstra/audio.h

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

#ifndef CEPSTRA_AUDIO_H_
#define CEPSTRA_AUDIO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cepstra/common.h"

namespace cepstra {

/// Mono audio. Samples are nominally in [-1, 1]; mixtures may exceed that
/// range until they are written out.
class AudioBuffer {
 public:
  AudioBuffer() = default;
  /// Throws kInvalidArgument if the rate is not positive or a sample is not
  /// finite.
  AudioBuffer(std::vector<double> samples, int sample_rate);

  std::span<const double> samples() const noexcept { return samples_; }
  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double duration_seconds() const {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

  bool operator==(const AudioBuffer &other) const = default;

 private:
  std::vector<double> samples_;
  int sample_rate_ = 1;
};

/// Reads a RIFF/WAVE file holding 16-bit PCM. Multi-channel data is averaged
/// to mono; samples are scaled by 1/32768.
///
/// Errors: kIo (cannot open), kFormat (not RIFF/WAVE), kTruncatedHeader,
/// kUnsupportedCodec (anything other than 16-bit integer PCM), kNoSamples.
AudioBuffer LoadWav(const std::filesystem::path &path);

/// Writes 16-bit PCM mono. Samples outside [-1, 1] are rejected with
/// kOutOfRange rather than clipped.
void SaveWav(const AudioBuffer &buffer, const std::filesystem::path &path);

/// Band-limited sample-rate conversion with a polyphase Kaiser-windowed sinc
/// (64 taps per phase). Output length is round(n * target / source); equal
/// rates return the input unchanged.
AudioBuffer Resample(const AudioBuffer &buffer, int target_rate);

/// y[0] = x[0], y[n] = x[n] - alpha * x[n-1]. Requires 0 <= alpha < 1.
AudioBuffer PreEmphasize(const AudioBuffer &buffer, double alpha);

enum class WindowKind { kHamming, kHann, kRect };

WindowKind ParseWindowKind(std::string_view name);

/// Symmetric window of the given length.
std::vector<double> MakeWindow(WindowKind kind, std::size_t length);

struct FrameSequence {
  Matrix frames;  // n_frames x frame_len, windowed
  std::size_t frame_len = 0;
  std::size_t hop = 0;
  int sample_rate = 0;

  std::size_t num_frames() const noexcept { return frames.rows(); }
  double frame_rate() const { return static_cast<double>(sample_rate) / hop; }
};

/// floor((n - frame_len) / hop) + 1 when n >= frame_len, else 0.
std::size_t NumFrames(std::size_t num_samples, std::size_t frame_len,
                      std::size_t hop);

/// Frame length in samples for a duration in milliseconds.
std::size_t MsToSamples(double ms, int sample_rate);

/// Slices the signal into overlapping frames and applies the window. The
/// trailing partial frame is dropped; a signal shorter than one frame gives
/// an empty sequence.
FrameSequence FrameSignal(const AudioBuffer &buffer, double frame_ms,
                          double hop_ms, WindowKind window);

/// Sample-domain variant of FrameSignal.
FrameSequence FrameSignalSamples(const AudioBuffer &buffer,
                                 std::size_t frame_len, std::size_t hop,
                                 WindowKind window);

// Synthetic corpus ----------------------------------------------------------

struct CorpusSpec {
  int num_speakers = 10;
  int utterances_per_speaker = 3;
  double utterance_seconds = 3.0;
  int sample_rate = 16000;
};

struct Utterance {
  std::string speaker;
  std::string utterance;
  AudioBuffer audio;
};

using Corpus = std::vector<Utterance>;

/// Speaker ids used by the generator: "spk00", "spk01", ...
std::string SpeakerName(int index, int num_speakers);

/// Generates a deterministic corpus of synthetic voiced speech. Each speaker
/// owns a stable order-10 all-pole vocal-tract filter and a pitch range; each
/// utterance is a sequence of syllables (pulse train plus aspiration noise
/// through the filter, with a smooth amplitude envelope). Requires at least
/// two speakers.
Corpus SynthCorpus(const CorpusSpec &spec, std::uint64_t seed);

/// Pole set of a synthetic speaker's vocal tract, for inspection in tests.
struct SpeakerVoice {
  std::vector<double> pole_radius;  // one per conjugate pair
  std::vector<double> pole_angle;   // radians in (0, pi)
  std::vector<double> lpc;          // predictor form, order 10
  double pitch_hz = 0.0;
};

SpeakerVoice MakeSpeakerVoice(std::uint64_t seed, int speaker_index,
                              int num_speakers);

}  // namespace cepstra

#endif  // CEPSTRA_AUDIO_H_
