// src/audio.cc

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

#include "cepstra/audio.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <random>

namespace cepstra {

AudioBuffer::AudioBuffer(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  Require(sample_rate_ > 0, ErrorCode::kInvalidArgument,
          "sample rate must be positive, got " + std::to_string(sample_rate_));
  for (double x : samples_)
    Require(std::isfinite(x), ErrorCode::kInvalidArgument,
            "audio samples must be finite");
}

// WAV I/O -------------------------------------------------------------------

namespace {

std::uint16_t ReadU16(const unsigned char *p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t ReadU32(const unsigned char *p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void PutU16(std::string *out, std::uint16_t v) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>((v >> 8) & 0xff));
}

void PutU32(std::string *out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

AudioBuffer LoadWav(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string where = " in " + path.string();

  Require(bytes.size() >= 12, ErrorCode::kTruncatedHeader,
          "file too short for a RIFF header" + where);
  Require(std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
              std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
          ErrorCode::kFormat, "not a RIFF/WAVE file" + where);

  bool have_fmt = false;
  int channels = 0, rate = 0;
  std::size_t pos = 12;
  while (true) {
    Require(pos + 8 <= bytes.size(), ErrorCode::kTruncatedHeader,
            "missing data chunk" + where);
    const unsigned char *chunk = bytes.data() + pos;
    const std::uint32_t size = ReadU32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      Require(size >= 16 && body + 16 <= bytes.size(),
              ErrorCode::kTruncatedHeader, "short fmt chunk" + where);
      const unsigned char *f = bytes.data() + body;
      std::uint16_t format = ReadU16(f);
      channels = ReadU16(f + 2);
      rate = static_cast<int>(ReadU32(f + 4));
      const std::uint16_t bits = ReadU16(f + 14);
      if (format == kFormatExtensible) {
        Require(size >= 40 && body + 26 <= bytes.size(),
                ErrorCode::kTruncatedHeader, "short extensible fmt chunk" + where);
        format = ReadU16(f + 24);
      }
      Require(format == kFormatPcm && bits == 16, ErrorCode::kUnsupportedCodec,
              "only 16-bit integer PCM is supported (format " +
                  std::to_string(format) + ", " + std::to_string(bits) +
                  " bits)" + where);
      Require(channels > 0 && rate > 0, ErrorCode::kFormat,
              "invalid channel count or sample rate" + where);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      Require(have_fmt, ErrorCode::kFormat, "data chunk before fmt chunk" + where);
      // Streamed writers sometimes leave a bogus size; read what is present.
      const std::size_t available = bytes.size() - body;
      const std::size_t data_bytes = std::min<std::size_t>(size, available);
      const std::size_t frame_bytes = 2 * static_cast<std::size_t>(channels);
      const std::size_t num_frames = data_bytes / frame_bytes;
      Require(num_frames > 0, ErrorCode::kNoSamples, "no samples" + where);
      std::vector<double> samples(num_frames);
      const unsigned char *d = bytes.data() + body;
      for (std::size_t i = 0; i < num_frames; ++i) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
          const auto v = static_cast<std::int16_t>(ReadU16(d + (i * channels + c) * 2));
          acc += v;
        }
        samples[i] = acc / channels / 32768.0;
      }
      return AudioBuffer(std::move(samples), rate);
    }
    pos = body + size + (size & 1u);
  }
}

void SaveWav(const AudioBuffer &buffer, const std::filesystem::path &path) {
  const auto samples = buffer.samples();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    Require(samples[i] >= -1.0 && samples[i] <= 1.0, ErrorCode::kOutOfRange,
            "sample " + std::to_string(i) + " = " + std::to_string(samples[i]) +
                " is outside [-1, 1]; refusing to clip " + path.string());
  }
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutU32(&out, 36 + data_bytes);
  out += "WAVEfmt ";
  PutU32(&out, 16);
  PutU16(&out, kFormatPcm);
  PutU16(&out, 1);
  PutU32(&out, static_cast<std::uint32_t>(buffer.sample_rate()));
  PutU32(&out, static_cast<std::uint32_t>(buffer.sample_rate()) * 2);
  PutU16(&out, 2);
  PutU16(&out, 16);
  out += "data";
  PutU32(&out, data_bytes);
  for (double x : samples) {
    const long q = std::lround(x * 32768.0);
    PutU16(&out, static_cast<std::uint16_t>(static_cast<std::int16_t>(
                     std::clamp<long>(q, -32768, 32767))));
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary);
  Require(file.good(), ErrorCode::kIo, "cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  Require(file.good(), ErrorCode::kIo, "write failed for " + path.string());
}

// Resampling ----------------------------------------------------------------

namespace {

constexpr int kResampleTaps = 64;
constexpr double kKaiserBeta = 8.5;
constexpr double kPassbandFraction = 0.9;

double Sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

AudioBuffer Resample(const AudioBuffer &buffer, int target_rate) {
  Require(target_rate > 0, ErrorCode::kInvalidArgument,
          "target rate must be positive");
  const int source_rate = buffer.sample_rate();
  if (source_rate == target_rate) return buffer;

  const long g = std::gcd(source_rate, target_rate);
  const long up = target_rate / g;     // L
  const long down = source_rate / g;   // M
  const auto in = buffer.samples();
  const auto n_in = static_cast<long>(in.size());
  const auto n_out = static_cast<long>(
      std::llround(static_cast<double>(n_in) * target_rate / source_rate));

  // Cutoff in cycles per input sample.
  const double cutoff =
      0.5 * std::min(1.0, static_cast<double>(up) / down) * kPassbandFraction;
  const double half = kResampleTaps / 2;
  const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);

  // One row of taps per phase; the output sample n sits at input time
  // n * M / L = base + phase / L.
  std::vector<double> taps(static_cast<std::size_t>(up) * kResampleTaps);
  for (long phase = 0; phase < up; ++phase) {
    double *row = taps.data() + phase * kResampleTaps;
    double sum = 0.0;
    for (int i = 0; i < kResampleTaps; ++i) {
      const double d = static_cast<double>(phase) / up + (half - 1) - i;
      const double u = d / half;
      const double w =
          std::abs(u) >= 1.0
              ? 0.0
              : std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - u * u)) / i0_beta;
      row[i] = 2.0 * cutoff * Sinc(2.0 * cutoff * d) * w;
      sum += row[i];
    }
    for (int i = 0; i < kResampleTaps; ++i) row[i] /= sum;
  }

  std::vector<double> out(static_cast<std::size_t>(n_out));
  for (long n = 0; n < n_out; ++n) {
    const long num = n * down;
    const long base = num / up;
    const long phase = num % up;
    const double *row = taps.data() + phase * kResampleTaps;
    double acc = 0.0;
    const long first = base - static_cast<long>(half) + 1;
    for (int i = 0; i < kResampleTaps; ++i) {
      const long j = first + i;
      if (j >= 0 && j < n_in) acc += row[i] * in[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(n)] = acc;
  }
  return AudioBuffer(std::move(out), target_rate);
}

AudioBuffer PreEmphasize(const AudioBuffer &buffer, double alpha) {
  Require(alpha >= 0.0 && alpha < 1.0, ErrorCode::kInvalidArgument,
          "pre-emphasis coefficient must be in [0, 1)");
  const auto x = buffer.samples();
  std::vector<double> y(x.size());
  if (!x.empty()) y[0] = x[0];
  for (std::size_t n = 1; n < x.size(); ++n) y[n] = x[n] - alpha * x[n - 1];
  return AudioBuffer(std::move(y), buffer.sample_rate());
}

// Framing -------------------------------------------------------------------

WindowKind ParseWindowKind(std::string_view name) {
  if (name == "hamming") return WindowKind::kHamming;
  if (name == "hann") return WindowKind::kHann;
  if (name == "rect") return WindowKind::kRect;
  Fail(ErrorCode::kInvalidArgument,
       "unknown window '" + std::string(name) + "' (hamming|hann|rect)");
}

std::vector<double> MakeWindow(WindowKind kind, std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (kind == WindowKind::kRect || length < 2) return w;
  const double denom = static_cast<double>(length - 1);
  for (std::size_t n = 0; n < length; ++n) {
    const double c = std::cos(2.0 * std::numbers::pi * n / denom);
    w[n] = kind == WindowKind::kHamming ? 0.54 - 0.46 * c : 0.5 - 0.5 * c;
  }
  return w;
}

std::size_t NumFrames(std::size_t num_samples, std::size_t frame_len,
                      std::size_t hop) {
  if (num_samples < frame_len) return 0;
  return (num_samples - frame_len) / hop + 1;
}

std::size_t MsToSamples(double ms, int sample_rate) {
  return static_cast<std::size_t>(std::llround(ms * sample_rate / 1000.0));
}

FrameSequence FrameSignalSamples(const AudioBuffer &buffer,
                                 std::size_t frame_len, std::size_t hop,
                                 WindowKind window) {
  Require(hop > 0 && hop <= frame_len, ErrorCode::kInvalidArgument,
          "frame geometry requires 0 < hop <= frame length");
  const auto x = buffer.samples();
  const std::size_t n = NumFrames(x.size(), frame_len, hop);
  const auto w = MakeWindow(window, frame_len);
  FrameSequence seq{Matrix(n, frame_len), frame_len, hop, buffer.sample_rate()};
  for (std::size_t f = 0; f < n; ++f) {
    auto row = seq.frames.row(f);
    const std::size_t start = f * hop;
    for (std::size_t i = 0; i < frame_len; ++i) row[i] = x[start + i] * w[i];
  }
  return seq;
}

FrameSequence FrameSignal(const AudioBuffer &buffer, double frame_ms,
                          double hop_ms, WindowKind window) {
  Require(hop_ms > 0 && frame_ms >= hop_ms, ErrorCode::kInvalidArgument,
          "frame geometry requires frame_ms >= hop_ms > 0");
  return FrameSignalSamples(buffer, MsToSamples(frame_ms, buffer.sample_rate()),
                            MsToSamples(hop_ms, buffer.sample_rate()), window);
}

// Synthetic corpus ----------------------------------------------------------

namespace {

constexpr int kVoicePairs = 5;
// Neutral-tract resonances (Hz) and bandwidths before per-speaker scaling.
constexpr double kNeutralFormants[kVoicePairs] = {600, 1500, 2500, 3500, 4500};

// Multiplies out conjugate pole pairs into predictor coefficients a[1..p]
// for x[n] = sum a[k] x[n-k] + e[n].
std::vector<double> PolesToLpc(std::span<const double> radius,
                               std::span<const double> angle) {
  std::vector<double> poly{1.0};
  for (std::size_t i = 0; i < radius.size(); ++i) {
    const double b1 = -2.0 * radius[i] * std::cos(angle[i]);
    const double b2 = radius[i] * radius[i];
    std::vector<double> next(poly.size() + 2, 0.0);
    for (std::size_t k = 0; k < poly.size(); ++k) {
      next[k] += poly[k];
      next[k + 1] += b1 * poly[k];
      next[k + 2] += b2 * poly[k];
    }
    poly = std::move(next);
  }
  std::vector<double> lpc(poly.size() - 1);
  for (std::size_t k = 1; k < poly.size(); ++k) lpc[k - 1] = -poly[k];
  return lpc;
}

}  // namespace

std::string SpeakerName(int index, int num_speakers) {
  const int width = std::max(2, static_cast<int>(std::to_string(num_speakers - 1).size()));
  std::string digits = std::to_string(index);
  return "spk" + std::string(width - std::min<int>(width, digits.size()), '0') + digits;
}

SpeakerVoice MakeSpeakerVoice(std::uint64_t seed, int speaker_index,
                              int num_speakers) {
  std::mt19937_64 rng(DeriveSeed(seed, {"voice", std::to_string(speaker_index)}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SpeakerVoice voice;
  // Vocal-tract length factor and pitch are stratified over the speaker
  // index so that every speaker differs from its neighbours.
  const double slot = (speaker_index + 0.2 + 0.6 * unit(rng)) / num_speakers;
  const double tract = 0.82 + 0.36 * unit(rng);
  voice.pitch_hz = 90.0 + 160.0 * slot;
  const double fs = 16000.0;
  for (int i = 0; i < kVoicePairs; ++i) {
    const double f = kNeutralFormants[i] * tract * (0.9 + 0.2 * unit(rng));
    const double bw = 60.0 + 140.0 * unit(rng);
    voice.pole_angle.push_back(2.0 * std::numbers::pi * f / fs);
    voice.pole_radius.push_back(std::exp(-std::numbers::pi * bw / fs));
  }
  std::sort(voice.pole_angle.begin(), voice.pole_angle.end());
  voice.lpc = PolesToLpc(voice.pole_radius, voice.pole_angle);
  return voice;
}

Corpus SynthCorpus(const CorpusSpec &spec, std::uint64_t seed) {
  Require(spec.num_speakers >= 2, ErrorCode::kInvalidArgument,
          "synthetic corpus needs at least two speakers");
  Require(spec.utterances_per_speaker >= 1 && spec.utterance_seconds > 0.0 &&
              spec.sample_rate > 0,
          ErrorCode::kInvalidArgument, "invalid corpus spec");
  const double fs = spec.sample_rate;
  const auto length = static_cast<std::size_t>(std::llround(spec.utterance_seconds * fs));
  Corpus corpus;
  for (int s = 0; s < spec.num_speakers; ++s) {
    const SpeakerVoice voice = MakeSpeakerVoice(seed, s, spec.num_speakers);
    // Pole angles were drawn against 16 kHz; rescale for other rates.
    std::vector<double> base_angle = voice.pole_angle;
    for (double &a : base_angle) a = std::min(a * 16000.0 / fs, 0.98 * std::numbers::pi);

    for (int u = 0; u < spec.utterances_per_speaker; ++u) {
      std::mt19937_64 rng(DeriveSeed(seed, {"utt", std::to_string(s), std::to_string(u)}));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::normal_distribution<double> gauss(0.0, 1.0);
      std::vector<double> y(length, 0.0);
      std::vector<double> history(voice.lpc.size(), 0.0);  // y[n-1], y[n-2], ...
      double glottal = 0.0;
      double phase = 0.0;
      std::size_t n = 0;
      while (n < length) {
        const auto syllable = static_cast<std::size_t>((0.15 + 0.15 * unit(rng)) * fs);
        const auto gap = static_cast<std::size_t>((0.03 + 0.05 * unit(rng)) * fs);
        // Each syllable nudges the resonances, standing in for a vowel change.
        std::vector<double> angle = base_angle;
        for (double &a : angle) a *= 0.96 + 0.08 * unit(rng);
        std::sort(angle.begin(), angle.end());
        const auto lpc = PolesToLpc(voice.pole_radius, angle);
        const double f0 = voice.pitch_hz * (0.94 + 0.12 * unit(rng));
        const double vibrato = 4.0 + 2.0 * unit(rng);
        for (std::size_t i = 0; i < syllable + gap && n < length; ++i, ++n) {
          double excitation = 0.0;
          double envelope = 0.0;
          if (i < syllable) {
            envelope = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / syllable);
            const double t = static_cast<double>(i) / fs;
            phase += f0 * (1.0 + 0.03 * std::sin(2.0 * std::numbers::pi * vibrato * t)) / fs;
            if (phase >= 1.0) {
              phase -= 1.0;
              excitation = 1.0;
            }
            excitation += 0.05 * gauss(rng);
          }
          glottal = 0.9 * glottal + envelope * excitation;
          double out = glottal;
          for (std::size_t k = 0; k < lpc.size(); ++k) out += lpc[k] * history[k];
          for (std::size_t k = history.size() - 1; k > 0; --k) history[k] = history[k - 1];
          history[0] = out;
          y[n] = out;
        }
      }
      double peak = 0.0;
      for (double v : y) peak = std::max(peak, std::abs(v));
      const double scale = peak > 0.0 ? 0.5 / peak : 1.0;
      // Low-level ambient floor so no stretch is digitally silent.
      std::normal_distribution<double> ambient(0.0, 1e-4);
      for (double &v : y) v = v * scale + ambient(rng);
      corpus.push_back({SpeakerName(s, spec.num_speakers), "u" + std::to_string(u),
                        AudioBuffer(std::move(y), spec.sample_rate)});
    }
  }
  return corpus;
}

}  // namespace cepstra
