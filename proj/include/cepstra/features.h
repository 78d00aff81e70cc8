// include/cepstra/features.h

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

#ifndef CEPSTRA_FEATURES_H_
#define CEPSTRA_FEATURES_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cepstra/audio.h"
#include "cepstra/common.h"
#include "cepstra/dsp.h"

namespace cepstra {

enum class FeatureKind : std::uint8_t {
  kMfcc = 0,
  kGfcc = 1,
  kPncc = 2,
  kPlp = 3,
  kLsf = 4,
  kCombo = 5,
};

std::string_view FeatureKindName(FeatureKind kind);
FeatureKind ParseFeatureKind(std::string_view name);

/// Static cepstral coefficients per frame for MFCC, GFCC, PNCC and PLP.
inline constexpr std::size_t kStaticDim = 13;
/// Line spectral frequencies per frame (LPC order).
inline constexpr std::size_t kLsfDim = 10;

/// Per-frame feature vectors (n_frames x dim). The constructor checks that
/// every value is finite and that the dimension matches the kind: 13 or 39
/// for the cepstral kinds, 10 for LSF and 26 for combinations.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(Matrix values, FeatureKind kind, double frame_rate);

  const Matrix &values() const noexcept { return values_; }
  FeatureKind kind() const noexcept { return kind_; }
  double frame_rate() const noexcept { return frame_rate_; }
  std::size_t dim() const noexcept { return values_.cols(); }
  std::size_t num_frames() const noexcept { return values_.rows(); }

  bool operator==(const FeatureMatrix &other) const = default;

 private:
  Matrix values_;
  FeatureKind kind_ = FeatureKind::kMfcc;
  double frame_rate_ = 0.0;
};

struct FrontEndConfig {
  int sample_rate = 16000;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  WindowKind window = WindowKind::kHamming;
  double preemphasis = 0.97;
  std::size_t fft_size = 512;
  /// Feed |X| instead of |X|^2 to the MFCC and GFCC filterbanks.
  bool magnitude_spectrum = false;
};

struct MfccConfig {
  std::size_t num_filters = 26;
  double f_min = 0.0;
  double f_max = 8000.0;
  double log_floor = 1e-10;
};

struct GfccConfig {
  std::size_t num_channels = 64;
  double f_min = 50.0;
  double f_max = 8000.0;
  int order = 4;
};

struct PnccConfig {
  std::size_t num_channels = 40;
  double f_min = 200.0;
  double f_max = 8000.0;
  int order = 4;
  int medium_halfwidth = 2;        // M: medium-time window is 2M + 1 frames
  double lambda_rise = 0.999;      // asymmetric filter, input above output
  double lambda_fall = 0.5;        // asymmetric filter, input below output
  double masking_decay = 0.85;     // temporal-masking peak tracker decay
  double masking_scale = 0.2;      // floor applied to masked frames
  double speech_threshold = 2.0;   // excitation vs. noise-floor ratio
  int smoothing_halfwidth = 4;     // S: channels either side in weight smoothing
  double mean_forgetting = 0.999;  // running mean-power normalization
  double exponent = 1.0 / 15.0;    // power-law nonlinearity
  double epsilon = 1e-20;
};

struct PlpConfig {
  std::size_t num_bands = 21;
  std::size_t lpc_order = 12;
  double spectrum_floor = 1e-10;
};

struct LsfConfig {
  std::size_t grid_points = 1024;
};

struct FeatureConfig {
  FrontEndConfig front_end;
  MfccConfig mfcc;
  GfccConfig gfcc;
  PnccConfig pncc;
  PlpConfig plp;
  LsfConfig lsf;
  int delta_window = 2;

  /// Throws kInvalidArgument on nonpositive counts or inconsistent ranges.
  void Validate() const;
};

/// Counters for frames whose LPC fit was unstable and replaced by the
/// previous frame's output.
struct ExtractionStats {
  std::size_t frames = 0;
  std::size_t substituted_frames = 0;
};

/// Pre-emphasis, framing and windowing shared by every extractor. Checks the
/// sample rate and rejects empty audio.
FrameSequence FrontEndFrames(const AudioBuffer &audio, const FrontEndConfig &cfg);

/// Log frame energy followed by mel cepstra c1..c12.
FeatureMatrix ExtractMfcc(const AudioBuffer &audio, const FeatureConfig &cfg);

/// Cube-rooted gammatone channel energies at the frame rate, before the DCT.
Matrix GfccCochleagram(const AudioBuffer &audio, const FeatureConfig &cfg);

/// DCT of the cochleagram, c0..c12.
FeatureMatrix ExtractGfcc(const AudioBuffer &audio, const FeatureConfig &cfg);

/// Intermediate PNCC quantities, each n_frames x n_channels.
struct PnccStages {
  Matrix power;        // gammatone-weighted short-time power
  Matrix medium;       // medium-time power (moving average over 2M + 1 frames)
  Matrix lower_envelope;  // asymmetric-filter noise floor of `medium`
  Matrix rectified;    // medium - floor, half-wave rectified
  Matrix processed;    // after temporal masking / floor substitution
  Matrix weights;      // channel-smoothed transfer ratio processed / medium
  Matrix normalized;   // power * weights / running mean power
};

PnccStages ComputePnccStages(const AudioBuffer &audio, const FeatureConfig &cfg);

/// Elementwise x^exponent (x >= 0).
std::vector<double> PowerLaw(std::span<const double> x, double exponent);

/// Power-law nonlinearity and DCT, c0..c12.
FeatureMatrix ExtractPncc(const AudioBuffer &audio, const FeatureConfig &cfg);

/// Intensity-to-loudness compression: elementwise cube root.
std::vector<double> IntensityToLoudness(std::span<const double> x);

/// Equal-loudness weight for frequency f (Hz).
double EqualLoudness(double hz);

/// Bark-band integration, equal-loudness weighting, cube-root compression,
/// all-pole fit and LPC cepstrum, c0..c12.
FeatureMatrix ExtractPlp(const AudioBuffer &audio, const FeatureConfig &cfg,
                         ExtractionStats *stats = nullptr);

/// Converts a stable order-p inverse filter (p even, predictor form) to p
/// line spectral frequencies in (0, pi), ascending. Roots are located by a
/// grid scan over the Chebyshev-domain sum/difference polynomials followed by
/// bisection. Throws kRootFinding when the roots cannot all be bracketed.
std::vector<double> LpcToLsf(std::span<const double> lpc, std::size_t grid_points = 1024);

/// Inverse of LpcToLsf.
std::vector<double> LsfToLpc(std::span<const double> lsf);

/// Order-10 LPC per frame converted to LSFs (radians).
FeatureMatrix ExtractLsf(const AudioBuffer &audio, const FeatureConfig &cfg,
                         ExtractionStats *stats = nullptr);

/// Appends regression deltas and delta-deltas over +-window frames with
/// replicated edges: (static, delta, delta-delta). Requires a 13-dim input.
FeatureMatrix AddDeltas(const FeatureMatrix &static_features, int window = 2);

/// Framewise concatenation of two 13-dim static matrices into a 26-dim combo.
FeatureMatrix ConcatStatic(const FeatureMatrix &a, const FeatureMatrix &b);

/// Static 13-dim (10 for LSF) features of one kind.
FeatureMatrix ExtractStatic(FeatureKind kind, const AudioBuffer &audio,
                            const FeatureConfig &cfg, ExtractionStats *stats = nullptr);

/// A named feature stream as used in experiments: a single kind (with
/// deltas for everything but LSF) or a "+"-joined pair of static kinds.
class FeatureSpec {
 public:
  /// Accepts mfcc, gfcc, pncc, plp, lsf and pairs such as "gfcc+pncc".
  static FeatureSpec Parse(std::string_view name);
  static std::vector<std::string> ValidNames();

  const std::string &name() const noexcept { return name_; }
  const std::vector<FeatureKind> &parts() const noexcept { return parts_; }
  bool combo() const noexcept { return parts_.size() == 2; }
  bool with_deltas() const noexcept { return with_deltas_; }
  std::size_t dim() const;

  /// Builds the stream from cached static matrices keyed by kind.
  FeatureMatrix Compose(const std::map<FeatureKind, FeatureMatrix> &statics,
                        int delta_window) const;
  FeatureMatrix Extract(const AudioBuffer &audio, const FeatureConfig &cfg) const;

  /// Drops deltas (used by `extract --static`).
  FeatureSpec StaticOnly() const;

 private:
  std::string name_;
  std::vector<FeatureKind> parts_;
  bool with_deltas_ = false;
};

// Feature files -------------------------------------------------------------

/// Binary little-endian: "CBFM", u16 version, u8 kind, u32 dim, u32 n_frames,
/// f32 frame rate, then row-major f32 values.
void WriteFeatureFile(const FeatureMatrix &features, const std::filesystem::path &path);
FeatureMatrix ReadFeatureFile(const std::filesystem::path &path);

/// CSV with a one-line header c0,c1,...; values printed with 9 significant
/// digits.
void WriteFeatureCsv(const FeatureMatrix &features, const std::filesystem::path &path);

}  // namespace cepstra

#endif  // CEPSTRA_FEATURES_H_
