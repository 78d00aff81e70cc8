// src/features.cc

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

#include "cepstra/features.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cepstra {

using std::numbers::pi;

std::string_view FeatureKindName(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kMfcc: return "mfcc";
    case FeatureKind::kGfcc: return "gfcc";
    case FeatureKind::kPncc: return "pncc";
    case FeatureKind::kPlp: return "plp";
    case FeatureKind::kLsf: return "lsf";
    case FeatureKind::kCombo: return "combo";
  }
  return "unknown";
}

FeatureKind ParseFeatureKind(std::string_view name) {
  for (auto kind : {FeatureKind::kMfcc, FeatureKind::kGfcc, FeatureKind::kPncc,
                    FeatureKind::kPlp, FeatureKind::kLsf, FeatureKind::kCombo}) {
    if (FeatureKindName(kind) == name) return kind;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown feature kind '" + std::string(name) + "'");
}

FeatureMatrix::FeatureMatrix(Matrix values, FeatureKind kind, double frame_rate)
    : values_(std::move(values)), kind_(kind), frame_rate_(frame_rate) {
  const std::size_t d = values_.cols();
  bool ok = false;
  switch (kind_) {
    case FeatureKind::kLsf: ok = d == kLsfDim; break;
    case FeatureKind::kCombo: ok = d == 2 * kStaticDim; break;
    default: ok = d == kStaticDim || d == 3 * kStaticDim; break;
  }
  Require(ok, ErrorCode::kDimensionMismatch,
          std::string(FeatureKindName(kind_)) + " features cannot have dimension " +
              std::to_string(d));
  for (double v : values_.data())
    Require(std::isfinite(v), ErrorCode::kNonFinite,
            std::string(FeatureKindName(kind_)) + " features contain a non-finite value");
}

void FeatureConfig::Validate() const {
  const auto &fe = front_end;
  Require(fe.sample_rate > 0 && fe.hop_ms > 0 && fe.frame_ms >= fe.hop_ms,
          ErrorCode::kInvalidArgument, "invalid frame geometry");
  Require(IsPowerOfTwo(fe.fft_size) &&
              fe.fft_size >= MsToSamples(fe.frame_ms, fe.sample_rate),
          ErrorCode::kInvalidArgument, "fft_size must be a power of two >= frame length");
  Require(mfcc.num_filters >= kStaticDim, ErrorCode::kInvalidArgument,
          "MFCC needs at least 13 mel filters");
  Require(gfcc.num_channels >= kStaticDim && pncc.num_channels >= kStaticDim,
          ErrorCode::kInvalidArgument, "gammatone banks need at least 13 channels");
  Require(plp.lpc_order >= 1 && plp.num_bands > plp.lpc_order,
          ErrorCode::kInvalidArgument, "PLP needs more Bark bands than its LPC order");
  Require(pncc.medium_halfwidth >= 0 && pncc.smoothing_halfwidth >= 0 &&
              pncc.exponent > 0.0,
          ErrorCode::kInvalidArgument, "invalid PNCC parameters");
  Require(lsf.grid_points >= 16, ErrorCode::kInvalidArgument, "LSF grid too coarse");
  Require(delta_window >= 1, ErrorCode::kInvalidArgument, "delta window must be >= 1");
}

FrameSequence FrontEndFrames(const AudioBuffer &audio, const FrontEndConfig &cfg) {
  Require(!audio.empty(), ErrorCode::kNoSamples, "cannot extract features from empty audio");
  Require(audio.sample_rate() == cfg.sample_rate, ErrorCode::kRateMismatch,
          "audio is at " + std::to_string(audio.sample_rate()) +
              " Hz; resample to " + std::to_string(cfg.sample_rate) + " Hz first");
  return FrameSignal(PreEmphasize(audio, cfg.preemphasis), cfg.frame_ms, cfg.hop_ms,
                     cfg.window);
}

namespace {

double FrameRate(const FrontEndConfig &cfg) {
  return static_cast<double>(cfg.sample_rate) /
         static_cast<double>(MsToSamples(cfg.hop_ms, cfg.sample_rate));
}

Matrix DctRows(const Matrix &in, std::size_t n_out) {
  DctPlan plan(in.cols(), n_out);
  Matrix out(in.rows(), n_out);
  for (std::size_t f = 0; f < in.rows(); ++f) plan.Apply(in.row(f), out.row(f));
  return out;
}

}  // namespace

// MFCC ------------------------------------------------------------------------

FeatureMatrix ExtractMfcc(const AudioBuffer &audio, const FeatureConfig &cfg) {
  const auto &fe = cfg.front_end;
  const FrameSequence frames = FrontEndFrames(audio, fe);
  const auto spectrum = PowerSpectrum(frames, fe.fft_size, fe.magnitude_spectrum);
  const auto bank = MelFilterBank(cfg.mfcc.num_filters, fe.fft_size, fe.sample_rate,
                                  cfg.mfcc.f_min, cfg.mfcc.f_max);
  Matrix mel = ApplyFilterBank(spectrum, bank);
  for (double &v : mel.data()) v = std::log(std::max(v, cfg.mfcc.log_floor));
  const Matrix ceps = DctRows(mel, kStaticDim);

  Matrix out(frames.num_frames(), kStaticDim);
  for (std::size_t f = 0; f < frames.num_frames(); ++f) {
    double energy = 0.0;
    for (double x : frames.frames.row(f)) energy += x * x;
    out(f, 0) = std::log(std::max(energy, cfg.mfcc.log_floor));
    for (std::size_t c = 1; c < kStaticDim; ++c) out(f, c) = ceps(f, c);
  }
  return FeatureMatrix(std::move(out), FeatureKind::kMfcc, FrameRate(fe));
}

// GFCC ------------------------------------------------------------------------

Matrix GfccCochleagram(const AudioBuffer &audio, const FeatureConfig &cfg) {
  const auto &fe = cfg.front_end;
  const FrameSequence frames = FrontEndFrames(audio, fe);
  const auto spectrum = PowerSpectrum(frames, fe.fft_size, fe.magnitude_spectrum);
  auto bank = GammatoneFilterBank(cfg.gfcc.num_channels, fe.fft_size,
                                        fe.sample_rate, cfg.gfcc.f_min,
                                        cfg.gfcc.f_max, cfg.gfcc.order);
  // Channel power is |H|^2 |X|^2, as if the signal were filtered; in
  // magnitude mode the magnitude response weights |X| directly.
  if (!fe.magnitude_spectrum)
    for (double &w : bank.weights.data()) w *= w;
  Matrix energies = ApplyFilterBank(spectrum, bank);
  for (double &v : energies.data()) v = std::cbrt(v);
  return energies;
}

FeatureMatrix ExtractGfcc(const AudioBuffer &audio, const FeatureConfig &cfg) {
  return FeatureMatrix(DctRows(GfccCochleagram(audio, cfg), kStaticDim),
                       FeatureKind::kGfcc, FrameRate(cfg.front_end));
}

// PNCC ------------------------------------------------------------------------

namespace {

// Asymmetric first-order lowpass along time, per channel. Tracks slowly when
// the input rises above the output and quickly when it falls below, which
// follows the lower envelope of the input.
Matrix AsymmetricLowpass(const Matrix &in, double lambda_rise, double lambda_fall) {
  Matrix out(in.rows(), in.cols());
  if (in.rows() == 0) return out;
  for (std::size_t l = 0; l < in.cols(); ++l) out(0, l) = 0.9 * in(0, l);
  for (std::size_t m = 1; m < in.rows(); ++m) {
    for (std::size_t l = 0; l < in.cols(); ++l) {
      const double prev = out(m - 1, l);
      const double x = in(m, l);
      const double lambda = x >= prev ? lambda_rise : lambda_fall;
      out(m, l) = lambda * prev + (1.0 - lambda) * x;
    }
  }
  return out;
}

}  // namespace

PnccStages ComputePnccStages(const AudioBuffer &audio, const FeatureConfig &cfg) {
  const auto &fe = cfg.front_end;
  const auto &pc = cfg.pncc;
  const FrameSequence frames = FrontEndFrames(audio, fe);
  const auto spectrum = PowerSpectrum(frames, fe.fft_size);
  FilterBank bank = GammatoneFilterBank(pc.num_channels, fe.fft_size, fe.sample_rate,
                                        pc.f_min, pc.f_max, pc.order);
  // Power through each channel: squared magnitude response on |X|^2.
  for (double &w : bank.weights.data()) w *= w;

  PnccStages st;
  st.power = ApplyFilterBank(spectrum, bank);
  const std::size_t n_frames = st.power.rows();
  const std::size_t n_ch = st.power.cols();

  st.medium = Matrix(n_frames, n_ch);
  const auto half = static_cast<std::ptrdiff_t>(pc.medium_halfwidth);
  for (std::size_t m = 0; m < n_frames; ++m) {
    const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(m) - half);
    const auto hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n_frames) - 1,
                                             static_cast<std::ptrdiff_t>(m) + half);
    for (std::size_t l = 0; l < n_ch; ++l) {
      double acc = 0.0;
      for (auto j = lo; j <= hi; ++j) acc += st.power(static_cast<std::size_t>(j), l);
      st.medium(m, l) = acc / static_cast<double>(hi - lo + 1);
    }
  }

  st.lower_envelope = AsymmetricLowpass(st.medium, pc.lambda_rise, pc.lambda_fall);
  st.rectified = Matrix(n_frames, n_ch);
  for (std::size_t i = 0; i < st.rectified.data().size(); ++i)
    st.rectified.data()[i] =
        std::max(0.0, st.medium.data()[i] - st.lower_envelope.data()[i]);

  const Matrix floor_level = AsymmetricLowpass(st.rectified, pc.lambda_rise, pc.lambda_fall);

  // Temporal masking on the rectified power, then floor substitution for
  // frames that are not clearly above the noise floor.
  st.processed = Matrix(n_frames, n_ch);
  for (std::size_t l = 0; l < n_ch; ++l) {
    double peak = 0.0;
    for (std::size_t m = 0; m < n_frames; ++m) {
      const double x = st.rectified(m, l);
      const double decayed = pc.masking_decay * peak;
      const double masked = m == 0 || x >= decayed ? x : pc.masking_scale * peak;
      peak = m == 0 ? x : std::max(decayed, x);
      const double excitation = std::max(masked, floor_level(m, l));
      st.processed(m, l) =
          st.medium(m, l) >= pc.speech_threshold * st.lower_envelope(m, l)
              ? excitation
              : floor_level(m, l);
    }
  }

  st.weights = Matrix(n_frames, n_ch);
  const auto smooth = static_cast<std::ptrdiff_t>(pc.smoothing_halfwidth);
  for (std::size_t m = 0; m < n_frames; ++m) {
    for (std::size_t l = 0; l < n_ch; ++l) {
      const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(l) - smooth);
      const auto hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n_ch) - 1,
                                               static_cast<std::ptrdiff_t>(l) + smooth);
      double acc = 0.0;
      for (auto j = lo; j <= hi; ++j) {
        const auto c = static_cast<std::size_t>(j);
        acc += st.processed(m, c) / std::max(st.medium(m, c), pc.epsilon);
      }
      st.weights(m, l) = acc / static_cast<double>(hi - lo + 1);
    }
  }

  // Running mean-power normalization. The running mean starts from the
  // utterance average so a quiet first frame does not skew the whole
  // utterance.
  Matrix transfer(n_frames, n_ch);
  double initial = 0.0;
  for (std::size_t m = 0; m < n_frames; ++m) {
    for (std::size_t l = 0; l < n_ch; ++l) {
      transfer(m, l) = st.power(m, l) * st.weights(m, l);
      initial += transfer(m, l);
    }
  }
  if (n_frames > 0) initial /= static_cast<double>(n_frames * n_ch);
  st.normalized = Matrix(n_frames, n_ch);
  double mean_power = initial;
  for (std::size_t m = 0; m < n_frames; ++m) {
    double frame_mean = 0.0;
    for (std::size_t l = 0; l < n_ch; ++l) frame_mean += transfer(m, l);
    frame_mean /= static_cast<double>(n_ch);
    mean_power = pc.mean_forgetting * mean_power + (1.0 - pc.mean_forgetting) * frame_mean;
    for (std::size_t l = 0; l < n_ch; ++l)
      st.normalized(m, l) = transfer(m, l) / std::max(mean_power, pc.epsilon);
  }
  for (double v : st.normalized.data())
    Require(std::isfinite(v), ErrorCode::kNonFinite,
            "PNCC produced a non-finite normalized power");
  return st;
}

std::vector<double> PowerLaw(std::span<const double> x, double exponent) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::pow(x[i], exponent);
  return y;
}

FeatureMatrix ExtractPncc(const AudioBuffer &audio, const FeatureConfig &cfg) {
  const PnccStages st = ComputePnccStages(audio, cfg);
  Matrix compressed(st.normalized.rows(), st.normalized.cols());
  for (std::size_t m = 0; m < compressed.rows(); ++m) {
    const auto row = PowerLaw(st.normalized.row(m), cfg.pncc.exponent);
    std::copy(row.begin(), row.end(), compressed.row(m).begin());
  }
  return FeatureMatrix(DctRows(compressed, kStaticDim), FeatureKind::kPncc,
                       FrameRate(cfg.front_end));
}

// PLP -------------------------------------------------------------------------

std::vector<double> IntensityToLoudness(std::span<const double> x) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::cbrt(x[i]);
  return y;
}

double EqualLoudness(double hz) {
  const double w2 = std::pow(2.0 * pi * hz, 2);
  return (w2 + 56.8e6) * w2 * w2 / (std::pow(w2 + 6.3e6, 2) * (w2 + 0.38e9));
}

FeatureMatrix ExtractPlp(const AudioBuffer &audio, const FeatureConfig &cfg,
                         ExtractionStats *stats) {
  const auto &fe = cfg.front_end;
  const auto &pc = cfg.plp;
  const FrameSequence frames = FrontEndFrames(audio, fe);
  const auto spectrum = PowerSpectrum(frames, fe.fft_size);
  const auto bank = BarkFilterBank(pc.num_bands, fe.fft_size, fe.sample_rate);
  const Matrix bands = ApplyFilterBank(spectrum, bank);
  const std::size_t nb = pc.num_bands;

  std::vector<double> loudness_weight(nb);
  for (std::size_t i = 0; i < nb; ++i) loudness_weight[i] = EqualLoudness(bank.center_freqs[i]);

  // Cosine table for the inverse DFT of the even, real auditory spectrum.
  const std::size_t order = pc.lpc_order;
  Matrix idft(order + 1, nb);
  for (std::size_t k = 0; k <= order; ++k)
    for (std::size_t i = 0; i < nb; ++i) {
      const double edge = (i == 0 || i == nb - 1) ? 1.0 : 2.0;
      idft(k, i) = edge * std::cos(pi * static_cast<double>(i * k) / (nb - 1)) /
                   (2.0 * (nb - 1));
    }

  Matrix out(frames.num_frames(), kStaticDim);
  std::vector<double> previous(kStaticDim, 0.0);
  std::vector<double> weighted(nb), r(order + 1);
  std::size_t substituted = 0;
  for (std::size_t f = 0; f < frames.num_frames(); ++f) {
    for (std::size_t i = 0; i < nb; ++i)
      weighted[i] = loudness_weight[i] * bands(f, i) + pc.spectrum_floor;
    auto loud = IntensityToLoudness(weighted);
    // The outermost bands lie partly beyond the analysis range.
    loud.front() = loud[1];
    loud.back() = loud[nb - 2];
    for (std::size_t k = 0; k <= order; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < nb; ++i) acc += idft(k, i) * loud[i];
      r[k] = acc;
    }
    try {
      const LpcResult fit = LevinsonDurbin(r, order);
      previous = LpcToCepstrum(fit.lpc, fit.gain, kStaticDim);
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kUnstableFilter && e.code() != ErrorCode::kInvalidArgument)
        throw;
      ++substituted;
    }
    std::copy(previous.begin(), previous.end(), out.row(f).begin());
  }
  if (stats) {
    stats->frames += frames.num_frames();
    stats->substituted_frames += substituted;
  }
  return FeatureMatrix(std::move(out), FeatureKind::kPlp, FrameRate(fe));
}

// LSF -------------------------------------------------------------------------

namespace {

// Symmetric degree-2m polynomial c[0..2m] evaluated on the unit circle, with
// the linear phase removed, expressed in x = cos(w):
//   c[m] + 2 sum_{i=1}^{m} c[m-i] T_i(x).
double EvalChebyshev(std::span<const double> c, double x) {
  const std::size_t m = c.size() / 2;
  // Clenshaw recurrence over T_i with coefficients a_0 = c[m], a_i = 2 c[m-i].
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t i = m; i >= 1; --i) {
    const double b0 = 2.0 * c[m - i] + 2.0 * x * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return c[m] + x * b1 - b2;
}

// Roots of the Chebyshev form in x in (-1, 1), scanning from x = 1 (w = 0)
// to x = -1 (w = pi) on a grid uniform in w.
std::vector<double> ChebyshevRoots(std::span<const double> c, std::size_t grid) {
  std::vector<double> roots;
  double x_prev = 1.0;
  double f_prev = EvalChebyshev(c, x_prev);
  for (std::size_t g = 1; g <= grid; ++g) {
    const double x = std::cos(pi * static_cast<double>(g) / grid);
    const double fx = EvalChebyshev(c, x);
    if ((f_prev < 0.0) != (fx < 0.0)) {
      double lo = x_prev, hi = x, flo = f_prev;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = EvalChebyshev(c, mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x_prev = x;
    f_prev = fx;
  }
  return roots;
}

}  // namespace

std::vector<double> LpcToLsf(std::span<const double> lpc, std::size_t grid_points) {
  const std::size_t p = lpc.size();
  Require(p >= 2 && p % 2 == 0, ErrorCode::kInvalidArgument,
          "LSF conversion requires an even LPC order");
  // alpha = 1, -a1, ..., -ap, 0
  std::vector<double> alpha(p + 2, 0.0);
  alpha[0] = 1.0;
  for (std::size_t k = 0; k < p; ++k) alpha[k + 1] = -lpc[k];
  std::vector<double> sum(p + 2), diff(p + 2);
  for (std::size_t k = 0; k <= p + 1; ++k) {
    sum[k] = alpha[k] + alpha[p + 1 - k];
    diff[k] = alpha[k] - alpha[p + 1 - k];
  }
  // Deflate the trivial roots at z = -1 (sum) and z = +1 (diff).
  std::vector<double> ps(p + 1), qs(p + 1);
  ps[0] = sum[0];
  qs[0] = diff[0];
  for (std::size_t k = 1; k <= p; ++k) {
    ps[k] = sum[k] - ps[k - 1];
    qs[k] = diff[k] + qs[k - 1];
  }

  const std::size_t m = p / 2;
  for (std::size_t grid = grid_points; grid <= grid_points * 64; grid *= 8) {
    auto proots = ChebyshevRoots(ps, grid);
    auto qroots = ChebyshevRoots(qs, grid);
    if (proots.size() != m || qroots.size() != m) continue;
    // Tag each frequency with its polynomial (0 = sum, 1 = difference).
    std::vector<std::pair<double, int>> tagged;
    tagged.reserve(p);
    for (double x : proots) tagged.emplace_back(std::acos(std::clamp(x, -1.0, 1.0)), 0);
    for (double x : qroots) tagged.emplace_back(std::acos(std::clamp(x, -1.0, 1.0)), 1);
    std::sort(tagged.begin(), tagged.end());
    // A(z) is minimum phase iff the two sets interlace starting with the sum
    // polynomial; any other order means a pole on or outside the unit circle.
    std::vector<double> lsf;
    lsf.reserve(p);
    for (std::size_t i = 0; i < p; ++i) {
      Require(tagged[i].second == static_cast<int>(i % 2), ErrorCode::kUnstableFilter,
              "LPC polynomial is not minimum phase");
      lsf.push_back(tagged[i].first);
    }
    return lsf;
  }
  Fail(ErrorCode::kRootFinding, "could not bracket all line spectral frequencies");
}

std::vector<double> LsfToLpc(std::span<const double> lsf) {
  const std::size_t p = lsf.size();
  Require(p >= 2 && p % 2 == 0, ErrorCode::kInvalidArgument,
          "LSF vector must have even length");
  auto expand = [&](std::size_t first) {
    std::vector<double> poly{1.0};
    for (std::size_t i = first; i < p; i += 2) {
      const double b1 = -2.0 * std::cos(lsf[i]);
      std::vector<double> next(poly.size() + 2, 0.0);
      for (std::size_t k = 0; k < poly.size(); ++k) {
        next[k] += poly[k];
        next[k + 1] += b1 * poly[k];
        next[k + 2] += poly[k];
      }
      poly = std::move(next);
    }
    return poly;  // degree p
  };
  const auto ps = expand(0);
  const auto qs = expand(1);
  // Restore the trivial factors (1 + z^-1) and (1 - z^-1).
  std::vector<double> sum(p + 2, 0.0), diff(p + 2, 0.0);
  for (std::size_t k = 0; k <= p; ++k) {
    sum[k] += ps[k];
    sum[k + 1] += ps[k];
    diff[k] += qs[k];
    diff[k + 1] -= qs[k];
  }
  std::vector<double> lpc(p);
  for (std::size_t k = 1; k <= p; ++k) lpc[k - 1] = -0.5 * (sum[k] + diff[k]);
  return lpc;
}

FeatureMatrix ExtractLsf(const AudioBuffer &audio, const FeatureConfig &cfg,
                         ExtractionStats *stats) {
  const auto &fe = cfg.front_end;
  const FrameSequence frames = FrontEndFrames(audio, fe);
  Matrix out(frames.num_frames(), kLsfDim);
  // Flat inverse filter: LSFs equally spaced in (0, pi).
  std::vector<double> previous(kLsfDim);
  for (std::size_t i = 0; i < kLsfDim; ++i) previous[i] = pi * (i + 1.0) / (kLsfDim + 1.0);
  std::size_t substituted = 0;
  for (std::size_t f = 0; f < frames.num_frames(); ++f) {
    auto r = Autocorrelation(frames.frames.row(f), kLsfDim);
    r[0] *= 1.0 + 1e-9;  // white-noise correction
    bool ok = false;
    LpcResult fit;
    try {
      fit = LevinsonDurbin(r, kLsfDim);
      ok = true;
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kUnstableFilter && e.code() != ErrorCode::kInvalidArgument)
        throw;
    }
    if (ok) {
      try {
        previous = LpcToLsf(fit.lpc, cfg.lsf.grid_points);
      } catch (const Error &e) {
        Fail(e.code(), "frame " + std::to_string(f) + ": " + e.what());
      }
    } else {
      ++substituted;
    }
    std::copy(previous.begin(), previous.end(), out.row(f).begin());
  }
  if (stats) {
    stats->frames += frames.num_frames();
    stats->substituted_frames += substituted;
  }
  return FeatureMatrix(std::move(out), FeatureKind::kLsf, FrameRate(fe));
}

// Dynamics and fusion -------------------------------------------------------

namespace {

Matrix RegressionDeltas(const Matrix &in, int window) {
  const std::size_t n = in.rows();
  Matrix out(n, in.cols());
  if (n == 0) return out;
  double denom = 0.0;
  for (int k = 1; k <= window; ++k) denom += 2.0 * k * k;
  const auto last = static_cast<std::ptrdiff_t>(n) - 1;
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t c = 0; c < in.cols(); ++c) {
      double acc = 0.0;
      for (int k = 1; k <= window; ++k) {
        const auto ti = static_cast<std::ptrdiff_t>(t);
        const auto ahead = static_cast<std::size_t>(std::min(ti + k, last));
        const auto behind = static_cast<std::size_t>(std::max<std::ptrdiff_t>(ti - k, 0));
        acc += k * (in(ahead, c) - in(behind, c));
      }
      out(t, c) = acc / denom;
    }
  }
  return out;
}

}  // namespace

FeatureMatrix AddDeltas(const FeatureMatrix &static_features, int window) {
  Require(window >= 1, ErrorCode::kInvalidArgument, "delta window must be >= 1");
  Require(static_features.dim() == kStaticDim, ErrorCode::kDimensionMismatch,
          "deltas are defined for 13-dim static features, got " +
              std::to_string(static_features.dim()));
  const Matrix &s = static_features.values();
  const Matrix d = RegressionDeltas(s, window);
  const Matrix dd = RegressionDeltas(d, window);
  Matrix out(s.rows(), 3 * kStaticDim);
  for (std::size_t t = 0; t < s.rows(); ++t) {
    auto row = out.row(t);
    std::copy(s.row(t).begin(), s.row(t).end(), row.begin());
    std::copy(d.row(t).begin(), d.row(t).end(), row.begin() + kStaticDim);
    std::copy(dd.row(t).begin(), dd.row(t).end(), row.begin() + 2 * kStaticDim);
  }
  return FeatureMatrix(std::move(out), static_features.kind(), static_features.frame_rate());
}

FeatureMatrix ConcatStatic(const FeatureMatrix &a, const FeatureMatrix &b) {
  Require(a.dim() == kStaticDim && b.dim() == kStaticDim, ErrorCode::kDimensionMismatch,
          "static concatenation needs two 13-dim inputs, got " + std::to_string(a.dim()) +
              " and " + std::to_string(b.dim()));
  Require(a.num_frames() == b.num_frames(), ErrorCode::kDimensionMismatch,
          "frame counts differ: " + std::to_string(a.num_frames()) + " vs " +
              std::to_string(b.num_frames()));
  Require(a.frame_rate() == b.frame_rate(), ErrorCode::kDimensionMismatch,
          "frame rates differ");
  Matrix out(a.num_frames(), 2 * kStaticDim);
  for (std::size_t t = 0; t < a.num_frames(); ++t) {
    auto row = out.row(t);
    std::copy(a.values().row(t).begin(), a.values().row(t).end(), row.begin());
    std::copy(b.values().row(t).begin(), b.values().row(t).end(), row.begin() + kStaticDim);
  }
  return FeatureMatrix(std::move(out), FeatureKind::kCombo, a.frame_rate());
}

FeatureMatrix ExtractStatic(FeatureKind kind, const AudioBuffer &audio,
                            const FeatureConfig &cfg, ExtractionStats *stats) {
  switch (kind) {
    case FeatureKind::kMfcc: return ExtractMfcc(audio, cfg);
    case FeatureKind::kGfcc: return ExtractGfcc(audio, cfg);
    case FeatureKind::kPncc: return ExtractPncc(audio, cfg);
    case FeatureKind::kPlp: return ExtractPlp(audio, cfg, stats);
    case FeatureKind::kLsf: return ExtractLsf(audio, cfg, stats);
    case FeatureKind::kCombo: break;
  }
  Fail(ErrorCode::kInvalidArgument, "combo is not an extractor");
}

// FeatureSpec -------------------------------------------------------------------

FeatureSpec FeatureSpec::Parse(std::string_view name) {
  FeatureSpec spec;
  spec.name_ = std::string(name);
  auto invalid = [&]() {
    std::string valid;
    for (const auto &n : ValidNames()) valid += (valid.empty() ? "" : ", ") + n;
    Fail(ErrorCode::kInvalidArgument,
         "unknown feature '" + std::string(name) + "'; valid names: " + valid);
  };
  const auto plus = name.find('+');
  try {
    if (plus == std::string_view::npos) {
      const FeatureKind kind = ParseFeatureKind(name);
      if (kind == FeatureKind::kCombo) invalid();
      spec.parts_ = {kind};
      spec.with_deltas_ = kind != FeatureKind::kLsf;
    } else {
      const FeatureKind a = ParseFeatureKind(name.substr(0, plus));
      const FeatureKind b = ParseFeatureKind(name.substr(plus + 1));
      for (FeatureKind k : {a, b})
        if (k == FeatureKind::kLsf || k == FeatureKind::kCombo) invalid();
      spec.parts_ = {a, b};
    }
  } catch (const Error &) {
    invalid();
  }
  return spec;
}

std::vector<std::string> FeatureSpec::ValidNames() {
  return {"mfcc", "gfcc", "pncc", "plp", "lsf", "gfcc+pncc", "plp+gfcc", "plp+pncc"};
}

std::size_t FeatureSpec::dim() const {
  if (combo()) return 2 * kStaticDim;
  if (parts_.front() == FeatureKind::kLsf) return kLsfDim;
  return with_deltas_ ? 3 * kStaticDim : kStaticDim;
}

FeatureSpec FeatureSpec::StaticOnly() const {
  FeatureSpec copy = *this;
  copy.with_deltas_ = false;
  return copy;
}

FeatureMatrix FeatureSpec::Compose(const std::map<FeatureKind, FeatureMatrix> &statics,
                                   int delta_window) const {
  auto get = [&](FeatureKind k) -> const FeatureMatrix & {
    auto it = statics.find(k);
    Require(it != statics.end(), ErrorCode::kInvalidArgument,
            "missing static " + std::string(FeatureKindName(k)) + " features");
    return it->second;
  };
  if (combo()) return ConcatStatic(get(parts_[0]), get(parts_[1]));
  const FeatureMatrix &s = get(parts_.front());
  return with_deltas_ ? AddDeltas(s, delta_window) : s;
}

FeatureMatrix FeatureSpec::Extract(const AudioBuffer &audio, const FeatureConfig &cfg) const {
  std::map<FeatureKind, FeatureMatrix> statics;
  for (FeatureKind k : parts_)
    if (!statics.contains(k)) statics.emplace(k, ExtractStatic(k, audio, cfg));
  return Compose(statics, cfg.delta_window);
}

}  // namespace cepstra
