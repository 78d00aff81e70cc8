// src/dsp.cc

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

#include "cepstra/dsp.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace cepstra {

using std::numbers::pi;

bool IsPowerOfTwo(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

void Fft(std::span<std::complex<double>> data, bool inverse) {
  const std::size_t n = data.size();
  Require(IsPowerOfTwo(n), ErrorCode::kInvalidArgument,
          "FFT size must be a power of two, got " + std::to_string(n));
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // Twiddles computed directly (not by recurrence) to keep rounding
      // error independent of the transform size.
      const double angle = sign * 2.0 * pi * static_cast<double>(k) / len;
      const std::complex<double> w(std::cos(angle), std::sin(angle));
      for (std::size_t start = 0; start < n; start += len) {
        const auto u = data[start + k];
        const auto v = data[start + k + half] * w;
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
  if (inverse)
    for (auto &x : data) x /= static_cast<double>(n);
}

PowerSpectrumSequence PowerSpectrum(const FrameSequence &frames,
                                    std::size_t fft_size, bool magnitude) {
  Require(IsPowerOfTwo(fft_size), ErrorCode::kInvalidArgument,
          "fft_size must be a power of two");
  Require(fft_size >= frames.frame_len, ErrorCode::kInvalidArgument,
          "fft_size " + std::to_string(fft_size) + " is shorter than the frame (" +
              std::to_string(frames.frame_len) + ")");
  const std::size_t n_bins = fft_size / 2 + 1;
  PowerSpectrumSequence out;
  out.values = Matrix(frames.num_frames(), n_bins);
  out.fft_size = fft_size;
  out.bin_hz = frames.sample_rate > 0
                   ? static_cast<double>(frames.sample_rate) / fft_size
                   : 0.0;
  std::vector<std::complex<double>> buf(fft_size);
  for (std::size_t f = 0; f < frames.num_frames(); ++f) {
    const auto frame = frames.frames.row(f);
    std::fill(buf.begin(), buf.end(), std::complex<double>());
    std::copy(frame.begin(), frame.end(), buf.begin());
    Fft(buf);
    auto row = out.values.row(f);
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double p = std::norm(buf[k]);
      row[k] = magnitude ? std::sqrt(p) : p;
    }
  }
  return out;
}

// DCT -------------------------------------------------------------------------

namespace {

double DctScale(std::size_t k, std::size_t n) {
  return k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
}

}  // namespace

DctPlan::DctPlan(std::size_t n_in, std::size_t n_out)
    : n_in_(n_in), basis_(n_out, n_in) {
  Require(n_in > 0 && n_out <= n_in, ErrorCode::kInvalidArgument,
          "DCT output size " + std::to_string(n_out) + " exceeds input size " +
              std::to_string(n_in));
  for (std::size_t k = 0; k < n_out; ++k)
    for (std::size_t n = 0; n < n_in; ++n)
      basis_(k, n) = DctScale(k, n_in) * std::cos(pi * (n + 0.5) * k / n_in);
}

void DctPlan::Apply(std::span<const double> input, std::span<double> output) const {
  Require(input.size() == n_in_ && output.size() == basis_.rows(),
          ErrorCode::kDimensionMismatch, "DCT plan size mismatch");
  for (std::size_t k = 0; k < basis_.rows(); ++k) {
    const auto b = basis_.row(k);
    double acc = 0.0;
    for (std::size_t n = 0; n < n_in_; ++n) acc += b[n] * input[n];
    output[k] = acc;
  }
}

std::vector<double> DctII(std::span<const double> input, std::size_t n_out) {
  Require(n_out <= input.size(), ErrorCode::kInvalidArgument,
          "DCT output size exceeds input length");
  if (n_out == 0) return {};
  std::vector<double> out(n_out);
  DctPlan(input.size(), n_out).Apply(input, out);
  return out;
}

std::vector<double> InverseDctII(std::span<const double> coeffs) {
  const std::size_t n = coeffs.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      acc += DctScale(k, n) * coeffs[k] * std::cos(pi * (i + 0.5) * k / n);
    out[i] = acc;
  }
  return out;
}

// Scales ----------------------------------------------------------------------

double MelScale(double hz) {
  Require(hz >= 0.0, ErrorCode::kInvalidArgument, "frequency must be nonnegative");
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

double Erb(double hz) {
  Require(hz >= 0.0, ErrorCode::kInvalidArgument, "frequency must be nonnegative");
  return 24.7 * (4.37 * hz / 1000.0 + 1.0);
}

namespace {
constexpr double kErbSlope = 4.37 / 1000.0;
constexpr double kErbMin = 24.7;
}  // namespace

double ErbRate(double hz) {
  return std::log1p(kErbSlope * hz) / (kErbMin * kErbSlope);
}

double ErbRateToHz(double erb_rate) {
  return std::expm1(erb_rate * kErbMin * kErbSlope) / kErbSlope;
}

double BarkScale(double hz) { return 6.0 * std::asinh(hz / 600.0); }

// Filterbanks -------------------------------------------------------------------

namespace {

void CheckBankRange(std::size_t n, std::size_t fft_size, int sample_rate,
                    double f_min, double f_max) {
  Require(n > 0, ErrorCode::kInvalidArgument, "filterbank needs at least one channel");
  Require(IsPowerOfTwo(fft_size), ErrorCode::kInvalidArgument,
          "fft_size must be a power of two");
  Require(sample_rate > 0, ErrorCode::kInvalidArgument, "sample rate must be positive");
  Require(f_min >= 0.0 && f_min < f_max && f_max <= sample_rate / 2.0,
          ErrorCode::kInvalidArgument,
          "filterbank range requires 0 <= f_min < f_max <= Nyquist");
}

void CheckRowsNonEmpty(const FilterBank &bank) {
  for (std::size_t c = 0; c < bank.num_channels(); ++c) {
    const auto row = bank.weights.row(c);
    Require(std::any_of(row.begin(), row.end(), [](double w) { return w > 0.0; }),
            ErrorCode::kInvalidArgument,
            "filter " + std::to_string(c) +
                " covers no FFT bin; use fewer filters or a larger FFT");
  }
}

}  // namespace

FilterBank MelFilterBank(std::size_t n_filters, std::size_t fft_size,
                         int sample_rate, double f_min, double f_max) {
  CheckBankRange(n_filters, fft_size, sample_rate, f_min, f_max);
  const std::size_t n_bins = fft_size / 2 + 1;
  const double bin_hz = static_cast<double>(sample_rate) / fft_size;
  const double mel_lo = MelScale(f_min);
  const double mel_hi = MelScale(f_max);

  // n + 2 points equally spaced in mel; filter i has its feet on points i and
  // i + 2 and its apex on point i + 1.
  const double step = (mel_hi - mel_lo) / static_cast<double>(n_filters + 1);
  FilterBank bank;
  bank.kind = FilterBankKind::kMelTriangular;
  bank.weights = Matrix(n_filters, n_bins);
  for (std::size_t i = 0; i < n_filters; ++i) {
    const double left = MelToHz(mel_lo + step * i);
    const double apex = MelToHz(mel_lo + step * (i + 1));
    const double right = MelToHz(mel_lo + step * (i + 2));
    bank.center_freqs.push_back(apex);
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > left && f <= apex) w = (f - left) / (apex - left);
      else if (f > apex && f < right) w = (right - f) / (right - apex);
      bank.weights(i, k) = w;
    }
  }
  CheckRowsNonEmpty(bank);
  return bank;
}

double GammatoneMagnitude(double hz, double center_hz, int order) {
  const double b = 1.019 * Erb(center_hz);
  const std::complex<double> pos(b, hz - center_hz);
  const std::complex<double> neg(b, hz + center_hz);
  return std::abs(std::pow(pos, -order) + std::pow(neg, -order));
}

FilterBank GammatoneFilterBank(std::size_t n_channels, std::size_t fft_size,
                               int sample_rate, double f_min, double f_max,
                               int order) {
  CheckBankRange(n_channels, fft_size, sample_rate, f_min, f_max);
  Require(order >= 1, ErrorCode::kInvalidArgument, "gammatone order must be >= 1");
  const std::size_t n_bins = fft_size / 2 + 1;
  const double bin_hz = static_cast<double>(sample_rate) / fft_size;
  const double lo = ErbRate(f_min);
  const double step = (ErbRate(f_max) - lo) / static_cast<double>(n_channels);

  FilterBank bank;
  bank.kind = FilterBankKind::kGammatoneMagnitude;
  bank.weights = Matrix(n_channels, n_bins);
  for (std::size_t c = 0; c < n_channels; ++c) {
    const double fc = ErbRateToHz(lo + step * (c + 0.5));
    bank.center_freqs.push_back(fc);
    auto row = bank.weights.row(c);
    double peak = 0.0;
    for (std::size_t k = 0; k < n_bins; ++k) {
      row[k] = GammatoneMagnitude(k * bin_hz, fc, order);
      peak = std::max(peak, row[k]);
    }
    for (double &w : row) w /= peak;
  }
  CheckRowsNonEmpty(bank);
  return bank;
}

FilterBank BarkFilterBank(std::size_t n_bands, std::size_t fft_size,
                          int sample_rate) {
  CheckBankRange(n_bands, fft_size, sample_rate, 0.0, sample_rate / 2.0);
  Require(n_bands >= 2, ErrorCode::kInvalidArgument, "need at least two Bark bands");
  const std::size_t n_bins = fft_size / 2 + 1;
  const double bin_hz = static_cast<double>(sample_rate) / fft_size;
  const double nyquist_bark = BarkScale(sample_rate / 2.0);
  const double step = nyquist_bark / static_cast<double>(n_bands - 1);

  FilterBank bank;
  bank.kind = FilterBankKind::kBarkCriticalBand;
  bank.weights = Matrix(n_bands, n_bins);
  for (std::size_t i = 0; i < n_bands; ++i) {
    const double center = step * i;
    bank.center_freqs.push_back(600.0 * std::sinh(center / 6.0));
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double d = BarkScale(k * bin_hz) - center;
      double w = 0.0;
      if (d >= -1.3 && d <= -0.5) w = std::pow(10.0, 2.5 * (d + 0.5));
      else if (d > -0.5 && d < 0.5) w = 1.0;
      else if (d >= 0.5 && d <= 2.5) w = std::pow(10.0, -(d - 0.5));
      bank.weights(i, k) = w;
    }
  }
  CheckRowsNonEmpty(bank);
  return bank;
}

Matrix ApplyFilterBank(const PowerSpectrumSequence &spectrum, const FilterBank &bank) {
  Require(spectrum.values.cols() == bank.num_bins(), ErrorCode::kDimensionMismatch,
          "spectrum has " + std::to_string(spectrum.values.cols()) +
              " bins, filterbank expects " + std::to_string(bank.num_bins()));
  const std::size_t n_frames = spectrum.values.rows();
  Matrix out(n_frames, bank.num_channels());
  for (std::size_t f = 0; f < n_frames; ++f) {
    const auto s = spectrum.values.row(f);
    for (std::size_t c = 0; c < bank.num_channels(); ++c) {
      const auto w = bank.weights.row(c);
      double acc = 0.0;
      for (std::size_t k = 0; k < s.size(); ++k) acc += w[k] * s[k];
      out(f, c) = acc;
    }
  }
  return out;
}

// Linear prediction -----------------------------------------------------------

std::vector<double> Autocorrelation(std::span<const double> frame, std::size_t max_lag) {
  Require(max_lag < frame.size(), ErrorCode::kInvalidArgument,
          "max_lag must be smaller than the frame length");
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double acc = 0.0;
    for (std::size_t n = 0; n + k < frame.size(); ++n) acc += frame[n] * frame[n + k];
    r[k] = acc;
  }
  return r;
}

LpcResult LevinsonDurbin(std::span<const double> r, std::size_t order) {
  Require(r.size() >= order + 1, ErrorCode::kInvalidArgument,
          "autocorrelation too short for LPC order " + std::to_string(order));
  Require(r[0] > 0.0, ErrorCode::kInvalidArgument,
          "r[0] must be positive (silent frame?)");
  LpcResult res;
  res.lpc.assign(order, 0.0);
  res.reflection.assign(order, 0.0);
  double err = r[0];
  std::vector<double> prev(order, 0.0);
  for (std::size_t i = 0; i < order; ++i) {
    double acc = r[i + 1];
    for (std::size_t j = 0; j < i; ++j) acc -= res.lpc[j] * r[i - j];
    const double k = acc / err;
    if (!(std::abs(k) < 1.0))
      Fail(ErrorCode::kUnstableFilter,
           "reflection coefficient " + std::to_string(i + 1) + " = " +
               std::to_string(k) + " is not inside (-1, 1)");
    res.reflection[i] = k;
    std::copy(res.lpc.begin(), res.lpc.begin() + i, prev.begin());
    res.lpc[i] = k;
    for (std::size_t j = 0; j < i; ++j) res.lpc[j] = prev[j] - k * prev[i - 1 - j];
    err *= 1.0 - k * k;
  }
  res.gain = err;
  return res;
}

std::vector<double> LpcToCepstrum(std::span<const double> lpc, double gain,
                                  std::size_t n_ceps) {
  Require(gain > 0.0, ErrorCode::kInvalidArgument, "LPC gain must be positive");
  std::vector<double> c(n_ceps, 0.0);
  if (n_ceps == 0) return c;
  c[0] = std::log(gain);
  const std::size_t p = lpc.size();
  for (std::size_t n = 1; n < n_ceps; ++n) {
    double acc = n <= p ? lpc[n - 1] : 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      if (n - k <= p) acc += (static_cast<double>(k) / n) * c[k] * lpc[n - k - 1];
    }
    c[n] = acc;
  }
  return c;
}

}  // namespace cepstra
