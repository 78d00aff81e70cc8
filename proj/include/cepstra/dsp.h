// include/cepstra/dsp.h

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

#ifndef CEPSTRA_DSP_H_
#define CEPSTRA_DSP_H_

#include <complex>
#include <span>
#include <vector>

#include "cepstra/audio.h"
#include "cepstra/common.h"

namespace cepstra {

// Spectra ---------------------------------------------------------------------

/// In-place iterative radix-2 FFT. The size must be a power of two.
void Fft(std::span<std::complex<double>> data, bool inverse = false);

bool IsPowerOfTwo(std::size_t n);

struct PowerSpectrumSequence {
  Matrix values;  // n_frames x (fft_size / 2 + 1), all >= 0
  double bin_hz = 0.0;
  std::size_t fft_size = 0;
};

/// |DFT|^2 of each zero-padded frame, bins 0 .. fft_size / 2. Set `magnitude`
/// to get |DFT| instead.
PowerSpectrumSequence PowerSpectrum(const FrameSequence &frames,
                                    std::size_t fft_size, bool magnitude = false);

/// Orthonormal DCT-II. Returns the first `n_out` coefficients.
std::vector<double> DctII(std::span<const double> input, std::size_t n_out);

/// Inverse of the full orthonormal DCT-II (i.e. DCT-III).
std::vector<double> InverseDctII(std::span<const double> coeffs);

/// Cached DCT-II basis for repeated transforms of a fixed size.
class DctPlan {
 public:
  DctPlan(std::size_t n_in, std::size_t n_out);
  void Apply(std::span<const double> input, std::span<double> output) const;
  std::size_t n_in() const noexcept { return n_in_; }
  std::size_t n_out() const noexcept { return basis_.rows(); }

 private:
  std::size_t n_in_;
  Matrix basis_;  // n_out x n_in
};

// Auditory scales -----------------------------------------------------------

/// 2595 log10(1 + f / 700).
double MelScale(double hz);
double MelToHz(double mel);

/// Equivalent rectangular bandwidth, 24.7 (4.37 f / 1000 + 1).
double Erb(double hz);

/// Number of ERBs below f (integral of 1 / ERB), and its inverse.
double ErbRate(double hz);
double ErbRateToHz(double erb_rate);

/// Bark scale, 6 asinh(f / 600).
double BarkScale(double hz);

// Filterbanks ---------------------------------------------------------------

enum class FilterBankKind { kMelTriangular, kGammatoneMagnitude, kBarkCriticalBand };

struct FilterBank {
  Matrix weights;                    // n_channels x n_bins, nonnegative
  std::vector<double> center_freqs;  // Hz, strictly increasing
  FilterBankKind kind = FilterBankKind::kMelTriangular;

  std::size_t num_channels() const noexcept { return weights.rows(); }
  std::size_t num_bins() const noexcept { return weights.cols(); }
};

/// Triangular filters on n + 2 points equally spaced in mel from mel(f_min)
/// to mel(f_max). Filter i rises from point i to its apex at point i + 1 and
/// falls to point i + 2, so the outermost feet sit on f_min and f_max.
FilterBank MelFilterBank(std::size_t n_filters, std::size_t fft_size,
                         int sample_rate, double f_min, double f_max);

/// Peak-normalized magnitude responses of the gammatone impulse response
/// t^(n-1) exp(-2 pi b t) cos(2 pi f_c t), b = 1.019 ERB(f_c), sampled on the
/// FFT bin grid. Centers are equally spaced on the ERB-rate scale, each at the
/// middle of its own slice of [f_min, f_max].
FilterBank GammatoneFilterBank(std::size_t n_channels, std::size_t fft_size,
                               int sample_rate, double f_min, double f_max,
                               int order = 4);

/// Analytic magnitude response (unnormalized) of one gammatone channel.
double GammatoneMagnitude(double hz, double center_hz, int order);

/// Trapezoidal critical-band masking curves spaced evenly on the Bark scale
/// from 0 to Nyquist, as used by PLP.
FilterBank BarkFilterBank(std::size_t n_bands, std::size_t fft_size,
                          int sample_rate);

/// Per-frame channel energies: spectrum (n_frames x n_bins) times weights^T.
Matrix ApplyFilterBank(const PowerSpectrumSequence &spectrum, const FilterBank &bank);

// Linear prediction ---------------------------------------------------------

/// r[k] = sum_n x[n] x[n + k] for k = 0 .. max_lag.
std::vector<double> Autocorrelation(std::span<const double> frame, std::size_t max_lag);

struct LpcResult {
  /// Predictor coefficients a[1..p]: x[n] ~ sum_k a[k] x[n - k]. The inverse
  /// filter is A(z) = 1 - sum_k a[k] z^-k.
  std::vector<double> lpc;
  std::vector<double> reflection;
  double gain = 0.0;  // final prediction-error power
};

/// Levinson-Durbin recursion. Throws kInvalidArgument when r[0] <= 0 and
/// kUnstableFilter when a reflection coefficient reaches magnitude 1.
LpcResult LevinsonDurbin(std::span<const double> r, std::size_t order);

/// Cepstrum of the all-pole model gain / A(z): c[0] = ln(gain),
/// c[n] = a[n] + sum_{k=1}^{n-1} (k / n) c[k] a[n-k].
std::vector<double> LpcToCepstrum(std::span<const double> lpc, double gain,
                                  std::size_t n_ceps);

}  // namespace cepstra

#endif  // CEPSTRA_DSP_H_
