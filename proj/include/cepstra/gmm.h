// include/cepstra/gmm.h

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

#ifndef CEPSTRA_GMM_H_
#define CEPSTRA_GMM_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cepstra/common.h"

namespace cepstra {

/// Diagonal-covariance Gaussian mixture.
class GmmModel {
 public:
  GmmModel() = default;
  /// Checks shapes, that weights are nonnegative and sum to 1 (within 1e-9),
  /// and that all variances are positive.
  GmmModel(std::vector<double> weights, Matrix means, Matrix variances);

  std::size_t num_components() const noexcept { return weights_.size(); }
  std::size_t dim() const noexcept { return means_.cols(); }
  const std::vector<double> &weights() const noexcept { return weights_; }
  const Matrix &means() const noexcept { return means_; }
  const Matrix &variances() const noexcept { return variances_; }

  /// log p(x) = logsumexp_j (log w_j + log N(x | mu_j, diag(var_j))).
  double LogPdf(std::span<const double> x) const;

  /// Posterior component probabilities for x; returns log p(x).
  double Posteriors(std::span<const double> x, std::span<double> out) const;

  bool operator==(const GmmModel &other) const = default;

 private:
  void CacheConstants();

  std::vector<double> weights_;
  Matrix means_;
  Matrix variances_;
  // log w_j - 0.5 (d log 2pi + sum log var_j), per component.
  std::vector<double> log_norm_;
};

/// Log of the diagonal Gaussian density. Throws kInvalidArgument on a
/// nonpositive variance and kDimensionMismatch on mismatched lengths.
double GaussianLogPdf(std::span<const double> x, std::span<const double> mean,
                      std::span<const double> variance);

double GmmLogPdf(const GmmModel &model, std::span<const double> x);

struct EmOptions {
  std::size_t num_components = 16;
  std::uint64_t seed = 0;
  int max_iter = 100;
  double tol = 1e-5;
  /// Variance floor as a fraction of the per-dimension variance of the data.
  double var_floor = 1e-4;
  int kmeans_iter = 10;
};

struct TrainReport {
  int iterations = 0;
  /// Average per-frame log-likelihood of the data before each M-step, then
  /// the value under the final model.
  std::vector<double> log_likelihood;
  bool converged = false;
  std::size_t reseeded_components = 0;
  /// Iterations at which a component was re-seeded (likelihood may drop).
  std::vector<int> reseed_iterations;
};

struct TrainResult {
  GmmModel model;
  TrainReport report;
};

/// Per-dimension floor: var_floor times the data variance in that dimension
/// (or var_floor itself when the data are constant along a dimension).
std::vector<double> VarianceFloor(const Matrix &data, double var_floor);

/// k-means++ seeding followed by Lloyd iterations. Variances come from the
/// within-cluster scatter (floored), weights from occupancy. Requires
/// 1 <= K <= n_frames.
GmmModel KMeansInit(const Matrix &data, std::size_t num_components, std::uint64_t seed,
                    int lloyd_iterations = 10, double var_floor = 1e-4,
                    std::vector<int> *assignment = nullptr);

/// Maximum-likelihood fit by EM from a k-means start. Requires at least
/// 10 K frames. Stops when the gain in average log-likelihood drops below
/// tol or after max_iter iterations.
TrainResult TrainEm(const Matrix &data, const EmOptions &options);

/// Mean over frames of log p(x_t). Throws on an empty matrix or a dimension
/// mismatch.
double ScoreUtterance(const GmmModel &model, const Matrix &features);

/// Binary little-endian: "CBGM", u16 version, u32 K, u32 d, then weights,
/// means and variances as f64, row-major.
void WriteModelFile(const GmmModel &model, const std::filesystem::path &path);
GmmModel ReadModelFile(const std::filesystem::path &path);

}  // namespace cepstra

#endif  // CEPSTRA_GMM_H_
