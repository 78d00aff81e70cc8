// src/gmm.cc

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

#include "cepstra/gmm.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <random>

#include "cepstra/binary_io.h"

namespace cepstra {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);
constexpr double kDegenerateWeight = 1e-8;

double LogSumExp(std::span<const double> v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

}  // namespace

// Model -----------------------------------------------------------------------

GmmModel::GmmModel(std::vector<double> weights, Matrix means, Matrix variances)
    : weights_(std::move(weights)), means_(std::move(means)), variances_(std::move(variances)) {
  const std::size_t k = weights_.size();
  Require(k >= 1, ErrorCode::kInvalidArgument, "a mixture needs at least one component");
  Require(means_.rows() == k && variances_.rows() == k && means_.cols() == variances_.cols() &&
              means_.cols() > 0,
          ErrorCode::kDimensionMismatch, "inconsistent GMM parameter shapes");
  double sum = 0.0;
  for (double w : weights_) {
    Require(w >= 0.0 && std::isfinite(w), ErrorCode::kInvalidArgument,
            "mixture weights must be nonnegative");
    sum += w;
  }
  Require(std::abs(sum - 1.0) <= 1e-9, ErrorCode::kInvalidArgument,
          "mixture weights sum to " + std::to_string(sum) + ", not 1");
  for (double v : variances_.data())
    Require(v > 0.0 && std::isfinite(v), ErrorCode::kInvalidArgument,
            "variances must be positive");
  for (double m : means_.data())
    Require(std::isfinite(m), ErrorCode::kNonFinite, "means must be finite");
  CacheConstants();
}

void GmmModel::CacheConstants() {
  log_norm_.resize(weights_.size());
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    double log_det = 0.0;
    for (double v : variances_.row(j)) log_det += std::log(v);
    log_norm_[j] = std::log(weights_[j]) - 0.5 * (dim() * kLog2Pi + log_det);
  }
}

double GmmModel::Posteriors(std::span<const double> x, std::span<double> out) const {
  Require(x.size() == dim(), ErrorCode::kDimensionMismatch,
          "feature dimension " + std::to_string(x.size()) + " does not match model dimension " +
              std::to_string(dim()));
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    const auto mu = means_.row(j);
    const auto var = variances_.row(j);
    double quad = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double diff = x[i] - mu[i];
      quad += diff * diff / var[i];
    }
    out[j] = log_norm_[j] - 0.5 * quad;
  }
  const double total = LogSumExp(out.first(weights_.size()));
  for (std::size_t j = 0; j < weights_.size(); ++j) out[j] = std::exp(out[j] - total);
  return total;
}

double GmmModel::LogPdf(std::span<const double> x) const {
  std::vector<double> scratch(weights_.size());
  return Posteriors(x, scratch);
}

double GaussianLogPdf(std::span<const double> x, std::span<const double> mean,
                      std::span<const double> variance) {
  Require(x.size() == mean.size() && x.size() == variance.size(),
          ErrorCode::kDimensionMismatch, "Gaussian argument lengths differ");
  double acc = -0.5 * x.size() * kLog2Pi;
  for (std::size_t i = 0; i < x.size(); ++i) {
    Require(variance[i] > 0.0, ErrorCode::kInvalidArgument, "variance must be positive");
    const double d = x[i] - mean[i];
    acc -= 0.5 * (std::log(variance[i]) + d * d / variance[i]);
  }
  return acc;
}

double GmmLogPdf(const GmmModel &model, std::span<const double> x) { return model.LogPdf(x); }

// Initialization ------------------------------------------------------------

std::vector<double> VarianceFloor(const Matrix &data, double var_floor) {
  const std::size_t n = data.rows(), d = data.cols();
  std::vector<double> mean(d, 0.0), floor(d, 0.0);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t i = 0; i < d; ++i) mean[i] += data(t, i);
  for (double &m : mean) m /= static_cast<double>(n);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t i = 0; i < d; ++i) floor[i] += std::pow(data(t, i) - mean[i], 2);
  for (double &f : floor) {
    f /= static_cast<double>(n);
    f = f > 0.0 ? var_floor * f : var_floor;
  }
  return floor;
}

namespace {

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

// Nearest center per row; ties go to the lowest index.
void Assign(const Matrix &data, const Matrix &centers, std::vector<int> *assign,
            std::vector<double> *dist) {
  for (std::size_t t = 0; t < data.rows(); ++t) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t k = 0; k < centers.rows(); ++k) {
      const double d2 = SquaredDistance(data.row(t), centers.row(k));
      if (d2 < best) {
        best = d2;
        arg = static_cast<int>(k);
      }
    }
    (*assign)[t] = arg;
    (*dist)[t] = best;
  }
}

}  // namespace

GmmModel KMeansInit(const Matrix &data, std::size_t num_components, std::uint64_t seed,
                    int lloyd_iterations, double var_floor, std::vector<int> *assignment) {
  const std::size_t n = data.rows(), d = data.cols(), k_count = num_components;
  Require(n > 0 && d > 0, ErrorCode::kInsufficientData, "no data to cluster");
  Require(k_count >= 1 && k_count <= n, ErrorCode::kInvalidArgument,
          "k-means needs 1 <= K <= n_frames (K = " + std::to_string(k_count) +
              ", n_frames = " + std::to_string(n) + ")");
  std::mt19937_64 rng(seed);

  // k-means++ seeding.
  Matrix centers(k_count, d);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<char> chosen(n, 0);
  std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  for (std::size_t k = 0; k < k_count; ++k) {
    std::size_t pick = first;
    if (k > 0) {
      double total = 0.0;
      for (std::size_t t = 0; t < n; ++t) total += dist[t];
      if (total > 0.0) {
        const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
        double acc = 0.0;
        pick = n;
        for (std::size_t t = 0; t < n; ++t) {
          if (dist[t] <= 0.0) continue;
          acc += dist[t];
          pick = t;
          if (acc > u) break;
        }
      } else {
        // Every point coincides with a chosen center; take any unused one.
        std::vector<std::size_t> unused;
        for (std::size_t t = 0; t < n; ++t)
          if (!chosen[t]) unused.push_back(t);
        pick = unused[std::uniform_int_distribution<std::size_t>(0, unused.size() - 1)(rng)];
      }
    }
    chosen[pick] = 1;
    std::copy(data.row(pick).begin(), data.row(pick).end(), centers.row(k).begin());
    for (std::size_t t = 0; t < n; ++t)
      dist[t] = std::min(dist[t], SquaredDistance(data.row(t), centers.row(k)));
  }

  std::vector<int> assign(n, 0);
  std::vector<double> counts(k_count);
  for (int it = 0; it < lloyd_iterations; ++it) {
    Assign(data, centers, &assign, &dist);
    Matrix sums(k_count, d);
    std::fill(counts.begin(), counts.end(), 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      counts[assign[t]] += 1.0;
      for (std::size_t i = 0; i < d; ++i) sums(assign[t], i) += data(t, i);
    }
    for (std::size_t k = 0; k < k_count; ++k) {
      if (counts[k] > 0.0) {
        for (std::size_t i = 0; i < d; ++i) centers(k, i) = sums(k, i) / counts[k];
      } else {
        // Empty cluster: move it onto the worst-fitted point.
        const auto far = static_cast<std::size_t>(
            std::max_element(dist.begin(), dist.end()) - dist.begin());
        std::copy(data.row(far).begin(), data.row(far).end(), centers.row(k).begin());
        dist[far] = 0.0;
      }
    }
  }
  Assign(data, centers, &assign, &dist);

  const std::vector<double> floor = VarianceFloor(data, var_floor);
  std::fill(counts.begin(), counts.end(), 0.0);
  Matrix means(k_count, d), vars(k_count, d);
  for (std::size_t t = 0; t < n; ++t) {
    counts[assign[t]] += 1.0;
    for (std::size_t i = 0; i < d; ++i) means(assign[t], i) += data(t, i);
  }
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t i = 0; i < d; ++i)
      means(k, i) = counts[k] > 0.0 ? means(k, i) / counts[k] : centers(k, i);
  }
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t i = 0; i < d; ++i)
      vars(assign[t], i) += std::pow(data(t, i) - means(assign[t], i), 2);
  std::vector<double> weights(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    weights[k] = counts[k] / static_cast<double>(n);
    for (std::size_t i = 0; i < d; ++i) {
      const double v = counts[k] > 0.0 ? vars(k, i) / counts[k] : floor[i] / var_floor;
      vars(k, i) = std::max(v, floor[i]);
    }
  }
  if (assignment) *assignment = assign;
  return GmmModel(std::move(weights), std::move(means), std::move(vars));
}

// EM --------------------------------------------------------------------------

namespace {

// Average log-likelihood and responsibilities (n x K) under `model`.
double EStep(const GmmModel &model, const Matrix &data, Matrix *resp) {
  double total = 0.0;
  for (std::size_t t = 0; t < data.rows(); ++t) total += model.Posteriors(data.row(t), resp->row(t));
  return total / static_cast<double>(data.rows());
}

}  // namespace

TrainResult TrainEm(const Matrix &data, const EmOptions &options) {
  const std::size_t n = data.rows(), d = data.cols(), k_count = options.num_components;
  Require(n > 0 && d > 0, ErrorCode::kInsufficientData, "cannot train a GMM on empty data");
  Require(k_count >= 1, ErrorCode::kInvalidArgument, "number of mixtures must be >= 1");
  Require(n >= 10 * k_count, ErrorCode::kInsufficientData,
          std::to_string(n) + " frames are too few for " + std::to_string(k_count) +
              " mixtures (need >= " + std::to_string(10 * k_count) +
              "); use fewer mixtures or more data");
  for (double v : data.data())
    Require(std::isfinite(v), ErrorCode::kNonFinite, "training data contain non-finite values");

  const std::vector<double> floor = VarianceFloor(data, options.var_floor);
  GmmModel model = KMeansInit(data, k_count, options.seed, options.kmeans_iter, options.var_floor);
  TrainReport report;
  Matrix resp(n, k_count);

  for (int iter = 0; iter < options.max_iter; ++iter) {
    const double ll = EStep(model, data, &resp);
    if (!report.log_likelihood.empty() && ll - report.log_likelihood.back() < options.tol) {
      report.log_likelihood.push_back(ll);
      report.converged = true;
      break;
    }
    report.log_likelihood.push_back(ll);
    report.iterations = iter + 1;

    std::vector<double> occupancy(k_count, 0.0);
    Matrix means(k_count, d), vars(k_count, d);
    for (std::size_t t = 0; t < n; ++t) {
      const auto x = data.row(t);
      for (std::size_t k = 0; k < k_count; ++k) {
        const double g = resp(t, k);
        occupancy[k] += g;
        for (std::size_t i = 0; i < d; ++i) means(k, i) += g * x[i];
      }
    }
    for (std::size_t k = 0; k < k_count; ++k)
      if (occupancy[k] > 0.0)
        for (std::size_t i = 0; i < d; ++i) means(k, i) /= occupancy[k];
    for (std::size_t t = 0; t < n; ++t) {
      const auto x = data.row(t);
      for (std::size_t k = 0; k < k_count; ++k) {
        const double g = resp(t, k);
        for (std::size_t i = 0; i < d; ++i) vars(k, i) += g * std::pow(x[i] - means(k, i), 2);
      }
    }
    double occupancy_sum = 0.0;
    for (double o : occupancy) occupancy_sum += o;
    std::vector<double> weights(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
      weights[k] = occupancy[k] / occupancy_sum;
      for (std::size_t i = 0; i < d; ++i) {
        const double v = occupancy[k] > 0.0 ? vars(k, i) / occupancy[k] : floor[i];
        vars(k, i) = std::max(v, floor[i]);
      }
    }

    // Components that lost all support are split off the broadest one.
    for (std::size_t k = 0; k < k_count; ++k) {
      if (weights[k] >= kDegenerateWeight) continue;
      std::size_t broad = 0;
      double broad_var = -1.0;
      for (std::size_t j = 0; j < k_count; ++j) {
        if (weights[j] < kDegenerateWeight) continue;
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) s += vars(j, i);
        if (s > broad_var) {
          broad_var = s;
          broad = j;
        }
      }
      std::size_t axis = 0;
      for (std::size_t i = 1; i < d; ++i)
        if (vars(broad, i) > vars(broad, axis)) axis = i;
      for (std::size_t i = 0; i < d; ++i) {
        means(k, i) = means(broad, i);
        vars(k, i) = vars(broad, i);
      }
      const double shift = std::sqrt(vars(broad, axis));
      means(k, axis) += shift;
      means(broad, axis) -= shift;
      weights[k] = weights[broad] = 0.5 * (weights[k] + weights[broad]);
      ++report.reseeded_components;
      report.reseed_iterations.push_back(iter);
    }
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    for (double &w : weights) w /= wsum;
    model = GmmModel(std::move(weights), std::move(means), std::move(vars));
  }
  if (!report.converged) report.log_likelihood.push_back(EStep(model, data, &resp));
  return {std::move(model), std::move(report)};
}

double ScoreUtterance(const GmmModel &model, const Matrix &features) {
  Require(features.rows() > 0, ErrorCode::kNoSamples, "cannot score an empty feature matrix");
  Require(features.cols() == model.dim(), ErrorCode::kDimensionMismatch,
          "feature dimension " + std::to_string(features.cols()) +
              " does not match model dimension " + std::to_string(model.dim()));
  std::vector<double> scratch(model.num_components());
  double total = 0.0;
  for (std::size_t t = 0; t < features.rows(); ++t)
    total += model.Posteriors(features.row(t), scratch);
  return total / static_cast<double>(features.rows());
}

// Model files ---------------------------------------------------------------

namespace {
constexpr char kModelMagic[4] = {'C', 'B', 'G', 'M'};
constexpr std::uint16_t kModelVersion = 1;
}  // namespace

void WriteModelFile(const GmmModel &model, const std::filesystem::path &path) {
  ByteWriter w;
  w.Bytes(kModelMagic, 4);
  w.U16(kModelVersion);
  w.U32(static_cast<std::uint32_t>(model.num_components()));
  w.U32(static_cast<std::uint32_t>(model.dim()));
  for (double v : model.weights()) w.F64(v);
  for (double v : model.means().data()) w.F64(v);
  for (double v : model.variances().data()) w.F64(v);
  w.WriteTo(path);
}

GmmModel ReadModelFile(const std::filesystem::path &path) {
  ByteReader r(path);
  char magic[4];
  r.Bytes(magic, 4);
  Require(std::memcmp(magic, kModelMagic, 4) == 0, ErrorCode::kFormat,
          path.string() + " is not a model file");
  const std::uint16_t version = r.U16();
  Require(version == kModelVersion, ErrorCode::kFormat,
          "unsupported model file version " + std::to_string(version));
  const std::uint32_t k = r.U32();
  const std::uint32_t d = r.U32();
  std::vector<double> weights(k);
  for (double &w : weights) w = r.F64();
  Matrix means(k, d), vars(k, d);
  for (double &v : means.data()) v = r.F64();
  for (double &v : vars.data()) v = r.F64();
  r.ExpectEnd();
  return GmmModel(std::move(weights), std::move(means), std::move(vars));
}

}  // namespace cepstra
