// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

// Closed-form broad-learning head: z-score normalisation, uncentered PCA of
// the feature covariance, ridge output weights and linear inference.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdbl/pyramid.hpp"

namespace pdbl {

/// n×p, one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultLambda = 1e-8;
inline constexpr double kDefaultEpsilon = 1e-8;
inline constexpr int kMaxTargetDimension = 2000;

/// Per-column statistics frozen at fit time.
struct Normalizer {
  Vector mean;
  Vector stddev;  // population
  double epsilon = kDefaultEpsilon;

  Eigen::Index columns() const noexcept { return mean.size(); }
};

Normalizer fit_normalizer(const Matrix& raw, double epsilon = kDefaultEpsilon);

/// (x - mean) / std per column; columns whose std is below epsilon map to 0.
Matrix apply_normalizer(const Normalizer& norm, const Matrix& raw);

/// floor(0.9 n) for n <= 2000, otherwise 2000; capped at p and at least 1.
int target_dimension(long long n, long long p);

struct PcaModel {
  Matrix basis;  // p×d, orthonormal columns

  Eigen::Index input_dim() const noexcept { return basis.rows(); }
  Eigen::Index dim() const noexcept { return basis.cols(); }
};

/// Covariance C = (1/n) BᵀB, taken as-is without centering.
Matrix covariance(const Matrix& normalized);

/// Leading d left singular vectors of covariance(B), by descending singular
/// value. Each column is flipped so its largest-magnitude entry (first on
/// ties) is nonnegative. The singular values used are optionally returned.
PcaModel pca_fit(const Matrix& normalized, int d, Vector* singular_values = nullptr);

/// A = B·U.
Matrix project(const Matrix& normalized, const PcaModel& pca);

/// {0,1} targets, n×c.
Matrix one_hot(std::span<const int> labels, int classes);

/// W = (AᵀA + λI)⁻¹ AᵀY by Cholesky, with an SVD solve as fallback.
Matrix solve_weights(const Matrix& features, const Matrix& targets, double lambda);

/// ‖AᵀAW + λW − AᵀY‖∞ / max(1, ‖AᵀY‖∞): the relative ridge stationarity residual.
double ridge_residual(const Matrix& features, const Matrix& targets, const Matrix& weights, double lambda);

struct Prediction {
  Matrix scores;            // n×c
  std::vector<int> labels;  // argmax per row, lowest index on ties
};

Prediction infer(const Matrix& features, const Matrix& weights);

/// Where the features of a model came from; checked before predicting on new data.
struct Provenance {
  std::vector<Size> pyramid;
  std::string backbone;
  std::vector<int> stage_channels;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct PdblModel {
  Normalizer normalizer;
  PcaModel pca;
  Matrix weights;  // d×c
  std::vector<std::string> class_names;
  double lambda = kDefaultLambda;
  Provenance provenance;

  Eigen::Index input_dim() const noexcept { return normalizer.columns(); }
  Eigen::Index reduced_dim() const noexcept { return pca.dim(); }
  Eigen::Index classes() const noexcept { return weights.cols(); }
};

// Exact element-wise equality; differently shaped matrices compare unequal.
bool operator==(const Normalizer& a, const Normalizer& b);
bool operator==(const PcaModel& a, const PcaModel& b);
bool operator==(const Prediction& a, const Prediction& b);
bool operator==(const PdblModel& a, const PdblModel& b);

struct FitConfig {
  double lambda = kDefaultLambda;
  std::optional<int> dimension;  // overrides target_dimension
  double epsilon = kDefaultEpsilon;
};

struct FitResult {
  PdblModel model;
  Matrix reduced;         // A_train
  Matrix targets;         // Y_train
  Prediction training;    // scores of the training rows
};

/// Class order is the lexicographic order of the distinct labels.
FitResult fit_detailed(const Matrix& raw, std::span<const std::string> labels, const FitConfig& cfg = {},
                       Provenance provenance = {});

PdblModel fit(const Matrix& raw, std::span<const std::string> labels, const FitConfig& cfg = {},
              Provenance provenance = {});

/// Applies the frozen normaliser and basis, then the weights.
Prediction predict(const PdblModel& model, const Matrix& raw);

/// Stacks per-sample feature vectors into an n×p matrix.
Matrix stack_rows(std::span<const std::vector<double>> rows);

}  // namespace pdbl
