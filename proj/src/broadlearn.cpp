// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#include "pdbl/broadlearn.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pdbl/error.hpp"

namespace pdbl {
namespace {

template <typename A, typename B>
bool same_values(const A& a, const B& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string(what) + " contains non-finite values");
}

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

}  // namespace

bool operator==(const Normalizer& a, const Normalizer& b) {
  return a.epsilon == b.epsilon && same_values(a.mean, b.mean) && same_values(a.stddev, b.stddev);
}
bool operator==(const PcaModel& a, const PcaModel& b) { return same_values(a.basis, b.basis); }
bool operator==(const Prediction& a, const Prediction& b) {
  return a.labels == b.labels && same_values(a.scores, b.scores);
}
bool operator==(const PdblModel& a, const PdblModel& b) {
  return a.normalizer == b.normalizer && a.pca == b.pca && same_values(a.weights, b.weights) &&
         a.class_names == b.class_names && a.lambda == b.lambda && a.provenance == b.provenance;
}

Normalizer fit_normalizer(const Matrix& raw, double epsilon) {
  if (raw.rows() < 1 || raw.cols() < 1) throw InvalidArgument("normalizer needs a non-empty matrix");
  require_finite(raw, "feature matrix");
  if (!(epsilon > 0.0)) throw InvalidArgument("normalizer epsilon must be positive");
  const double n = static_cast<double>(raw.rows());
  Normalizer norm;
  norm.epsilon = epsilon;
  norm.mean = raw.colwise().sum().transpose() / n;
  norm.stddev.resize(raw.cols());
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    norm.stddev(j) = std::sqrt((raw.col(j).array() - norm.mean(j)).square().sum() / n);
  }
  return norm;
}

Matrix apply_normalizer(const Normalizer& norm, const Matrix& raw) {
  if (raw.cols() != norm.columns()) {
    throw InvalidArgument("dimension mismatch: normalizer has " + std::to_string(norm.columns()) +
                          " columns, matrix has " + std::to_string(raw.cols()));
  }
  require_finite(raw, "feature matrix");
  Matrix out(raw.rows(), raw.cols());
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    if (norm.stddev(j) < norm.epsilon) {
      out.col(j).setZero();
    } else {
      out.col(j) = (raw.col(j).array() - norm.mean(j)) / norm.stddev(j);
    }
  }
  return out;
}

int target_dimension(long long n, long long p) {
  if (n < 2 || p < 1) throw InvalidArgument("target_dimension needs n >= 2 and p >= 1");
  const long long rule = n <= kMaxTargetDimension ? (9 * n) / 10 : kMaxTargetDimension;
  const long long d = std::min(rule, p);
  return static_cast<int>(std::max(d, 1LL));
}

Matrix covariance(const Matrix& normalized) {
  if (normalized.rows() < 1) throw InvalidArgument("covariance needs at least one row");
  Matrix c = normalized.transpose() * normalized;
  c /= static_cast<double>(normalized.rows());
  return c;
}

PcaModel pca_fit(const Matrix& normalized, int d, Vector* singular_values) {
  const Eigen::Index n = normalized.rows();
  const Eigen::Index p = normalized.cols();
  if (d < 1 || d > std::min(n, p)) {
    throw InvalidArgument("PCA dimension d=" + std::to_string(d) + " outside [1, min(n, p) = " +
                          std::to_string(std::min(n, p)) + "]");
  }
  require_finite(normalized, "normalized feature matrix");
  const Matrix cov = covariance(normalized);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(cov, Eigen::ComputeFullU);
  if (svd.info() != Eigen::Success) throw NumericError("SVD of the covariance matrix did not converge");

  PcaModel pca;
  pca.basis = svd.matrixU().leftCols(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::Index arg = 0;
    pca.basis.col(j).cwiseAbs().maxCoeff(&arg);
    if (pca.basis(arg, j) < 0.0) pca.basis.col(j) *= -1.0;
  }
  if (singular_values) *singular_values = svd.singularValues().head(d);
  return pca;
}

Matrix project(const Matrix& normalized, const PcaModel& pca) {
  if (normalized.cols() != pca.input_dim()) {
    throw InvalidArgument("dimension mismatch: basis expects " + std::to_string(pca.input_dim()) +
                          " columns, matrix has " + std::to_string(normalized.cols()));
  }
  return normalized * pca.basis;
}

Matrix one_hot(std::span<const int> labels, int classes) {
  if (classes < 1) throw InvalidArgument("one_hot needs at least one class");
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) {
      throw InvalidArgument("label " + std::to_string(labels[i]) + " outside [0, " + std::to_string(classes) + ")");
    }
    y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return y;
}

Matrix solve_weights(const Matrix& features, const Matrix& targets, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("ridge constant must be positive");
  if (features.rows() != targets.rows()) {
    throw InvalidArgument("dimension mismatch: features " + shape(features) + " vs targets " + shape(targets));
  }
  require_finite(features, "design matrix");
  require_finite(targets, "target matrix");
  const Eigen::Index d = features.cols();
  Eigen::MatrixXd gram = features.transpose() * features;
  gram.diagonal().array() += lambda;
  const Eigen::MatrixXd rhs = features.transpose() * targets;

  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success) {
    Matrix w = llt.solve(rhs);
    if (w.allFinite()) return w;
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(gram, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericError("ridge system could not be factorized");
  Matrix w = svd.solve(rhs);
  if (!w.allFinite() || w.rows() != d) throw NumericError("ridge solve produced non-finite weights");
  return w;
}

double ridge_residual(const Matrix& features, const Matrix& targets, const Matrix& weights, double lambda) {
  const Eigen::MatrixXd aty = features.transpose() * targets;
  const Eigen::MatrixXd r = features.transpose() * (features * weights) + lambda * weights - aty;
  const double scale = std::max(1.0, aty.cwiseAbs().maxCoeff());
  return r.cwiseAbs().maxCoeff() / scale;
}

Prediction infer(const Matrix& features, const Matrix& weights) {
  if (features.cols() != weights.rows()) {
    throw InvalidArgument("dimension mismatch: reduced features have " + std::to_string(features.cols()) +
                          " columns, weights expect " + std::to_string(weights.rows()));
  }
  Prediction out;
  out.scores = features * weights;
  out.labels.resize(static_cast<std::size_t>(out.scores.rows()));
  for (Eigen::Index i = 0; i < out.scores.rows(); ++i) {
    int best = 0;
    for (Eigen::Index j = 1; j < out.scores.cols(); ++j) {
      if (out.scores(i, j) > out.scores(i, best)) best = static_cast<int>(j);
    }
    out.labels[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

FitResult fit_detailed(const Matrix& raw, std::span<const std::string> labels, const FitConfig& cfg,
                       Provenance provenance) {
  if (static_cast<std::size_t>(raw.rows()) != labels.size()) {
    throw InvalidArgument("feature matrix has " + std::to_string(raw.rows()) + " rows but " +
                          std::to_string(labels.size()) + " labels were given");
  }
  std::map<std::string, int> index;
  for (const auto& l : labels) index.emplace(l, 0);
  if (index.size() < 2) throw InvalidArgument("fitting needs at least two classes");
  std::vector<std::string> class_names;
  for (auto& [name, idx] : index) {
    idx = static_cast<int>(class_names.size());
    class_names.push_back(name);
  }
  std::vector<int> y;
  y.reserve(labels.size());
  for (const auto& l : labels) y.push_back(index.at(l));

  const Normalizer norm = fit_normalizer(raw, cfg.epsilon);
  const Matrix normalized = apply_normalizer(norm, raw);
  int d = cfg.dimension ? *cfg.dimension : target_dimension(raw.rows(), raw.cols());
  PcaModel pca = pca_fit(normalized, d);
  Matrix reduced = project(normalized, pca);
  Matrix targets = one_hot(y, static_cast<int>(class_names.size()));
  Matrix weights = solve_weights(reduced, targets, cfg.lambda);
  Prediction training = infer(reduced, weights);

  FitResult result{{norm, std::move(pca), std::move(weights), std::move(class_names), cfg.lambda, std::move(provenance)},
                   std::move(reduced),
                   std::move(targets),
                   std::move(training)};
  return result;
}

PdblModel fit(const Matrix& raw, std::span<const std::string> labels, const FitConfig& cfg, Provenance provenance) {
  return fit_detailed(raw, labels, cfg, std::move(provenance)).model;
}

Prediction predict(const PdblModel& model, const Matrix& raw) {
  if (raw.cols() != model.input_dim()) {
    throw InvalidArgument("dimension mismatch: model expects p=" + std::to_string(model.input_dim()) +
                          ", features have p=" + std::to_string(raw.cols()));
  }
  return infer(project(apply_normalizer(model.normalizer, raw), model.pca), model.weights);
}

Matrix stack_rows(std::span<const std::vector<double>> rows) {
  if (rows.empty()) throw InvalidArgument("cannot stack zero feature vectors");
  const std::size_t p = rows.front().size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != p) {
      throw InvalidArgument("feature vector " + std::to_string(i) + " has length " + std::to_string(rows[i].size()) +
                            ", expected " + std::to_string(p));
    }
    m.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(rows[i].data(), static_cast<Eigen::Index>(p));
  }
  return m;
}

}  // namespace pdbl
