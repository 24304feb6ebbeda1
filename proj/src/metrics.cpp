// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#include "pdbl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pdbl/error.hpp"

namespace pdbl {
namespace {

double ratio(std::int64_t num, std::int64_t den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; }

}  // namespace

EvalReport evaluate(std::span<const int> predicted, std::span<const int> truth,
                    std::span<const std::string> class_names) {
  if (predicted.size() != truth.size()) {
    throw InvalidArgument("prediction count " + std::to_string(predicted.size()) + " differs from truth count " +
                          std::to_string(truth.size()));
  }
  const int c = static_cast<int>(class_names.size());
  if (c < 1) throw InvalidArgument("evaluation needs at least one class");
  EvalReport r;
  r.class_names.assign(class_names.begin(), class_names.end());
  r.total = static_cast<std::int64_t>(truth.size());
  r.confusion.assign(c, std::vector<std::int64_t>(c, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= c || predicted[i] < 0 || predicted[i] >= c) {
      throw InvalidArgument("label index outside the declared class set at position " + std::to_string(i));
    }
    ++r.confusion[truth[i]][predicted[i]];
  }
  std::int64_t correct = 0;
  double f1_sum = 0.0;
  r.per_class.resize(c);
  for (int k = 0; k < c; ++k) {
    std::int64_t row = 0, col = 0;
    for (int j = 0; j < c; ++j) {
      row += r.confusion[k][j];
      col += r.confusion[j][k];
    }
    const std::int64_t tp = r.confusion[k][k];
    correct += tp;
    auto& m = r.per_class[k];
    m.support = row;
    m.precision = ratio(tp, col);
    m.recall = ratio(tp, row);
    m.f1 = (m.precision + m.recall) == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    f1_sum += m.f1;
  }
  r.accuracy = ratio(correct, r.total);
  r.macro_f1 = f1_sum / c;
  return r;
}

EvalReport evaluate(std::span<const std::string> predicted, std::span<const std::string> truth,
                    std::span<const std::string> class_names) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < class_names.size(); ++i) index.emplace(class_names[i], static_cast<int>(i));
  const auto to_index = [&](std::span<const std::string> labels) {
    std::vector<int> out;
    out.reserve(labels.size());
    for (const auto& l : labels) {
      const auto it = index.find(l);
      if (it == index.end()) throw InvalidArgument("label '" + l + "' is not a declared class");
      out.push_back(it->second);
    }
    return out;
  };
  const auto p = to_index(predicted);
  const auto t = to_index(truth);
  return evaluate(std::span<const int>(p), std::span<const int>(t), class_names);
}

FoldStatistics summarize(std::span<const EvalReport> folds) {
  FoldStatistics s;
  s.folds = static_cast<int>(folds.size());
  if (folds.empty()) return s;
  const double n = static_cast<double>(folds.size());
  for (const auto& f : folds) {
    s.accuracy_mean += f.accuracy;
    s.macro_f1_mean += f.macro_f1;
  }
  s.accuracy_mean /= n;
  s.macro_f1_mean /= n;
  double va = 0.0, vf = 0.0;
  for (const auto& f : folds) {
    va += (f.accuracy - s.accuracy_mean) * (f.accuracy - s.accuracy_mean);
    vf += (f.macro_f1 - s.macro_f1_mean) * (f.macro_f1 - s.macro_f1_mean);
  }
  s.accuracy_sd = std::sqrt(va / n);
  s.macro_f1_sd = std::sqrt(vf / n);
  return s;
}

nlohmann::json to_json(const EvalReport& r) {
  auto per_class = nlohmann::json::array();
  for (std::size_t k = 0; k < r.per_class.size(); ++k) {
    const auto& m = r.per_class[k];
    per_class.push_back({{"class", r.class_names[k]},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"support", m.support}});
  }
  return {{"total", r.total},       {"accuracy", r.accuracy},   {"macro_f1", r.macro_f1},
          {"per_class", per_class}, {"confusion", r.confusion}, {"class_names", r.class_names}};
}

nlohmann::json to_json(const FoldStatistics& s) {
  return {{"folds", s.folds},
          {"accuracy_mean", s.accuracy_mean},
          {"accuracy_sd", s.accuracy_sd},
          {"macro_f1_mean", s.macro_f1_mean},
          {"macro_f1_sd", s.macro_f1_sd}};
}

}  // namespace pdbl
