// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#include "pdbl/pipeline.hpp"

#include <map>

#include "pdbl/dbblock.hpp"
#include "pdbl/error.hpp"
#include "pdbl/feature_io.hpp"
#include "pdbl/image_io.hpp"
#include "pdbl/parallel.hpp"

namespace pdbl {

FeatureSet build_features(const Dataset& ds, const PyramidSpec& spec, const Backbone& backbone, int threads) {
  if (ds.size() == 0) throw InvalidArgument("dataset is empty");
  std::vector<std::vector<double>> rows(ds.size());
  parallel_for(ds.size(), threads, [&](std::size_t i) {
    rows[i] = pyramidal_feature(io::load_image(ds.samples()[i].path), spec, backbone);
  });
  return {stack_rows(rows), {spec.scales(), backbone.identifier(), backbone.stage_channels()}};
}

FeatureSet load_features(const Dataset& ds, const std::filesystem::path& pdbf, const PyramidSpec& spec) {
  FeatureReader reader(pdbf);
  validate_pyramid(reader.header(), spec);
  std::map<std::string, std::size_t> wanted;
  for (std::size_t i = 0; i < ds.size(); ++i) wanted.emplace(ds.samples()[i].id, i);
  std::vector<std::vector<double>> rows(ds.size());
  std::vector<bool> found(ds.size(), false);
  while (auto s = reader.next()) {
    const auto it = wanted.find(s->id);
    if (it == wanted.end()) continue;
    rows[it->second] = pyramidal_feature(s->scales);
    found[it->second] = true;
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!found[i]) {
      throw FormatError("feature file '" + pdbf.string() + "' has no sample '" + ds.samples()[i].id + "'");
    }
  }
  const auto& meta = reader.header().metadata;
  std::string backbone = "external";
  if (meta.contains("backbone")) {
    backbone = meta["backbone"].is_string() ? meta["backbone"].get<std::string>() : meta["backbone"].dump();
  }
  return {stack_rows(rows), {spec.scales(), backbone, reader.header().stage_channels()}};
}

FeatureSet obtain_features(const Dataset& ds, const PyramidSpec& spec, const FeatureSource& source, int threads) {
  if (const auto* toy = std::get_if<ToyBackboneConfig>(&source)) {
    return build_features(ds, spec, ToyBackbone(*toy), threads);
  }
  return load_features(ds, std::get<std::filesystem::path>(source), spec);
}

Matrix select_rows(const Matrix& m, const std::vector<std::size_t>& indices) {
  Matrix out(static_cast<Eigen::Index>(indices.size()), m.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(indices[i]));
  return out;
}

std::vector<nlohmann::json> ExperimentResult::records() const {
  std::vector<nlohmann::json> out;
  for (const auto& f : folds) {
    out.push_back({{"proportion", f.proportion},
                   {"fold", f.fold},
                   {"train_size", f.train_size},
                   {"test_size", f.test_size},
                   {"p", f.p},
                   {"d", f.d},
                   {"ridge_residual", f.ridge_residual},
                   {"report", to_json(f.report)}});
  }
  for (const auto& s : summaries) out.push_back({{"proportion", s.proportion}, {"summary", to_json(s.stats)}});
  return out;
}

std::string ExperimentResult::to_jsonl() const {
  std::string out;
  for (const auto& r : records()) out += r.dump() + "\n";
  return out;
}

ExperimentResult run_experiment(const Dataset& ds, const FeatureSet& features, const ExperimentConfig& cfg) {
  if (static_cast<std::size_t>(features.rows.rows()) != ds.size()) {
    throw InvalidArgument("feature rows do not match dataset size");
  }
  if (cfg.proportions.empty()) throw InvalidArgument("experiment needs at least one proportion");
  std::vector<std::string> labels;
  for (const auto& s : ds.samples()) labels.push_back(s.label);

  ExperimentResult result;
  for (double proportion : cfg.proportions) {
    const auto folds = split(ds, {proportion, cfg.seed, cfg.stratified, cfg.repeats});
    std::vector<EvalReport> reports;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const auto& fold = folds[f];
      std::vector<std::string> train_labels;
      for (auto i : fold.train) train_labels.push_back(labels[i]);
      const auto fitted = fit_detailed(select_rows(features.rows, fold.train), train_labels, cfg.fit, features.provenance);
      const auto& model = fitted.model;

      std::vector<int> truth, predicted;
      if (!fold.test.empty()) {
        const auto pred = predict(model, select_rows(features.rows, fold.test));
        predicted = pred.labels;
        for (auto i : fold.test) {
          // The model's classes are the training labels; map back to the dataset's class set.
          truth.push_back(ds.class_index(labels[i]));
        }
        for (auto& p : predicted) p = ds.class_index(model.class_names[static_cast<std::size_t>(p)]);
      }
      FoldResult r;
      r.proportion = proportion;
      r.fold = static_cast<int>(f);
      r.train_size = fold.train.size();
      r.test_size = fold.test.size();
      r.p = model.input_dim();
      r.d = model.reduced_dim();
      r.ridge_residual = ridge_residual(fitted.reduced, fitted.targets, model.weights, model.lambda);
      r.report = evaluate(predicted, truth, ds.class_names());
      reports.push_back(r.report);
      result.folds.push_back(std::move(r));
    }
    if (cfg.repeats > 1) result.summaries.push_back({proportion, summarize(reports)});
  }
  return result;
}

ExperimentResult run_experiment(const Dataset& ds, const FeatureSource& source, const ExperimentConfig& cfg) {
  return run_experiment(ds, obtain_features(ds, cfg.pyramid, source, cfg.threads), cfg);
}

}  // namespace pdbl
