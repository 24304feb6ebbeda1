// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#include "pdbl/commands.hpp"

#include <fstream>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "pdbl/dataset.hpp"
#include "pdbl/dbblock.hpp"
#include "pdbl/error.hpp"
#include "pdbl/feature_io.hpp"
#include "pdbl/image_io.hpp"
#include "pdbl/model_io.hpp"
#include "pdbl/parallel.hpp"
#include "pdbl/pipeline.hpp"
#include "pdbl/wsiseg.hpp"

namespace pdbl {
namespace {

namespace fs = std::filesystem;

// Runs `write` against a sibling temporary path and renames it into place;
// nothing is left at `target` if writing fails.
template <typename Write>
void write_atomically(const fs::path& target, Write&& write) {
  fs::path tmp = target;
  tmp += ".partial";
  try {
    write(tmp);
    fs::rename(tmp, target);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

void check_readable(const Dataset& ds) {
  for (const auto& s : ds.samples()) {
    if (!fs::is_regular_file(s.path)) {
      throw IoError("image for sample '" + s.id + "' not found: '" + s.path.string() + "'");
    }
  }
}

std::vector<std::string> labels_of(const Dataset& ds) {
  std::vector<std::string> out;
  for (const auto& s : ds.samples()) out.push_back(s.label);
  return out;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw FormatError("'" + path.string() + "' is not valid JSON");
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  write_atomically(path, [&](const fs::path& tmp) {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << text;
    out.close();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  });
}

}  // namespace

nlohmann::json cmd_extract(const fs::path& manifest, const Config& cfg, const fs::path& out) {
  const auto ds = Dataset::from_manifest(manifest);
  if (ds.size() == 0) throw InvalidArgument("manifest '" + manifest.string() + "' lists no samples");
  check_readable(ds);
  const ToyBackbone backbone(cfg.toy());

  const auto extract_one = [&](std::size_t i) {
    const auto& s = ds.samples()[i];
    FeatureSample fs_{s.id, s.label, {}};
    for (const auto& level : build_pyramid(io::load_image(s.path), cfg.pyramid)) {
      fs_.scales.push_back(backbone.extract(level));
    }
    return fs_;
  };

  write_atomically(out, [&](const fs::path& tmp) {
    const std::size_t chunk = static_cast<std::size_t>(cfg.threads) * 4;
    std::vector<FeatureSample> batch(std::min(chunk, ds.size()));
    parallel_for(batch.size(), cfg.threads, [&](std::size_t i) { batch[i] = extract_one(i); });

    FeatureHeader header;
    for (const auto& s : ds.samples()) header.sample_ids.push_back(s.id);
    header.labels = labels_of(ds);
    header.pyramid = cfg.pyramid.scales();
    header.shapes = shapes_of(batch.front().scales);
    header.metadata = {{"backbone", backbone.identifier()},
                       {"stage_layer", "post-pool activation of each stage"},
                       {"preprocessing", "8-bit RGB / 255, bilinear pyramid (pixel-centre)"}};
    FeatureWriter writer(tmp, std::move(header));
    for (const auto& s : batch) writer.write(s);
    for (std::size_t start = batch.size(); start < ds.size(); start += chunk) {
      const std::size_t n = std::min(chunk, ds.size() - start);
      batch.assign(n, {});
      parallel_for(n, cfg.threads, [&](std::size_t i) { batch[i] = extract_one(start + i); });
      for (const auto& s : batch) writer.write(s);
    }
    writer.finish();
  });

  return {{"command", "extract"},
          {"output", out.string()},
          {"samples", ds.size()},
          {"scales", cfg.pyramid.count()},
          {"stages", cfg.stage_channels.size()},
          {"backbone", backbone.identifier()}};
}

nlohmann::json cmd_fit(const fs::path& features, const fs::path& manifest, const Config& cfg, const fs::path& out) {
  const auto ds = Dataset::from_manifest(manifest);
  const auto fset = load_features(ds, features, cfg.pyramid);
  const auto labels = labels_of(ds);
  const auto fitted = fit_detailed(fset.rows, labels, cfg.fit, fset.provenance);
  write_atomically(out, [&](const fs::path& tmp) { save_model(tmp, fitted.model); });

  std::int64_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    correct += fitted.model.class_names[static_cast<std::size_t>(fitted.training.labels[i])] == labels[i];
  }
  return {{"command", "fit"},
          {"output", out.string()},
          {"n", fset.rows.rows()},
          {"p", fitted.model.input_dim()},
          {"d", fitted.model.reduced_dim()},
          {"c", fitted.model.classes()},
          {"lambda", fitted.model.lambda},
          {"class_names", fitted.model.class_names},
          {"train_accuracy", static_cast<double>(correct) / static_cast<double>(labels.size())},
          {"ridge_residual", ridge_residual(fitted.reduced, fitted.targets, fitted.model.weights, fitted.model.lambda)}};
}

nlohmann::json predict_features(const fs::path& model_path, const fs::path& features) {
  const auto model = load_model(model_path);
  FeatureReader reader(features);
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  while (auto s = reader.next()) {
    ids.push_back(s->id);
    rows.push_back(pyramidal_feature(s->scales));
  }
  if (rows.empty()) throw InvalidArgument("feature file '" + features.string() + "' holds no samples");
  const auto pred = predict(model, stack_rows(rows));
  if (!model.provenance.pyramid.empty()) validate_pyramid(reader.header(), PyramidSpec(model.provenance.pyramid));

  auto list = nlohmann::json::array();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto r = pred.scores.row(static_cast<Eigen::Index>(i));
    list.push_back({{"sample_id", ids[i]},
                    {"label", model.class_names[static_cast<std::size_t>(pred.labels[i])]},
                    {"scores", std::vector<double>(r.data(), r.data() + r.size())}});
  }
  return {{"class_names", model.class_names}, {"predictions", list}};
}

nlohmann::json cmd_predict(const fs::path& model, const fs::path& features, const std::optional<fs::path>& out) {
  auto doc = predict_features(model, features);
  if (!out) return doc;
  write_text(*out, doc.dump() + "\n");
  return {{"command", "predict"}, {"output", out->string()}, {"count", doc["predictions"].size()}};
}

nlohmann::json cmd_eval(const fs::path& predictions, const fs::path& manifest) {
  const auto ds = Dataset::from_manifest(manifest);
  const auto doc = read_json(predictions);
  std::map<std::string, std::string> predicted;
  std::set<std::string> classes(ds.class_names().begin(), ds.class_names().end());
  try {
    for (const auto& name : doc.at("class_names")) classes.insert(name.get<std::string>());
    for (const auto& p : doc.at("predictions")) {
      predicted[p.at("sample_id").get<std::string>()] = p.at("label").get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + predictions.string() + "' is not a predictions document: " + e.what());
  }
  std::vector<std::string> pred, truth;
  for (const auto& s : ds.samples()) {
    const auto it = predicted.find(s.id);
    if (it == predicted.end()) throw InvalidArgument("no prediction for sample '" + s.id + "'");
    pred.push_back(it->second);
    truth.push_back(s.label);
  }
  const std::vector<std::string> names(classes.begin(), classes.end());
  auto report = to_json(evaluate(pred, truth, names));
  report["command"] = "eval";
  return report;
}

nlohmann::json cmd_experiment(const fs::path& manifest, const Config& cfg, const fs::path& out) {
  const auto ds = Dataset::from_manifest(manifest);
  ExperimentConfig ec;
  ec.pyramid = cfg.pyramid;
  ec.proportions = cfg.proportions;
  ec.seed = cfg.seed;
  ec.stratified = cfg.stratified;
  ec.repeats = cfg.repeats;
  ec.fit = cfg.fit;
  ec.threads = cfg.threads;
  FeatureSource source = cfg.toy();
  if (cfg.backbone_kind == "pdbf") {
    source = *cfg.features;
  } else {
    check_readable(ds);
  }
  const auto result = run_experiment(ds, source, ec);
  write_text(out, result.to_jsonl());

  auto folds = nlohmann::json::array();
  for (const auto& f : result.folds) {
    folds.push_back({{"proportion", f.proportion},
                     {"fold", f.fold},
                     {"accuracy", f.report.accuracy},
                     {"macro_f1", f.report.macro_f1}});
  }
  return {{"command", "experiment"}, {"output", out.string()}, {"records", result.records().size()}, {"folds", folds}};
}

nlohmann::json cmd_segment(const fs::path& slide, const fs::path& model_path, const Config& cfg,
                           const fs::path& labels_out, const fs::path& overlay_out) {
  const auto model = load_model(model_path);
  const auto toy = parse_toy_identifier(model.provenance.backbone);
  if (!toy) {
    throw InvalidArgument("segmentation needs a model fitted on built-in backbone features; model backbone is '" +
                          model.provenance.backbone + "'");
  }
  const ToyBackbone backbone(*toy);
  const PyramidSpec spec = model.provenance.pyramid.empty() ? cfg.pyramid : PyramidSpec(model.provenance.pyramid);

  auto reader = io::open_rows(slide);
  const auto grid = segment(*reader, model, backbone, spec, {cfg.window, cfg.step, cfg.threads});
  write_atomically(labels_out, [&](const fs::path& tmp) { write_label_png(tmp, grid); });
  write_atomically(overlay_out, [&](const fs::path& tmp) {
    auto again = io::open_rows(slide);
    write_overlay_png(tmp, *again, grid, cfg.alpha);
  });

  std::vector<std::int64_t> pixels(static_cast<std::size_t>(grid.classes()), 0);
  std::vector<std::uint16_t> row(static_cast<std::size_t>(grid.width()));
  for (int y = 0; y < grid.height(); ++y) {
    grid.label_row(y, row);
    for (auto l : row) ++pixels[l];
  }
  nlohmann::json class_pixels = nlohmann::json::object();
  for (std::size_t k = 0; k < pixels.size(); ++k) class_pixels[model.class_names[k]] = pixels[k];
  return {{"command", "segment"},
          {"width", grid.width()},
          {"height", grid.height()},
          {"windows", grid.window_count()},
          {"labels", labels_out.string()},
          {"overlay", overlay_out.string()},
          {"class_pixels", class_pixels}};
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json error_json(const std::string& kind, const std::string& message) {
  return {{"error", {{"kind", kind}, {"message", message}}}};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pyramidal deep-broad learning: closed-form classification head and slide segmentation", "pdbl"};
  app.require_subcommand(1);

  std::string config_path;
  ConfigValues overrides;
  std::map<std::string, std::string> flags;  // override key -> raw flag value
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Configuration file");
    sub->add_option("--seed", flags["seed"], "Seed for all randomness");
    sub->add_option("--threads", flags["threads"], "Worker thread cap");
    sub->add_option("--scales", flags["pyramid.scales"], "Pyramid resolutions, e.g. 224x224,160x160,112x112");
  };

  std::string manifest, output, features, model, predictions, slide, labels_png, overlay_png;
  bool no_stratify = false;

  auto* extract = app.add_subcommand("extract", "Extract per-scale, per-stage features to a PDBF file");
  common(extract);
  extract->add_option("--manifest", manifest, "Dataset manifest (CSV)")->required();
  extract->add_option("--out", output, "Output PDBF file")->required();
  extract->add_option("--stage-channels", flags["backbone.stage_channels"], "Toy backbone channels per stage");

  auto* fit_cmd = app.add_subcommand("fit", "Fit a PDBL model from a PDBF file and labelled manifest");
  common(fit_cmd);
  fit_cmd->add_option("--features", features, "PDBF feature file")->required();
  fit_cmd->add_option("--manifest", manifest, "Training manifest (CSV)")->required();
  fit_cmd->add_option("--out", output, "Output PDBM model")->required();
  fit_cmd->add_option("--lambda", flags["model.lambda"], "Ridge constant");
  fit_cmd->add_option("--d", flags["model.d"], "PCA target dimension (default: auto)");

  auto* predict_cmd = app.add_subcommand("predict", "Predict classes for a PDBF file");
  common(predict_cmd);
  predict_cmd->add_option("--model", model, "PDBM model")->required();
  predict_cmd->add_option("--features", features, "PDBF feature file")->required();
  predict_cmd->add_option("--out", output, "Write predictions JSON here");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate predictions against a labelled manifest");
  common(eval_cmd);
  eval_cmd->add_option("--predictions", predictions, "Predictions JSON")->required();
  eval_cmd->add_option("--manifest", manifest, "Ground-truth manifest (CSV)")->required();
  eval_cmd->add_option("--out", output, "Also write the report here");

  auto* exp_cmd = app.add_subcommand("experiment", "Run proportion/fold experiments, JSON-lines output");
  common(exp_cmd);
  exp_cmd->add_option("--manifest", manifest, "Dataset manifest (CSV)")->required();
  exp_cmd->add_option("--out", output, "Output JSON-lines file")->required();
  exp_cmd->add_option("--features", features, "Use a PDBF file instead of the built-in backbone");
  exp_cmd->add_option("--stage-channels", flags["backbone.stage_channels"], "Toy backbone channels per stage");
  exp_cmd->add_option("--proportions", flags["split.proportions"], "Training proportions, comma separated");
  exp_cmd->add_option("--repeats", flags["split.repeats"], "Folds per proportion");
  exp_cmd->add_flag("--no-stratify", no_stratify, "Plain random split instead of per-class");
  exp_cmd->add_option("--lambda", flags["model.lambda"], "Ridge constant");
  exp_cmd->add_option("--d", flags["model.d"], "PCA target dimension (default: auto)");

  auto* seg_cmd = app.add_subcommand("segment", "Segment a slide by sliding-window voting");
  common(seg_cmd);
  seg_cmd->add_option("--slide", slide, "Slide raster (PNG or JPEG)")->required();
  seg_cmd->add_option("--model", model, "PDBM model")->required();
  seg_cmd->add_option("--window", flags["segment.window"], "Window size in pixels");
  seg_cmd->add_option("--step", flags["segment.step"], "Window step in pixels");
  seg_cmd->add_option("--alpha", flags["segment.alpha"], "Overlay opacity in [0, 1]");
  seg_cmd->add_option("--labels", labels_png, "Output label-map PNG (default: <slide>.labels.png)");
  seg_cmd->add_option("--overlay", overlay_png, "Output overlay PNG (default: <slide>.overlay.png)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << error_json("usage", e.what()).dump() << "\n";
    return 2;
  }

  try {
    for (const auto& [key, value] : flags) {
      if (!value.empty()) overrides[key] = value;
    }
    if (no_stratify) overrides["split.stratified"] = "false";
    if (!features.empty() && exp_cmd->parsed()) {
      overrides["backbone.kind"] = "pdbf";
      overrides["backbone.features"] = features;
    }
    const Config cfg = make_config(config_path.empty() ? ConfigValues{} : read_config_file(config_path), overrides);

    nlohmann::json summary;
    if (extract->parsed()) {
      summary = cmd_extract(manifest, cfg, output);
    } else if (fit_cmd->parsed()) {
      summary = cmd_fit(features, manifest, cfg, output);
    } else if (predict_cmd->parsed()) {
      summary = cmd_predict(model, features, output.empty() ? std::nullopt : std::optional<fs::path>(output));
    } else if (eval_cmd->parsed()) {
      summary = cmd_eval(predictions, manifest);
      if (!output.empty()) write_text(output, summary.dump() + "\n");
    } else if (exp_cmd->parsed()) {
      summary = cmd_experiment(manifest, cfg, output);
    } else if (seg_cmd->parsed()) {
      const auto sibling = [&](const char* suffix) { return fs::path(slide).replace_extension(suffix).string(); };
      if (labels_png.empty()) labels_png = sibling(".labels.png");
      if (overlay_png.empty()) overlay_png = sibling(".overlay.png");
      summary = cmd_segment(slide, model, cfg, labels_png, overlay_png);
    }
    out << summary.dump() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    auto j = error_json("validation", e.what());
    j["error"]["violations"] = e.violations();
    err << j.dump() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << error_json("validation", e.what()).dump() << "\n";
    return 2;
  } catch (const NumericError& e) {
    err << error_json("numeric", e.what()).dump() << "\n";
    return 1;
  } catch (const FormatError& e) {
    err << error_json("format", e.what()).dump() << "\n";
    return 1;
  } catch (const IoError& e) {
    err << error_json("io", e.what()).dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << error_json("runtime", e.what()).dump() << "\n";
    return 1;
  }
}

}  // namespace pdbl
