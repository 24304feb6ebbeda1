// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "oracles.hpp"
#include "pdbl/commands.hpp"
#include "pdbl/dataset.hpp"
#include "pdbl/dbblock.hpp"
#include "pdbl/feature_io.hpp"
#include "pdbl/image_io.hpp"
#include "pdbl/metrics.hpp"
#include "pdbl/model_io.hpp"
#include "pdbl/pipeline.hpp"
#include "pdbl/synthetic.hpp"
#include "pdbl/wsiseg.hpp"
#include "support.hpp"

using namespace pdbl;

namespace {

constexpr double kSolverNormalTol = 1e-8;
constexpr double kSolverDualTol = 1e-6;
constexpr double kSolverSeconds = 10.0;
constexpr double kRidgeResidualTol = 1e-6;
constexpr double kPcaTol = 1e-6;
constexpr double kGapTol = 1e-6;
constexpr double kBilinearTol = 1e-6;
constexpr double kSyntheticAccuracy = 0.95;
constexpr double kSyntheticMacroF1 = 0.95;
constexpr double kSyntheticSeconds = 60.0;

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Largest relative ridge residual over every model fitted by this binary.
double g_worst_residual = 0.0;
int g_fitted_models = 0;

void record_residual(double r) {
  g_worst_residual = std::max(g_worst_residual, r);
  ++g_fitted_models;
}

FitResult tracked_fit(const Matrix& raw, std::span<const std::string> labels, const FitConfig& cfg = {}) {
  auto r = fit_detailed(raw, labels, cfg);
  record_residual(ridge_residual(r.reduced, r.targets, r.model.weights, r.model.lambda));
  return r;
}

Outcome solver_oracle() {
  std::mt19937_64 rng(2026);
  const double lambdas[] = {1e-8, 1e-3, 1.0};
  double worst_normal = 0.0, worst_dual = 0.0;
  const auto t0 = Clock::now();
  for (int i = 0; i < 200; ++i) {
    const int d = 1 + static_cast<int>(rng() % 12);
    const int n = d + static_cast<int>(rng() % (51 - d));
    const int c = 2 + static_cast<int>(rng() % 3);
    const double lambda = lambdas[i % 3];
    const auto a = oracle::random_matrix(n, d, rng);
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng() % c);
    const Matrix targets = one_hot(y, c);
    const Matrix w = solve_weights(oracle::to_eigen(a), targets, lambda);
    record_residual(ridge_residual(oracle::to_eigen(a), targets, w, lambda));
    const auto ow = oracle::from_eigen(w);
    const auto yy = oracle::from_eigen(targets);
    worst_normal = std::max(worst_normal, oracle::max_abs_diff(ow, oracle::ridge_normal(a, yy, lambda)));
    worst_dual = std::max(worst_dual, oracle::max_abs_diff(ow, oracle::ridge_dual(a, yy, lambda)));
  }
  const double secs = seconds_since(t0);
  return {worst_normal <= kSolverNormalTol && worst_dual <= kSolverDualTol && secs < kSolverSeconds,
          "200 instances, max|W-normal|=" + fmt("%.2e", worst_normal) + " max|W-nxn|=" + fmt("%.2e", worst_dual) +
              " in " + fmt("%.2f", secs) + " s"};
}

Outcome pca_oracle() {
  std::mt19937_64 rng(77);
  double worst = 0.0, worst_ortho = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int p = 2 + static_cast<int>(rng() % 11);
    const int n = p + 2 + static_cast<int>(rng() % 30);
    const int d = 1 + static_cast<int>(rng() % p);
    const Matrix raw = oracle::to_eigen(oracle::random_matrix(n, p, rng, -3.0, 5.0));
    const Matrix b = apply_normalizer(fit_normalizer(raw), raw);
    const auto pca = pca_fit(b, d);
    const auto eig = oracle::jacobi(oracle::from_eigen(covariance(b)));
    for (int k = 0; k < d; ++k) {
      int arg = 0;
      for (int r = 1; r < p; ++r)
        if (std::abs(eig.vectors(r, k)) > std::abs(eig.vectors(arg, k))) arg = r;
      const double sign = eig.vectors(arg, k) < 0 ? -1.0 : 1.0;
      for (int r = 0; r < p; ++r) worst = std::max(worst, std::abs(pca.basis(r, k) - sign * eig.vectors(r, k)));
    }
    const Matrix gram = pca.basis.transpose() * pca.basis;
    worst_ortho = std::max(worst_ortho, (gram - Matrix::Identity(d, d)).cwiseAbs().maxCoeff());
  }
  return {worst <= kPcaTol && worst_ortho <= kPcaTol,
          "100 matrices, max|U-jacobi|=" + fmt("%.2e", worst) + " max|UtU-I|=" + fmt("%.2e", worst_ortho)};
}

Outcome dimension_rule() {
  const int a = target_dimension(1000, 1000000), b = target_dimension(2000, 1000000);
  const int c = target_dimension(2001, 1000000), d = target_dimension(1000, 360);
  std::ostringstream s;
  s << "(1000,1e6)->" << a << " (2000,1e6)->" << b << " (2001,1e6)->" << c << " (1000,360)->" << d;
  return {a == 900 && b == 1800 && c == 2000 && d == 360, s.str()};
}

Outcome gap_oracle() {
  std::mt19937_64 rng(5);
  std::normal_distribution<float> n(0.0f, 2.0f);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int c = 1 + static_cast<int>(rng() % 16), h = 1 + static_cast<int>(rng() % 30), w = 1 + static_cast<int>(rng() % 30);
    std::vector<float> data(static_cast<std::size_t>(c) * h * w);
    for (auto& v : data) v = n(rng);
    const auto got = squeeze_stage(FeatureMap(c, h, w, data));
    const auto ref = oracle::channel_means(data, c, h, w);
    for (int k = 0; k < c; ++k) worst = std::max(worst, std::abs(got[k] - ref[k]));
  }
  return {worst <= kGapTol, "100 maps, max|GAP-oracle|=" + fmt("%.2e", worst)};
}

Outcome bilinear_oracle() {
  std::mt19937_64 rng(9);
  double worst = 0.0;
  bool identity = true;
  for (int i = 0; i < 30; ++i) {
    const int w = 2 * (1 + static_cast<int>(rng() % 60)), h = 2 * (1 + static_cast<int>(rng() % 60));
    const Image img = testing::random_image(w, h, 3, rng);
    const Image half = bilinear_resize(img, w / 2, h / 2);
    const auto ref = oracle::block_average(testing::to_vector(img.data()), w, h, 3, 2);
    for (std::size_t k = 0; k < ref.size(); ++k) worst = std::max(worst, std::abs(half.data()[k] - ref[k]));
    identity = identity && bilinear_resize(img, w, h) == img;
  }
  std::mt19937_64 rng224(10);
  const Image big = testing::random_image(224, 224, 3, rng224);
  identity = identity && bilinear_resize(big, 224, 224) == big;
  return {worst <= kBilinearTol && identity,
          "2:1 max|resize-block mean|=" + fmt("%.2e", worst) + ", 1:1 bit-exact=" + (identity ? "yes" : "no")};
}

Outcome segmentation_coverage() {
  std::mt19937_64 rng(314);
  int uncovered = 0;
  for (int i = 0; i < 50; ++i) {
    const int window = 1 + static_cast<int>(rng() % 64);
    const int w = window + static_cast<int>(rng() % 200), h = window + static_cast<int>(rng() % 200);
    const int step = 1 + static_cast<int>(rng() % window);
    std::vector<std::pair<int, int>> pos;
    for (const auto& p : sliding_windows(w, h, window, step)) pos.emplace_back(p.x, p.y);
    const auto cov = oracle::coverage(w, h, window, pos);
    uncovered += static_cast<int>(std::count(cov.begin(), cov.end(), 0));
  }

  int wrong = 0;
  const auto expect = [&](bool ok) { wrong += ok ? 0 : 1; };
  expect(resolve_votes(std::vector<int>{1, 1, 3}, 4) == 1);
  expect(resolve_votes(std::vector<int>{1, 3}, 4) == 1);
  expect(resolve_votes(std::vector<int>{2, 2}, 4) == 2);
  {
    VoteGrid g(224, 224, 224, 104, 3);
    g.set(0, 0, 2);
    const auto m = g.to_label_map();
    expect(std::all_of(m.data.begin(), m.data.end(), [](auto v) { return v == 2; }));
  }
  {
    // Three windows along x with step 5; pixel 10 lies under windows 1 and 2, pixel 7 under 0 and 1.
    VoteGrid g(20, 10, 10, 5, 4);
    g.set(0, 0, 2);
    g.set(1, 0, 2);
    g.set(2, 0, 1);
    expect(g.label_at(7, 4) == 2);
    expect(g.label_at(10, 4) == 1);
    g.set(1, 0, 3);
    expect(g.label_at(10, 4) == 1);
    expect(g.label_at(7, 4) == 2);
  }
  {
    // 2-D overlap: pixel (9, 9) is under four windows with votes {1, 1, 3, 0}.
    VoteGrid g(15, 15, 10, 5, 4);
    g.set(0, 0, 1);
    g.set(1, 0, 3);
    g.set(0, 1, 1);
    g.set(1, 1, 0);
    expect(g.label_at(9, 9) == 1);
    expect(g.votes_at(9, 9) == std::vector<int>{1, 2, 0, 1});
    g.set(0, 1, 0);
    expect(g.label_at(9, 9) == 0);
  }
  {
    std::mt19937_64 vr(11);
    for (int t = 0; t < 10; ++t) {
      VoteGrid g(37, 29, 8, 3, 5);
      std::vector<std::vector<int>> pix(37 * 29);
      for (std::size_t iy = 0; iy < g.ys().size(); ++iy)
        for (std::size_t ix = 0; ix < g.xs().size(); ++ix) {
          const int l = static_cast<int>(vr() % 5);
          g.set(ix, iy, l);
          for (int y = g.ys()[iy]; y < g.ys()[iy] + 8; ++y)
            for (int x = g.xs()[ix]; x < g.xs()[ix] + 8; ++x) pix[y * 37 + x].push_back(l);
        }
      const auto m = g.to_label_map();
      for (int k = 0; k < 37 * 29; ++k) expect(m.data[k] == oracle::plurality(pix[k], 5));
    }
  }
  return {uncovered == 0 && wrong == 0, "50 random (w,h,step): uncovered pixels=" + std::to_string(uncovered) +
                                            "; voting scenarios mismatches=" + std::to_string(wrong)};
}

Outcome metric_spot_check() {
  const std::vector<int> pred = {0, 0, 0, 0}, truth = {0, 0, 1, 1};
  const std::vector<std::string> names = {"a", "b"};
  const auto r = evaluate(pred, truth, names);
  return {r.accuracy == 0.5 && r.macro_f1 == 1.0 / 3.0,
          "accuracy=" + fmt("%.17g", r.accuracy) + " macro-F1=" + fmt("%.17g", r.macro_f1)};
}

Outcome interpolation() {
  std::mt19937_64 rng(123);
  // Solver level: square full-rank design.
  const int n = 12;
  const auto a = oracle::random_matrix(n, n, rng);
  (void)oracle::inverse(a);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) y[i] = i % 3;
  const Matrix w = solve_weights(oracle::to_eigen(a), one_hot(y, 3), 1e-8);
  record_residual(ridge_residual(oracle::to_eigen(a), one_hot(y, 3), w, 1e-8));
  const auto p = infer(oracle::to_eigen(a), w);
  int correct = 0;
  for (int i = 0; i < n; ++i) correct += p.labels[i] == y[i];

  // Model level: n = d = 20 training rows in 30 dimensions.
  const Matrix raw = oracle::to_eigen(oracle::random_matrix(20, 30, rng));
  std::vector<std::string> labels;
  for (int i = 0; i < 20; ++i) labels.push_back(std::string(1, static_cast<char>('a' + i % 4)));
  FitConfig cfg;
  cfg.dimension = 20;
  const auto fitted = tracked_fit(raw, labels, cfg);
  int model_correct = 0;
  for (int i = 0; i < 20; ++i) model_correct += fitted.model.class_names[fitted.training.labels[i]] == labels[i];

  const double acc = static_cast<double>(correct) / n, macc = model_correct / 20.0;
  return {acc == 1.0 && macc == 1.0,
          "train accuracy n=d=12 solver " + fmt("%.3f", acc) + ", n=d=20 fit " + fmt("%.3f", macc)};
}

struct Synthetic {
  testing::TempDir dir{"acceptance"};
  Dataset ds;
};

Outcome dbblock_law(const Synthetic& syn, const FeatureSet& three) {
  bool all360 = three.rows.cols() == 360 && static_cast<std::size_t>(three.rows.rows()) == syn.ds.size();
  const ToyBackbone bb({});
  const PyramidSpec single({{224, 224}});
  bool all120 = true;
  for (std::size_t i = 0; i < syn.ds.size(); i += 25) {
    const auto img = io::load_image(syn.ds.samples()[i].path);
    all120 = all120 && pyramidal_feature(img, single, bb).size() == 120;
    all360 = all360 && pyramidal_feature(img, PyramidSpec::standard(), bb).size() == 360;
  }
  return {all360 && all120, "p=" + std::to_string(three.rows.cols()) + " for " + std::to_string(three.rows.rows()) +
                                " samples (3 scales); single scale p=" + (all120 ? "120" : "other")};
}

Outcome synthetic_benchmark(Synthetic& syn, FeatureSet& features, double& seconds) {
  const auto t0 = Clock::now();
  syn.ds = write_synthetic_dataset(syn.dir.path(), {3, 100, 224, 0});
  features = build_features(syn.ds, PyramidSpec::standard(), ToyBackbone({}), 1);
  ExperimentConfig cfg;
  cfg.proportions = {0.5};
  const auto result = run_experiment(syn.ds, features, cfg);
  seconds = seconds_since(t0);
  const auto& f = result.folds.at(0);
  record_residual(f.ridge_residual);
  return {f.report.accuracy >= kSyntheticAccuracy && f.report.macro_f1 >= kSyntheticMacroF1 && seconds < kSyntheticSeconds,
          "300 images, train " + std::to_string(f.train_size) + "/test " + std::to_string(f.test_size) +
              ": accuracy=" + fmt("%.4f", f.report.accuracy) + " macro-F1=" + fmt("%.4f", f.report.macro_f1) + " in " +
              fmt("%.1f", seconds) + " s"};
}

Outcome determinism(const Synthetic& syn, const FeatureSet& features) {
  const auto& dir = syn.dir;
  Config cfg;
  cfg.proportions = {0.5, 0.2};
  cfg.repeats = 2;
  cmd_experiment(dir / "manifest.csv", cfg, dir / "a.jsonl");
  cmd_experiment(dir / "manifest.csv", cfg, dir / "b.jsonl");
  const auto ja = testing::slurp(dir / "a.jsonl");
  const bool jsonl = !ja.empty() && ja == testing::slurp(dir / "b.jsonl");
  {
    std::istringstream lines(ja);
    std::string line;
    while (std::getline(lines, line)) {
      const auto j = nlohmann::json::parse(line);
      if (j.contains("ridge_residual")) record_residual(j["ridge_residual"].get<double>());
    }
  }

  std::vector<FeatureSample> samples;
  const ToyBackbone bb({});
  for (std::size_t i = 0; i < syn.ds.size(); i += 50) {
    const auto& s = syn.ds.samples()[i];
    FeatureSample fs{s.id, s.label, {}};
    for (const auto& level : build_pyramid(io::load_image(s.path), PyramidSpec::standard())) fs.scales.push_back(bb.extract(level));
    samples.push_back(std::move(fs));
  }
  write_features(dir / "a.pdbf", samples, PyramidSpec::standard().scales(), {{"backbone", bb.identifier()}});
  const auto back = read_features(dir / "a.pdbf");
  write_features(dir / "b.pdbf", back.samples, back.header.pyramid, back.header.metadata);
  const bool pdbf = back.samples == samples && testing::slurp(dir / "a.pdbf") == testing::slurp(dir / "b.pdbf");

  std::vector<std::string> labels;
  for (const auto& s : syn.ds.samples()) labels.push_back(s.label);
  auto model = tracked_fit(features.rows, labels).model;
  model.provenance = features.provenance;
  save_model(dir / "a.pdbm", model);
  const auto loaded = load_model(dir / "a.pdbm");
  save_model(dir / "b.pdbm", loaded);
  const bool pdbm = loaded == model && testing::slurp(dir / "a.pdbm") == testing::slurp(dir / "b.pdbm");

  return {jsonl && pdbf && pdbm, std::string("experiment JSONL identical=") + (jsonl ? "yes" : "no") +
                                     ", PDBF round trip=" + (pdbf ? "bit-exact" : "differs") +
                                     ", PDBM round trip=" + (pdbm ? "bit-exact" : "differs")};
}

}  // namespace

int main() {
  Synthetic syn;
  FeatureSet features;
  double synthetic_seconds = 0.0;
  Outcome synthetic{false, "not run"};

  const auto guarded = [](const std::function<Outcome()>& f) -> Outcome {
    try {
      return f();
    } catch (const std::exception& e) {
      return {false, std::string("exception: ") + e.what()};
    }
  };

  std::vector<std::pair<std::string, Outcome>> results;
  results.emplace_back("solver-oracle-equivalence", guarded(solver_oracle));
  results.emplace_back("pca-correctness", guarded(pca_oracle));
  results.emplace_back("dimension-rule", guarded(dimension_rule));
  synthetic = guarded([&] { return synthetic_benchmark(syn, features, synthetic_seconds); });
  results.emplace_back("dbblock-dimension-law", guarded([&] { return dbblock_law(syn, features); }));
  results.emplace_back("gap-oracle-equivalence", guarded(gap_oracle));
  results.emplace_back("bilinear-oracle-equivalence", guarded(bilinear_oracle));
  results.emplace_back("synthetic-end-to-end", synthetic);
  results.emplace_back("interpolation", guarded(interpolation));
  results.emplace_back("determinism", guarded([&] { return determinism(syn, features); }));
  results.emplace_back("segmentation-coverage-and-voting", guarded(segmentation_coverage));
  results.emplace_back("metric-spot-check", guarded(metric_spot_check));
  results.insert(results.begin() + 1,
                 {"ridge-optimality-residual",
                  {g_fitted_models > 0 && g_worst_residual < kRidgeResidualTol,
                   std::to_string(g_fitted_models) + " fitted systems, max relative residual=" + fmt("%.2e", g_worst_residual)}});

  int failed = 0;
  for (const auto& [name, o] : results) {
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << "\n";
    failed += o.pass ? 0 : 1;
  }
  std::cout << (failed ? "ACCEPTANCE FAILED: " : "ACCEPTANCE PASSED: ") << results.size() - failed << "/" << results.size()
            << " criteria\n";
  return failed ? 1 : 0;
}
