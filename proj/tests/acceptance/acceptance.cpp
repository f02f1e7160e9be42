// Runs criteria 1-10 and prints one PASS/FAIL line each. Exit status is the
// number of failures (capped at 1).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "driftwatch/drift.hpp"
#include "driftwatch/ensemble.hpp"
#include "driftwatch/errors.hpp"
#include "driftwatch/geotime.hpp"
#include "driftwatch/kernels.hpp"
#include "driftwatch/labeler.hpp"
#include "driftwatch/learners.hpp"
#include "driftwatch/pipeline.hpp"
#include "driftwatch/registry.hpp"
#include "driftwatch/rng.hpp"
#include "oracles.hpp"

using namespace driftwatch;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void report(int n, const char* name, const std::function<Outcome()>& fn) {
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.ok) ++failures;
  std::printf("criterion %2d %-22s %s  %s\n", n, name, o.ok ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

PipelineConfig bench_config(std::uint64_t seed, double rho) {
  PipelineConfig cfg;
  cfg.synth.n_windows = 8;
  cfg.synth.posts_per_window = 2000;
  cfg.synth.positive_fraction = 0.3;
  cfg.synth.drift_windows = {3, 6};
  cfg.synth.swap_ratio = rho;
  cfg.schedule.kind = ScheduleKind::user;
  cfg.schedule.interval = 30 * kDay;
  cfg.set_seed(seed);
  return cfg;
}

Outcome drift_benchmark() {
  const auto t0 = Clock::now();
  Outcome o;
  std::ostringstream d;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto rep = bench(bench_config(seed, 0.5));
    double sa = 0, ss = 0, min_res = 1, min_static = 1;
    int n = 0;
    for (const auto& r : rep.rows) {
      min_res = std::min(min_res, r.adaptive.f1);
      if (r.window >= 3) {
        sa += r.adaptive.f1;
        ss += r.static_.f1;
        ++n;
        min_static = std::min(min_static, r.static_.f1);
      }
    }
    const double gap = n ? (sa - ss) / n : 0;
    const bool ok = n == 5 && gap >= 0.10 && min_res >= 0.90 && min_static <= 0.80 &&
                    rep.stream_sha256_adaptive == rep.stream_sha256_static;
    o.ok = o.ok && ok;
    d << fmt("s%.0f gap=%.3f minRES=%.3f", static_cast<double>(seed), gap, min_res)
      << fmt(" minNRES=%.3f; ", min_static);
  }
  const double t = seconds_since(t0);
  o.ok = o.ok && t < 60;
  d << fmt("%.1fs", t);
  o.detail = d.str();
  return o;
}

Outcome no_drift_control() {
  Outcome o;
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (const auto& r : bench(bench_config(seed, 0.0)).rows) {
      worst = std::max(worst, std::fabs(r.adaptive.f1 - r.static_.f1));
    }
  }
  o.ok = worst <= 0.05;
  o.detail = fmt("max |f1 diff| = %.4f over seeds 1-5", worst);
  return o;
}

Outcome labeler_oracle() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  std::size_t mismatches = 0, posts = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t np = t == 99 ? 10000 : 1 + rng.below(10000);
    const std::size_t ne = t == 99 ? 100 : 1 + rng.below(100);
    const auto w = oracle::random_instance(rng, np, ne);
    LabelParams p;
    p.radius = static_cast<int>(rng.below(3));
    p.exclude_near_miss = rng.bernoulli(0.8);
    const auto got = generate_training_data(w, p, w.end).decisions;
    const auto want = oracle::brute_force_labels(w, p);
    posts += w.posts.size();
    if (got.size() != want.size()) {
      ++mismatches;
      continue;
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (got[i].outcome != want[i].outcome || got[i].cell != want[i].cell ||
          got[i].matched_event != want[i].matched_event) {
        ++mismatches;
      }
    }
  }
  const double t = seconds_since(t0);
  return {mismatches == 0 && t < 30,
          fmt("%.0f posts, %.0f mismatches, %.1fs", static_cast<double>(posts),
              static_cast<double>(mismatches), t)};
}

ClassifierRecord with_f(double f) {
  ClassifierRecord r;
  r.model.trained_window = 0;
  r.model.val_history = {{0, f}};
  return r;
}

std::vector<double> weights_for(const std::vector<double>& fs) {
  std::vector<ClassifierRecord> rs;
  for (double f : fs) rs.push_back(with_f(f));
  std::vector<const ClassifierRecord*> p;
  for (const auto& r : rs) p.push_back(&r);
  return model_weights(p);
}

Outcome weight_equation() {
  Rng rng(4);
  double worst = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> f(1 + rng.below(20));
    for (auto& x : f) x = rng.uniform();
    const auto w = weights_for(f);
    worst = std::max(worst, std::fabs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0));
  }
  const auto ex = weights_for({0.9, 0.6, 0.3});
  const bool ex_ok = std::fabs(ex[0] - 0.5) <= 1e-9 && std::fabs(ex[1] - 1.0 / 3) <= 1e-9 &&
                     std::fabs(ex[2] - 1.0 / 6) <= 1e-9;
  const auto z = weights_for({0, 0, 0, 0});
  const bool z_ok = std::all_of(z.begin(), z.end(), [](double x) { return x == 0.25; });
  return {worst <= 1e-9 && ex_ok && z_ok,
          fmt("max |sum-1| = %.2e; example %.0f; all-zero %.0f", worst, ex_ok, z_ok)};
}

Outcome ensemble_boundary() {
  std::vector<Prediction> votes{{1, 0.9, 1.0}, {0, 0.2, -1.0}, {0, 0.3, -0.5}};
  std::vector<double> w{0.5, 0.3, 0.2};
  const auto out = combine_votes(votes, w);
  return {out.score == 0.5 && out.label == 1,
          fmt("score=%.6f label=%.0f", out.score, out.label)};
}

Outcome gradient_check() {
  Rng rng(6);
  const std::uint32_t dim = 32;
  const double h = 1e-5;
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    LinearModel m;
    m.kind = LearnerKind::logreg;
    m.weights.resize(dim);
    for (auto& x : m.weights) x = rng.uniform() * 2 - 1;
    m.bias = rng.uniform() - 0.5;
    LabeledSample s;
    s.features.dim = dim;
    for (std::uint32_t i = 0; i < dim; ++i) {
      if (rng.bernoulli(0.3)) s.features.entries.emplace_back(i, rng.uniform() * 2 - 1);
    }
    s.label = rng.bernoulli(0.5) ? 1 : 0;
    const auto g = sample_gradient(m, s);
    auto check = [&](double analytic, double& param) {
      const double keep = param;
      param = keep + h;
      const double up = sample_objective(m, s);
      param = keep - h;
      const double dn = sample_objective(m, s);
      param = keep;
      const double num = (up - dn) / (2 * h);
      const double denom = std::max({std::fabs(analytic), std::fabs(num), 1e-8});
      worst = std::max(worst, std::fabs(analytic - num) / denom);
    };
    for (std::uint32_t j = 0; j < dim; ++j) check(g.weights[j], m.weights[j]);
    check(g.bias, m.bias);
  }
  return {worst < 1e-4, fmt("max relative error %.2e", worst)};
}

Outcome grid() {
  Rng rng(7);
  std::size_t bad = 0;
  for (int t = 0; t < 10000; ++t) {
    const GridCell c{static_cast<int>(rng.below(kGridRows)),
                     static_cast<int>(rng.below(kGridCols))};
    const auto ll = cell_center(c);
    if (cell_of(ll.lat, ll.lon) != c) ++bad;
    if (oracle::grid_cell(ll.lat, ll.lon) != c) ++bad;
  }
  const bool corner = cell_of(90, -180) == GridCell{0, 0};
  const bool origin = cell_of(0, 0) == GridCell{2160, 4320};
  return {bad == 0 && corner && origin,
          fmt("%.0f round-trip failures; corner %.0f; origin %.0f", static_cast<double>(bad),
              corner, origin)};
}

Outcome detector_bounds() {
  DriftDetector zero(DetectorMode::margin);
  const auto& thr = zero.thresholds();
  for (std::size_t i = 0; i < thr.window + thr.persistence + 100; ++i) zero.observe({0.5, 0.0});
  const bool exact = zero.fired_at() == thr.window + thr.persistence;

  bool quiet = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    DriftDetector conf(DetectorMode::confidence);
    DriftDetector marg(DetectorMode::margin);
    for (int i = 0; i < 100000; ++i) {
      const bool pos = rng.bernoulli(0.3);
      const double s = pos ? 0.85 + 0.15 * rng.uniform() : 0.15 * rng.uniform();
      const double m = (pos ? 1 : -1) * (1.0 + 4 * rng.uniform());
      conf.observe({s, m});
      marg.observe({s, m});
    }
    quiet = quiet && !conf.fired() && !marg.fired();
  }
  return {exact && quiet, fmt("zero-margin fired at %.0f (W+T=%.0f); stationary quiet %.0f",
                              static_cast<double>(zero.fired_at()),
                              static_cast<double>(thr.window + thr.persistence), quiet)};
}

Outcome persistence() {
  PipelineConfig cfg;
  cfg.synth.n_windows = 3;
  cfg.synth.posts_per_window = 1000;
  cfg.synth.drift_windows = {2};
  cfg.label.dim = 8192;
  const auto run = run_windowed(cfg, synth_stream_input(cfg.synth));
  const auto& store = run.store;
  const auto dir = fs::temp_directory_path() / "dw_acceptance_store";
  fs::remove_all(dir);
  store.save(dir);
  const auto back = ClassifierStore::load(dir);
  bool same = back.size() == store.size();

  Rng rng(9);
  std::vector<FeatureVector> xs;
  for (int i = 0; i < 1000; ++i) {
    FeatureVector v;
    v.dim = cfg.label.dim;
    for (std::uint32_t j = 0; j < v.dim; j += 1 + static_cast<std::uint32_t>(rng.below(400))) {
      v.entries.emplace_back(j, rng.uniform() * 2 - 1);
    }
    xs.push_back(std::move(v));
  }
  for (std::size_t k = 0; same && k < store.size(); ++k) {
    for (const auto& x : xs) {
      const double a = store.records()[k].model.margin(x);
      const double b = back.records()[k].model.margin(x);
      if (std::memcmp(&a, &b, sizeof a) != 0) same = false;
    }
  }

  // Flip one byte of a weights file.
  const auto wf = dir / "weights_000000.txt";
  {
    std::fstream f(wf, std::ios::in | std::ios::out | std::ios::binary);
    char c;
    f.seekg(0);
    f.get(c);
    f.seekp(0);
    f.put(c == '1' ? '2' : '1');
  }
  bool clean = false;
  std::string msg;
  try {
    ClassifierStore::load(dir);
  } catch (const DataError& e) {
    clean = true;
    msg = e.what();
  }
  fs::remove_all(dir);
  return {same && clean,
          fmt("%.0f models x 1000 inputs bit-identical %.0f; tamper -> ",
              static_cast<double>(store.size()), same) +
              (clean ? "DataError(" + msg + ")" : "no error")};
}

Outcome determinism() {
  const auto cfg = bench_config(3, 0.5);
  std::ostringstream a, b;
  write_bench_csv(a, bench(cfg));
  write_bench_csv(b, bench(cfg));
  return {a.str() == b.str() && !a.str().empty(),
          fmt("%.0f bytes, identical %.0f", static_cast<double>(a.str().size()),
              a.str() == b.str())};
}

}  // namespace

int main() {
  report(1, "drift benchmark", drift_benchmark);
  report(2, "no-drift control", no_drift_control);
  report(3, "labeler oracle", labeler_oracle);
  report(4, "weight equation", weight_equation);
  report(5, "ensemble boundary", ensemble_boundary);
  report(6, "gradient check", gradient_check);
  report(7, "grid", grid);
  report(8, "detector bounds", detector_bounds);
  report(9, "persistence", persistence);
  report(10, "determinism", determinism);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures ? 1 : 0;
}
