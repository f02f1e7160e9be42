#include <doctest.h>

#include "driftwatch/drift.hpp"
#include "driftwatch/errors.hpp"
#include "driftwatch/rng.hpp"
#include "oracles.hpp"

using namespace driftwatch;

namespace {

std::uint64_t run_scores(DriftDetector& d, const std::vector<double>& scores) {
  for (double s : scores) d.observe({s, 0.0});
  return d.fired_at();
}

}  // namespace

TEST_CASE("high-confidence stream never fires") {
  DriftDetector d;
  for (int i = 0; i < 10000; ++i) d.observe({0.99, 5.0});
  CHECK_FALSE(d.fired());
  CHECK(d.fraction() == 0.0);
}

TEST_CASE("all-zero margins fire at exactly W + T") {
  for (auto [w, t] : {std::pair<std::size_t, std::size_t>{500, 200}, {10, 3}, {1, 1}, {64, 0}}) {
    DetectorThresholds thr;
    thr.window = w;
    thr.persistence = t;
    DriftDetector d(DetectorMode::margin, thr);
    for (std::size_t i = 0; i < w + t + 50; ++i) d.observe({0.5, 0.0});
    CHECK(d.fired());
    // The first post-warm-up observation is the earliest possible step.
    CHECK(d.fired_at() == w + std::max<std::size_t>(t, 1));
  }
}

TEST_CASE("alternating streams against the ring-buffer simulation") {
  std::vector<double> hi_lo, hi_hi;
  for (int i = 0; i < 4000; ++i) {
    hi_lo.push_back(i % 2 ? 0.5 : 0.99);
    hi_hi.push_back(i % 2 ? 0.9 : 0.99);
  }
  DriftDetector a;
  const auto fa = run_scores(a, hi_lo);
  std::vector<bool> flags_a;
  for (double s : hi_lo) flags_a.push_back(s > 0.25 && s < 0.75);
  CHECK(fa > 0);
  CHECK(fa == oracle::simulate_detector(flags_a, 500, 0.3, 200));

  DriftDetector b;
  CHECK(run_scores(b, hi_hi) == 0);
}

TEST_CASE("random flag streams match the simulation") {
  Rng rng(51);
  for (int t = 0; t < 40; ++t) {
    DetectorThresholds thr;
    thr.window = 5 + rng.below(60);
    thr.persistence = 1 + rng.below(40);
    thr.fraction_theta = 0.1 + 0.6 * rng.uniform();
    const double p = rng.uniform();
    std::vector<bool> flags;
    DriftDetector d(DetectorMode::confidence, thr);
    for (int i = 0; i < 600; ++i) {
      const bool f = rng.bernoulli(p);
      flags.push_back(f);
      d.observe({f ? 0.5 : 0.95, 0.0});
    }
    CHECK(d.fired_at() ==
          oracle::simulate_detector(flags, thr.window, thr.fraction_theta, thr.persistence));
  }
}

TEST_CASE("confidence band is open, margin band is open") {
  DetectorThresholds thr;
  thr.window = 1;
  thr.persistence = 1;
  thr.fraction_theta = 0.5;
  for (double s : {0.25, 0.75}) {
    DriftDetector d(DetectorMode::confidence, thr);
    d.observe({s, 0});
    d.observe({s, 0});
    CHECK_FALSE(d.fired());
  }
  DriftDetector d(DetectorMode::confidence, thr);
  d.observe({0.26, 0});
  d.observe({0.74, 0});
  CHECK(d.fired());

  DriftDetector m(DetectorMode::margin, thr);
  m.observe({0.5, 0.5});
  m.observe({0.5, -0.5});
  CHECK_FALSE(m.fired());
  m.observe({0.5, -0.49});
  CHECK(m.fired());
}

TEST_CASE("never fires before W + T, and reset restores the warm-up") {
  Rng rng(52);
  DetectorThresholds thr;
  thr.window = 50;
  thr.persistence = 20;
  DriftDetector d(DetectorMode::confidence, thr);
  for (int round = 0; round < 5; ++round) {
    std::uint64_t n = 0;
    while (!d.fired() && n < 10000) {
      d.observe({rng.bernoulli(0.9) ? 0.5 : 0.99, 0.0});
      ++n;
    }
    CHECK(d.fired());
    CHECK(d.fired_at() >= 70);
    d.reset();
    CHECK_FALSE(d.fired());
    CHECK(d.observations() == 0);
    CHECK(d.run_length() == 0);
  }
}

TEST_CASE("seeded stationary high-confidence streams never fire") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Rng rng(seed);
    DriftDetector d;
    for (int i = 0; i < 20000; ++i) d.observe({0.9 + 0.1 * rng.uniform(), 3.0});
    CHECK_FALSE(d.fired());
  }
}

TEST_CASE("schedule examples") {
  Schedule user;
  CHECK(next_action(user, 31 * kDay, 0, false) == Action::update_now);
  CHECK(next_action(user, 30 * kDay, 0, false) == Action::update_now);
  CHECK(next_action(user, 29 * kDay, 0, true) == Action::none);

  Schedule det{ScheduleKind::detector};
  CHECK(next_action(det, 1, 0, true) == Action::update_now);
  CHECK(next_action(det, 400 * kDay, 0, false) == Action::none);

  Schedule hyb{ScheduleKind::hybrid};
  CHECK(next_action(hyb, 2 * kDay, 0, true) == Action::none);
  CHECK(next_action(hyb, 7 * kDay, 0, true) == Action::update_now);
  CHECK(next_action(hyb, 61 * kDay, 0, false) == Action::update_now);
  CHECK(next_action(hyb, 59 * kDay, 0, false) == Action::none);
}

TEST_CASE("mode and schedule names") {
  CHECK(detector_mode_from_string("margin") == DetectorMode::margin);
  CHECK(schedule_kind_from_string("hybrid") == ScheduleKind::hybrid);
  CHECK_THROWS_AS(schedule_kind_from_string("weekly"), ConfigError);
  DetectorThresholds bad;
  bad.window = 0;
  CHECK_THROWS_AS(DriftDetector(DetectorMode::margin, bad), ConfigError);
}
