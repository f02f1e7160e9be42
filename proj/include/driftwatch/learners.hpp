#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "driftwatch/features.hpp"
#include "driftwatch/ingest.hpp"

namespace driftwatch {

enum class LearnerKind { logreg, svm };

std::string_view to_string(LearnerKind k);
LearnerKind learner_kind_from_string(std::string_view s);  // throws ConfigError

struct Hyper {
  double lr = 0.1;
  double l2 = 1e-4;
  int epochs = 5;
  int update_epochs = 2;
  double update_lr = 0.05;
  std::uint64_t seed = 7;
  // Trailing share of a window's labeled data held out for validation.
  double holdout_fraction = 0.2;

  bool operator==(const Hyper&) const = default;
};

struct LabeledSample {
  FeatureVector features;
  int label = 0;  // 0 irrelevant, 1 relevant
  Timestamp timestamp = 0;
  std::string post_id;
};

struct Prediction {
  int label = 0;
  double score = 0.0;
  double margin = 0.0;
};

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn,
                            std::size_t tn);
Metrics compute_metrics(std::span<const int> predicted,
                        std::span<const int> actual);

struct LinearModel {
  LearnerKind kind = LearnerKind::logreg;
  std::vector<double> weights;
  double bias = 0.0;
  Hyper hyper;
  int trained_window = 0;
  std::vector<std::pair<int, double>> val_history;  // (window, f-score)

  std::uint32_t dim() const { return static_cast<std::uint32_t>(weights.size()); }
  double margin(const FeatureVector& x) const;

  // f-score recorded for the window the model was last trained in.
  std::optional<double> last_f_score() const;
};

// Splits a window's samples into (train, holdout): the holdout is the
// trailing floor(n * holdout_fraction) samples.
std::pair<std::span<const LabeledSample>, std::span<const LabeledSample>>
split_holdout(std::span<const LabeledSample> samples, double holdout_fraction);

// SGD from zero weights on the training split. Throws std::invalid_argument
// if the training split lacks either class.
LinearModel train(std::span<const LabeledSample> samples, LearnerKind kind,
                  const Hyper& hyper, int window,
                  std::uint32_t dim = kDefaultDim);

// Returns a copy of model that continues SGD on samples with the update
// schedule (update_epochs, update_lr). The input is never modified.
LinearModel update(const LinearModel& model,
                   std::span<const LabeledSample> samples, int window);

Prediction predict(const LinearModel& model, const FeatureVector& x);

Metrics evaluate(const LinearModel& model,
                 std::span<const LabeledSample> samples);

// Per-sample regularized objective and its exact gradient, as minimized by
// the SGD step: loss(w, b; x, y) + (l2 / 2) * |w|^2.
double sample_objective(const LinearModel& model, const LabeledSample& s);

struct Gradient {
  std::vector<double> weights;
  double bias = 0.0;
};
Gradient sample_gradient(const LinearModel& model, const LabeledSample& s);

}  // namespace driftwatch
