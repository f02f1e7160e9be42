#include "driftwatch/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "driftwatch/errors.hpp"
#include "driftwatch/rng.hpp"

namespace driftwatch {

std::string_view to_string(LearnerKind k) {
  return k == LearnerKind::logreg ? "logreg" : "svm";
}

LearnerKind learner_kind_from_string(std::string_view s) {
  if (s == "logreg") return LearnerKind::logreg;
  if (s == "svm") return LearnerKind::svm;
  throw ConfigError("unknown learner kind '" + std::string(s) + "'");
}

Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn,
                            std::size_t tn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  m.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

Metrics compute_metrics(std::span<const int> predicted,
                        std::span<const int> actual) {
  if (predicted.size() != actual.size()) {
    throw std::invalid_argument("compute_metrics: length mismatch");
  }
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] != 0;
    const bool a = actual[i] != 0;
    if (p && a) ++tp;
    else if (p) ++fp;
    else if (a) ++fn;
    else ++tn;
  }
  return metrics_from_counts(tp, fp, fn, tn);
}

double LinearModel::margin(const FeatureVector& x) const {
  double s = bias;
  for (const auto& [i, v] : x.entries) s += weights[i] * v;
  return s;
}

std::optional<double> LinearModel::last_f_score() const {
  for (auto it = val_history.rbegin(); it != val_history.rend(); ++it) {
    if (it->first == trained_window) return it->second;
  }
  return std::nullopt;
}

namespace {

double sigmoid(double m) {
  if (m >= 0) return 1.0 / (1.0 + std::exp(-m));
  const double e = std::exp(m);
  return e / (1.0 + e);
}

// d loss / d margin.
double loss_slope(LearnerKind kind, double margin, int label) {
  if (kind == LearnerKind::logreg) return sigmoid(margin) - label;
  const double y = label ? 1.0 : -1.0;
  return y * margin < 1.0 ? -y : 0.0;
}

// w = scale * v, so the L2 shrink of every step is one multiply.
class SgdState {
 public:
  explicit SgdState(const LinearModel& m) : v_(m.weights), bias_(m.bias) {}

  double margin(const FeatureVector& x) const {
    double s = 0.0;
    for (const auto& [i, xi] : x.entries) s += v_[i] * xi;
    return scale_ * s + bias_;
  }

  void step(const LabeledSample& s, LearnerKind kind, double lr, double l2) {
    const double g = loss_slope(kind, margin(s.features), s.label);
    scale_ *= 1.0 - lr * l2;
    if (g != 0.0) {
      const double k = lr * g / scale_;
      for (const auto& [i, xi] : s.features.entries) v_[i] -= k * xi;
      bias_ -= lr * g;
    }
    if (scale_ < 1e-9) fold();
  }

  void write_to(LinearModel& m) {
    fold();
    m.weights = v_;
    m.bias = bias_;
  }

 private:
  void fold() {
    if (scale_ != 1.0) {
      for (auto& w : v_) w *= scale_;
      scale_ = 1.0;
    }
  }

  std::vector<double> v_;
  double scale_ = 1.0;
  double bias_;
};

void run_sgd(LinearModel& model, std::span<const LabeledSample> samples,
             int epochs, double lr, std::uint64_t seed) {
  if (samples.empty() || epochs <= 0) return;
  SgdState st(model);
  Rng rng(seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  for (int e = 0; e < epochs; ++e) {
    rng.shuffle(order);
    for (auto i : order) st.step(samples[i], model.kind, lr, model.hyper.l2);
  }
  st.write_to(model);
}

void check_dims(std::span<const LabeledSample> samples, std::uint32_t dim) {
  for (const auto& s : samples) {
    if (s.features.dim != dim) {
      throw std::invalid_argument("sample dimension does not match model");
    }
    if (s.label != 0 && s.label != 1) {
      throw std::invalid_argument("labels must be 0 or 1");
    }
  }
}

double validation_f1(const LinearModel& m, std::span<const LabeledSample> train,
                     std::span<const LabeledSample> holdout) {
  return evaluate(m, holdout.empty() ? train : holdout).f1;
}

std::uint64_t mix_seed(std::uint64_t seed, int window) {
  return seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(window + 1));
}

}  // namespace

std::pair<std::span<const LabeledSample>, std::span<const LabeledSample>>
split_holdout(std::span<const LabeledSample> samples, double holdout_fraction) {
  const auto n_hold = static_cast<std::size_t>(
      std::floor(static_cast<double>(samples.size()) * holdout_fraction));
  const std::size_t n_train = samples.size() - n_hold;
  return {samples.first(n_train), samples.subspan(n_train)};
}

LinearModel train(std::span<const LabeledSample> samples, LearnerKind kind,
                  const Hyper& hyper, int window, std::uint32_t dim) {
  check_dims(samples, dim);
  auto [train_part, holdout] = split_holdout(samples, hyper.holdout_fraction);
  const bool has_pos = std::any_of(train_part.begin(), train_part.end(),
                                   [](const auto& s) { return s.label == 1; });
  const bool has_neg = std::any_of(train_part.begin(), train_part.end(),
                                   [](const auto& s) { return s.label == 0; });
  if (!has_pos || !has_neg) {
    throw std::invalid_argument(
        "training data must contain both classes; widen the window");
  }
  LinearModel m;
  m.kind = kind;
  m.hyper = hyper;
  m.weights.assign(dim, 0.0);
  m.trained_window = window;
  run_sgd(m, train_part, hyper.epochs, hyper.lr, mix_seed(hyper.seed, window));
  m.val_history.emplace_back(window, validation_f1(m, train_part, holdout));
  return m;
}

LinearModel update(const LinearModel& model,
                   std::span<const LabeledSample> samples, int window) {
  if (window < model.trained_window) {
    throw std::invalid_argument("update window precedes the model's window");
  }
  check_dims(samples, model.dim());
  LinearModel m = model;
  m.trained_window = window;
  if (samples.empty()) {
    m.val_history.emplace_back(window, model.last_f_score().value_or(0.0));
    return m;
  }
  auto [train_part, holdout] = split_holdout(samples, m.hyper.holdout_fraction);
  run_sgd(m, train_part, m.hyper.update_epochs, m.hyper.update_lr,
          mix_seed(m.hyper.seed ^ 0xA5A5A5A5ULL, window));
  m.val_history.emplace_back(window, validation_f1(m, train_part, holdout));
  return m;
}

Prediction predict(const LinearModel& model, const FeatureVector& x) {
  Prediction p;
  p.margin = model.margin(x);
  if (model.kind == LearnerKind::logreg) {
    p.score = sigmoid(p.margin);
  } else {
    p.score = std::clamp((p.margin + 1.0) / 2.0, 0.0, 1.0);
  }
  p.label = p.score >= 0.5 ? 1 : 0;
  return p;
}

Metrics evaluate(const LinearModel& model,
                 std::span<const LabeledSample> samples) {
  std::vector<int> predicted, actual;
  predicted.reserve(samples.size());
  actual.reserve(samples.size());
  for (const auto& s : samples) {
    predicted.push_back(predict(model, s.features).label);
    actual.push_back(s.label);
  }
  return compute_metrics(predicted, actual);
}

double sample_objective(const LinearModel& model, const LabeledSample& s) {
  const double m = model.margin(s.features);
  double loss;
  if (model.kind == LearnerKind::logreg) {
    // log(1 + e^m) - y m, computed without overflow.
    const double softplus = m > 0 ? m + std::log1p(std::exp(-m))
                                  : std::log1p(std::exp(m));
    loss = softplus - s.label * m;
  } else {
    const double y = s.label ? 1.0 : -1.0;
    loss = std::max(0.0, 1.0 - y * m);
  }
  double sq = 0.0;
  for (double w : model.weights) sq += w * w;
  return loss + 0.5 * model.hyper.l2 * sq;
}

Gradient sample_gradient(const LinearModel& model, const LabeledSample& s) {
  const double g = loss_slope(model.kind, model.margin(s.features), s.label);
  Gradient grad;
  grad.weights.resize(model.weights.size());
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    grad.weights[i] = model.hyper.l2 * model.weights[i];
  }
  for (const auto& [i, xi] : s.features.entries) grad.weights[i] += g * xi;
  grad.bias = g;
  return grad;
}

}  // namespace driftwatch
