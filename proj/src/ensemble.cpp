#include "driftwatch/ensemble.hpp"

#include <stdexcept>

#include "driftwatch/errors.hpp"

namespace driftwatch {

std::string_view to_string(WeightScheme s) {
  switch (s) {
    case WeightScheme::unweighted: return "unweighted";
    case WeightScheme::expert: return "expert";
    case WeightScheme::model_weighted: return "model_weighted";
  }
  return "unweighted";
}

std::string_view to_string(Retrieval r) {
  return r == Retrieval::recency ? "recency" : "relevancy";
}

std::string_view to_string(RelevancyQuery q) {
  return q == RelevancyQuery::per_post ? "per_post" : "batch_centroid";
}

WeightScheme weight_scheme_from_string(std::string_view s) {
  if (s == "unweighted") return WeightScheme::unweighted;
  if (s == "expert") return WeightScheme::expert;
  if (s == "model_weighted") return WeightScheme::model_weighted;
  throw ConfigError("unknown ensemble scheme '" + std::string(s) + "'");
}

Retrieval retrieval_from_string(std::string_view s) {
  if (s == "recency") return Retrieval::recency;
  if (s == "relevancy") return Retrieval::relevancy;
  throw ConfigError("unknown retrieval '" + std::string(s) + "'");
}

RelevancyQuery relevancy_query_from_string(std::string_view s) {
  if (s == "per_post") return RelevancyQuery::per_post;
  if (s == "batch_centroid") return RelevancyQuery::batch_centroid;
  throw ConfigError("unknown relevancy query '" + std::string(s) + "'");
}

std::vector<double> model_weights(
    std::span<const ClassifierRecord* const> records) {
  if (records.empty()) throw std::invalid_argument("model_weights: no records");
  std::vector<double> f;
  f.reserve(records.size());
  double sum = 0.0;
  for (const auto* r : records) {
    const auto score = r->model.last_f_score();
    if (!score) {
      throw std::invalid_argument(
          "model_weights: no f-score for the model's trained window");
    }
    f.push_back(*score);
    sum += *score;
  }
  const double n = static_cast<double>(records.size());
  for (auto& w : f) w = sum > 0.0 ? w / sum : 1.0 / n;
  return f;
}

std::vector<double> member_weights(
    std::span<const ClassifierRecord* const> records,
    const EnsembleConfig& cfg) {
  if (records.empty()) throw std::invalid_argument("ensemble: no members");
  const double n = static_cast<double>(records.size());
  switch (cfg.scheme) {
    case WeightScheme::unweighted:
      return std::vector<double>(records.size(), 1.0 / n);
    case WeightScheme::model_weighted:
      return model_weights(records);
    case WeightScheme::expert: {
      std::vector<double> w;
      w.reserve(records.size());
      double sum = 0.0;
      for (const auto* r : records) {
        auto it = cfg.expert_weights.find(r->model.kind);
        if (it == cfg.expert_weights.end()) {
          throw std::invalid_argument("expert weights missing learner kind '" +
                                      std::string(to_string(r->model.kind)) + "'");
        }
        w.push_back(it->second);
        sum += it->second;
      }
      if (!(sum > 0.0)) {
        throw std::invalid_argument("expert weights of members sum to zero");
      }
      for (auto& x : w) x /= sum;
      return w;
    }
  }
  return {};
}

EnsembleOutput combine_votes(std::span<const Prediction> member_predictions,
                             std::span<const double> weights) {
  if (member_predictions.size() != weights.size() || weights.empty()) {
    throw std::invalid_argument("combine_votes: size mismatch");
  }
  EnsembleOutput out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (member_predictions[i].label == 1) out.score += weights[i];
    out.mean_member_score += member_predictions[i].score;
    out.mean_member_margin += member_predictions[i].margin;
  }
  const double n = static_cast<double>(weights.size());
  out.mean_member_score /= n;
  out.mean_member_margin /= n;
  out.label = out.score >= 0.5 ? 1 : 0;
  return out;
}

EnsembleOutput ensemble_predict(const FeatureVector& x,
                                std::span<const ClassifierRecord* const> records,
                                const EnsembleConfig& cfg) {
  const auto w = member_weights(records, cfg);
  std::vector<Prediction> preds;
  preds.reserve(records.size());
  for (const auto* r : records) preds.push_back(predict(r->model, x));
  return combine_votes(preds, w);
}

}  // namespace driftwatch
