#pragma once

#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "driftwatch/learners.hpp"
#include "driftwatch/registry.hpp"

namespace driftwatch {

enum class WeightScheme { unweighted, expert, model_weighted };
enum class Retrieval { recency, relevancy };
enum class RelevancyQuery { per_post, batch_centroid };

std::string_view to_string(WeightScheme s);
std::string_view to_string(Retrieval r);
std::string_view to_string(RelevancyQuery q);
WeightScheme weight_scheme_from_string(std::string_view s);
Retrieval retrieval_from_string(std::string_view s);
RelevancyQuery relevancy_query_from_string(std::string_view s);

struct EnsembleConfig {
  WeightScheme scheme = WeightScheme::unweighted;
  Retrieval retrieval = Retrieval::recency;
  RelevancyQuery query = RelevancyQuery::per_post;
  std::size_t size = 5;
  std::map<LearnerKind, double> expert_weights;
};

// w_i = f_i / sum_a f_a with f_i the f-score each model recorded for the
// window it was last trained in; uniform if the sum is zero.
// Throws std::invalid_argument on an empty list.
std::vector<double> model_weights(
    std::span<const ClassifierRecord* const> records);

// Member weights under cfg.scheme; always sums to 1.
std::vector<double> member_weights(
    std::span<const ClassifierRecord* const> records,
    const EnsembleConfig& cfg);

struct EnsembleOutput {
  double score = 0.0;  // weighted vote share of "relevant"
  int label = 0;       // score >= 0.5
  // Mean member score and margin, consumed by the drift detector.
  double mean_member_score = 0.0;
  double mean_member_margin = 0.0;
};

// Combines hard member labels with precomputed weights.
EnsembleOutput combine_votes(std::span<const Prediction> member_predictions,
                             std::span<const double> weights);

EnsembleOutput ensemble_predict(const FeatureVector& x,
                                std::span<const ClassifierRecord* const> records,
                                const EnsembleConfig& cfg);

}  // namespace driftwatch
