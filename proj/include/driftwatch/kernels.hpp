#pragma once

// Data-parallel batch kernels. Each OpenMP kernel has a serial twin with the
// same contract; the serial versions are the reference the tests and the
// benchmark compare against. Outputs are written by index, so parallel and
// serial results are bit-identical.

#include <span>
#include <string_view>
#include <vector>

#include "driftwatch/ensemble.hpp"
#include "driftwatch/features.hpp"
#include "driftwatch/ingest.hpp"
#include "driftwatch/registry.hpp"

namespace driftwatch {

std::vector<FeatureVector> vectorize_posts(std::span<const SocialPost> posts,
                                           std::uint32_t dim);
std::vector<FeatureVector> vectorize_posts_serial(
    std::span<const SocialPost> posts, std::uint32_t dim);

// Ensemble-classifies every vector against a frozen store. Recency members
// are chosen once; relevancy members are chosen per post or from the batch
// centroid according to cfg.query. Throws StateError on an empty store.
std::vector<EnsembleOutput> classify_posts(std::span<const FeatureVector> xs,
                                           const ClassifierStore& store,
                                           const EnsembleConfig& cfg);
std::vector<EnsembleOutput> classify_posts_serial(
    std::span<const FeatureVector> xs, const ClassifierStore& store,
    const EnsembleConfig& cfg);

// Members used for a given query under cfg (recency ignores the query).
std::vector<const ClassifierRecord*> select_members(
    const ClassifierStore& store, const EnsembleConfig& cfg,
    const SparseVector& query);

}  // namespace driftwatch
