#include "driftwatch/kernels.hpp"

#include "driftwatch/errors.hpp"

namespace driftwatch {

std::vector<FeatureVector> vectorize_posts(std::span<const SocialPost> posts,
                                           std::uint32_t dim) {
  std::vector<FeatureVector> out(posts.size());
  const auto n = static_cast<std::ptrdiff_t>(posts.size());
#pragma omp parallel for schedule(static) default(none) shared(posts, out, dim, n)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = vectorize(posts[i].text, dim);
  return out;
}

std::vector<FeatureVector> vectorize_posts_serial(
    std::span<const SocialPost> posts, std::uint32_t dim) {
  std::vector<FeatureVector> out;
  out.reserve(posts.size());
  for (const auto& p : posts) out.push_back(vectorize(p.text, dim));
  return out;
}

std::vector<const ClassifierRecord*> select_members(
    const ClassifierStore& store, const EnsembleConfig& cfg,
    const SparseVector& query) {
  if (cfg.retrieval == Retrieval::recency) return store.recent(cfg.size);
  return store.relevant(query, cfg.size);
}

namespace {

struct FixedMembers {
  std::vector<const ClassifierRecord*> members;
  std::vector<double> weights;
};

// Members shared by the whole batch, when the configuration allows it.
std::optional<FixedMembers> batch_members(std::span<const FeatureVector> xs,
                                          const ClassifierStore& store,
                                          const EnsembleConfig& cfg) {
  if (store.empty()) {
    throw StateError(
        "no classifier in the store; run an initial label-then-train window "
        "before classifying");
  }
  // Weight errors (a kind missing from the expert map) must surface here,
  // outside the parallel region.
  {
    std::vector<const ClassifierRecord*> all;
    for (const auto& r : store.records()) all.push_back(&r);
    member_weights(all, cfg);
  }
  if (cfg.retrieval == Retrieval::recency) {
    FixedMembers f{store.recent(cfg.size), {}};
    f.weights = member_weights(f.members, cfg);
    return f;
  }
  if (cfg.query == RelevancyQuery::batch_centroid) {
    std::vector<SparseVector> nonempty;
    for (const auto& x : xs) {
      if (!x.empty()) nonempty.push_back(x);
    }
    const SparseVector q = nonempty.empty() ? SparseVector{} : centroid(nonempty);
    FixedMembers f{store.relevant(q, cfg.size), {}};
    f.weights = member_weights(f.members, cfg);
    return f;
  }
  return std::nullopt;
}

EnsembleOutput classify_one(const FeatureVector& x, const ClassifierStore& store,
                            const EnsembleConfig& cfg,
                            const std::optional<FixedMembers>& fixed) {
  if (fixed) {
    std::vector<Prediction> preds;
    preds.reserve(fixed->members.size());
    for (const auto* r : fixed->members) preds.push_back(predict(r->model, x));
    return combine_votes(preds, fixed->weights);
  }
  const auto members = store.relevant(x, cfg.size);
  return ensemble_predict(x, members, cfg);
}

}  // namespace

std::vector<EnsembleOutput> classify_posts(std::span<const FeatureVector> xs,
                                           const ClassifierStore& store,
                                           const EnsembleConfig& cfg) {
  const auto fixed = batch_members(xs, store, cfg);
  std::vector<EnsembleOutput> out(xs.size());
  const auto n = static_cast<std::ptrdiff_t>(xs.size());
#pragma omp parallel for schedule(dynamic, 128) default(none) \
    shared(xs, store, cfg, fixed, out, n)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = classify_one(xs[i], store, cfg, fixed);
  }
  return out;
}

std::vector<EnsembleOutput> classify_posts_serial(
    std::span<const FeatureVector> xs, const ClassifierStore& store,
    const EnsembleConfig& cfg) {
  const auto fixed = batch_members(xs, store, cfg);
  std::vector<EnsembleOutput> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(classify_one(x, store, cfg, fixed));
  return out;
}

}  // namespace driftwatch
