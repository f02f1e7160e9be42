#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace driftwatch {

inline constexpr std::uint32_t kDefaultDim = 1u << 16;

// Sparse vector of hashed token weights. Entries are sorted by index and
// never hold a zero weight.
struct SparseVector {
  std::uint32_t dim = kDefaultDim;
  std::vector<std::pair<std::uint32_t, double>> entries;

  double norm() const;
  double dot(const SparseVector& other) const;
  bool empty() const { return entries.empty(); }
  bool operator==(const SparseVector&) const = default;
};

// Unit-norm (or empty) hashed bag of tokens.
using FeatureVector = SparseVector;
// Mean of feature vectors; not normalized.
using Centroid = SparseVector;

// Lowercase, split on any non-alphanumeric byte, drop tokens shorter than 2.
std::vector<std::string> tokenize(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes);

std::uint32_t feature_index(std::string_view token, std::uint32_t dim);

FeatureVector vectorize(std::string_view text, std::uint32_t dim = kDefaultDim);

// Entrywise mean. Throws std::invalid_argument on empty input or mixed dims.
Centroid centroid(std::span<const SparseVector> vs);

// 1 - cos(a, b); distance involving a zero vector is 1.
double cosine_distance(const SparseVector& a, const SparseVector& b);

}  // namespace driftwatch
