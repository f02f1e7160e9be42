#include "driftwatch/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>

namespace driftwatch {

namespace {

// Bytes >= 0x80 belong to multi-byte UTF-8 sequences and are kept inside
// tokens, so non-ASCII words survive intact (lowercasing is ASCII-only).
bool is_token_byte(unsigned char c) { return c >= 0x80 || std::isalnum(c); }

double dot_galloping(const SparseVector& small, const SparseVector& large) {
  double s = 0.0;
  auto lo = large.entries.begin();
  const auto hi = large.entries.end();
  for (const auto& [idx, w] : small.entries) {
    lo = std::lower_bound(lo, hi, idx,
                          [](const auto& e, std::uint32_t i) { return e.first < i; });
    if (lo == hi) break;
    if (lo->first == idx) s += w * lo->second;
  }
  return s;
}

}  // namespace

double SparseVector::norm() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.second * e.second;
  return std::sqrt(s);
}

double SparseVector::dot(const SparseVector& other) const {
  const auto& a = entries;
  const auto& b = other.entries;
  if (a.size() * 8 < b.size()) return dot_galloping(*this, other);
  if (b.size() * 8 < a.size()) return dot_galloping(other, *this);
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) {
      ++i;
    } else if (b[j].first < a[i].first) {
      ++j;
    } else {
      s += a[i].second * b[j].second;
      ++i;
      ++j;
    }
  }
  return s;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2) tokens.push_back(cur);
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_byte(c)) {
      cur += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint32_t feature_index(std::string_view token, std::uint32_t dim) {
  return static_cast<std::uint32_t>(fnv1a64(token) % dim);
}

FeatureVector vectorize(std::string_view text, std::uint32_t dim) {
  FeatureVector v;
  v.dim = dim;
  const auto tokens = tokenize(text);
  if (tokens.empty()) return v;
  std::vector<std::uint32_t> idx;
  idx.reserve(tokens.size());
  for (const auto& t : tokens) idx.push_back(feature_index(t, dim));
  std::sort(idx.begin(), idx.end());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && idx[j] == idx[i]) ++j;
    v.entries.emplace_back(idx[i], static_cast<double>(j - i));
    i = j;
  }
  const double n = v.norm();
  for (auto& e : v.entries) e.second /= n;
  return v;
}

Centroid centroid(std::span<const SparseVector> vs) {
  if (vs.empty()) throw std::invalid_argument("centroid of empty set");
  const std::uint32_t dim = vs.front().dim;
  std::map<std::uint32_t, double> acc;
  for (const auto& v : vs) {
    if (v.dim != dim) throw std::invalid_argument("centroid: mixed dimensions");
    for (const auto& [i, w] : v.entries) acc[i] += w;
  }
  Centroid c;
  c.dim = dim;
  const double n = static_cast<double>(vs.size());
  for (const auto& [i, s] : acc) {
    const double m = s / n;
    if (m != 0.0) c.entries.emplace_back(i, m);
  }
  return c;
}

double cosine_distance(const SparseVector& a, const SparseVector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 1.0;
  const double cos = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return 1.0 - cos;
}

}  // namespace driftwatch
