#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "driftwatch/features.hpp"
#include "driftwatch/learners.hpp"

namespace driftwatch {

struct ClassifierRecord {
  std::uint64_t id = 0;
  LinearModel model;
  Centroid key;  // centroid of the data the model was (last) trained on
  int created_window = 0;
  Timestamp created_at = 0;
};

// Append-only key-value store of classifiers keyed by training centroid.
class ClassifierStore {
 public:
  // Assigns the next id and appends. Returns the id.
  std::uint64_t put(ClassifierRecord record);

  // The n newest records, newest first.
  std::vector<const ClassifierRecord*> recent(std::size_t n) const;

  // The k records whose keys are closest (cosine) to query; ties go to the
  // newer record. Exact linear scan.
  std::vector<const ClassifierRecord*> relevant(const SparseVector& query,
                                                std::size_t k) const;

  const std::vector<ClassifierRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  // Directory layout: manifest.json, weights_<id>.txt (one "<index>
  // <hex-float>" line per nonzero weight), SHA256SUMS. load() verifies every checksum before parsing and
  // throws DataError naming the offending file.
  void save(const std::filesystem::path& dir) const;
  static ClassifierStore load(const std::filesystem::path& dir);

 private:
  std::vector<ClassifierRecord> records_;
  std::vector<double> key_norms_;
  std::uint64_t next_id_ = 0;
};

}  // namespace driftwatch
