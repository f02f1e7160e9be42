#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftwatch/features.hpp"
#include "driftwatch/geotime.hpp"
#include "driftwatch/ingest.hpp"
#include "driftwatch/learners.hpp"

namespace driftwatch {

struct Window {
  int index = 0;
  Timestamp start = 0;
  Timestamp end = 0;  // exclusive
  std::vector<SocialPost> posts;         // timestamps in [start, end)
  std::vector<GroundTruthEvent> events;  // within [start - dt, end + dt]
};

// Slices a stream into the window [start, end): posts in range, events
// within event_margin of either edge.
Window make_window(int index, Timestamp start, Timestamp end,
                   std::span<const SocialPost> posts,
                   std::span<const GroundTruthEvent> events,
                   Timestamp event_margin);

struct LabelParams {
  Timestamp max_dt = 3 * kDay;
  int radius = 0;
  bool exclude_near_miss = true;
  Timestamp exclusion_band = 7 * kDay;
  std::uint32_t dim = kDefaultDim;
};

enum class LabelOutcome : std::uint8_t { negative = 0, positive = 1, excluded = 2 };

struct LabelDecision {
  LabelOutcome outcome = LabelOutcome::negative;
  std::optional<GridCell> cell;
  std::optional<std::size_t> matched_event;  // index into window.events
};

struct LabelStats {
  std::size_t total_posts = 0;
  std::size_t labeled = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t excluded = 0;
};

struct LabeledSet {
  int window = 0;
  std::vector<LabeledSample> samples;   // labeled posts, window order
  std::vector<LabelDecision> decisions; // one per window post
  LabelStats stats;
};

// Per-post labeling kernel (OpenMP) and its serial reference.
std::vector<LabelDecision> label_posts(const Window& window,
                                       const LabelParams& params);
std::vector<LabelDecision> label_posts_serial(const Window& window,
                                              const LabelParams& params);

// Retroactive strong-supervision labeling of a closed window.
// Throws StateError if window.end > now.
LabeledSet generate_training_data(const Window& window,
                                  const LabelParams& params, Timestamp now);

// Indices of window posts grouped into half-open bins of bin_span seconds
// counted from window.start; ceil((end - start) / bin_span) bins.
std::vector<std::vector<std::size_t>> bin_posts(const Window& window,
                                                Timestamp bin_span = 6 * kDay);

// Cosine distance between positive-class centroids of consecutive sets;
// result[i] compares sets[i] and sets[i + 1].
std::vector<double> centroid_shift_report(std::span<const LabeledSet> sets);

// Positive-class centroid (empty vector if there are no positives).
Centroid positive_centroid(const LabeledSet& set);

// JSONL export: one {post_id, label, window, cell?, matched_event_id?} line
// per labeled post, then a {"stats": {...}} summary line.
void write_labeled_set(std::ostream& out, const LabeledSet& set,
                       const Window& window);

struct LabelRow {
  std::string post_id;
  int label = 0;
  int window = 0;
};
std::vector<LabelRow> read_labeled_set(const std::filesystem::path& path);

}  // namespace driftwatch
