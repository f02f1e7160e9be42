#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "driftwatch/drift.hpp"
#include "driftwatch/ensemble.hpp"
#include "driftwatch/geotime.hpp"
#include "driftwatch/ingest.hpp"
#include "driftwatch/labeler.hpp"
#include "driftwatch/learners.hpp"
#include "driftwatch/registry.hpp"

namespace driftwatch {

struct GroupingParams {
  std::size_t min_posts = 1;
  int radius = 1;
  Timestamp span = 3 * kDay;
};

struct PipelineConfig {
  Timestamp stream_start = 1514764800;
  Timestamp window_span = 30 * kDay;
  std::size_t n_windows = 0;  // 0: derived from the post stream

  EnsembleConfig ensemble{.expert_weights = {{LearnerKind::logreg, 1.0},
                                              {LearnerKind::svm, 1.0}}};
  std::vector<LearnerKind> learners{LearnerKind::logreg, LearnerKind::svm};
  Schedule schedule;
  DetectorMode detector_mode = DetectorMode::confidence;
  DetectorThresholds detector;
  LabelParams label;
  GroupingParams grouping;
  Hyper hyper;
  Timestamp memory_ttl = LocationMemory::kDefaultTtl;
  bool dedup = false;
  std::uint64_t seed = 1;

  std::string posts_path;
  std::string events_path;
  std::string truth_path;
  std::string gazetteer_path;
  std::string out_dir = "out";

  SynthConfig synth;

  // One seed drives the generator and the learners.
  void set_seed(std::uint64_t s);
  void validate() const;  // throws ConfigError
};

// Generation/copy-update step run at every scheduled update: trains one new
// model per configured kind, continues SGD on a copy of every stored model,
// and stores the copies (in id order) followed by the new models, all keyed
// by the centroid of samples. Throws std::invalid_argument (store untouched)
// when samples lack a class.
void generation_step(ClassifierStore& store,
                     std::span<const LabeledSample> samples, int window,
                     Timestamp now, const PipelineConfig& cfg);

// Flat "key = value" text; '#' starts a comment. Unknown keys, duplicate
// keys, and unparsable values throw ConfigError.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);
// Every accepted key with its default value, in file syntax.
std::string default_config_text();

struct DetectedEvent {
  std::vector<GridCell> cells;  // sorted, unique
  Timestamp start = 0;
  Timestamp end = 0;
  std::vector<std::string> post_ids;  // sorted
  std::size_t post_count = 0;
};

struct LocatedPost {
  std::string post_id;
  GridCell cell;
  Timestamp timestamp = 0;
};

// Single-linkage grouping; components with at least min_posts posts become
// events. Independent of input order.
std::vector<DetectedEvent> detect_events(std::vector<LocatedPost> posts,
                                         const GroupingParams& params);

// Forward-only live location extraction over a time-ordered stream: ground
// truth names enter the memory when their event time passes, gazetteer
// names are pinned, a post's own locations are remembered at post time.
// Names resolve to cells through the newest event carrying the name, then
// through the synthetic cell-name encoding.
std::vector<std::optional<GridCell>> locate_posts(
    std::span<const SocialPost> posts, std::span<const GroundTruthEvent> events,
    std::span<const std::string> gazetteer, Timestamp ttl);

struct StreamInput {
  std::vector<SocialPost> posts;
  std::vector<GroundTruthEvent> events;
  std::optional<std::map<std::string, int>> truth;
  std::vector<std::string> gazetteer;
};

StreamInput load_stream(const PipelineConfig& cfg);
StreamInput synth_stream_input(const SynthConfig& synth);

enum class ArmMode { adaptive, static_ };

struct WindowReport {
  int window = 0;
  bool evaluated = false;
  std::size_t posts = 0;
  std::size_t predicted_relevant = 0;
  std::optional<Metrics> truth_metrics;
  std::optional<Metrics> label_metrics;
  LabelStats label_stats;
  std::vector<DetectedEvent> events;
  std::size_t registry_size = 0;
  bool updated = false;
  bool detector_fired = false;
  double centroid_shift = 0.0;
};

struct RunResult {
  std::vector<WindowReport> windows;
  ClassifierStore store;
  std::vector<LabeledSet> labeled;
  // Registry size observed before and after each window's prediction
  // phase; equal for every window (snapshot isolation).
  std::vector<std::pair<std::size_t, std::size_t>> prediction_phase_sizes;
};

RunResult run_windowed(const PipelineConfig& cfg, const StreamInput& input,
                       ArmMode mode = ArmMode::adaptive);

struct BenchRow {
  int window = 0;
  Metrics adaptive;
  Metrics static_;
  std::size_t events_adaptive = 0;
  std::size_t events_static = 0;
  std::size_t events_both = 0;
  std::size_t events_static_only = 0;
  double centroid_shift = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;  // evaluated windows only
  std::string stream_sha256_adaptive;
  std::string stream_sha256_static;
  bool static_contained = true;  // every static event overlaps an adaptive one
};

// RES vs N_RES on the synthetic stream described by cfg.synth.
BenchReport bench(const PipelineConfig& cfg);

void write_metrics_csv(std::ostream& out, const RunResult& result);
void write_bench_csv(std::ostream& out, const BenchReport& report);
void write_bench_summary(std::ostream& out, const BenchReport& report,
                         const PipelineConfig& cfg);
void write_events_geojson(std::ostream& out, const RunResult& result);

// SHA-256 of the JSONL serialization of the posts.
std::string stream_checksum(std::span<const SocialPost> posts);

}  // namespace driftwatch
