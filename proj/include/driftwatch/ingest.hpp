#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace driftwatch {

using Timestamp = std::int64_t;  // UTC seconds

inline constexpr Timestamp kDay = 86400;

struct SocialPost {
  std::string id;
  std::string text;
  std::vector<std::string> locations;
  Timestamp timestamp = 0;
  std::vector<std::string> links;
  std::string author;

  bool operator==(const SocialPost&) const = default;
};

enum class EventSource { physical_sensor, news, report, synthetic };

std::string_view to_string(EventSource s);
EventSource event_source_from_string(std::string_view s);  // throws DataError

struct GroundTruthEvent {
  std::string id;
  double lat = 0.0;
  double lon = 0.0;
  Timestamp timestamp = 0;
  std::vector<std::string> location_names;
  EventSource source = EventSource::synthetic;

  bool operator==(const GroundTruthEvent&) const = default;
};

template <typename T>
struct ReadResult {
  std::vector<T> items;
  std::size_t skipped = 0;
};

// Newline-delimited JSON readers. Malformed or invariant-violating lines are
// skipped and counted; an unreadable file throws DataError.
ReadResult<SocialPost> read_posts(const std::filesystem::path& path);
ReadResult<GroundTruthEvent> read_events(const std::filesystem::path& path);
ReadResult<SocialPost> read_posts(std::istream& in);
ReadResult<GroundTruthEvent> read_events(std::istream& in);

// Single-line parsers; return false when the line is malformed.
bool parse_post_line(std::string_view line, SocialPost& out);
bool parse_event_line(std::string_view line, GroundTruthEvent& out);

std::string post_to_json_line(const SocialPost& p);
std::string event_to_json_line(const GroundTruthEvent& e);

void write_posts(std::ostream& out, const std::vector<SocialPost>& posts);
void write_events(std::ostream& out,
                  const std::vector<GroundTruthEvent>& events);
void write_posts(const std::filesystem::path& path,
                 const std::vector<SocialPost>& posts);
void write_events(const std::filesystem::path& path,
                  const std::vector<GroundTruthEvent>& events);

// Drops posts whose text duplicates an earlier post's text (retweets).
std::vector<SocialPost> dedup_posts(const std::vector<SocialPost>& posts);

// ---------------------------------------------------------------------------
// Synthetic drift streams.

struct SynthConfig {
  std::size_t n_windows = 8;
  std::size_t posts_per_window = 2000;
  double positive_fraction = 0.3;
  std::size_t vocab_relevant = 40;
  std::size_t vocab_irrelevant = 50;
  std::vector<std::size_t> drift_windows{3, 6};
  double swap_ratio = 0.5;
  std::size_t events_per_window = 20;
  std::size_t cells_universe = 300;
  std::uint64_t seed = 1;

  // Stream layout.
  Timestamp stream_start = 1514764800;  // 2018-01-01T00:00:00Z
  Timestamp window_span = 30 * kDay;
  std::size_t relevant_words_per_post = 8;
  std::size_t irrelevant_words_per_post = 8;
  double negative_location_fraction = 0.5;
  std::string event_keyword = "landslide";

  void validate() const;  // throws ConfigError
};

struct SynthStream {
  std::vector<SocialPost> posts;          // timestamp order
  std::vector<GroundTruthEvent> events;   // timestamp order
  std::map<std::string, int> truth;       // post id -> 0/1
  std::vector<std::vector<std::string>> relevant_vocab;  // per window
  std::vector<std::string> gazetteer;     // every universe cell name
};

SynthStream generate_stream(const SynthConfig& cfg);

}  // namespace driftwatch
