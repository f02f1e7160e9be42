#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "driftwatch/ingest.hpp"

namespace driftwatch {

// 2.5 arc-minute global grid: 24 cells per degree.
inline constexpr int kCellsPerDegree = 24;
inline constexpr int kGridRows = 180 * kCellsPerDegree;  // 4320
inline constexpr int kGridCols = 360 * kCellsPerDegree;  // 8640

struct GridCell {
  int row = 0;
  int col = 0;

  auto operator<=>(const GridCell&) const = default;
};

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

// Throws DomainError outside lat in [-90, 90], lon in [-180, 180).
GridCell cell_of(double lat, double lon);
LatLon cell_center(GridCell cell);
bool is_valid(GridCell cell);

int chebyshev_distance(GridCell a, GridCell b);

// Synthetic location names encode their cell as "cell<col>_<row>" with both
// numbers zero-padded to four digits, so no name is a substring of another.
std::string cell_name(GridCell cell);
std::optional<GridCell> parse_cell_name(std::string_view name);

std::string to_lower(std::string_view s);

// Short-term memory of location strings used to pick locations out of short
// post text by case-insensitive substring match.
class LocationMemory {
 public:
  static constexpr Timestamp kDefaultTtl = 7 * kDay;
  static constexpr std::size_t kMinNameLength = 4;
  static constexpr Timestamp kForever = std::numeric_limits<Timestamp>::max();

  explicit LocationMemory(Timestamp ttl = kDefaultTtl) : ttl_(ttl) {}

  // Stores the lowercased name, refreshing added_at if already present.
  // Returns false (and stores nothing) for names shorter than 4 characters.
  bool remember(std::string_view name, Timestamp now);

  // Permanent entry (gazetteer seed); never expires.
  bool pin(std::string_view name);

  bool contains(std::string_view name, Timestamp now) const;

  // All unexpired names occurring in text, case-insensitively, in
  // lexicographic order.
  std::vector<std::string> match_locations(std::string_view text,
                                           Timestamp now) const;

  // Drops expired entries.
  void prune(Timestamp now);

  std::size_t size() const { return entries_.size(); }
  Timestamp ttl() const { return ttl_; }

 private:
  bool alive(Timestamp added_at, Timestamp now) const;

  Timestamp ttl_;
  std::map<std::string, Timestamp, std::less<>> entries_;
};

struct MatchParams {
  Timestamp max_dt = 3 * kDay;
  int radius = 0;
};

// |post_ts - event.timestamp| <= max_dt (inclusive) and Chebyshev cell
// distance <= radius.
bool spatiotemporal_match(GridCell post_cell, Timestamp post_ts,
                          const GroundTruthEvent& event,
                          const MatchParams& params = {});

// Gazetteer seed file: one location name per line, blank lines ignored.
std::vector<std::string> read_gazetteer(const std::string& path);

}  // namespace driftwatch
