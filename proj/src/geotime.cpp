#include "driftwatch/geotime.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "driftwatch/errors.hpp"

namespace driftwatch {

GridCell cell_of(double lat, double lon) {
  if (!(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon < 180.0)) {
    throw DomainError("coordinates out of range");
  }
  int row = static_cast<int>(std::floor((90.0 - lat) * kCellsPerDegree));
  int col = static_cast<int>(std::floor((lon + 180.0) * kCellsPerDegree));
  // lat = -90 lands exactly on the bottom edge; lon just below 180 can round
  // up to the right edge.
  row = std::min(row, kGridRows - 1);
  col = std::min(col, kGridCols - 1);
  return {row, col};
}

LatLon cell_center(GridCell cell) {
  return {90.0 - (cell.row + 0.5) / kCellsPerDegree,
          -180.0 + (cell.col + 0.5) / kCellsPerDegree};
}

bool is_valid(GridCell cell) {
  return cell.row >= 0 && cell.row < kGridRows && cell.col >= 0 &&
         cell.col < kGridCols;
}

int chebyshev_distance(GridCell a, GridCell b) {
  return std::max(std::abs(a.row - b.row), std::abs(a.col - b.col));
}

std::string cell_name(GridCell cell) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "cell%04d_%04d", cell.col, cell.row);
  return buf;
}

std::optional<GridCell> parse_cell_name(std::string_view name) {
  // cellCCCC_RRRR
  if (name.size() != 13 || name.substr(0, 4) != "cell" || name[8] != '_') {
    return std::nullopt;
  }
  auto digits = [](std::string_view s) -> std::optional<int> {
    int v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') return std::nullopt;
      v = v * 10 + (c - '0');
    }
    return v;
  };
  auto col = digits(name.substr(4, 4));
  auto row = digits(name.substr(9, 4));
  if (!col || !row) return std::nullopt;
  GridCell c{*row, *col};
  if (!is_valid(c)) return std::nullopt;
  return c;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

bool LocationMemory::alive(Timestamp added_at, Timestamp now) const {
  if (added_at == kForever) return true;
  return now - added_at <= ttl_;
}

bool LocationMemory::remember(std::string_view name, Timestamp now) {
  if (name.size() < kMinNameLength) return false;
  auto key = to_lower(name);
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    entries_.emplace(std::move(key), now);
  } else if (it->second != kForever) {
    it->second = now;
  }
  return true;
}

bool LocationMemory::pin(std::string_view name) {
  if (name.size() < kMinNameLength) return false;
  entries_[to_lower(name)] = kForever;
  return true;
}

bool LocationMemory::contains(std::string_view name, Timestamp now) const {
  auto it = entries_.find(to_lower(name));
  return it != entries_.end() && alive(it->second, now);
}

std::vector<std::string> LocationMemory::match_locations(std::string_view text,
                                                         Timestamp now) const {
  std::vector<std::string> out;
  if (entries_.empty()) return out;
  const std::string lowered = to_lower(text);
  for (const auto& [name, added_at] : entries_) {
    if (!alive(added_at, now)) continue;
    if (lowered.find(name) != std::string::npos) out.push_back(name);
  }
  return out;
}

void LocationMemory::prune(Timestamp now) {
  std::erase_if(entries_, [&](const auto& kv) { return !alive(kv.second, now); });
}

bool spatiotemporal_match(GridCell post_cell, Timestamp post_ts,
                          const GroundTruthEvent& event,
                          const MatchParams& params) {
  if (std::llabs(post_ts - event.timestamp) > params.max_dt) return false;
  return chebyshev_distance(post_cell, cell_of(event.lat, event.lon)) <=
         params.radius;
}

std::vector<std::string> read_gazetteer(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read gazetteer " + path);
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) {
      line.pop_back();
    }
    std::size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i < line.size()) names.push_back(line.substr(i));
  }
  return names;
}

}  // namespace driftwatch
