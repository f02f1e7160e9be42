#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls into the library code it checks, apart from
// plain data types and the grid arithmetic it is told to trust.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "driftwatch/drift.hpp"
#include "driftwatch/geotime.hpp"
#include "driftwatch/ingest.hpp"
#include "driftwatch/labeler.hpp"
#include "driftwatch/rng.hpp"

namespace oracle {

using driftwatch::GridCell;
using driftwatch::Timestamp;

// FNV-1a 64, written out byte by byte from the published constants.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string ascii_lower(std::string s) {
  for (auto& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

// Plain grid arithmetic, straight from the cell definition.
inline GridCell grid_cell(double lat, double lon) {
  int row = static_cast<int>(std::floor((90.0 - lat) * 24.0));
  int col = static_cast<int>(std::floor((lon + 180.0) * 24.0));
  return {std::min(row, 4319), std::min(col, 8639)};
}

struct OracleDecision {
  driftwatch::LabelOutcome outcome = driftwatch::LabelOutcome::negative;
  std::optional<GridCell> cell;
  std::optional<std::size_t> matched_event;
};

// All-pairs join: every post against every event name, then every candidate
// cell against every event. No indexes, no memory object.
inline std::vector<OracleDecision> brute_force_labels(
    const driftwatch::Window& w, const driftwatch::LabelParams& p) {
  using driftwatch::LabelOutcome;
  std::vector<GridCell> cells;
  for (const auto& e : w.events) cells.push_back(grid_cell(e.lat, e.lon));

  std::vector<OracleDecision> out;
  out.reserve(w.posts.size());
  for (const auto& post : w.posts) {
    const std::string text = ascii_lower(post.text);
    std::vector<GridCell> cand;
    for (std::size_t e = 0; e < w.events.size(); ++e) {
      bool named = false;
      for (const auto& raw : w.events[e].location_names) {
        const std::string name = ascii_lower(raw);
        if (name.size() >= 4 && text.find(name) != std::string::npos) named = true;
        for (const auto& loc : post.locations) {
          if (ascii_lower(loc) == name) named = true;
        }
      }
      if (named) cand.push_back(cells[e]);
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

    OracleDecision d;
    if (cand.empty()) {
      out.push_back(d);
      continue;
    }
    std::optional<std::tuple<Timestamp, std::size_t, GridCell>> best;
    bool near = false;
    for (const auto& c : cand) {
      for (std::size_t e = 0; e < w.events.size(); ++e) {
        const int dist = std::max(std::abs(cells[e].row - c.row),
                                  std::abs(cells[e].col - c.col));
        if (dist > p.radius) continue;
        const Timestamp dt = std::llabs(post.timestamp - w.events[e].timestamp);
        if (dt <= p.max_dt) {
          auto t = std::make_tuple(dt, e, c);
          if (!best || t < *best) best = t;
        } else if (dt <= p.exclusion_band) {
          near = true;
        }
      }
    }
    if (best) {
      d.outcome = LabelOutcome::positive;
      d.matched_event = std::get<1>(*best);
      d.cell = std::get<2>(*best);
    } else {
      d.outcome = (p.exclude_near_miss && near) ? LabelOutcome::excluded
                                                : LabelOutcome::negative;
      d.cell = cand.front();
    }
    out.push_back(d);
  }
  return out;
}

// Randomized labeling instance: a handful of nearby cells, a name pool with
// shared and mixed-case names, posts that mention names in text or in the
// locations field, timestamps clustered around the events.
inline driftwatch::Window random_instance(driftwatch::Rng& rng, std::size_t n_posts,
                                          std::size_t n_events) {
  static const char* kPool[] = {"Sikkim",  "Darjeeling", "Kathmandu", "Pokhara",
                                "Shimla",  "Gangtok",    "Munnar",    "Ooty",
                                "Nainital", "Kalimpong", "Mirik",     "Lachung",
                                "Sik",     "Pokh",       "KATHMANDU valley"};
  constexpr std::size_t kPoolSize = sizeof kPool / sizeof kPool[0];
  driftwatch::Window w;
  w.index = 0;
  w.start = 1514764800;
  w.end = w.start + 30 * driftwatch::kDay;
  const double base_lat = 27.5, base_lon = 88.0;
  for (std::size_t i = 0; i < n_events; ++i) {
    driftwatch::GroundTruthEvent e;
    e.id = "e" + std::to_string(i);
    e.lat = base_lat + static_cast<double>(rng.below(6)) / 24.0 + 0.01;
    e.lon = base_lon + static_cast<double>(rng.below(6)) / 24.0 + 0.01;
    e.timestamp = rng.between(w.start - 3 * driftwatch::kDay, w.end + 3 * driftwatch::kDay);
    const auto k = 1 + rng.below(2);
    for (std::uint64_t j = 0; j < k; ++j) {
      e.location_names.push_back(kPool[rng.below(kPoolSize)]);
    }
    w.events.push_back(std::move(e));
  }
  static const char* kFiller[] = {"landslide", "road", "blocked", "rain",
                                  "election", "victory", "near", "the"};
  for (std::size_t i = 0; i < n_posts; ++i) {
    driftwatch::SocialPost p;
    p.id = "p" + std::to_string(i);
    p.author = "a";
    std::string text;
    for (int t = 0; t < 4; ++t) {
      if (!text.empty()) text += ' ';
      text += kFiller[rng.below(8)];
    }
    const auto mode = rng.below(4);
    if (mode == 1 || mode == 3) {
      std::string name = kPool[rng.below(kPoolSize)];
      if (rng.bernoulli(0.5)) name = ascii_lower(name);
      text += rng.bernoulli(0.5) ? " " + name : "#" + name + "!";
    }
    if (mode >= 2) p.locations.push_back(kPool[rng.below(kPoolSize)]);
    p.text = std::move(text);
    if (!w.events.empty() && rng.bernoulli(0.7)) {
      const auto& e = w.events[rng.below(w.events.size())];
      p.timestamp = e.timestamp + rng.between(-9 * driftwatch::kDay, 9 * driftwatch::kDay);
    } else {
      p.timestamp = rng.between(w.start, w.end - 1);
    }
    p.timestamp = std::clamp(p.timestamp, w.start, w.end - 1);
    w.posts.push_back(std::move(p));
  }
  std::sort(w.posts.begin(), w.posts.end(),
            [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return w;
}

// Literal ring-buffer simulation of the drift detector: keep the last W
// flags in a deque, count after warm-up, fire on the T-th consecutive
// over-threshold step. Returns the 1-based firing observation or 0.
inline std::uint64_t simulate_detector(const std::vector<bool>& flags,
                                       std::size_t W, double theta, std::size_t T) {
  std::deque<bool> buf;
  std::size_t run = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    const bool full = buf.size() == W;
    buf.push_back(flags[i]);
    if (buf.size() > W) buf.pop_front();
    if (!full) continue;
    const auto count = static_cast<double>(std::count(buf.begin(), buf.end(), true));
    run = count / static_cast<double>(W) > theta ? run + 1 : 0;
    if (run >= T) return i + 1;
  }
  return 0;
}

}  // namespace oracle
