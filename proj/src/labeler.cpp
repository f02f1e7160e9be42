#include "driftwatch/labeler.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "driftwatch/errors.hpp"

namespace driftwatch {

Window make_window(int index, Timestamp start, Timestamp end,
                   std::span<const SocialPost> posts,
                   std::span<const GroundTruthEvent> events,
                   Timestamp event_margin) {
  if (!(start < end)) throw std::invalid_argument("window start must precede end");
  Window w;
  w.index = index;
  w.start = start;
  w.end = end;
  for (const auto& p : posts) {
    if (p.timestamp >= start && p.timestamp < end) w.posts.push_back(p);
  }
  for (const auto& e : events) {
    if (e.timestamp >= start - event_margin && e.timestamp <= end + event_margin) {
      w.events.push_back(e);
    }
  }
  return w;
}

namespace {

// Lookup structures over a window's ground-truth events.
class EventIndex {
 public:
  explicit EventIndex(const Window& w)
      : window_(w), memory_(LocationMemory::kForever) {
    cells_.reserve(w.events.size());
    for (std::size_t i = 0; i < w.events.size(); ++i) {
      const auto& e = w.events[i];
      const GridCell c = cell_of(e.lat, e.lon);
      cells_.push_back(c);
      by_cell_[c].push_back(i);
      for (const auto& name : e.location_names) {
        auto key = to_lower(name);
        auto& owners = by_name_[key];
        if (owners.empty() || owners.back() != i) owners.push_back(i);
        // Retroactive: every name of the closed window is in memory at once.
        memory_.pin(key);
      }
    }
  }

  LabelDecision decide(const SocialPost& post, const LabelParams& params) const {
    std::vector<std::string> names =
        memory_.match_locations(post.text, window_.start);
    for (const auto& loc : post.locations) {
      auto key = to_lower(loc);
      if (by_name_.count(key)) names.push_back(std::move(key));
    }

    std::set<GridCell> candidates;
    for (const auto& n : names) {
      auto it = by_name_.find(n);
      if (it == by_name_.end()) continue;
      for (auto e : it->second) candidates.insert(cells_[e]);
    }

    LabelDecision d;
    if (candidates.empty()) return d;

    // Best match: smallest |dt|, then event index, then candidate cell.
    std::optional<std::tuple<Timestamp, std::size_t, GridCell>> best;
    bool near_miss = false;
    for (const auto& c : candidates) {
      for (int dr = -params.radius; dr <= params.radius; ++dr) {
        for (int dc = -params.radius; dc <= params.radius; ++dc) {
          auto it = by_cell_.find(GridCell{c.row + dr, c.col + dc});
          if (it == by_cell_.end()) continue;
          for (auto e : it->second) {
            const Timestamp dt =
                std::llabs(post.timestamp - window_.events[e].timestamp);
            if (dt <= params.max_dt) {
              auto cand = std::make_tuple(dt, e, c);
              if (!best || cand < *best) best = cand;
            } else if (dt <= params.exclusion_band) {
              near_miss = true;
            }
          }
        }
      }
    }
    if (best) {
      d.outcome = LabelOutcome::positive;
      d.matched_event = std::get<1>(*best);
      d.cell = std::get<2>(*best);
    } else if (params.exclude_near_miss && near_miss) {
      d.outcome = LabelOutcome::excluded;
      d.cell = *candidates.begin();
    } else {
      d.cell = *candidates.begin();
    }
    return d;
  }

 private:
  const Window& window_;
  LocationMemory memory_;
  std::vector<GridCell> cells_;
  std::map<GridCell, std::vector<std::size_t>> by_cell_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_name_;
};

}  // namespace

std::vector<LabelDecision> label_posts(const Window& window,
                                       const LabelParams& params) {
  const EventIndex index(window);
  const auto n = static_cast<std::ptrdiff_t>(window.posts.size());
  std::vector<LabelDecision> out(window.posts.size());
#pragma omp parallel for schedule(dynamic, 64) default(none) \
    shared(index, window, params, out, n)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = index.decide(window.posts[i], params);
  }
  return out;
}

std::vector<LabelDecision> label_posts_serial(const Window& window,
                                              const LabelParams& params) {
  const EventIndex index(window);
  std::vector<LabelDecision> out;
  out.reserve(window.posts.size());
  for (const auto& p : window.posts) out.push_back(index.decide(p, params));
  return out;
}

LabeledSet generate_training_data(const Window& window,
                                  const LabelParams& params, Timestamp now) {
  if (window.end > now) {
    throw StateError("window " + std::to_string(window.index) +
                     " is still open; labeling needs a closed window");
  }
  LabeledSet set;
  set.window = window.index;
  set.decisions = label_posts(window, params);
  set.stats.total_posts = window.posts.size();

  std::vector<std::size_t> labeled;
  for (std::size_t i = 0; i < set.decisions.size(); ++i) {
    switch (set.decisions[i].outcome) {
      case LabelOutcome::positive: ++set.stats.positives; labeled.push_back(i); break;
      case LabelOutcome::negative: ++set.stats.negatives; labeled.push_back(i); break;
      case LabelOutcome::excluded: ++set.stats.excluded; break;
    }
  }
  set.stats.labeled = set.stats.positives + set.stats.negatives;

  set.samples.resize(labeled.size());
  const auto n = static_cast<std::ptrdiff_t>(labeled.size());
#pragma omp parallel for schedule(static) default(none) \
    shared(set, labeled, window, params, n)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const auto& post = window.posts[labeled[k]];
    auto& s = set.samples[k];
    s.features = vectorize(post.text, params.dim);
    s.label = set.decisions[labeled[k]].outcome == LabelOutcome::positive ? 1 : 0;
    s.timestamp = post.timestamp;
    s.post_id = post.id;
  }
  return set;
}

std::vector<std::vector<std::size_t>> bin_posts(const Window& window,
                                                Timestamp bin_span) {
  if (bin_span <= 0) throw std::invalid_argument("bin span must be positive");
  const Timestamp span = window.end - window.start;
  const auto n_bins = static_cast<std::size_t>((span + bin_span - 1) / bin_span);
  std::vector<std::vector<std::size_t>> bins(n_bins);
  for (std::size_t i = 0; i < window.posts.size(); ++i) {
    const Timestamp off = window.posts[i].timestamp - window.start;
    if (off < 0 || window.posts[i].timestamp >= window.end) continue;
    bins[static_cast<std::size_t>(off / bin_span)].push_back(i);
  }
  return bins;
}

Centroid positive_centroid(const LabeledSet& set) {
  std::vector<SparseVector> pos;
  for (const auto& s : set.samples) {
    if (s.label == 1) pos.push_back(s.features);
  }
  if (pos.empty()) return {};
  return centroid(pos);
}

std::vector<double> centroid_shift_report(std::span<const LabeledSet> sets) {
  std::vector<double> out;
  if (sets.size() < 2) return out;
  std::vector<Centroid> cs;
  cs.reserve(sets.size());
  for (const auto& s : sets) cs.push_back(positive_centroid(s));
  for (std::size_t i = 0; i + 1 < cs.size(); ++i) {
    out.push_back(cosine_distance(cs[i], cs[i + 1]));
  }
  return out;
}

void write_labeled_set(std::ostream& out, const LabeledSet& set,
                       const Window& window) {
  for (std::size_t i = 0; i < set.decisions.size(); ++i) {
    const auto& d = set.decisions[i];
    if (d.outcome == LabelOutcome::excluded) continue;
    nlohmann::ordered_json j;
    j["post_id"] = window.posts[i].id;
    j["label"] = d.outcome == LabelOutcome::positive ? 1 : 0;
    j["window"] = set.window;
    if (d.cell) j["cell"] = {d.cell->row, d.cell->col};
    if (d.matched_event) j["matched_event_id"] = window.events[*d.matched_event].id;
    out << j.dump() << '\n';
  }
  nlohmann::ordered_json stats;
  stats["total_posts"] = set.stats.total_posts;
  stats["labeled"] = set.stats.labeled;
  stats["positives"] = set.stats.positives;
  stats["negatives"] = set.stats.negatives;
  stats["excluded"] = set.stats.excluded;
  nlohmann::ordered_json tail;
  tail["stats"] = stats;
  out << tail.dump() << '\n';
}

std::vector<LabelRow> read_labeled_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<LabelRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad JSON");
    }
    if (j.contains("stats")) continue;
    try {
      LabelRow r;
      r.post_id = j.at("post_id").get<std::string>();
      r.label = j.at("label").get<int>();
      r.window = j.at("window").get<int>();
      if (r.label != 0 && r.label != 1) throw DataError("label not binary");
      rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace driftwatch
