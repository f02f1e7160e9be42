#include "driftwatch/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "driftwatch/errors.hpp"
#include "driftwatch/geotime.hpp"
#include "driftwatch/rng.hpp"

namespace driftwatch {

using ordered_json = nlohmann::ordered_json;

namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

bool read_string_array(const nlohmann::json& j, std::vector<std::string>& out) {
  if (!j.is_array()) return false;
  out.clear();
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_string()) return false;
    out.push_back(v.get<std::string>());
  }
  return true;
}

bool has_exact_keys(const nlohmann::json& j,
                    std::initializer_list<std::string_view> keys) {
  if (!j.is_object() || j.size() != keys.size()) return false;
  for (auto k : keys) {
    if (!j.contains(k)) return false;
  }
  return true;
}

bool read_integer(const nlohmann::json& j, Timestamp& out) {
  if (j.is_number_integer()) {
    out = j.get<Timestamp>();
    return true;
  }
  return false;
}

template <typename T, typename ParseLine>
ReadResult<T> read_lines(std::istream& in, ParseLine parse) {
  ReadResult<T> result;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    T item;
    if (parse(line, item)) {
      result.items.push_back(std::move(item));
    } else {
      ++result.skipped;
    }
  }
  return result;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

std::string_view to_string(EventSource s) {
  switch (s) {
    case EventSource::physical_sensor: return "physical_sensor";
    case EventSource::news: return "news";
    case EventSource::report: return "report";
    case EventSource::synthetic: return "synthetic";
  }
  return "synthetic";
}

EventSource event_source_from_string(std::string_view s) {
  if (s == "physical_sensor") return EventSource::physical_sensor;
  if (s == "news") return EventSource::news;
  if (s == "report") return EventSource::report;
  if (s == "synthetic") return EventSource::synthetic;
  throw DataError("unknown event source '" + std::string(s) + "'");
}

bool parse_post_line(std::string_view line, SocialPost& out) {
  auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return false;
  if (!has_exact_keys(j, {"id", "text", "locations", "timestamp", "links",
                          "author"})) {
    return false;
  }
  if (!j["id"].is_string() || !j["text"].is_string() ||
      !j["author"].is_string()) {
    return false;
  }
  SocialPost p;
  p.id = j["id"].get<std::string>();
  p.text = j["text"].get<std::string>();
  p.author = j["author"].get<std::string>();
  if (!read_integer(j["timestamp"], p.timestamp)) return false;
  if (!read_string_array(j["locations"], p.locations)) return false;
  if (!read_string_array(j["links"], p.links)) return false;
  if (p.id.empty() || p.timestamp < 0 || is_blank(p.text)) return false;
  out = std::move(p);
  return true;
}

bool parse_event_line(std::string_view line, GroundTruthEvent& out) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded()) return false;
  if (!has_exact_keys(j, {"id", "lat", "lon", "timestamp", "location_names",
                          "source"})) {
    return false;
  }
  if (!j["id"].is_string() || !j["lat"].is_number() ||
      !j["lon"].is_number() || !j["source"].is_string()) {
    return false;
  }
  GroundTruthEvent e;
  e.id = j["id"].get<std::string>();
  e.lat = j["lat"].get<double>();
  e.lon = j["lon"].get<double>();
  if (!read_integer(j["timestamp"], e.timestamp)) return false;
  if (!read_string_array(j["location_names"], e.location_names)) return false;
  try {
    e.source = event_source_from_string(j["source"].get<std::string>());
  } catch (const DataError&) {
    return false;
  }
  if (e.id.empty() || e.timestamp < 0) return false;
  if (!(e.lat >= -90.0 && e.lat <= 90.0)) return false;
  if (!(e.lon >= -180.0 && e.lon < 180.0)) return false;
  if (e.location_names.empty()) return false;
  for (const auto& n : e.location_names) {
    if (n.empty()) return false;
  }
  out = std::move(e);
  return true;
}

ReadResult<SocialPost> read_posts(std::istream& in) {
  return read_lines<SocialPost>(in, [](std::string_view l, SocialPost& p) {
    return parse_post_line(l, p);
  });
}

ReadResult<GroundTruthEvent> read_events(std::istream& in) {
  return read_lines<GroundTruthEvent>(
      in, [](std::string_view l, GroundTruthEvent& e) {
        return parse_event_line(l, e);
      });
}

ReadResult<SocialPost> read_posts(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_posts(in);
}

ReadResult<GroundTruthEvent> read_events(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_events(in);
}

std::string post_to_json_line(const SocialPost& p) {
  ordered_json j;
  j["id"] = p.id;
  j["text"] = p.text;
  j["locations"] = p.locations;
  j["timestamp"] = p.timestamp;
  j["links"] = p.links;
  j["author"] = p.author;
  return j.dump();
}

std::string event_to_json_line(const GroundTruthEvent& e) {
  ordered_json j;
  j["id"] = e.id;
  j["lat"] = e.lat;
  j["lon"] = e.lon;
  j["timestamp"] = e.timestamp;
  j["location_names"] = e.location_names;
  j["source"] = std::string(to_string(e.source));
  return j.dump();
}

void write_posts(std::ostream& out, const std::vector<SocialPost>& posts) {
  for (const auto& p : posts) out << post_to_json_line(p) << '\n';
}

void write_events(std::ostream& out,
                  const std::vector<GroundTruthEvent>& events) {
  for (const auto& e : events) out << event_to_json_line(e) << '\n';
}

void write_posts(const std::filesystem::path& path,
                 const std::vector<SocialPost>& posts) {
  auto out = open_output(path);
  write_posts(out, posts);
}

void write_events(const std::filesystem::path& path,
                  const std::vector<GroundTruthEvent>& events) {
  auto out = open_output(path);
  write_events(out, events);
}

std::vector<SocialPost> dedup_posts(const std::vector<SocialPost>& posts) {
  std::unordered_set<std::string> seen;
  std::vector<SocialPost> out;
  out.reserve(posts.size());
  for (const auto& p : posts) {
    if (seen.insert(p.text).second) out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------

void SynthConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("synth: " + m); };
  if (n_windows == 0) fail("n_windows must be >= 1");
  if (posts_per_window == 0) fail("posts_per_window must be >= 1");
  if (!(positive_fraction > 0.0 && positive_fraction < 1.0)) {
    fail("positive_fraction must lie in (0, 1)");
  }
  if (!(swap_ratio >= 0.0 && swap_ratio <= 1.0)) {
    fail("swap_ratio must lie in [0, 1]");
  }
  if (!(negative_location_fraction >= 0.0 && negative_location_fraction <= 1.0)) {
    fail("negative_location_fraction must lie in [0, 1]");
  }
  if (relevant_words_per_post == 0 || vocab_relevant < relevant_words_per_post) {
    fail("vocab_relevant must be >= relevant_words_per_post >= 1");
  }
  if (irrelevant_words_per_post == 0 ||
      vocab_irrelevant < irrelevant_words_per_post) {
    fail("vocab_irrelevant must be >= irrelevant_words_per_post >= 1");
  }
  for (auto w : drift_windows) {
    if (w >= n_windows) fail("drift window out of range");
  }
  if (events_per_window == 0) fail("events_per_window must be >= 1");
  if (cells_universe == 0 ||
      cells_universe > static_cast<std::size_t>(kGridRows) * kGridCols) {
    fail("cells_universe out of range");
  }
  if (window_span <= 0) fail("window_span must be positive");
  if (stream_start < 0) fail("stream_start must be >= 0");
  if (event_keyword.empty()) fail("event_keyword must be non-empty");
}

namespace {

constexpr Timestamp kMatchSpan = 3 * kDay;
// Decoy locations on negatives keep clear of any event in the same cell by
// more than the labeler's exclusion band.
constexpr Timestamp kDecoyClearance = 10 * kDay;
constexpr int kDecoyAttempts = 32;

class WordFactory {
 public:
  explicit WordFactory(std::string keyword) { used_.insert(std::move(keyword)); }

  std::string fresh(Rng& rng) {
    for (;;) {
      const std::size_t len = 5 + rng.below(4);
      std::string w(len, 'a');
      for (auto& c : w) c = static_cast<char>('a' + rng.below(26));
      if (used_.insert(w).second) return w;
    }
  }

 private:
  std::unordered_set<std::string> used_;
};

std::vector<std::size_t> distinct_indices(Rng& rng, std::size_t n,
                                          std::size_t k) {
  std::vector<std::size_t> out;
  out.reserve(k);
  while (out.size() < k) {
    const std::size_t i = rng.below(n);
    if (std::find(out.begin(), out.end(), i) == out.end()) out.push_back(i);
  }
  return out;
}

std::string random_link(Rng& rng) {
  static constexpr std::string_view kAlnum =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  std::string s = "https://t.co/";
  for (int i = 0; i < 10; ++i) s += kAlnum[rng.below(kAlnum.size())];
  return s;
}

struct DraftPost {
  Timestamp ts;
  std::size_t order;
  SocialPost post;
  int label;
};

}  // namespace

SynthStream generate_stream(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  WordFactory words(cfg.event_keyword);

  std::vector<std::string> relevant;
  std::vector<std::string> irrelevant;
  for (std::size_t i = 0; i < cfg.vocab_relevant; ++i) {
    relevant.push_back(words.fresh(rng));
  }
  for (std::size_t i = 0; i < cfg.vocab_irrelevant; ++i) {
    irrelevant.push_back(words.fresh(rng));
  }

  std::vector<GridCell> universe;
  {
    std::set<GridCell> seen;
    while (universe.size() < cfg.cells_universe) {
      GridCell c{static_cast<int>(rng.below(kGridRows)),
                 static_cast<int>(rng.below(kGridCols))};
      if (seen.insert(c).second) universe.push_back(c);
    }
  }

  SynthStream out;
  for (const auto& c : universe) out.gazetteer.push_back(cell_name(c));

  // Events for every window first, so decoys can avoid all of them.
  std::vector<std::vector<GroundTruthEvent>> window_events(cfg.n_windows);
  std::vector<std::vector<std::pair<std::size_t, Timestamp>>> events_by_cell(
      universe.size());
  std::size_t event_serial = 0;
  for (std::size_t w = 0; w < cfg.n_windows; ++w) {
    const Timestamp start = cfg.stream_start + static_cast<Timestamp>(w) * cfg.window_span;
    auto& evs = window_events[w];
    for (std::size_t e = 0; e < cfg.events_per_window; ++e) {
      const std::size_t u = rng.below(universe.size());
      const Timestamp ts =
          start + static_cast<Timestamp>(rng.below(static_cast<std::uint64_t>(cfg.window_span)));
      const LatLon ll = cell_center(universe[u]);
      GroundTruthEvent ev;
      ev.lat = ll.lat;
      ev.lon = ll.lon;
      ev.timestamp = ts;
      ev.location_names = {cell_name(universe[u])};
      ev.source = EventSource::synthetic;
      evs.push_back(std::move(ev));
      events_by_cell[u].emplace_back(e, ts);
    }
    std::stable_sort(evs.begin(), evs.end(), [](const auto& a, const auto& b) {
      return a.timestamp < b.timestamp;
    });
    for (auto& ev : evs) {
      char id[32];
      std::snprintf(id, sizeof id, "ev%06zu", event_serial++);
      ev.id = id;
    }
  }

  auto decoy_ok = [&](std::size_t u, Timestamp ts) {
    for (const auto& [_, ets] : events_by_cell[u]) {
      if (std::llabs(ets - ts) <= kDecoyClearance) return false;
    }
    return true;
  };

  const std::size_t n_swap = static_cast<std::size_t>(
      std::llround(cfg.swap_ratio * static_cast<double>(cfg.vocab_relevant)));
  std::size_t post_serial = 0;

  for (std::size_t w = 0; w < cfg.n_windows; ++w) {
    const Timestamp start = cfg.stream_start + static_cast<Timestamp>(w) * cfg.window_span;
    const Timestamp end = start + cfg.window_span;

    if (std::find(cfg.drift_windows.begin(), cfg.drift_windows.end(), w) !=
            cfg.drift_windows.end() &&
        n_swap > 0) {
      std::vector<std::size_t> pos(relevant.size());
      for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = i;
      rng.shuffle(pos);
      pos.resize(n_swap);
      std::sort(pos.begin(), pos.end());
      for (auto p : pos) {
        irrelevant.push_back(relevant[p]);
        relevant[p] = words.fresh(rng);
      }
    }
    out.relevant_vocab.push_back(relevant);

    const auto& evs = window_events[w];
    std::vector<DraftPost> drafts;
    drafts.reserve(cfg.posts_per_window);
    for (std::size_t i = 0; i < cfg.posts_per_window; ++i) {
      DraftPost d;
      d.order = i;
      std::vector<std::string> tokens{cfg.event_keyword};
      if (rng.bernoulli(cfg.positive_fraction)) {
        d.label = 1;
        const auto& ev = evs[rng.below(evs.size())];
        Timestamp ts = ev.timestamp + rng.between(-kMatchSpan, kMatchSpan);
        d.ts = std::clamp(ts, start, end - 1);
        for (auto k : distinct_indices(rng, relevant.size(),
                                       cfg.relevant_words_per_post)) {
          tokens.push_back(relevant[k]);
        }
        tokens.push_back(ev.location_names.front());
      } else {
        d.label = 0;
        d.ts = start + static_cast<Timestamp>(
                           rng.below(static_cast<std::uint64_t>(cfg.window_span)));
        for (auto k : distinct_indices(rng, irrelevant.size(),
                                       cfg.irrelevant_words_per_post)) {
          tokens.push_back(irrelevant[k]);
        }
        if (rng.bernoulli(cfg.negative_location_fraction)) {
          for (int a = 0; a < kDecoyAttempts; ++a) {
            const std::size_t u = rng.below(universe.size());
            if (decoy_ok(u, d.ts)) {
              tokens.push_back(cell_name(universe[u]));
              break;
            }
          }
        }
      }
      rng.shuffle(tokens);
      std::string text;
      for (const auto& t : tokens) {
        if (!text.empty()) text += ' ';
        text += t;
      }
      d.post.text = std::move(text);
      d.post.timestamp = d.ts;
      char author[16];
      std::snprintf(author, sizeof author, "u%04llu",
                    static_cast<unsigned long long>(rng.below(5000)));
      d.post.author = author;
      if (rng.bernoulli(0.2)) d.post.links.push_back(random_link(rng));
      drafts.push_back(std::move(d));
    }
    std::stable_sort(drafts.begin(), drafts.end(),
                     [](const DraftPost& a, const DraftPost& b) {
                       return a.ts < b.ts;
                     });
    for (auto& d : drafts) {
      char id[32];
      std::snprintf(id, sizeof id, "p%07zu", post_serial++);
      d.post.id = id;
      out.truth.emplace(d.post.id, d.label);
      out.posts.push_back(std::move(d.post));
    }
    out.events.insert(out.events.end(), evs.begin(), evs.end());
  }
  return out;
}

}  // namespace driftwatch
