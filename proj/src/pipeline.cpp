#include "driftwatch/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "driftwatch/errors.hpp"
#include "driftwatch/kernels.hpp"
#include "driftwatch/sha256.hpp"

namespace driftwatch {

void generation_step(ClassifierStore& store,
                     std::span<const LabeledSample> samples, int window,
                     Timestamp now, const PipelineConfig& cfg) {
  // New models first: they are the step that can refuse the data.
  std::vector<LinearModel> fresh;
  for (auto kind : cfg.learners) {
    fresh.push_back(train(samples, kind, cfg.hyper, window, cfg.label.dim));
  }

  std::vector<SparseVector> xs;
  xs.reserve(samples.size());
  for (const auto& s : samples) xs.push_back(s.features);
  const Centroid key = centroid(xs);

  const auto& existing = store.records();
  std::vector<LinearModel> copies(existing.size());
  const auto n = static_cast<std::ptrdiff_t>(existing.size());
#pragma omp parallel for schedule(dynamic, 1) default(none) \
    shared(existing, copies, samples, window, n)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    copies[i] = update(existing[i].model, samples, window);
  }

  auto put = [&](LinearModel m) {
    ClassifierRecord r;
    r.model = std::move(m);
    r.key = key;
    r.created_window = window;
    r.created_at = now;
    store.put(std::move(r));
  };
  for (auto& m : copies) put(std::move(m));
  for (auto& m : fresh) put(std::move(m));
}

// ---------------------------------------------------------------------------

std::vector<DetectedEvent> detect_events(std::vector<LocatedPost> posts,
                                         const GroupingParams& params) {
  std::sort(posts.begin(), posts.end(), [](const auto& a, const auto& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    if (a.post_id != b.post_id) return a.post_id < b.post_id;
    return a.cell < b.cell;
  });

  std::vector<std::size_t> parent(posts.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::size_t i = 0; i < posts.size(); ++i) {
    for (std::size_t j = i + 1; j < posts.size(); ++j) {
      if (posts[j].timestamp - posts[i].timestamp > params.span) break;
      if (chebyshev_distance(posts[i].cell, posts[j].cell) <= params.radius) {
        const auto a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < posts.size(); ++i) components[find(i)].push_back(i);

  std::vector<DetectedEvent> events;
  for (const auto& [root, members] : components) {
    if (members.size() < params.min_posts) continue;
    DetectedEvent e;
    e.start = posts[members.front()].timestamp;
    e.end = posts[members.front()].timestamp;
    std::set<GridCell> cells;
    for (auto i : members) {
      cells.insert(posts[i].cell);
      e.post_ids.push_back(posts[i].post_id);
      e.start = std::min(e.start, posts[i].timestamp);
      e.end = std::max(e.end, posts[i].timestamp);
    }
    e.cells.assign(cells.begin(), cells.end());
    std::sort(e.post_ids.begin(), e.post_ids.end());
    e.post_count = e.post_ids.size();
    events.push_back(std::move(e));
  }
  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
    if (a.start != b.start) return a.start < b.start;
    return a.post_ids.front() < b.post_ids.front();
  });
  return events;
}

std::vector<std::optional<GridCell>> locate_posts(
    std::span<const SocialPost> posts, std::span<const GroundTruthEvent> events,
    std::span<const std::string> gazetteer, Timestamp ttl) {
  std::vector<std::size_t> post_order(posts.size());
  std::iota(post_order.begin(), post_order.end(), 0);
  std::stable_sort(post_order.begin(), post_order.end(),
                   [&](auto a, auto b) { return posts[a].timestamp < posts[b].timestamp; });
  std::vector<std::size_t> event_order(events.size());
  std::iota(event_order.begin(), event_order.end(), 0);
  std::stable_sort(event_order.begin(), event_order.end(), [&](auto a, auto b) {
    return events[a].timestamp < events[b].timestamp;
  });

  LocationMemory memory(ttl);
  for (const auto& g : gazetteer) memory.pin(g);
  std::unordered_map<std::string, GridCell> name_cell;

  std::vector<std::optional<GridCell>> out(posts.size());
  std::size_t next_event = 0;
  std::size_t since_prune = 0;
  for (auto pi : post_order) {
    const auto& post = posts[pi];
    while (next_event < event_order.size() &&
           events[event_order[next_event]].timestamp <= post.timestamp) {
      const auto& e = events[event_order[next_event++]];
      const GridCell c = cell_of(e.lat, e.lon);
      for (const auto& name : e.location_names) {
        memory.remember(name, e.timestamp);
        name_cell[to_lower(name)] = c;
      }
    }
    for (const auto& loc : post.locations) memory.remember(loc, post.timestamp);
    if (++since_prune == 1024) {
      memory.prune(post.timestamp);
      since_prune = 0;
    }

    auto names = memory.match_locations(post.text, post.timestamp);
    for (const auto& loc : post.locations) names.push_back(to_lower(loc));
    std::sort(names.begin(), names.end());
    for (const auto& n : names) {
      if (auto it = name_cell.find(n); it != name_cell.end()) {
        out[pi] = it->second;
        break;
      }
      if (auto c = parse_cell_name(n)) {
        out[pi] = *c;
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

StreamInput synth_stream_input(const SynthConfig& synth) {
  auto s = generate_stream(synth);
  StreamInput in;
  in.posts = std::move(s.posts);
  in.events = std::move(s.events);
  in.truth = std::move(s.truth);
  in.gazetteer = std::move(s.gazetteer);
  return in;
}

namespace {

std::map<std::string, int> read_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read truth file " + path);
  std::map<std::string, int> truth;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("post_id") || !j.contains("label")) {
      throw DataError("malformed truth line in " + path);
    }
    truth[j["post_id"].get<std::string>()] = j["label"].get<int>();
  }
  return truth;
}

}  // namespace

StreamInput load_stream(const PipelineConfig& cfg) {
  if (cfg.posts_path.empty()) return synth_stream_input(cfg.synth);
  StreamInput in;
  auto posts = read_posts(cfg.posts_path);
  if (posts.skipped) {
    std::cerr << "skipped " << posts.skipped << " malformed post lines\n";
  }
  in.posts = cfg.dedup ? dedup_posts(posts.items) : std::move(posts.items);
  if (!cfg.events_path.empty()) {
    auto events = read_events(cfg.events_path);
    if (events.skipped) {
      std::cerr << "skipped " << events.skipped << " malformed event lines\n";
    }
    in.events = std::move(events.items);
  }
  if (!cfg.truth_path.empty()) in.truth = read_truth(cfg.truth_path);
  if (!cfg.gazetteer_path.empty()) in.gazetteer = read_gazetteer(cfg.gazetteer_path);
  return in;
}

// ---------------------------------------------------------------------------

RunResult run_windowed(const PipelineConfig& cfg, const StreamInput& input,
                       ArmMode mode) {
  cfg.validate();
  std::vector<SocialPost> posts = input.posts;
  std::stable_sort(posts.begin(), posts.end(), [](const auto& a, const auto& b) {
    return a.timestamp < b.timestamp;
  });
  posts.erase(std::remove_if(posts.begin(), posts.end(),
                             [&](const auto& p) { return p.timestamp < cfg.stream_start; }),
              posts.end());

  std::size_t n_windows = cfg.n_windows;
  if (n_windows == 0 && !posts.empty()) {
    n_windows = static_cast<std::size_t>(
                    (posts.back().timestamp - cfg.stream_start) / cfg.window_span) + 1;
  }

  const auto cells = locate_posts(posts, input.events, input.gazetteer, cfg.memory_ttl);

  RunResult result;
  DriftDetector detector(cfg.detector_mode, cfg.detector);
  Timestamp last_update = cfg.stream_start;
  std::vector<LabeledSample> pending;

  auto first = posts.begin();
  for (std::size_t wi = 0; wi < n_windows; ++wi) {
    const int w = static_cast<int>(wi);
    const Timestamp start = cfg.stream_start + static_cast<Timestamp>(wi) * cfg.window_span;
    const Timestamp end = start + cfg.window_span;
    auto last = std::lower_bound(first, posts.end(), end, [](const auto& p, Timestamp t) {
      return p.timestamp < t;
    });
    const std::size_t offset = static_cast<std::size_t>(first - posts.begin());
    Window window = make_window(
        w, start, end,
        std::span<const SocialPost>(posts.data() + offset,
                                    static_cast<std::size_t>(last - first)),
        input.events, cfg.label.max_dt);
    first = last;

    WindowReport report;
    report.window = w;
    report.posts = window.posts.size();

    std::vector<int> predicted;
    if (!result.store.empty()) {
      const auto xs = vectorize_posts(window.posts, cfg.label.dim);
      const std::size_t size_before = result.store.size();
      const auto outs = classify_posts(xs, result.store, cfg.ensemble);
      result.prediction_phase_sizes.emplace_back(size_before, result.store.size());

      predicted.reserve(outs.size());
      std::vector<LocatedPost> relevant;
      for (std::size_t i = 0; i < outs.size(); ++i) {
        predicted.push_back(outs[i].label);
        detector.observe({outs[i].mean_member_score, outs[i].mean_member_margin});
        if (outs[i].label == 1) {
          ++report.predicted_relevant;
          if (const auto& c = cells[offset + i]) {
            relevant.push_back({window.posts[i].id, *c, window.posts[i].timestamp});
          }
        }
      }
      report.events = detect_events(std::move(relevant), cfg.grouping);
      report.evaluated = true;

      if (input.truth) {
        std::vector<int> actual;
        actual.reserve(window.posts.size());
        for (const auto& p : window.posts) {
          auto it = input.truth->find(p.id);
          if (it == input.truth->end()) {
            throw DataError("truth file has no label for post " + p.id);
          }
          actual.push_back(it->second);
        }
        report.truth_metrics = compute_metrics(predicted, actual);
      }
    }

    // Window close: label retroactively, then consult the schedule.
    auto labeled = generate_training_data(window, cfg.label, end);
    report.label_stats = labeled.stats;
    if (report.evaluated) {
      std::vector<int> p, a;
      for (std::size_t i = 0; i < labeled.decisions.size(); ++i) {
        const auto o = labeled.decisions[i].outcome;
        if (o == LabelOutcome::excluded) continue;
        p.push_back(predicted[i]);
        a.push_back(o == LabelOutcome::positive ? 1 : 0);
      }
      report.label_metrics = compute_metrics(p, a);
    }
    if (!result.labeled.empty()) {
      report.centroid_shift = cosine_distance(positive_centroid(result.labeled.back()),
                                              positive_centroid(labeled));
    }
    pending.insert(pending.end(), labeled.samples.begin(), labeled.samples.end());
    result.labeled.push_back(std::move(labeled));

    report.detector_fired = detector.fired();
    bool want_update;
    if (result.store.empty()) {
      want_update = true;  // bootstrap: label-then-train
    } else if (mode == ArmMode::static_) {
      want_update = false;
    } else {
      want_update = next_action(cfg.schedule, end, last_update, detector.fired()) ==
                    Action::update_now;
    }
    if (want_update && !pending.empty()) {
      try {
        generation_step(result.store, pending, w, end, cfg);
        report.updated = true;
        last_update = end;
        pending.clear();
        detector.reset();
      } catch (const std::invalid_argument&) {
        // One class only so far: keep accumulating (the window widens).
      }
    }
    report.registry_size = result.store.size();
    result.windows.push_back(std::move(report));
  }
  return result;
}

// ---------------------------------------------------------------------------

std::string stream_checksum(std::span<const SocialPost> posts) {
  std::string bytes;
  for (const auto& p : posts) {
    bytes += post_to_json_line(p);
    bytes += '\n';
  }
  return sha256_hex(bytes);
}

namespace {

bool share_post(const DetectedEvent& a, const DetectedEvent& b) {
  // post_ids are sorted
  auto i = a.post_ids.begin();
  auto j = b.post_ids.begin();
  while (i != a.post_ids.end() && j != b.post_ids.end()) {
    if (*i < *j) ++i;
    else if (*j < *i) ++j;
    else return true;
  }
  return false;
}

}  // namespace

BenchReport bench(const PipelineConfig& cfg) {
  PipelineConfig pc = cfg;
  pc.posts_path.clear();
  pc.n_windows = cfg.synth.n_windows;
  pc.stream_start = cfg.synth.stream_start;
  pc.window_span = cfg.synth.window_span;
  const StreamInput input = synth_stream_input(cfg.synth);

  BenchReport report;
  report.stream_sha256_adaptive = stream_checksum(input.posts);
  const RunResult adaptive = run_windowed(pc, input, ArmMode::adaptive);
  report.stream_sha256_static = stream_checksum(input.posts);
  const RunResult fixed = run_windowed(pc, input, ArmMode::static_);

  for (std::size_t w = 0; w < adaptive.windows.size(); ++w) {
    const auto& a = adaptive.windows[w];
    const auto& s = fixed.windows[w];
    if (!a.evaluated || !s.evaluated) continue;
    BenchRow row;
    row.window = a.window;
    row.adaptive = a.truth_metrics.value_or(Metrics{});
    row.static_ = s.truth_metrics.value_or(Metrics{});
    row.events_adaptive = a.events.size();
    row.events_static = s.events.size();
    for (const auto& ea : a.events) {
      if (std::any_of(s.events.begin(), s.events.end(),
                      [&](const auto& es) { return share_post(ea, es); })) {
        ++row.events_both;
      }
    }
    for (const auto& es : s.events) {
      if (std::none_of(a.events.begin(), a.events.end(),
                       [&](const auto& ea) { return share_post(ea, es); })) {
        ++row.events_static_only;
      }
    }
    if (row.events_static_only > 0) report.static_contained = false;
    row.centroid_shift = a.centroid_shift;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace driftwatch
