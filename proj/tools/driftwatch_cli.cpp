// driftwatch command-line front end.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "driftwatch/errors.hpp"
#include "driftwatch/kernels.hpp"
#include "driftwatch/labeler.hpp"
#include "driftwatch/pipeline.hpp"
#include "driftwatch/registry.hpp"

namespace fs = std::filesystem;
using namespace driftwatch;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct Inputs {
  std::string posts, events, truth, gazetteer;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "config file (key = value)")
      ->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "seed for generator and learners");
  app->add_option("--out", c.out, "output directory");
}

void add_inputs(CLI::App* app, Inputs& in, bool truth) {
  app->add_option("--posts", in.posts, "posts JSONL (overrides posts_path)");
  app->add_option("--events", in.events, "events JSONL (overrides events_path)");
  app->add_option("--gazetteer", in.gazetteer, "gazetteer, one name per line");
  if (truth) app->add_option("--truth", in.truth, "truth JSONL {post_id, label}");
}

PipelineConfig resolve(const Common& c, const Inputs* in = nullptr) {
  PipelineConfig cfg = c.config.empty() ? PipelineConfig{} : load_config(c.config);
  if (c.seed) cfg.set_seed(*c.seed);
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (in) {
    if (!in->posts.empty()) cfg.posts_path = in->posts;
    if (!in->events.empty()) cfg.events_path = in->events;
    if (!in->truth.empty()) cfg.truth_path = in->truth;
    if (!in->gazetteer.empty()) cfg.gazetteer_path = in->gazetteer;
  }
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw DataError("cannot write " + p.string());
  return f;
}

fs::path ensure_dir(const std::string& d) {
  fs::path p(d);
  fs::create_directories(p);
  return p;
}

int cmd_generate(const Common& c) {
  const auto cfg = resolve(c);
  const auto s = generate_stream(cfg.synth);
  const auto dir = ensure_dir(cfg.out_dir);
  write_posts(dir / "posts.jsonl", s.posts);
  write_events(dir / "events.jsonl", s.events);
  {
    auto f = open_out(dir / "truth.jsonl");
    for (const auto& p : s.posts) {
      nlohmann::ordered_json j{{"post_id", p.id}, {"label", s.truth.at(p.id)}};
      f << j.dump() << '\n';
    }
  }
  {
    auto f = open_out(dir / "gazetteer.txt");
    for (const auto& g : s.gazetteer) f << g << '\n';
  }
  std::printf("%zu posts, %zu events -> %s\n", s.posts.size(), s.events.size(),
              dir.string().c_str());
  return kExitOk;
}

Window window_of(const PipelineConfig& cfg, const StreamInput& in, int index) {
  const Timestamp start = cfg.stream_start + index * cfg.window_span;
  return make_window(index, start, start + cfg.window_span, in.posts, in.events,
                     cfg.label.max_dt);
}

int cmd_label(const Common& c, const Inputs& inputs, int index) {
  const auto cfg = resolve(c, &inputs);
  auto in = load_stream(cfg);
  std::sort(in.posts.begin(), in.posts.end(),
            [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  const Window w = window_of(cfg, in, index);
  const auto set = generate_training_data(w, cfg.label, w.end);
  const auto dir = ensure_dir(cfg.out_dir);
  char name[32];
  std::snprintf(name, sizeof name, "labels_w%03d.jsonl", index);
  auto f = open_out(dir / name);
  write_labeled_set(f, set, w);
  std::printf("window %d: %zu posts, %zu positive, %zu negative, %zu excluded\n",
              index, set.stats.total_posts, set.stats.positives,
              set.stats.negatives, set.stats.excluded);
  return kExitOk;
}

int cmd_train(const Common& c, const Inputs& inputs,
              const std::vector<std::string>& label_files,
              const std::string& store_in, std::optional<int> window) {
  const auto cfg = resolve(c, &inputs);
  if (cfg.posts_path.empty()) throw ConfigError("train needs --posts or posts_path");
  auto posts = read_posts(cfg.posts_path).items;
  std::map<std::string, const SocialPost*> by_id;
  for (const auto& p : posts) by_id.emplace(p.id, &p);

  std::vector<LabeledSample> samples;
  int latest = 0;
  for (const auto& file : label_files) {
    for (const auto& row : read_labeled_set(file)) {
      auto it = by_id.find(row.post_id);
      if (it == by_id.end()) {
        throw DataError(file + ": post " + row.post_id + " not in the post file");
      }
      samples.push_back({vectorize(it->second->text, cfg.label.dim), row.label,
                         it->second->timestamp, row.post_id});
      latest = std::max(latest, row.window);
    }
  }
  const int w = window.value_or(latest);
  ClassifierStore store =
      store_in.empty() ? ClassifierStore{} : ClassifierStore::load(store_in);
  const Timestamp now = cfg.stream_start + (w + 1) * cfg.window_span;
  generation_step(store, samples, w, now, cfg);
  const auto dir = ensure_dir(cfg.out_dir) / "store";
  store.save(dir);
  std::printf("window %d: %zu samples, store now holds %zu classifiers -> %s\n", w,
              samples.size(), store.size(), dir.string().c_str());
  return kExitOk;
}

int cmd_run(const Common& c, const Inputs& inputs, bool static_arm) {
  const auto cfg = resolve(c, &inputs);
  const auto in = load_stream(cfg);
  const auto result =
      run_windowed(cfg, in, static_arm ? ArmMode::static_ : ArmMode::adaptive);
  const auto dir = ensure_dir(cfg.out_dir);
  {
    auto f = open_out(dir / "metrics.csv");
    write_metrics_csv(f, result);
  }
  {
    auto f = open_out(dir / "events.geojson");
    write_events_geojson(f, result);
  }
  result.store.save(dir / "store");
  for (const auto& w : result.windows) {
    std::printf("window %d: posts %zu relevant %zu", w.window, w.posts,
                w.predicted_relevant);
    if (w.truth_metrics) std::printf(" f1 %.4f", w.truth_metrics->f1);
    std::printf(" events %zu registry %zu%s\n", w.events.size(), w.registry_size,
                w.updated ? " updated" : "");
  }
  return kExitOk;
}

int cmd_bench(const Common& c) {
  const auto cfg = resolve(c);
  const auto report = bench(cfg);
  const auto dir = ensure_dir(cfg.out_dir);
  {
    auto f = open_out(dir / "bench.csv");
    write_bench_csv(f, report);
  }
  {
    auto f = open_out(dir / "bench_summary.json");
    write_bench_summary(f, report, cfg);
  }
  std::printf("window  f1_static  f1_adaptive\n");
  for (const auto& r : report.rows) {
    std::printf("%6d  %9.4f  %11.4f\n", r.window, r.static_.f1, r.adaptive.f1);
  }
  return kExitOk;
}

int cmd_detect(const Common& c, const Inputs& inputs, const std::string& store_dir) {
  const auto cfg = resolve(c, &inputs);
  if (cfg.posts_path.empty()) throw ConfigError("detect needs --posts or posts_path");
  const auto store = ClassifierStore::load(store_dir);
  auto posts = read_posts(cfg.posts_path).items;
  if (cfg.dedup) posts = dedup_posts(posts);
  const auto xs = vectorize_posts(posts, cfg.label.dim);
  const auto outs = classify_posts(xs, store, cfg.ensemble);

  std::vector<GroundTruthEvent> events;
  if (!cfg.events_path.empty()) events = read_events(cfg.events_path).items;
  std::vector<std::string> gazetteer;
  if (!cfg.gazetteer_path.empty()) gazetteer = read_gazetteer(cfg.gazetteer_path);
  std::vector<std::size_t> order(posts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return posts[a].timestamp < posts[b].timestamp;
  });
  std::vector<SocialPost> sorted;
  sorted.reserve(posts.size());
  for (auto i : order) sorted.push_back(posts[i]);
  const auto cells = locate_posts(sorted, events, gazetteer, cfg.memory_ttl);

  std::vector<LocatedPost> relevant;
  std::size_t n_relevant = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto i = order[k];
    if (outs[i].label != 1) continue;
    ++n_relevant;
    if (cells[k]) relevant.push_back({posts[i].id, *cells[k], posts[i].timestamp});
  }
  const auto detected = detect_events(std::move(relevant), cfg.grouping);

  const auto dir = ensure_dir(cfg.out_dir);
  {
    auto f = open_out(dir / "predictions.jsonl");
    char score[32];
    for (std::size_t i = 0; i < posts.size(); ++i) {
      std::snprintf(score, sizeof score, "%.6f", outs[i].score);
      f << "{\"post_id\":" << nlohmann::json(posts[i].id).dump()
        << ",\"score\":" << score << ",\"label\":" << outs[i].label << "}\n";
    }
  }
  {
    RunResult shell;
    WindowReport w;
    w.events = detected;
    shell.windows.push_back(std::move(w));
    auto f = open_out(dir / "events.geojson");
    write_events_geojson(f, shell);
  }
  std::printf("%zu posts, %zu relevant, %zu events\n", posts.size(), n_relevant,
              detected.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"driftwatch: drift-aware event detection over post streams"};
  app.require_subcommand(1);

  Common c_gen, c_label, c_train, c_run, c_bench, c_detect;
  Inputs i_label, i_train, i_run, i_detect;

  auto* gen = app.add_subcommand("generate", "write a synthetic stream to files");
  add_common(gen, c_gen);

  auto* label = app.add_subcommand("label", "label one closed window");
  add_common(label, c_label);
  add_inputs(label, i_label, false);
  int label_window = 0;
  label->add_option("--window", label_window, "window index")->required();

  auto* train = app.add_subcommand("train", "labeled sets -> classifier store");
  add_common(train, c_train);
  add_inputs(train, i_train, false);
  std::vector<std::string> label_files;
  std::string train_store;
  std::optional<int> train_window;
  train->add_option("--labels", label_files, "labeled-set JSONL files")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--store", train_store, "existing store to extend")
      ->check(CLI::ExistingDirectory);
  train->add_option("--window", train_window, "window index of the new models");

  auto* run = app.add_subcommand("run", "windowed classify/label/update loop");
  add_common(run, c_run);
  add_inputs(run, i_run, true);
  bool static_arm = false;
  run->add_flag("--static", static_arm, "never update after the first window");

  auto* bch = app.add_subcommand("bench", "adaptive vs static on a drift stream");
  add_common(bch, c_bench);

  auto* det = app.add_subcommand("detect", "classify posts with a saved store");
  add_common(det, c_detect);
  add_inputs(det, i_detect, false);
  std::string detect_store;
  det->add_option("--store", detect_store, "store directory")
      ->required()
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_generate(c_gen);
    if (*label) return cmd_label(c_label, i_label, label_window);
    if (*train) return cmd_train(c_train, i_train, label_files, train_store, train_window);
    if (*run) return cmd_run(c_run, i_run, static_arm);
    if (*bch) return cmd_bench(c_bench);
    if (*det) return cmd_detect(c_detect, i_detect, detect_store);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
