#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "driftwatch/errors.hpp"
#include "driftwatch/pipeline.hpp"

namespace driftwatch {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view v) {
  throw ConfigError("config: bad value for '" + std::string(key) + "': '" +
                    std::string(v) + "'");
}

template <typename T>
T parse_integral(std::string_view key, std::string_view v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v);
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  std::string s(v);
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(d)) {
    bad_value(key, v);
  }
  return d;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad_value(key, v);
}

Timestamp parse_days(std::string_view key, std::string_view v) {
  return static_cast<Timestamp>(std::llround(parse_double(key, v) * kDay));
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    auto next = v.find(',', pos);
    if (next == std::string_view::npos) next = v.size();
    auto item = trim(v.substr(pos, next - pos));
    if (!item.empty()) out.emplace_back(item);
    pos = next + 1;
  }
  return out;
}

std::string fmt_double(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", d);
  return buf;
}

std::string fmt_days(Timestamp t) { return fmt_double(static_cast<double>(t) / kDay); }

struct Key {
  std::function<void(PipelineConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

Key expert_key(LearnerKind kind) {
  return {[kind](PipelineConfig& c, std::string_view k, std::string_view v) {
            c.ensemble.expert_weights[kind] = parse_double(k, v);
          },
          [kind](const PipelineConfig& c) {
            auto it = c.ensemble.expert_weights.find(kind);
            return it == c.ensemble.expert_weights.end() ? std::string("0")
                                                         : fmt_double(it->second);
          }};
}

#define DW_FIELD_KEY(expr, parse, format)                                       \
  Key {                                                                         \
    [](PipelineConfig& c, std::string_view k, std::string_view v) {             \
      (void)k;                                                                  \
      expr = parse;                                                             \
    },                                                                          \
        [](const PipelineConfig& c) { return format(expr); }                    \
  }

std::string str_id(const std::string& s) { return s; }
template <typename T>
std::string to_str(T v) { return std::to_string(v); }
std::string bool_str(bool b) { return b ? "true" : "false"; }
template <typename E>
std::string enum_str(E e) { return std::string(to_string(e)); }

const std::map<std::string, Key, std::less<>>& keys() {
  static const std::map<std::string, Key, std::less<>> k = {
      {"stream_start", DW_FIELD_KEY(c.stream_start, parse_integral<Timestamp>(k, v), to_str)},
      {"window_span_days", DW_FIELD_KEY(c.window_span, parse_days(k, v), fmt_days)},
      {"n_windows", DW_FIELD_KEY(c.n_windows, parse_integral<std::size_t>(k, v), to_str)},
      {"seed", DW_FIELD_KEY(c.seed, parse_integral<std::uint64_t>(k, v), to_str)},

      {"ensemble_scheme", DW_FIELD_KEY(c.ensemble.scheme, weight_scheme_from_string(v), enum_str)},
      {"ensemble_retrieval", DW_FIELD_KEY(c.ensemble.retrieval, retrieval_from_string(v), enum_str)},
      {"ensemble_size", DW_FIELD_KEY(c.ensemble.size, parse_integral<std::size_t>(k, v), to_str)},
      {"relevancy_query", DW_FIELD_KEY(c.ensemble.query, relevancy_query_from_string(v), enum_str)},
      {"expert_weight_logreg", expert_key(LearnerKind::logreg)},
      {"expert_weight_svm", expert_key(LearnerKind::svm)},
      {"learners",
       Key{[](PipelineConfig& c, std::string_view, std::string_view v) {
             c.learners.clear();
             for (const auto& s : split_list(v)) {
               c.learners.push_back(learner_kind_from_string(s));
             }
           },
           [](const PipelineConfig& c) {
             std::string s;
             for (auto kind : c.learners) {
               if (!s.empty()) s += ",";
               s += to_string(kind);
             }
             return s;
           }}},

      {"schedule_kind", DW_FIELD_KEY(c.schedule.kind, schedule_kind_from_string(v), enum_str)},
      {"schedule_interval_days", DW_FIELD_KEY(c.schedule.interval, parse_days(k, v), fmt_days)},
      {"schedule_min_gap_days", DW_FIELD_KEY(c.schedule.min_gap, parse_days(k, v), fmt_days)},
      {"schedule_max_gap_days", DW_FIELD_KEY(c.schedule.max_gap, parse_days(k, v), fmt_days)},

      {"detector_mode", DW_FIELD_KEY(c.detector_mode, detector_mode_from_string(v), enum_str)},
      {"detector_window", DW_FIELD_KEY(c.detector.window, parse_integral<std::size_t>(k, v), to_str)},
      {"detector_low_conf_lo", DW_FIELD_KEY(c.detector.low_conf_lo, parse_double(k, v), fmt_double)},
      {"detector_low_conf_hi", DW_FIELD_KEY(c.detector.low_conf_hi, parse_double(k, v), fmt_double)},
      {"detector_margin_tau", DW_FIELD_KEY(c.detector.margin_tau, parse_double(k, v), fmt_double)},
      {"detector_fraction_theta", DW_FIELD_KEY(c.detector.fraction_theta, parse_double(k, v), fmt_double)},
      {"detector_persistence", DW_FIELD_KEY(c.detector.persistence, parse_integral<std::size_t>(k, v), to_str)},

      {"match_max_dt_days", DW_FIELD_KEY(c.label.max_dt, parse_days(k, v), fmt_days)},
      {"match_radius", DW_FIELD_KEY(c.label.radius, parse_integral<int>(k, v), to_str)},
      {"exclude_near_miss", DW_FIELD_KEY(c.label.exclude_near_miss, parse_bool(k, v), bool_str)},
      {"exclusion_band_days", DW_FIELD_KEY(c.label.exclusion_band, parse_days(k, v), fmt_days)},

      {"group_min_posts", DW_FIELD_KEY(c.grouping.min_posts, parse_integral<std::size_t>(k, v), to_str)},
      {"group_radius", DW_FIELD_KEY(c.grouping.radius, parse_integral<int>(k, v), to_str)},
      {"group_span_days", DW_FIELD_KEY(c.grouping.span, parse_days(k, v), fmt_days)},

      {"feature_dim", DW_FIELD_KEY(c.label.dim, parse_integral<std::uint32_t>(k, v), to_str)},
      {"lr", DW_FIELD_KEY(c.hyper.lr, parse_double(k, v), fmt_double)},
      {"l2", DW_FIELD_KEY(c.hyper.l2, parse_double(k, v), fmt_double)},
      {"epochs", DW_FIELD_KEY(c.hyper.epochs, parse_integral<int>(k, v), to_str)},
      {"update_epochs", DW_FIELD_KEY(c.hyper.update_epochs, parse_integral<int>(k, v), to_str)},
      {"update_lr", DW_FIELD_KEY(c.hyper.update_lr, parse_double(k, v), fmt_double)},
      {"holdout_fraction", DW_FIELD_KEY(c.hyper.holdout_fraction, parse_double(k, v), fmt_double)},

      {"memory_ttl_days", DW_FIELD_KEY(c.memory_ttl, parse_days(k, v), fmt_days)},
      {"dedup", DW_FIELD_KEY(c.dedup, parse_bool(k, v), bool_str)},

      {"posts_path", DW_FIELD_KEY(c.posts_path, std::string(v), str_id)},
      {"events_path", DW_FIELD_KEY(c.events_path, std::string(v), str_id)},
      {"truth_path", DW_FIELD_KEY(c.truth_path, std::string(v), str_id)},
      {"gazetteer_path", DW_FIELD_KEY(c.gazetteer_path, std::string(v), str_id)},
      {"out_dir", DW_FIELD_KEY(c.out_dir, std::string(v), str_id)},

      {"synth_n_windows", DW_FIELD_KEY(c.synth.n_windows, parse_integral<std::size_t>(k, v), to_str)},
      {"synth_posts_per_window", DW_FIELD_KEY(c.synth.posts_per_window, parse_integral<std::size_t>(k, v), to_str)},
      {"synth_positive_fraction", DW_FIELD_KEY(c.synth.positive_fraction, parse_double(k, v), fmt_double)},
      {"synth_vocab_relevant", DW_FIELD_KEY(c.synth.vocab_relevant, parse_integral<std::size_t>(k, v), to_str)},
      {"synth_vocab_irrelevant", DW_FIELD_KEY(c.synth.vocab_irrelevant, parse_integral<std::size_t>(k, v), to_str)},
      {"synth_drift_windows",
       Key{[](PipelineConfig& c, std::string_view k, std::string_view v) {
             c.synth.drift_windows.clear();
             for (const auto& s : split_list(v)) {
               c.synth.drift_windows.push_back(parse_integral<std::size_t>(k, s));
             }
           },
           [](const PipelineConfig& c) {
             std::string s;
             for (auto w : c.synth.drift_windows) {
               if (!s.empty()) s += ",";
               s += std::to_string(w);
             }
             return s;
           }}},
      {"synth_swap_ratio", DW_FIELD_KEY(c.synth.swap_ratio, parse_double(k, v), fmt_double)},
      {"synth_events_per_window", DW_FIELD_KEY(c.synth.events_per_window, parse_integral<std::size_t>(k, v), to_str)},
      {"synth_cells_universe", DW_FIELD_KEY(c.synth.cells_universe, parse_integral<std::size_t>(k, v), to_str)},
      {"synth_relevant_words_per_post", DW_FIELD_KEY(c.synth.relevant_words_per_post, parse_integral<std::size_t>(k, v), to_str)},
      {"synth_irrelevant_words_per_post", DW_FIELD_KEY(c.synth.irrelevant_words_per_post, parse_integral<std::size_t>(k, v), to_str)},
      {"synth_negative_location_fraction", DW_FIELD_KEY(c.synth.negative_location_fraction, parse_double(k, v), fmt_double)},
      {"synth_keyword", DW_FIELD_KEY(c.synth.event_keyword, std::string(v), str_id)},
  };
  return k;
}

#undef DW_FIELD_KEY

}  // namespace

void PipelineConfig::set_seed(std::uint64_t s) {
  seed = s;
  synth.seed = s;
  hyper.seed = s;
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
  if (window_span <= 0) fail("window_span_days must be positive");
  if (stream_start < 0) fail("stream_start must be >= 0");
  if (ensemble.size == 0) fail("ensemble_size must be >= 1");
  if (learners.empty()) fail("learners must name at least one kind");
  for (const auto& [kind, w] : ensemble.expert_weights) {
    if (!(w >= 0.0)) fail("expert weights must be non-negative");
  }
  if (ensemble.scheme == WeightScheme::expert) {
    double sum = 0.0;
    for (const auto& [kind, w] : ensemble.expert_weights) sum += w;
    if (!(sum > 0.0)) fail("expert weights must have a positive sum");
  }
  if (schedule.interval <= 0) fail("schedule_interval_days must be positive");
  if (schedule.min_gap < 0 || schedule.min_gap > schedule.max_gap) {
    fail("schedule requires 0 <= min_gap <= max_gap");
  }
  if (detector.window == 0) fail("detector_window must be >= 1");
  if (!(detector.low_conf_lo >= 0.0 && detector.low_conf_lo < detector.low_conf_hi &&
        detector.low_conf_hi <= 1.0)) {
    fail("detector confidence band must satisfy 0 <= lo < hi <= 1");
  }
  if (!(detector.margin_tau > 0.0)) fail("detector_margin_tau must be positive");
  if (!(detector.fraction_theta >= 0.0 && detector.fraction_theta < 1.0)) {
    fail("detector_fraction_theta must lie in [0, 1)");
  }
  if (detector.persistence == 0) fail("detector_persistence must be >= 1");
  if (label.max_dt < 0) fail("match_max_dt_days must be >= 0");
  if (label.radius < 0) fail("match_radius must be >= 0");
  if (label.exclusion_band < label.max_dt) {
    fail("exclusion_band_days must be >= match_max_dt_days");
  }
  if (grouping.min_posts == 0) fail("group_min_posts must be >= 1");
  if (grouping.radius < 0) fail("group_radius must be >= 0");
  if (grouping.span < 0) fail("group_span_days must be >= 0");
  if (label.dim == 0) fail("feature_dim must be >= 1");
  if (!(hyper.lr > 0.0) || !(hyper.update_lr > 0.0)) fail("learning rates must be positive");
  if (!(hyper.l2 >= 0.0) || hyper.l2 * std::max(hyper.lr, hyper.update_lr) >= 1.0) {
    fail("l2 must satisfy 0 <= l2 * lr < 1");
  }
  if (hyper.epochs < 1 || hyper.update_epochs < 0) fail("epochs out of range");
  if (!(hyper.holdout_fraction >= 0.0 && hyper.holdout_fraction < 1.0)) {
    fail("holdout_fraction must lie in [0, 1)");
  }
  if (memory_ttl <= 0) fail("memory_ttl_days must be positive");
  synth.validate();
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::optional<std::uint64_t> seed;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    auto it = keys().find(key);
    if (it == keys().end()) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": unknown key '" + std::string(key) + "'");
    }
    if (!seen.emplace(key).second) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": duplicate key '" + std::string(key) + "'");
    }
    it->second.set(cfg, key, value);
    if (key == "seed") seed = cfg.seed;
  }
  cfg.set_seed(seed.value_or(cfg.seed));
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string default_config_text() {
  PipelineConfig cfg;
  std::string out;
  for (const auto& [name, key] : keys()) {
    out += name + " = " + key.get(cfg) + "\n";
  }
  return out;
}

}  // namespace driftwatch
