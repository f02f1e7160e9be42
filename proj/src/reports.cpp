#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include "driftwatch/pipeline.hpp"

namespace driftwatch {

namespace {

std::string f6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

double frac(std::size_t part, std::size_t total) {
  return total ? static_cast<double>(part) / static_cast<double>(total) : 0.0;
}

}  // namespace

void write_metrics_csv(std::ostream& out, const RunResult& result) {
  out << "window,posts,predicted_relevant,precision,recall,f1,"
         "label_precision,label_recall,label_f1,labeled,positives,negatives,"
         "excluded,events,registry_size,updated,detector_fired,centroid_shift\n";
  for (const auto& w : result.windows) {
    out << w.window << ',' << w.posts << ',' << w.predicted_relevant << ',';
    if (w.truth_metrics) {
      out << f6(w.truth_metrics->precision) << ',' << f6(w.truth_metrics->recall)
          << ',' << f6(w.truth_metrics->f1) << ',';
    } else {
      out << ",,,";
    }
    if (w.label_metrics) {
      out << f6(w.label_metrics->precision) << ',' << f6(w.label_metrics->recall)
          << ',' << f6(w.label_metrics->f1) << ',';
    } else {
      out << ",,,";
    }
    out << w.label_stats.labeled << ',' << w.label_stats.positives << ','
        << w.label_stats.negatives << ',' << w.label_stats.excluded << ','
        << w.events.size() << ',' << w.registry_size << ','
        << (w.updated ? 1 : 0) << ',' << (w.detector_fired ? 1 : 0) << ','
        << f6(w.centroid_shift) << '\n';
  }
}

void write_bench_csv(std::ostream& out, const BenchReport& report) {
  out << "window,f1_static,f1_adaptive,precision_static,recall_static,"
         "precision_adaptive,recall_adaptive,events_static,events_adaptive,"
         "events_both,frac_both,frac_adaptive_only,frac_static_only,"
         "centroid_shift\n";
  for (const auto& r : report.rows) {
    const std::size_t total = r.events_adaptive + r.events_static_only;
    out << r.window << ',' << f6(r.static_.f1) << ',' << f6(r.adaptive.f1) << ','
        << f6(r.static_.precision) << ',' << f6(r.static_.recall) << ','
        << f6(r.adaptive.precision) << ',' << f6(r.adaptive.recall) << ','
        << r.events_static << ',' << r.events_adaptive << ',' << r.events_both
        << ',' << f6(frac(r.events_both, total)) << ','
        << f6(frac(r.events_adaptive - r.events_both, total)) << ','
        << f6(frac(r.events_static_only, total)) << ',' << f6(r.centroid_shift)
        << '\n';
  }
}

void write_bench_summary(std::ostream& out, const BenchReport& report,
                         const PipelineConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["stream_sha256_adaptive"] = report.stream_sha256_adaptive;
  j["stream_sha256_static"] = report.stream_sha256_static;
  j["streams_identical"] =
      report.stream_sha256_adaptive == report.stream_sha256_static;
  j["static_events_contained_in_adaptive"] = report.static_contained;
  double fa = 0.0, fs = 0.0;
  std::size_t ea = 0, es = 0, eb = 0;
  for (const auto& r : report.rows) {
    fa += r.adaptive.f1;
    fs += r.static_.f1;
    ea += r.events_adaptive;
    es += r.events_static;
    eb += r.events_both;
  }
  const double n = report.rows.empty() ? 1.0 : static_cast<double>(report.rows.size());
  j["mean_f1_adaptive"] = f6(fa / n);
  j["mean_f1_static"] = f6(fs / n);
  j["events_adaptive"] = ea;
  j["events_static"] = es;
  j["events_both"] = eb;
  j["grouping"] = {{"min_posts", cfg.grouping.min_posts},
                   {"radius_cells", cfg.grouping.radius},
                   {"span_seconds", cfg.grouping.span}};
  out << j.dump(2) << '\n';
}

void write_events_geojson(std::ostream& out, const RunResult& result) {
  nlohmann::ordered_json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = nlohmann::ordered_json::array();
  for (const auto& w : result.windows) {
    for (const auto& e : w.events) {
      // Point at the center of the event's first cell.
      const LatLon ll = cell_center(e.cells.front());
      nlohmann::ordered_json cells = nlohmann::ordered_json::array();
      for (const auto& c : e.cells) cells.push_back({c.row, c.col});
      nlohmann::ordered_json f;
      f["type"] = "Feature";
      f["geometry"] = {{"type", "Point"}, {"coordinates", {ll.lon, ll.lat}}};
      f["properties"] = {{"window", w.window},
                         {"post_count", e.post_count},
                         {"start", e.start},
                         {"end", e.end},
                         {"cells", cells}};
      fc["features"].push_back(std::move(f));
    }
  }
  out << fc.dump() << '\n';
}

}  // namespace driftwatch
