#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "driftwatch/ingest.hpp"

namespace driftwatch {

enum class DetectorMode { confidence, margin };

std::string_view to_string(DetectorMode m);
DetectorMode detector_mode_from_string(std::string_view s);

struct DetectorThresholds {
  std::size_t window = 500;      // W, ring buffer length
  double low_conf_lo = 0.25;     // confidence mode: score in (lo, hi) is low
  double low_conf_hi = 0.75;
  double margin_tau = 0.5;       // margin mode: |margin| < tau is near
  double fraction_theta = 0.3;   // windowed fraction must exceed this
  std::size_t persistence = 200; // T consecutive over-threshold steps
};

struct DetectorObservation {
  double score = 0.0;
  double margin = 0.0;
};

// Tracks the share of low-confidence (or near-hyperplane) predictions over
// the last W observations. After the buffer has filled, every further
// observation either extends the over-threshold run or resets it; the
// detector fires once the run reaches T, so the earliest possible firing is
// observation W + T.
class DriftDetector {
 public:
  explicit DriftDetector(DetectorMode mode = DetectorMode::confidence,
                         DetectorThresholds thresholds = {});

  void observe(const DetectorObservation& obs);

  bool fired() const { return fired_; }
  std::size_t run_length() const { return run_length_; }
  std::uint64_t observations() const { return seen_; }
  // Share of flagged observations currently in the buffer.
  double fraction() const;
  // Observation count at which the detector first fired; 0 if never.
  std::uint64_t fired_at() const { return fired_at_; }

  // Clears the buffer and the fired flag (called after an update).
  void reset();

  DetectorMode mode() const { return mode_; }
  const DetectorThresholds& thresholds() const { return thr_; }

 private:
  bool flagged(const DetectorObservation& obs) const;

  DetectorMode mode_;
  DetectorThresholds thr_;
  std::vector<std::uint8_t> ring_;
  std::size_t head_ = 0;
  std::size_t filled_ = 0;
  std::size_t flagged_in_ring_ = 0;
  std::uint64_t seen_ = 0;
  std::size_t run_length_ = 0;
  bool fired_ = false;
  std::uint64_t fired_at_ = 0;
};

enum class ScheduleKind { user, detector, hybrid };

std::string_view to_string(ScheduleKind k);
ScheduleKind schedule_kind_from_string(std::string_view s);

struct Schedule {
  ScheduleKind kind = ScheduleKind::user;
  Timestamp interval = 30 * kDay;
  Timestamp min_gap = 7 * kDay;
  Timestamp max_gap = 60 * kDay;
};

enum class Action { none, update_now };

Action next_action(const Schedule& schedule, Timestamp now,
                   Timestamp last_update, bool detector_fired);

}  // namespace driftwatch
