#include "driftwatch/drift.hpp"

#include <algorithm>
#include <cmath>

#include "driftwatch/errors.hpp"

namespace driftwatch {

std::string_view to_string(DetectorMode m) {
  return m == DetectorMode::confidence ? "confidence" : "margin";
}

DetectorMode detector_mode_from_string(std::string_view s) {
  if (s == "confidence") return DetectorMode::confidence;
  if (s == "margin") return DetectorMode::margin;
  throw ConfigError("unknown detector mode '" + std::string(s) + "'");
}

std::string_view to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::user: return "user";
    case ScheduleKind::detector: return "detector";
    case ScheduleKind::hybrid: return "hybrid";
  }
  return "user";
}

ScheduleKind schedule_kind_from_string(std::string_view s) {
  if (s == "user") return ScheduleKind::user;
  if (s == "detector") return ScheduleKind::detector;
  if (s == "hybrid") return ScheduleKind::hybrid;
  throw ConfigError("unknown schedule kind '" + std::string(s) + "'");
}

DriftDetector::DriftDetector(DetectorMode mode, DetectorThresholds thresholds)
    : mode_(mode), thr_(thresholds) {
  if (thr_.window == 0) throw ConfigError("detector window must be >= 1");
  ring_.assign(thr_.window, 0);
}

bool DriftDetector::flagged(const DetectorObservation& obs) const {
  if (mode_ == DetectorMode::confidence) {
    return obs.score > thr_.low_conf_lo && obs.score < thr_.low_conf_hi;
  }
  return std::fabs(obs.margin) < thr_.margin_tau;
}

void DriftDetector::observe(const DetectorObservation& obs) {
  // Warm-up: the first W observations only fill the buffer.
  const bool warmed_up = filled_ == ring_.size();
  const std::uint8_t flag = flagged(obs) ? 1 : 0;
  if (warmed_up) flagged_in_ring_ -= ring_[head_];
  ring_[head_] = flag;
  flagged_in_ring_ += flag;
  head_ = (head_ + 1) % ring_.size();
  if (!warmed_up) ++filled_;
  ++seen_;

  if (!warmed_up) return;
  if (fraction() > thr_.fraction_theta) {
    ++run_length_;
  } else {
    run_length_ = 0;
  }
  if (!fired_ && run_length_ >= thr_.persistence) {
    fired_ = true;
    fired_at_ = seen_;
  }
}

double DriftDetector::fraction() const {
  if (filled_ == 0) return 0.0;
  return static_cast<double>(flagged_in_ring_) / static_cast<double>(filled_);
}

void DriftDetector::reset() {
  std::fill(ring_.begin(), ring_.end(), 0);
  head_ = 0;
  filled_ = 0;
  flagged_in_ring_ = 0;
  seen_ = 0;
  run_length_ = 0;
  fired_ = false;
  fired_at_ = 0;
}

Action next_action(const Schedule& schedule, Timestamp now,
                   Timestamp last_update, bool detector_fired) {
  const Timestamp elapsed = now - last_update;
  switch (schedule.kind) {
    case ScheduleKind::user:
      return elapsed >= schedule.interval ? Action::update_now : Action::none;
    case ScheduleKind::detector:
      return detector_fired ? Action::update_now : Action::none;
    case ScheduleKind::hybrid:
      if ((detector_fired && elapsed >= schedule.min_gap) ||
          elapsed >= schedule.max_gap) {
        return Action::update_now;
      }
      return Action::none;
  }
  return Action::none;
}

}  // namespace driftwatch
