#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gripstream/ingest.hpp"
#include "gripstream/model.hpp"

namespace gripstream {

struct AlertPolicy {
  double threshold_n = 8.0;
  double hysteresis_n = 0.5;
  unsigned debounce = 2;
  // Bit k covers sensor S(k+1).
  std::bitset<kSensorCount> sensor_scope = std::bitset<kSensorCount>{}.set();
};

// Requires threshold > hysteresis >= 0 and debounce >= 1.
void validate(const AlertPolicy& policy);

struct ForceSample {
  SensorId sensor;
  std::uint32_t timestamp_ms = 0;
  double force_n = 0.0;
};

// Emitted once when an alert is raised (cleared unset, peak so far) and once
// when it clears (cleared set, final peak).
struct AlertEvent {
  Side glove = Side::Left;
  SensorId sensor;
  std::uint32_t onset_timestamp_ms = 0;
  double peak_force_n = 0.0;
  std::optional<std::uint32_t> cleared_timestamp_ms;

  bool raised() const { return !cleared_timestamp_ms.has_value(); }
  bool operator==(const AlertEvent&) const = default;
};

// Per-glove threshold monitor. An alert is raised on the `debounce`-th
// consecutive sample strictly above threshold, and cleared by the first
// sample strictly below threshold - hysteresis. At most one alert is open per
// sensor; its peak is tracked while open.
class AlertMonitor {
 public:
  AlertMonitor(Side glove, AlertPolicy policy);

  // Throws SequencingError when a sensor's timestamps do not increase.
  std::vector<AlertEvent> step(const ForceSample& sample);

  // Alerts still open, with their current peak.
  std::vector<AlertEvent> open_alerts() const;
  const AlertPolicy& policy() const { return policy_; }

 private:
  struct SensorState {
    std::optional<std::uint32_t> last_ts;
    unsigned run = 0;
    double run_peak = 0.0;
    std::optional<AlertEvent> open;
  };

  Side glove_;
  AlertPolicy policy_;
  std::array<SensorState, kSensorCount> state_{};
};

// Replays a recorded session through a fresh monitor in timestamp order.
std::vector<AlertEvent> monitor_session(const Session& session, const AlertPolicy& policy,
                                        const Calibration& cal, const GloveConfig& cfg);

// "ALERT glove=<L|R> sensor=S<k> onset=<ms> peak=<N>" for raised events,
// "CLEAR glove=<L|R> sensor=S<k> onset=<ms> cleared=<ms> peak=<N>" otherwise.
std::string format_alert(const AlertEvent& event);

}  // namespace gripstream
