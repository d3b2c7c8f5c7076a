#include "gripstream/alerting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gripstream/error.hpp"

namespace gripstream {

void validate(const AlertPolicy& policy) {
  if (!(std::isfinite(policy.hysteresis_n) && policy.hysteresis_n >= 0.0)) {
    throw ConfigError("alert hysteresis must be >= 0 N");
  }
  if (!(std::isfinite(policy.threshold_n) && policy.threshold_n > policy.hysteresis_n)) {
    throw ConfigError("alert threshold must exceed the hysteresis");
  }
  if (policy.debounce < 1) throw ConfigError("alert debounce must be >= 1 sample");
}

AlertMonitor::AlertMonitor(Side glove, AlertPolicy policy) : glove_(glove), policy_(policy) {
  validate(policy_);
}

std::vector<AlertEvent> AlertMonitor::step(const ForceSample& sample) {
  std::vector<AlertEvent> out;
  const auto slot = sample.sensor.slot();
  if (!policy_.sensor_scope.test(slot)) return out;

  auto& st = state_[slot];
  if (st.last_ts && sample.timestamp_ms <= *st.last_ts) {
    throw SequencingError(sample.sensor.label() + ": timestamp " + std::to_string(sample.timestamp_ms) +
                          " ms does not follow " + std::to_string(*st.last_ts) + " ms");
  }
  st.last_ts = sample.timestamp_ms;
  const double f = sample.force_n;

  if (st.open) {
    st.open->peak_force_n = std::max(st.open->peak_force_n, f);
    if (f < policy_.threshold_n - policy_.hysteresis_n) {
      st.open->cleared_timestamp_ms = sample.timestamp_ms;
      out.push_back(*st.open);
      st.open.reset();
      st.run = 0;
    }
    return out;
  }

  if (f > policy_.threshold_n) {
    st.run_peak = st.run == 0 ? f : std::max(st.run_peak, f);
    if (++st.run >= policy_.debounce) {
      st.open = AlertEvent{glove_, sample.sensor, sample.timestamp_ms, st.run_peak, std::nullopt};
      out.push_back(*st.open);
    }
  } else {
    st.run = 0;
  }
  return out;
}

std::vector<AlertEvent> AlertMonitor::open_alerts() const {
  std::vector<AlertEvent> out;
  for (const auto& st : state_) {
    if (st.open) out.push_back(*st.open);
  }
  return out;
}

std::vector<AlertEvent> monitor_session(const Session& session, const AlertPolicy& policy,
                                        const Calibration& cal, const GloveConfig& cfg) {
  struct Item {
    std::uint32_t ts;
    std::size_t slot;
    std::uint16_t mv;
  };
  std::vector<Item> items;
  items.reserve(session.total_samples());
  for (std::size_t k = 0; k < kSensorCount; ++k) {
    for (const auto& s : session.samples[k]) items.push_back({s.timestamp_ms, k, s.voltage_mv});
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return a.ts != b.ts ? a.ts < b.ts : a.slot < b.slot;
  });

  AlertMonitor monitor(session.metadata.hand.side, policy);
  std::vector<AlertEvent> events;
  for (const auto& it : items) {
    const auto force = force_from_voltage(Millivolts{static_cast<double>(it.mv)}, cal, cfg);
    auto step = monitor.step({SensorId::from_slot(it.slot), it.ts, force.value()});
    events.insert(events.end(), step.begin(), step.end());
  }
  return events;
}

std::string format_alert(const AlertEvent& event) {
  char buf[160];
  if (event.raised()) {
    std::snprintf(buf, sizeof(buf), "ALERT glove=%c sensor=%s onset=%u peak=%.2f",
                  side_letter(event.glove), event.sensor.label().c_str(), event.onset_timestamp_ms,
                  event.peak_force_n);
  } else {
    std::snprintf(buf, sizeof(buf), "CLEAR glove=%c sensor=%s onset=%u cleared=%u peak=%.2f",
                  side_letter(event.glove), event.sensor.label().c_str(), event.onset_timestamp_ms,
                  *event.cleared_timestamp_ms, event.peak_force_n);
  }
  return buf;
}

}  // namespace gripstream
