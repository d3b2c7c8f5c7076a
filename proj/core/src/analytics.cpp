#include "gripstream/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "gripstream/error.hpp"
#include "gripstream/stats.hpp"

namespace gripstream {

namespace {

double mean_of(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double mean_force(const Session& session, std::size_t slot, const Calibration& cal,
                  const GloveConfig& cfg) {
  const auto& series = session.samples[slot];
  if (series.empty()) {
    throw InsufficientDataError("S" + std::to_string(slot + 1) + " has no samples");
  }
  double sum = 0.0;
  for (const auto& s : series) sum += force_from_voltage(Millivolts{static_cast<double>(s.voltage_mv)}, cal, cfg).value();
  return sum / static_cast<double>(series.size());
}

// Sums of squares at the rounding level of the total are reported as exact
// zeros, so a constructed no-effect design yields F = 0 rather than 1e-31.
double snap_to_zero(double ss, double ss_total) {
  return ss <= 1e-13 * ss_total ? 0.0 : ss;
}

AnovaResult make_result(double ss_effect, int df_effect, double ss_error, int df_error,
                        bool zero_over_zero_is_error) {
  AnovaResult r;
  r.ss_between = ss_effect;
  r.ss_within = ss_error;
  r.ss_total = ss_effect + ss_error;
  r.df_between = df_effect;
  r.df_within = df_error;
  if (ss_error == 0.0) {
    if (ss_effect == 0.0) {
      if (zero_over_zero_is_error) {
        throw UndefinedStatisticError("F is undefined: no variance between or within groups");
      }
      r.f_stat = 0.0;
      r.p_value = 1.0;
      return r;
    }
    r.f_stat = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    return r;
  }
  r.f_stat = (ss_effect / df_effect) / (ss_error / df_error);
  r.p_value = stats::f_survival(r.f_stat, df_effect, df_error);
  return r;
}

}  // namespace

ForceSeries sensor_profile(const Session& session, SensorId sensor, const Calibration& cal,
                           const GloveConfig& cfg) {
  ForceSeries out;
  out.sensor = sensor;
  out.hand = session.metadata.hand;
  out.condition = session.metadata.condition;
  const auto& samples = session.samples[sensor.slot()];
  out.points.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    try {
      const auto f = force_from_voltage(Millivolts{static_cast<double>(samples[i].voltage_mv)}, cal, cfg);
      out.points.push_back({samples[i].timestamp_ms, f.value()});
    } catch (const DomainError& err) {
      throw DomainError(sensor.label() + " sample " + std::to_string(i) + ": " + err.what());
    }
  }
  return out;
}

double AggregateStats::sd() const {
  if (!sd_) throw InsufficientDataError("standard deviation needs at least two values");
  return *sd_;
}

AggregateStats aggregate_stats(std::span<const double> values) {
  if (values.empty()) throw InsufficientDataError("statistics of an empty series");
  const double mean = mean_of(values);
  const double max = *std::max_element(values.begin(), values.end());
  std::optional<double> sd;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return AggregateStats(mean, max, sd, values.size());
}

AggregateStats aggregate_stats(const ForceSeries& series) {
  std::vector<double> forces;
  forces.reserve(series.points.size());
  for (const auto& p : series.points) forces.push_back(p.force_n);
  return aggregate_stats(forces);
}

std::vector<SensorShare> shares_from_means(std::span<const SensorId> sensors,
                                           std::span<const double> means) {
  if (sensors.empty()) throw InsufficientDataError("contribution shares of an empty subset");
  if (sensors.size() != means.size()) throw DomainError("sensor and mean counts differ");
  const double total = std::accumulate(means.begin(), means.end(), 0.0);
  if (!(total > 0.0)) throw UndefinedStatisticError("contribution shares undefined: all means are zero");
  std::vector<SensorShare> out;
  out.reserve(sensors.size());
  for (std::size_t i = 0; i < sensors.size(); ++i) out.push_back({sensors[i], means[i] / total * 100.0});
  return out;
}

std::vector<SensorShare> contribution_shares(const Session& session,
                                             std::span<const SensorId> subset,
                                             const Calibration& cal, const GloveConfig& cfg) {
  std::vector<double> means;
  means.reserve(subset.size());
  for (const auto id : subset) means.push_back(mean_force(session, id.slot(), cal, cfg));
  return shares_from_means(subset, means);
}

std::vector<GroupMean> population_average(std::span<const Session> sessions, GroupBy group_by,
                                          const Calibration& cal, const GloveConfig& cfg) {
  std::map<GroupKey, std::vector<double>> groups;
  for (const auto& session : sessions) {
    for (std::size_t k = 0; k < kSensorCount; ++k) {
      if (session.samples[k].empty()) continue;
      GroupKey key;
      if (group_by.hand) key.hand = session.metadata.hand;
      if (group_by.sensor) key.sensor = SensorId::from_slot(k);
      if (group_by.condition) key.condition = session.metadata.condition;
      groups[key].push_back(mean_force(session, k, cal, cfg));
    }
  }
  std::vector<GroupMean> out;
  out.reserve(groups.size());
  for (auto& [key, values] : groups) {
    // Summing in sorted order makes the result independent of session order.
    std::sort(values.begin(), values.end());
    out.push_back({key, mean_of(values), values.size()});
  }
  return out;
}

AnovaResult anova_oneway(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw InsufficientDataError("one-way ANOVA needs at least two groups");
  std::size_t n = 0;
  double grand_sum = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw InsufficientDataError("each ANOVA group needs at least two observations");
    n += g.size();
    grand_sum += std::accumulate(g.begin(), g.end(), 0.0);
  }
  const double grand = grand_sum / static_cast<double>(n);

  double ss_between = 0.0;
  double ss_within = 0.0;
  for (const auto& g : groups) {
    const double m = mean_of(g);
    ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double y : g) ss_within += (y - m) * (y - m);
  }
  double ss_total = 0.0;
  for (const auto& g : groups) {
    for (double y : g) ss_total += (y - grand) * (y - grand);
  }
  const int df_between = static_cast<int>(groups.size()) - 1;
  const int df_within = static_cast<int>(n - groups.size());
  auto r = make_result(snap_to_zero(ss_between, ss_total), df_between,
                       snap_to_zero(ss_within, ss_total), df_within, true);
  r.ss_total = ss_total;
  return r;
}

TwoWayAnova anova_twoway(const TwoWayTable& table) {
  const std::size_t a = table.size();
  if (a < 2) throw UnsupportedDesignError("factor A needs at least two levels");
  const std::size_t b = table.front().size();
  if (b < 2) throw UnsupportedDesignError("factor B needs at least two levels");
  const std::size_t r = table.front().front().size();
  if (r < 2) throw UnsupportedDesignError("each cell needs at least two replicates");
  for (const auto& row : table) {
    if (row.size() != b) throw UnsupportedDesignError("unbalanced table: rows differ in B levels");
    for (const auto& cell : row) {
      if (cell.size() != r) throw UnsupportedDesignError("unbalanced table: cells differ in replicates");
    }
  }

  std::vector<double> cell_mean(a * b);
  std::vector<double> row_mean(a, 0.0);
  std::vector<double> col_mean(b, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      const double m = mean_of(table[i][j]);
      cell_mean[i * b + j] = m;
      row_mean[i] += m / static_cast<double>(b);
      col_mean[j] += m / static_cast<double>(a);
      grand += m / static_cast<double>(a * b);
    }
  }

  const auto rd = static_cast<double>(r);
  double ss_a = 0.0;
  for (double m : row_mean) ss_a += (m - grand) * (m - grand);
  ss_a *= static_cast<double>(b) * rd;
  double ss_b = 0.0;
  for (double m : col_mean) ss_b += (m - grand) * (m - grand);
  ss_b *= static_cast<double>(a) * rd;

  double ss_ab = 0.0;
  double ss_e = 0.0;
  double ss_t = 0.0;
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      const double m = cell_mean[i * b + j];
      const double inter = m - row_mean[i] - col_mean[j] + grand;
      ss_ab += inter * inter;
      for (double y : table[i][j]) {
        ss_e += (y - m) * (y - m);
        ss_t += (y - grand) * (y - grand);
      }
    }
  }
  ss_ab *= rd;
  ss_a = snap_to_zero(ss_a, ss_t);
  ss_b = snap_to_zero(ss_b, ss_t);
  ss_ab = snap_to_zero(ss_ab, ss_t);
  ss_e = snap_to_zero(ss_e, ss_t);

  const int df_a = static_cast<int>(a) - 1;
  const int df_b = static_cast<int>(b) - 1;
  const int df_e = static_cast<int>(a * b * (r - 1));
  TwoWayAnova out;
  out.factor_a = make_result(ss_a, df_a, ss_e, df_e, false);
  out.factor_b = make_result(ss_b, df_b, ss_e, df_e, false);
  out.interaction = make_result(ss_ab, df_a * df_b, ss_e, df_e, false);
  out.ss_error = ss_e;
  out.ss_total = ss_t;
  out.df_error = df_e;
  return out;
}

ExpertiseIndex expertise_index(const Session& session, const Calibration& cal,
                               const GloveConfig& cfg) {
  const auto little = slot_of(cfg.sensor_layout, SensorLocus::FingertipLittle);
  const auto middle = slot_of(cfg.sensor_layout, SensorLocus::FingertipMiddle);
  const double middle_mean = mean_force(session, middle, cal, cfg);
  if (middle_mean == 0.0) {
    throw UndefinedStatisticError("expertise ratio undefined: middle-finger mean force is zero");
  }
  ExpertiseIndex out;
  out.little_to_middle_ratio = mean_force(session, little, cal, cfg) / middle_mean;
  out.samples_in_task = session.battery_trace.size();
  return out;
}

}  // namespace gripstream
