#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gripstream/ingest.hpp"
#include "gripstream/model.hpp"

namespace gripstream {

struct ForcePoint {
  std::uint32_t timestamp_ms = 0;
  double force_n = 0.0;

  bool operator==(const ForcePoint&) const = default;
};

struct ForceSeries {
  SensorId sensor;
  Hand hand;
  std::string condition;
  std::vector<ForcePoint> points;
};

// Pointwise force_from_voltage over one sensor. A conversion failure is
// rethrown as DomainError naming the sample index.
ForceSeries sensor_profile(const Session& session, SensorId sensor, const Calibration& cal,
                           const GloveConfig& cfg);

class AggregateStats {
 public:
  AggregateStats(double mean, double max, std::optional<double> sd, std::size_t n)
      : mean_(mean), max_(max), sd_(sd), n_(n) {}

  double mean() const { return mean_; }
  double max() const { return max_; }
  std::size_t n() const { return n_; }
  // Sample standard deviation (n - 1). Throws InsufficientDataError for n < 2.
  double sd() const;
  bool has_sd() const { return sd_.has_value(); }

 private:
  double mean_;
  double max_;
  std::optional<double> sd_;
  std::size_t n_;
};

// Throws InsufficientDataError on empty input.
AggregateStats aggregate_stats(std::span<const double> values);
AggregateStats aggregate_stats(const ForceSeries& series);

struct SensorShare {
  SensorId sensor;
  double percent = 0.0;
};

// share_i = mean_i / sum(mean) * 100. Throws UndefinedStatisticError when
// every mean is zero.
std::vector<SensorShare> shares_from_means(std::span<const SensorId> sensors,
                                           std::span<const double> means);

// Mean force per sensor of the subset, expressed as shares of their sum.
std::vector<SensorShare> contribution_shares(const Session& session,
                                             std::span<const SensorId> subset,
                                             const Calibration& cal, const GloveConfig& cfg);

struct GroupBy {
  bool hand = false;
  bool sensor = false;
  bool condition = false;
};

struct GroupKey {
  std::optional<Hand> hand;
  std::optional<SensorId> sensor;
  std::optional<std::string> condition;

  auto operator<=>(const GroupKey&) const = default;
};

struct GroupMean {
  GroupKey key;
  double mean_force_n = 0.0;
  // Number of (session, sensor) means averaged into this group.
  std::size_t contributions = 0;
};

// Every session contributes the mean force of each non-empty sensor; a group
// averages those per-session means with equal weight. Output is ordered by
// key and independent of session order.
std::vector<GroupMean> population_average(std::span<const Session> sessions, GroupBy group_by,
                                          const Calibration& cal, const GloveConfig& cfg);

struct AnovaResult {
  double f_stat = 0.0;
  int df_between = 1;
  int df_within = 1;
  double p_value = 1.0;
  double ss_between = 0.0;
  double ss_within = 0.0;
  double ss_total = 0.0;
};

// Fixed-effects one-way ANOVA. Needs >= 2 groups of >= 2 observations.
// Throws UndefinedStatisticError when both sums of squares are zero.
AnovaResult anova_oneway(std::span<const std::vector<double>> groups);

// table[i][j] holds the replicates of cell (A = i, B = j).
using TwoWayTable = std::vector<std::vector<std::vector<double>>>;

// Per-effect results carry ss_between = effect SS and ss_within = error SS,
// with ss_total their sum; the full decomposition is in the outer fields.
// An effect with zero SS against zero error SS reports F = 0, p = 1.
struct TwoWayAnova {
  AnovaResult factor_a;
  AnovaResult factor_b;
  AnovaResult interaction;
  double ss_error = 0.0;
  double ss_total = 0.0;
  int df_error = 0;
};

// Balanced fixed-effects two-way ANOVA with interaction. Throws
// UnsupportedDesignError unless every cell has the same count >= 2 and both
// factors have >= 2 levels.
TwoWayAnova anova_twoway(const TwoWayTable& table);

struct ExpertiseIndex {
  double little_to_middle_ratio = 0.0;
  std::size_t samples_in_task = 0;
};

// Little-fingertip over middle-fingertip mean force; samples_in_task is the
// number of frames in the session.
ExpertiseIndex expertise_index(const Session& session, const Calibration& cal,
                               const GloveConfig& cfg);

}  // namespace gripstream
