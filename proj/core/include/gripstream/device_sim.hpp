#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gripstream/model.hpp"
#include "gripstream/protocol.hpp"
#include "gripstream/transport.hpp"

namespace gripstream {

inline constexpr double kMaxForceN = 20.0;

// Per-finger fingertip shares in percent, ordered index, middle, ring, little.
using FingerShares = std::array<double, 4>;

// Reference share tables behind the built-in presets, stored as given. Neither
// sums to exactly 100, so consumers normalise them.
inline constexpr FingerShares kPrecisionLiftShares{42.0, 27.4, 17.6, 12.9};
inline constexpr FingerShares kPowerGripShares{17.0, 22.0, 31.0, 29.0};

FingerShares normalized(const FingerShares& shares);

struct ProfilePreset {
  std::string name;
  std::array<double, kSensorCount> base_force_n{};
  // Shares the fingertip sensors S2..S5 were derived from, if any.
  std::optional<FingerShares> contribution_table;
  double condition_gain = 1.0;
  // Applied to the dominant hand only.
  double hand_gain = 1.0;
  double noise_sd_mv = 5.0;
  // Task duration multiplier; experts finish sooner.
  double duration_scale = 1.0;
};

void validate(const ProfilePreset& preset);

// Built-in presets: "uniform", "precision-lift", "power-grip", "expert", "novice".
std::vector<std::string_view> preset_names();
// Conditions: "baseline" and "soft" (gain 1.0), "hardrock" (gain 1.3).
std::vector<std::string_view> condition_names();
double condition_gain(std::string_view condition);

// Throws ConfigError for unknown names.
ProfilePreset make_preset(std::string_view name, std::string_view condition = "soft");

enum class WaveformKind { HoldStatic, LiftCycle };

// LiftCycle is a raised-cosine envelope between 0.5 and 1.0 of base force:
// w(t) = 0.75 - 0.25 cos(2 pi t / period).
struct Waveform {
  WaveformKind kind = WaveformKind::LiftCycle;
  double period_s = 2.0;
};

double waveform_value(const Waveform& waveform, double t_seconds);

struct GlovePlan {
  Hand hand;
  ProfilePreset profile;
};

struct SessionPlan {
  std::string subject = "sim";
  std::string condition = "soft";
  double duration_s = 10.0;
  std::uint64_t seed = 0;
  std::vector<GlovePlan> gloves;
  Waveform waveform;
  // Relative sd of a per-subject multiplicative force scale drawn from the
  // seed (shared by both hands). 0 makes every seed the same subject.
  double subject_spread = 0.0;
  double battery_drain_mv_per_s = 1.0;
};

void validate(const SessionPlan& plan);

// Plan file keys: subject, condition, duration_s, seed, waveform (hold|lift),
// lift_period_s, subject_spread, battery_drain_mv_per_s, noise_sd_mv,
// glove.left / glove.right = <preset>[,dominant|nondominant].
SessionPlan read_session_plan(std::istream& in, const std::string& source_name = "<plan>");
SessionPlan load_session_plan(const std::string& path);
void write_session_plan(std::ostream& out, const SessionPlan& plan);

struct GloveTrajectory {
  Hand hand;
  std::array<std::vector<double>, kSensorCount> forces_n;

  std::size_t sample_count() const { return forces_n[0].size(); }
};

// Samples per sensor for a glove: floor(duration * duration_scale / period).
std::size_t planned_sample_count(const SessionPlan& plan, const GlovePlan& glove,
                                 const GloveConfig& cfg);

// Deterministic in plan.seed. Noise is Gaussian on the sensor voltage and is
// mapped back through the calibration; forces are clamped to [0, 20] N.
std::vector<GloveTrajectory> synthesize_session(const SessionPlan& plan, const GloveConfig& cfg,
                                                const Calibration& cal);

struct EmitOptions {
  double battery_drain_mv_per_s = 1.0;
};

std::vector<Frame> emit_frames(const GloveTrajectory& trajectory, const Calibration& cal,
                               const GloveConfig& cfg, const EmitOptions& options = {});

enum class Pace { RealTime, AsFastAsPossible };

struct EmissionReport {
  std::size_t frames_sent = 0;
  std::size_t bytes_sent = 0;
  bool completed = true;
  std::string error;
  // RealTime only: worst absolute deviation of a write from its schedule.
  std::chrono::microseconds max_jitter{0};
};

// Transport failures end the emission and are reported, not thrown.
EmissionReport stream_session(std::span<const Frame> frames, ByteSink& sink, Pace pace,
                              std::chrono::milliseconds period = std::chrono::milliseconds{20});

// Splitmix64 step, used to derive independent per-stream seeds.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace gripstream
