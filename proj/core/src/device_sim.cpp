#include "gripstream/device_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "gripstream/error.hpp"
#include "gripstream/key_value.hpp"

namespace gripstream {

namespace {

constexpr std::size_t kIndexTip = 1;

// Forces shared by every finger-specific preset for the non-fingertip sites.
constexpr std::array<double, kSensorCount> kBaseLayout{
    3.0,                 // S1 thumb tip
    0.0, 0.0, 0.0, 0.0,  // S2..S5 fingertips, set per preset
    1.2, 1.4, 1.0, 0.8,  // S6..S9 middle phalanges
    2.0, 1.5, 1.0,       // S10 thenar, S11 hypothenar, S12 mid-palm
};

constexpr double kDominantHandGain = 1.2;
constexpr double kFingertipTotalN = 10.0;

ProfilePreset from_shares(std::string name, const FingerShares& shares) {
  ProfilePreset p;
  p.name = std::move(name);
  p.base_force_n = kBaseLayout;
  const auto norm = normalized(shares);
  for (std::size_t i = 0; i < 4; ++i) p.base_force_n[kIndexTip + i] = kFingertipTotalN * norm[i] / 100.0;
  p.contribution_table = shares;
  p.hand_gain = kDominantHandGain;
  return p;
}

ProfilePreset from_tips(std::string name, const FingerShares& tips_n, double scale) {
  ProfilePreset p;
  p.name = std::move(name);
  p.base_force_n = kBaseLayout;
  for (auto& f : p.base_force_n) f *= scale;
  for (std::size_t i = 0; i < 4; ++i) p.base_force_n[kIndexTip + i] = tips_n[i];
  p.hand_gain = kDominantHandGain;
  return p;
}

std::size_t glove_index_of(Side side) { return side == Side::Left ? 0 : 1; }

}  // namespace

FingerShares normalized(const FingerShares& shares) {
  double total = 0.0;
  for (double s : shares) total += s;
  if (!(total > 0.0)) throw ConfigError("contribution table must have a positive total");
  FingerShares out{};
  for (std::size_t i = 0; i < shares.size(); ++i) out[i] = shares[i] * 100.0 / total;
  return out;
}

void validate(const ProfilePreset& preset) {
  const auto gain_ok = [](double g) { return std::isfinite(g) && g >= 0.0; };
  if (!gain_ok(preset.condition_gain) || !gain_ok(preset.hand_gain)) {
    throw ConfigError("preset '" + preset.name + "': gains must be >= 0");
  }
  if (!(std::isfinite(preset.noise_sd_mv) && preset.noise_sd_mv >= 0.0)) {
    throw ConfigError("preset '" + preset.name + "': noise sd must be >= 0");
  }
  if (!(std::isfinite(preset.duration_scale) && preset.duration_scale > 0.0)) {
    throw ConfigError("preset '" + preset.name + "': duration scale must be > 0");
  }
  for (double f : preset.base_force_n) {
    if (!(f >= 0.0 && f <= kMaxForceN)) {
      throw ConfigError("preset '" + preset.name + "': base forces must lie in [0, 20] N");
    }
  }
  if (preset.contribution_table) {
    for (double s : *preset.contribution_table) {
      if (!(std::isfinite(s) && s >= 0.0)) {
        throw ConfigError("preset '" + preset.name + "': shares must be >= 0");
      }
    }
    const auto norm = normalized(*preset.contribution_table);
    double total = 0.0;
    for (double s : norm) total += s;
    if (std::abs(total - 100.0) > 1e-9) {
      throw ConfigError("preset '" + preset.name + "': shares do not sum to 100");
    }
  }
}

std::vector<std::string_view> preset_names() {
  return {"uniform", "precision-lift", "power-grip", "expert", "novice"};
}

std::vector<std::string_view> condition_names() { return {"baseline", "soft", "hardrock"}; }

double condition_gain(std::string_view condition) {
  if (condition == "baseline" || condition == "soft") return 1.0;
  if (condition == "hardrock") return 1.3;
  throw ConfigError("unknown condition '" + std::string{condition} + "'");
}

ProfilePreset make_preset(std::string_view name, std::string_view condition) {
  ProfilePreset p;
  if (name == "uniform") {
    p.name = "uniform";
    p.base_force_n.fill(2.0);
    p.hand_gain = kDominantHandGain;
  } else if (name == "precision-lift") {
    p = from_shares("precision-lift", kPrecisionLiftShares);
  } else if (name == "power-grip") {
    p = from_shares("power-grip", kPowerGripShares);
  } else if (name == "expert") {
    // Fine control by the little finger, little gross force from the middle
    // finger, lower overall force and a shorter task.
    p = from_tips("expert", {1.6, 1.1, 1.5, 2.0}, 0.8);
    p.duration_scale = 0.7;
  } else if (name == "novice") {
    p = from_tips("novice", {2.6, 3.4, 2.2, 1.3}, 1.0);
  } else {
    throw ConfigError("unknown preset '" + std::string{name} + "'");
  }
  p.condition_gain = condition_gain(condition);
  return p;
}

double waveform_value(const Waveform& waveform, double t_seconds) {
  if (waveform.kind == WaveformKind::HoldStatic) return 1.0;
  return 0.75 - 0.25 * std::cos(2.0 * std::numbers::pi * t_seconds / waveform.period_s);
}

void validate(const SessionPlan& plan) {
  if (!(std::isfinite(plan.duration_s) && plan.duration_s > 0.0)) {
    throw ConfigError("plan duration must be > 0 s");
  }
  if (plan.waveform.kind == WaveformKind::LiftCycle &&
      !(std::isfinite(plan.waveform.period_s) && plan.waveform.period_s > 0.0)) {
    throw ConfigError("lift period must be > 0 s");
  }
  if (plan.gloves.empty() || plan.gloves.size() > 2) {
    throw ConfigError("plan must have one or two gloves");
  }
  if (plan.gloves.size() == 2 && plan.gloves[0].hand.side == plan.gloves[1].hand.side) {
    throw ConfigError("two gloves must be on different hands");
  }
  if (!(std::isfinite(plan.subject_spread) && plan.subject_spread >= 0.0)) {
    throw ConfigError("subject spread must be >= 0");
  }
  if (!(std::isfinite(plan.battery_drain_mv_per_s) && plan.battery_drain_mv_per_s >= 0.0)) {
    throw ConfigError("battery drain must be >= 0");
  }
  for (const auto& g : plan.gloves) validate(g.profile);
}

SessionPlan read_session_plan(std::istream& in, const std::string& source_name) {
  const auto file = KeyValueFile::parse(in, source_name);
  file.reject_unknown({"subject", "condition", "duration_s", "seed", "waveform", "lift_period_s",
                       "subject_spread", "battery_drain_mv_per_s", "noise_sd_mv", "glove."});
  SessionPlan plan;
  if (auto v = file.get_string("subject")) plan.subject = *v;
  if (auto v = file.get_string("condition")) plan.condition = *v;
  if (auto v = file.get_double("duration_s")) plan.duration_s = *v;
  if (auto v = file.get_uint("seed")) plan.seed = *v;
  if (auto v = file.get_double("subject_spread")) plan.subject_spread = *v;
  if (auto v = file.get_double("battery_drain_mv_per_s")) plan.battery_drain_mv_per_s = *v;
  if (auto v = file.get_double("lift_period_s")) plan.waveform.period_s = *v;
  if (const auto* e = file.find("waveform")) {
    if (e->value == "hold") {
      plan.waveform.kind = WaveformKind::HoldStatic;
    } else if (e->value == "lift") {
      plan.waveform.kind = WaveformKind::LiftCycle;
    } else {
      throw ParseError(file.source(), e->line, "waveform must be 'hold' or 'lift'");
    }
  }
  const auto noise = file.get_double("noise_sd_mv");

  for (const auto& e : file.entries()) {
    if (!e.key.starts_with("glove.")) continue;
    try {
      const auto side = parse_side(std::string_view{e.key}.substr(6));
      const auto parts = split(e.value, ',');
      if (parts.empty() || parts.size() > 2) throw ConfigError("expected '<preset>[,<dominance>]'");
      GlovePlan g;
      g.hand.side = side;
      g.hand.dominance = parts.size() == 2 ? parse_dominance(parts[1])
                         : side == Side::Right ? Dominance::Dominant
                                               : Dominance::NonDominant;
      g.profile = make_preset(parts[0], plan.condition);
      if (noise) g.profile.noise_sd_mv = *noise;
      plan.gloves.push_back(std::move(g));
    } catch (const Error& err) {
      throw ParseError(file.source(), e.line, err.what());
    }
  }
  validate(plan);
  return plan;
}

SessionPlan load_session_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open plan '" + path + "'");
  return read_session_plan(in, path);
}

void write_session_plan(std::ostream& out, const SessionPlan& plan) {
  out << "subject = " << plan.subject << '\n';
  out << "condition = " << plan.condition << '\n';
  out << "duration_s = " << format_double(plan.duration_s) << '\n';
  out << "seed = " << plan.seed << '\n';
  out << "waveform = " << (plan.waveform.kind == WaveformKind::HoldStatic ? "hold" : "lift") << '\n';
  out << "lift_period_s = " << format_double(plan.waveform.period_s) << '\n';
  out << "subject_spread = " << format_double(plan.subject_spread) << '\n';
  out << "battery_drain_mv_per_s = " << format_double(plan.battery_drain_mv_per_s) << '\n';
  if (!plan.gloves.empty()) {
    out << "noise_sd_mv = " << format_double(plan.gloves.front().profile.noise_sd_mv) << '\n';
  }
  for (const auto& g : plan.gloves) {
    out << "glove." << to_string(g.hand.side) << " = " << g.profile.name << ','
        << to_string(g.hand.dominance) << '\n';
  }
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed;
  const auto a = splitmix64(state);
  state = a ^ (stream * 0xD1B54A32D192ED03ULL);
  return splitmix64(state);
}

std::size_t planned_sample_count(const SessionPlan& plan, const GlovePlan& glove,
                                 const GloveConfig& cfg) {
  const auto duration_ms = std::llround(plan.duration_s * glove.profile.duration_scale * 1000.0);
  return static_cast<std::size_t>(duration_ms / cfg.sample_period.count());
}

std::vector<GloveTrajectory> synthesize_session(const SessionPlan& plan, const GloveConfig& cfg,
                                                const Calibration& cal) {
  validate(cfg);
  validate(cal, cfg);
  validate(plan);

  // Stream 0xFFFF is reserved for subject-level draws so both hands share them.
  std::mt19937_64 subject_rng(derive_seed(plan.seed, 0xFFFF));
  std::normal_distribution<double> subject_dist(0.0, 1.0);
  const double subject_scale = std::max(0.0, 1.0 + plan.subject_spread * subject_dist(subject_rng));

  const double period_s = static_cast<double>(cfg.sample_period.count()) / 1000.0;
  const double max_mv = voltage_from_force(Newtons{kMaxForceN}, cal, cfg).value();

  std::vector<GloveTrajectory> out;
  out.reserve(plan.gloves.size());
  for (const auto& glove : plan.gloves) {
    const auto& profile = glove.profile;
    const std::size_t n = planned_sample_count(plan, glove, cfg);
    const double hand_gain = glove.hand.dominance == Dominance::Dominant ? profile.hand_gain : 1.0;
    const double gain = subject_scale * profile.condition_gain * hand_gain;

    GloveTrajectory traj;
    traj.hand = glove.hand;
    for (std::size_t s = 0; s < kSensorCount; ++s) {
      std::mt19937_64 rng(derive_seed(plan.seed, glove_index_of(glove.hand.side) * 16 + s));
      std::normal_distribution<double> noise(0.0, 1.0);
      auto& series = traj.forces_n[s];
      series.resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * period_s;
        double force = std::clamp(profile.base_force_n[s] * gain * waveform_value(plan.waveform, t),
                                  0.0, kMaxForceN);
        const double z = noise(rng);
        if (profile.noise_sd_mv > 0.0) {
          double mv = voltage_from_force(Newtons{force}, cal, cfg).value() + profile.noise_sd_mv * z;
          mv = std::clamp(mv, 0.0, max_mv);
          force = std::clamp(force_from_voltage(Millivolts{mv}, cal, cfg).value(), 0.0, kMaxForceN);
        }
        series[k] = force;
      }
    }
    out.push_back(std::move(traj));
  }
  return out;
}

std::vector<Frame> emit_frames(const GloveTrajectory& trajectory, const Calibration& cal,
                               const GloveConfig& cfg, const EmitOptions& options) {
  const std::size_t n = trajectory.sample_count();
  for (const auto& series : trajectory.forces_n) {
    if (series.size() != n) throw ConfigError("trajectory sensors differ in length");
  }
  const auto period = static_cast<std::uint64_t>(cfg.sample_period.count());
  const double battery_start = to_millivolts(cfg.battery_nominal).value();

  std::vector<Frame> frames(n);
  for (std::size_t k = 0; k < n; ++k) {
    Frame& f = frames[k];
    f.glove = trajectory.hand.side;
    f.seq = static_cast<std::uint16_t>(k & 0xFFFFU);
    const std::uint64_t ts = k * period;
    f.timestamp_ms = static_cast<std::uint32_t>(ts);
    const double battery =
        battery_start - options.battery_drain_mv_per_s * static_cast<double>(ts) / 1000.0;
    f.battery_mv = static_cast<std::uint16_t>(
        std::clamp(std::llround(battery), 0LL, static_cast<long long>(kMaxBatteryMv)));
    for (std::size_t s = 0; s < kSensorCount; ++s) {
      const double mv = voltage_from_force(Newtons{trajectory.forces_n[s][k]}, cal, cfg).value();
      const auto rounded = std::llround(mv);
      if (rounded > kMaxVoltageMv) {
        throw DomainError("S" + std::to_string(s + 1) + " sample " + std::to_string(k) +
                          " converts to " + std::to_string(rounded) + " mV, not below supply");
      }
      f.voltages_mv[s] = static_cast<std::uint16_t>(rounded);
    }
  }
  return frames;
}

EmissionReport stream_session(std::span<const Frame> frames, ByteSink& sink, Pace pace,
                              std::chrono::milliseconds period) {
  using clock = std::chrono::steady_clock;
  EmissionReport report;
  const auto start = clock::now();
  try {
    for (std::size_t k = 0; k < frames.size(); ++k) {
      const auto bytes = encode_frame(frames[k]);
      if (pace == Pace::RealTime) {
        const auto due = start + period * static_cast<long>(k);
        std::this_thread::sleep_until(due);
        const auto late = std::chrono::duration_cast<std::chrono::microseconds>(clock::now() - due);
        report.max_jitter = std::max(report.max_jitter, late < late.zero() ? -late : late);
      }
      sink.write(bytes);
      ++report.frames_sent;
      report.bytes_sent += bytes.size();
    }
    sink.flush();
  } catch (const Error& err) {
    report.completed = false;
    report.error = err.what();
  }
  return report;
}

}  // namespace gripstream
