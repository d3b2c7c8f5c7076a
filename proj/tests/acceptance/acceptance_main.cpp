// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "gripstream/alerting.hpp"
#include "gripstream/analytics.hpp"
#include "gripstream/device_sim.hpp"
#include "gripstream/error.hpp"
#include "gripstream/ingest.hpp"
#include "gripstream/protocol.hpp"
#include "gripstream/transport.hpp"
#include "test_support.hpp"

namespace gs = gripstream;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

const gs::GloveConfig kCfg{};
const gs::Calibration kCal{};

gs::SessionPlan plan_for(const std::string& preset, const std::string& condition, std::uint64_t seed,
                         double noise_sd, double spread, gs::Side dominant = gs::Side::Right) {
  gs::SessionPlan plan;
  plan.subject = "s" + std::to_string(seed);
  plan.condition = condition;
  plan.seed = seed;
  plan.subject_spread = spread;
  for (const auto side : {gs::Side::Left, gs::Side::Right}) {
    gs::GlovePlan g;
    g.hand = {side, side == dominant ? gs::Dominance::Dominant : gs::Dominance::NonDominant};
    g.profile = gs::make_preset(preset, condition);
    g.profile.noise_sd_mv = noise_sd;
    plan.gloves.push_back(g);
  }
  return plan;
}

// simulate -> encode -> byte sink -> ingest, in memory.
std::vector<gs::Session> run_pipeline(const gs::SessionPlan& plan, std::vector<gs::StreamEvent>* events = nullptr) {
  std::vector<gs::Session> sessions;
  for (const auto& traj : gs::synthesize_session(plan, kCfg, kCal)) {
    const auto frames = gs::emit_frames(traj, kCal, kCfg);
    gs::MemorySink sink;
    const auto report = gs::stream_session(frames, sink, gs::Pace::AsFastAsPossible);
    if (!report.completed) throw gs::TransportError(report.error);
    gs::IngestOptions opts;
    opts.expect_glove = traj.hand.side;
    opts.dominant_side = traj.hand.dominance == gs::Dominance::Dominant
                             ? traj.hand.side
                             : (traj.hand.side == gs::Side::Left ? gs::Side::Right : gs::Side::Left);
    gs::Ingestor ing({plan.subject, {}, plan.condition, "acceptance"}, opts);
    auto fed = ing.feed(sink.bytes());
    auto fin = ing.finish();
    if (events) {
      events->insert(events->end(), fed.events.begin(), fed.events.end());
      events->insert(events->end(), fin.events.begin(), fin.events.end());
    }
    sessions.push_back(ing.take_session());
  }
  return sessions;
}

double mean_force(const gs::Session& s, const char* sensor) {
  return gs::aggregate_stats(gs::sensor_profile(s, gs::SensorId::parse(sensor), kCal, kCfg)).mean();
}

// 1. Electrical endpoints.
Verdict electrical_endpoints() {
  Verdict v;
  const auto start = Clock::now();
  const double hi = gs::divider_voltage(gs::Ohms{250.0}, kCfg).value();
  const double lo = gs::divider_voltage(gs::Ohms{10'000'000.0}, kCfg).value();
  const double elapsed = seconds_since(start);
  v.detail << "V(250 ohm)=" << fmt(hi) << " V (want 3.2195 +/- 1e-3), V(10 Mohm)=" << fmt(lo * 1000) << " mV (< 4 mV), "
           << fmt(elapsed, 3) << " s";
  v.require(std::abs(hi - 3.2195) <= 1e-3, "high endpoint");
  v.require(lo < 0.004, "unloaded endpoint");
  v.require(elapsed < 1.0, "runtime");
  return v;
}

// 2. Link budget.
Verdict bandwidth_budget() {
  Verdict v;
  const auto bps = gs::required_bandwidth(2, kCfg);
  v.detail << "required_bandwidth(2 gloves, 20 ms)=" << bps << " bps (want exactly 28800, budget "
           << gs::kLinkBudgetBps << ")";
  v.require(bps == 28'800, "exact value");
  v.require(bps <= gs::kLinkBudgetBps, "within budget");
  return v;
}

// 3. Frame and sample conservation over a real loopback transport.
Verdict cadence_conservation() {
  Verdict v;
  const auto plan = plan_for("precision-lift", "soft", 2024, 5.0, 0.0);
  const auto trajectories = gs::synthesize_session(plan, kCfg, kCal);
  gs::TcpListener listener(0);
  std::vector<gs::Session> sessions(2);
  std::vector<std::size_t> gap_events(2, 0), frames_accepted(2, 0), frames_sent(2, 0);
  {
    std::vector<std::jthread> receivers;
    for (int c = 0; c < 2; ++c) {
      receivers.emplace_back([&, c] {
        auto stream = listener.accept();
        gs::Ingestor ing({});
        std::vector<std::uint8_t> buf(4096);
        while (const auto n = stream.read(buf)) {
          for (const auto& e : ing.feed(std::span(buf.data(), n)).events) {
            gap_events[c] += e.kind == gs::StreamEventKind::SequenceGap ? 1 : 0;
          }
        }
        ing.finish();
        frames_accepted[c] = ing.frames_accepted();
        sessions[c] = ing.take_session();
      });
    }
    std::vector<std::jthread> senders;
    for (std::size_t g = 0; g < 2; ++g) {
      senders.emplace_back([&, g] {
        const auto frames = gs::emit_frames(trajectories[g], kCal, kCfg);
        auto stream = gs::TcpStream::connect_loopback(listener.port());
        frames_sent[g] = gs::stream_session(frames, stream, gs::Pace::AsFastAsPossible).frames_sent;
        stream.shutdown_write();
      });
    }
  }
  for (int c = 0; c < 2; ++c) {
    const auto summary = gs::session_summary(sessions[c]);
    v.detail << (c ? "; " : "") << "glove " << gs::side_letter(sessions[c].metadata.hand.side) << ": sent "
             << frames_sent[c] << ", frames " << frames_accepted[c] << ", samples " << summary.total_samples
             << ", gaps " << gap_events[c];
    v.require(frames_accepted[c] == 500, "500 frames");
    v.require(summary.total_samples == 6000, "6000 samples");
    v.require(gap_events[c] == 0 && summary.gap_count == 0, "no gaps");
    for (const auto& s : summary.sensors) v.require(s.count == 500, "500 per sensor");
  }
  return v;
}

// 4. Codec identity and single-bit corruption safety.
Verdict codec_properties() {
  Verdict v;
  const auto start = Clock::now();
  std::mt19937_64 rng(0xC0DEC);
  auto random_frame = [&] {
    gs::Frame f;
    f.glove = (rng() & 1) ? gs::Side::Left : gs::Side::Right;
    f.seq = static_cast<std::uint16_t>(rng());
    f.timestamp_ms = static_cast<std::uint32_t>(rng());
    f.battery_mv = static_cast<std::uint16_t>(rng() % (gs::kMaxBatteryMv + 1));
    for (auto& x : f.voltages_mv) x = static_cast<std::uint16_t>(rng() % (gs::kMaxVoltageMv + 1));
    return f;
  };
  std::size_t round_trip_failures = 0;
  for (int i = 0; i < 10'000; ++i) {
    const auto f = random_frame();
    const auto r = gs::decode_frame(gs::encode_frame(f));
    if (!std::holds_alternative<gs::Frame>(r) || std::get<gs::Frame>(r) != f) ++round_trip_failures;
  }
  std::size_t silent = 0;
  std::size_t flips = 0;
  for (int i = 0; i < 1'000; ++i) {
    const auto clean = gs::encode_frame(random_frame());
    for (std::size_t bit = 0; bit < gs::kFrameSize * 8; ++bit) {
      auto bytes = clean;
      bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      ++flips;
      if (std::holds_alternative<gs::Frame>(gs::decode_frame(bytes))) ++silent;
    }
  }
  const double elapsed = seconds_since(start);
  v.detail << "10000 round trips, " << round_trip_failures << " mismatches; " << flips << " single-bit flips, "
           << silent << " decoded as frames; " << fmt(elapsed, 3) << " s (< 60 s)";
  v.require(round_trip_failures == 0, "round trip");
  v.require(flips == 288'000 && silent == 0, "corruption safety");
  v.require(elapsed < 60.0, "runtime");
  return v;
}

// 5. Finger shares recovered through the pipeline, including record/load.
Verdict share_recovery() {
  Verdict v;
  const std::vector<gs::SensorId> tips{gs::SensorId::parse("S2"), gs::SensorId::parse("S3"),
                                       gs::SensorId::parse("S4"), gs::SensorId::parse("S5")};
  gs::testing::TempDir dir("acc5");
  auto recovered = [&](double noise) {
    auto plan = plan_for("precision-lift", "soft", 55, noise, 0.0);
    plan.subject = noise > 0 ? "noisy" : "clean";
    const auto sessions = run_pipeline(plan);
    const auto manifest = gs::record_session(sessions[0], dir.path());
    return gs::contribution_shares(gs::load_session(manifest.metadata), tips, kCal, kCfg);
  };
  const auto noisy = recovered(5.0);
  const auto clean = recovered(0.0);
  double worst_noisy = 0.0;
  double worst_clean = 0.0;
  v.detail << "recovered noisy/noise-free vs target:";
  for (std::size_t i = 0; i < 4; ++i) {
    const double target = gs::kPrecisionLiftShares[i];
    worst_noisy = std::max(worst_noisy, std::abs(noisy[i].percent - target));
    worst_clean = std::max(worst_clean, std::abs(clean[i].percent - target));
    v.detail << ' ' << tips[i].label() << '=' << fmt(noisy[i].percent, 4) << '/' << fmt(clean[i].percent, 4) << " ("
             << target << ')';
  }
  v.detail << "; worst deviation " << fmt(worst_noisy, 3) << " (<= 2) / " << fmt(worst_clean, 3) << " (<= 0.1)";
  v.require(worst_noisy <= 2.0, "noisy within 2 points");
  v.require(worst_clean <= 0.1, "noise-free within 0.1 points");
  return v;
}

// 6. ANOVA against independent oracles.
Verdict anova_oracles() {
  Verdict v;
  const auto r = gs::anova_oneway(std::vector<std::vector<double>>{{1, 2, 3}, {2, 3, 4}});
  const double x = 1.5 / 5.5;
  const double oracle_p = 1.0 - (1.5 * std::sqrt(x) - 0.5 * std::pow(x, 1.5));
  v.require(r.f_stat == 1.5, "F exactly 1.5");
  v.require(std::abs(r.p_value - 0.2879) <= 1e-3, "p near 0.2879");
  v.require(std::abs(r.p_value - oracle_p) <= 1e-3, "p against closed form");

  std::mt19937_64 rng(66);
  std::normal_distribution<double> z(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t a = 2 + rng() % 3, b = 2 + rng() % 3, reps = 2 + rng() % 4;
    gs::TwoWayTable t(a, std::vector<std::vector<double>>(b, std::vector<double>(reps)));
    for (std::size_t i = 0; i < a; ++i)
      for (std::size_t j = 0; j < b; ++j)
        for (auto& y : t[i][j]) y = 5.0 + 0.5 * i + 0.8 * j + z(rng);
    // Definitional sums, observation by observation.
    auto mean_if = [&](auto pred) {
      double s = 0;
      int n = 0;
      for (std::size_t i = 0; i < a; ++i)
        for (std::size_t j = 0; j < b; ++j)
          if (pred(i, j))
            for (double y : t[i][j]) s += y, ++n;
      return s / n;
    };
    const double g = mean_if([](auto, auto) { return true; });
    double sa = 0, sb = 0, sab = 0, se = 0, st = 0;
    for (std::size_t i = 0; i < a; ++i) {
      const double ai = mean_if([&](auto p, auto) { return p == i; });
      for (std::size_t j = 0; j < b; ++j) {
        const double bj = mean_if([&](auto, auto q) { return q == j; });
        const double cij = mean_if([&](auto p, auto q) { return p == i && q == j; });
        for (double y : t[i][j]) {
          sa += (ai - g) * (ai - g);
          sb += (bj - g) * (bj - g);
          sab += (cij - ai - bj + g) * (cij - ai - bj + g);
          se += (y - cij) * (y - cij);
          st += (y - g) * (y - g);
        }
      }
    }
    const auto got = gs::anova_twoway(t);
    for (const auto& [mine, ref] : {std::pair{got.factor_a.ss_between, sa}, std::pair{got.factor_b.ss_between, sb},
                                    std::pair{got.interaction.ss_between, sab}, std::pair{got.ss_error, se},
                                    std::pair{got.ss_total, st}}) {
      worst = std::max(worst, std::abs(mine - ref) / std::max(std::abs(ref), 1e-300));
    }
  }
  v.detail << "one-way F=" << fmt(r.f_stat) << " (want 1.5), p=" << fmt(r.p_value) << " (oracle " << fmt(oracle_p)
           << ", want 0.2879 +/- 1e-3); two-way worst relative SS error " << fmt(worst, 3)
           << " over 100 tables (<= 1e-9)";
  v.require(worst <= 1e-9, "two-way decomposition");
  return v;
}

// 7. Direction and significance of condition and hand effects.
Verdict qualitative_effects() {
  Verdict v;
  std::map<std::string, std::map<std::string, std::vector<double>>> by_condition, by_hand;
  for (std::uint64_t subject = 1; subject <= 20; ++subject) {
    for (const char* cond : {"soft", "hardrock"}) {
      // Same seed for both conditions: each subject keeps one force scale.
      const auto sessions = run_pipeline(plan_for("precision-lift", cond, 7000 + subject, 5.0, 0.15));
      for (const auto& s : sessions) {
        for (const char* sensor : {"S2", "S4"}) {
          const double m = mean_force(s, sensor);
          by_condition[sensor][cond].push_back(m);
          by_hand[sensor][std::string{gs::to_string(s.metadata.hand.dominance)}].push_back(m);
        }
      }
    }
  }
  auto mean = [](const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); };
  for (const char* sensor : {"S2", "S4"}) {
    const auto& c = by_condition[sensor];
    const auto& h = by_hand[sensor];
    const auto rc = gs::anova_oneway(std::vector{c.at("hardrock"), c.at("soft")});
    const auto rh = gs::anova_oneway(std::vector{h.at("dominant"), h.at("nondominant")});
    v.detail << sensor << ": hardrock " << fmt(mean(c.at("hardrock")), 4) << " N vs soft "
             << fmt(mean(c.at("soft")), 4) << " N, p=" << fmt(rc.p_value, 3) << "; dominant "
             << fmt(mean(h.at("dominant")), 4) << " N vs non-dominant " << fmt(mean(h.at("nondominant")), 4)
             << " N, p=" << fmt(rh.p_value, 3) << ". ";
    v.require(mean(c.at("hardrock")) > mean(c.at("soft")), std::string(sensor) + " condition direction");
    v.require(rc.p_value < 0.01, std::string(sensor) + " condition p");
    v.require(mean(h.at("dominant")) > mean(h.at("nondominant")), std::string(sensor) + " hand direction");
    v.require(rh.p_value < 0.01, std::string(sensor) + " hand p");
  }
  v.detail << "20 subjects x 2 hands x 2 conditions, noise sd 5 mV";
  return v;
}

// 8. Expert and novice separation.
Verdict expertise_separation() {
  Verdict v;
  std::size_t expert_ok = 0, novice_ok = 0, shorter = 0;
  double expert_min = 1e9, novice_max = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto ep = plan_for("expert", "soft", 8000 + seed, 5.0, 0.15);
    auto np = plan_for("novice", "soft", 9000 + seed, 5.0, 0.15);
    ep.gloves.resize(1);
    np.gloves.resize(1);
    const auto e = gs::expertise_index(run_pipeline(ep)[0], kCal, kCfg);
    const auto n = gs::expertise_index(run_pipeline(np)[0], kCal, kCfg);
    expert_ok += e.little_to_middle_ratio > 1.0;
    novice_ok += n.little_to_middle_ratio < 1.0;
    shorter += e.samples_in_task < n.samples_in_task;
    expert_min = std::min(expert_min, e.little_to_middle_ratio);
    novice_max = std::max(novice_max, n.little_to_middle_ratio);
  }
  v.detail << "expert ratio > 1 in " << expert_ok << "/100 (min " << fmt(expert_min, 4) << "), novice ratio < 1 in "
           << novice_ok << "/100 (max " << fmt(novice_max, 4) << "), expert fewer samples in " << shorter << "/100";
  v.require(expert_ok == 100 && novice_ok == 100 && shorter == 100, "100/100 separation");
  return v;
}

// 9. Alert latency and hysteresis.
Verdict alert_latency() {
  Verdict v;
  const auto s2 = gs::SensorId::parse("S2");
  gs::AlertMonitor ramp_monitor(gs::Side::Left, {});
  std::vector<gs::AlertEvent> ramp_events;
  // 8 N/s ramp: exactly 8 N at t = 1000 ms.
  for (std::uint32_t t = 0; t <= 2000; t += 20) {
    auto e = ramp_monitor.step({s2, t, 8.0 * t / 1000.0});
    ramp_events.insert(ramp_events.end(), e.begin(), e.end());
  }
  gs::AlertPolicy band;
  band.hysteresis_n = 1.0;
  gs::AlertMonitor osc_monitor(gs::Side::Left, band);
  std::size_t osc_alerts = 0;
  for (std::uint32_t k = 0; k < 500; ++k) {
    const double f = (k < 2 || k % 2 == 0) ? band.threshold_n + 0.05 : band.threshold_n - 0.05;
    for (const auto& e : osc_monitor.step({s2, 20 * k, f})) osc_alerts += e.raised() ? 1 : 0;
  }
  const bool have_onset = !ramp_events.empty() && ramp_events[0].raised();
  const auto onset = have_onset ? ramp_events[0].onset_timestamp_ms : 0u;
  v.detail << "ramp onset " << (have_onset ? std::to_string(onset) + " ms" : "none") << " (<= 1040 ms), "
           << (have_onset ? gs::format_alert(ramp_events[0]) : "") << "; oscillation alerts " << osc_alerts
           << " (want 1)";
  v.require(have_onset && onset <= 1040, "onset");
  v.require(osc_alerts == 1, "single alert under oscillation");
  return v;
}

// 10. Lossless persistence and conversion inverses.
Verdict round_trips() {
  Verdict v;
  gs::testing::TempDir dir("acc10");
  auto sessions = run_pipeline(plan_for("power-grip", "hardrock", 10, 5.0, 0.1));
  bool lossless = true;
  for (const auto& s : sessions) {
    const auto manifest = gs::record_session(s, dir.path());
    lossless = lossless && gs::load_session(manifest.metadata) == s;
  }
  double worst_force = 0.0;
  double worst_resistance = 0.0;
  for (const auto mode : {gs::ConversionMode::LinearCalibrated, gs::ConversionMode::LiteralDivider}) {
    gs::GloveConfig cfg;
    cfg.conversion_mode = mode;
    const double max_mv = gs::voltage_from_force(gs::Newtons{2 * kCal.anchor_force.value()}, kCal, cfg).value();
    for (int i = 1; i <= 100'000; ++i) {
      const double mv = max_mv * i / 100'000.0;
      const auto f = gs::force_from_voltage(gs::Millivolts{mv}, kCal, cfg);
      const double back = gs::voltage_from_force(f, kCal, cfg).value();
      worst_force = std::max(worst_force, std::abs(back - mv) / mv);
    }
    for (int i = 1; i < 100'000; ++i) {
      const double volts = 3.3 * i / 100'000.0;
      const auto r = gs::resistance_from_voltage(gs::Volts{volts}, cfg);
      worst_resistance = std::max(worst_resistance, std::abs(gs::divider_voltage(r, cfg).value() - volts) / volts);
    }
  }
  v.detail << "record/load " << (lossless ? "identical" : "DIFFERENT") << " for " << sessions.size()
           << " sessions; worst relative error voltage->force->voltage " << fmt(worst_force, 3)
           << ", voltage->resistance->voltage " << fmt(worst_resistance, 3) << " (<= 1e-9)";
  v.require(lossless, "lossless record/load");
  v.require(worst_force <= 1e-9 && worst_resistance <= 1e-9, "inverse precision");
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"electrical model endpoints", electrical_endpoints},
      {"bandwidth budget", bandwidth_budget},
      {"cadence and count conservation", cadence_conservation},
      {"codec property suite", codec_properties},
      {"pipeline share recovery", share_recovery},
      {"ANOVA oracle equivalence", anova_oracles},
      {"condition and hand effects on simulated data", qualitative_effects},
      {"expertise benchmark", expertise_separation},
      {"alert latency and hysteresis", alert_latency},
      {"record/load and conversion round trips", round_trips},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "threw: " << e.what();
    }
    failures += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << " (" << criteria[i].first
              << "): " << v.detail.str() << '\n';
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
