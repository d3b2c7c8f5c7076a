#include "cli.hpp"

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "gripstream/analytics.hpp"
#include "gripstream/device_sim.hpp"
#include "gripstream/error.hpp"
#include "gripstream/key_value.hpp"
#include "gripstream/protocol.hpp"
#include "gripstream/transport.hpp"
#include "svg.hpp"

namespace gripstream::cli {

namespace fs = std::filesystem;

namespace {

// Flag combinations that parse but make no sense. Exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  sink->set_pattern("gripstream: %l: %v");
  auto logger = std::make_shared<spdlog::logger>("gripstream", sink);
  auto level = spdlog::level::info;
  if (const char* env = std::getenv("GRIPSTREAM_LOG")) {
    level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; treat those as the default instead.
    if (level == spdlog::level::off && std::string_view{env} != "off") level = spdlog::level::info;
  }
  logger->set_level(level);
  return logger;
}

std::vector<SensorId> parse_sensor_list(const std::string& text) {
  std::vector<SensorId> out;
  for (const auto& part : split(text, ',')) {
    try {
      out.push_back(SensorId::parse(part));
    } catch (const DomainError&) {
      throw UsageError("invalid sensor '" + part + "' (expected S1..S12)");
    }
  }
  if (out.empty()) throw UsageError("sensor list is empty");
  return out;
}

DeviceConfig load_device(const std::string& path) {
  return path.empty() ? DeviceConfig{} : load_device_config(path);
}

Side parse_side_flag(const std::string& text) {
  try {
    return parse_side(text);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

// Reports are built in memory so a failing command leaves no partial file.
void write_output(const std::string& path, std::ostream& fallback, const std::string& text) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  file << text;
  file.close();
  if (!file) throw IoError("failed writing '" + path + "'");
}

std::string utc_now_iso() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void print_manifest(std::ostream& out, const FileManifest& manifest) {
  for (const auto& f : manifest.files) out << f.path.string() << '\t' << f.lines << '\n';
}

void log_events(spdlog::logger& log, const std::vector<StreamEvent>& events, const std::string& who) {
  for (const auto& e : events) {
    if (e.kind == StreamEventKind::SequenceGap) {
      log.warn("{}: sequence gap of {} frame(s) at byte {}", who, e.count, e.at_byte_offset);
    } else {
      log.warn("{}: {} at byte {}", who, to_string(e.kind), e.at_byte_offset);
    }
  }
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config;
  std::string plan;
  std::string preset = "precision-lift";
  std::string condition = "soft";
  std::string hand = "both";
  std::string dominant = "right";
  std::string subject;
  std::string waveform = "lift";
  std::string out;
  std::string raw;
  std::uint64_t seed = 0;
  double duration = 10.0;
  double noise_sd = 5.0;
  double lift_period = 2.0;
  double spread = 0.0;
  double drain = 1.0;
  bool connect = false;
  bool realtime = false;
  std::uint16_t port = kDefaultPort;
};

SessionPlan plan_from_flags(const SimulateArgs& a) {
  SessionPlan plan;
  plan.seed = a.seed;
  plan.subject = a.subject.empty() ? "sim" + std::to_string(a.seed) : a.subject;
  plan.condition = a.condition;
  plan.duration_s = a.duration;
  plan.subject_spread = a.spread;
  plan.battery_drain_mv_per_s = a.drain;
  plan.waveform.kind = a.waveform == "hold" ? WaveformKind::HoldStatic : WaveformKind::LiftCycle;
  plan.waveform.period_s = a.lift_period;
  const Side dominant = parse_side_flag(a.dominant);
  std::vector<Side> sides;
  if (a.hand == "both") {
    sides = {Side::Left, Side::Right};
  } else {
    sides = {parse_side_flag(a.hand)};
  }
  for (const auto side : sides) {
    GlovePlan g;
    g.hand = Hand{side, side == dominant ? Dominance::Dominant : Dominance::NonDominant};
    g.profile = make_preset(a.preset, a.condition);
    g.profile.noise_sd_mv = a.noise_sd;
    plan.gloves.push_back(std::move(g));
  }
  try {
    validate(plan);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return plan;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, spdlog::logger& log) {
  if (!a.connect && a.out.empty()) throw UsageError("simulate needs --out DIR or --connect");
  SessionPlan plan = a.plan.empty() ? plan_from_flags(a) : load_session_plan(a.plan);
  if (!a.plan.empty() && !a.subject.empty()) plan.subject = a.subject;
  const auto device = load_device(a.config);
  const auto& cfg = device.glove;

  const auto trajectories = synthesize_session(plan, cfg, device.calibration);
  std::vector<std::vector<Frame>> frames;
  for (const auto& t : trajectories) {
    frames.push_back(emit_frames(t, device.calibration, cfg, {plan.battery_drain_mv_per_s}));
  }

  if (a.connect) {
    std::vector<EmissionReport> reports(frames.size());
    std::vector<std::string> connect_errors(frames.size());
    {
      std::vector<std::jthread> workers;
      for (std::size_t i = 0; i < frames.size(); ++i) {
        workers.emplace_back([&, i] {
          try {
            auto stream = TcpStream::connect_loopback(a.port);
            reports[i] = stream_session(frames[i], stream, a.realtime ? Pace::RealTime : Pace::AsFastAsPossible,
                                        cfg.sample_period);
            stream.shutdown_write();
          } catch (const Error& e) {
            connect_errors[i] = e.what();
          }
        });
      }
    }
    bool ok = true;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const auto side = side_letter(trajectories[i].hand.side);
      if (!connect_errors[i].empty()) {
        log.error("glove {}: {}", side, connect_errors[i]);
        ok = false;
        continue;
      }
      out << "glove=" << side << " frames=" << reports[i].frames_sent << " bytes=" << reports[i].bytes_sent
          << '\n';
      if (!reports[i].completed) {
        log.error("glove {}: emission aborted: {}", side, reports[i].error);
        ok = false;
      }
    }
    return ok ? kExitOk : kExitData;
  }

  for (std::size_t i = 0; i < frames.size(); ++i) {
    MemorySink sink;
    const auto report = stream_session(frames[i], sink, Pace::AsFastAsPossible, cfg.sample_period);
    if (!report.completed) throw TransportError(report.error);
    const auto bytes = sink.bytes();

    SessionMetadata meta;
    meta.subject = plan.subject;
    meta.condition = plan.condition;
    meta.started_at = "simulated";
    const auto hand = trajectories[i].hand;
    const Side other = hand.side == Side::Left ? Side::Right : Side::Left;
    IngestOptions options;
    options.expect_glove = hand.side;
    options.dominant_side = hand.dominance == Dominance::Dominant ? hand.side : other;
    Ingestor ingestor(meta, options);
    auto fed = ingestor.feed(bytes);
    log_events(log, fed.events, "simulate");
    log_events(log, ingestor.finish().events, "simulate");

    if (!a.raw.empty()) {
      fs::create_directories(a.raw);
      const auto raw_path = fs::path(a.raw) / (session_stem(ingestor.session().metadata) + ".bin");
      FileSink raw(raw_path.string());
      raw.write(bytes);
      raw.flush();
      log.info("wrote {} bytes to {}", bytes.size(), raw_path.string());
    }
    const auto manifest = record_session(ingestor.session(), a.out);
    print_manifest(out, manifest);
    log.info("glove {}: {} frames, {} samples", side_letter(trajectories[i].hand.side),
             ingestor.frames_accepted(), ingestor.session().total_samples());
  }
  return kExitOk;
}

// ---------------------------------------------------------------- record

struct RecordArgs {
  std::string in;
  std::string out;
  std::string subject = "anon";
  std::string condition = "baseline";
  std::string hand;
  std::string dominant = "right";
};

int cmd_record(const RecordArgs& a, std::ostream& out, spdlog::logger& log) {
  IngestOptions options;
  options.dominant_side = parse_side_flag(a.dominant);
  if (!a.hand.empty()) options.expect_glove = parse_side_flag(a.hand);

  std::ifstream in(a.in, std::ios::binary);
  if (!in) throw IoError("cannot open stream file '" + a.in + "'");
  Ingestor ingestor({a.subject, {}, a.condition, utc_now_iso()}, options);
  std::vector<std::uint8_t> chunk(4096);
  while (in) {
    in.read(reinterpret_cast<char*>(chunk.data()), static_cast<std::streamsize>(chunk.size()));
    const auto n = static_cast<std::size_t>(in.gcount());
    if (n == 0) break;
    log_events(log, ingestor.feed(std::span(chunk.data(), n)).events, a.in);
  }
  log_events(log, ingestor.finish().events, a.in);
  if (ingestor.frames_accepted() == 0 && !options.expect_glove) {
    log.warn("{}: no valid frames; recording an empty session", a.in);
  }
  print_manifest(out, record_session(ingestor.session(), a.out));
  return kExitOk;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string in;
  std::string config;
  std::string anova;
  std::string sensors;
  std::string report = "summary";
  std::string group = "hand,sensor,condition";
  std::string out;
};

std::string factor_level(const Session& s, const std::string& factor) {
  if (factor == "hand") return std::string{to_string(s.metadata.hand.dominance)};
  if (factor == "side") return std::string{to_string(s.metadata.hand.side)};
  if (factor == "condition") return s.metadata.condition;
  return s.metadata.subject;
}

double session_mean_force(const Session& s, SensorId id, const DeviceConfig& d) {
  return aggregate_stats(sensor_profile(s, id, d.calibration, d.glove)).mean();
}

void write_anova_row(std::ostream& o, const std::string& model, const std::string& effect, SensorId sensor,
                     const AnovaResult& r) {
  o << model << ',' << effect << ',' << sensor.label() << ',' << format_double(r.f_stat) << ','
    << r.df_between << ',' << r.df_within << ',' << format_double(r.p_value) << ','
    << format_double(r.ss_between) << ',' << format_double(r.ss_within) << ',' << format_double(r.ss_total)
    << '\n';
}

void report_anova(std::ostream& o, const std::vector<Session>& sessions, const std::vector<std::string>& factors,
                  const std::vector<SensorId>& sensors, const DeviceConfig& d, spdlog::logger& log) {
  o << "model,effect,sensor,f_stat,df_between,df_within,p_value,ss_between,ss_within,ss_total\n";
  for (const auto sensor : sensors) {
    for (const auto& factor : factors) {
      std::map<std::string, std::vector<double>> groups;
      for (const auto& s : sessions) {
        if (!s.samples[sensor.slot()].empty()) {
          groups[factor_level(s, factor)].push_back(session_mean_force(s, sensor, d));
        }
      }
      std::vector<std::vector<double>> obs;
      for (auto& [level, values] : groups) obs.push_back(std::move(values));
      write_anova_row(o, "oneway", factor, sensor, anova_oneway(obs));
    }
    if (factors.size() != 2) continue;

    std::map<std::string, std::map<std::string, std::vector<double>>> cells;
    std::set<std::string> b_levels;
    for (const auto& s : sessions) {
      if (s.samples[sensor.slot()].empty()) continue;
      const auto lb = factor_level(s, factors[1]);
      cells[factor_level(s, factors[0])][lb].push_back(session_mean_force(s, sensor, d));
      b_levels.insert(lb);
    }
    TwoWayTable table;
    for (auto& [la, row] : cells) {
      std::vector<std::vector<double>> r;
      for (const auto& lb : b_levels) r.push_back(row[lb]);
      table.push_back(std::move(r));
    }
    try {
      const auto tw = anova_twoway(table);
      write_anova_row(o, "twoway", factors[0], sensor, tw.factor_a);
      write_anova_row(o, "twoway", factors[1], sensor, tw.factor_b);
      write_anova_row(o, "twoway", factors[0] + ":" + factors[1], sensor, tw.interaction);
    } catch (const UnsupportedDesignError& e) {
      log.warn("{}: two-way ANOVA skipped: {}", sensor.label(), e.what());
    }
  }
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, spdlog::logger& log) {
  std::vector<std::string> factors;
  if (!a.anova.empty()) {
    factors = split(a.anova, ',');
    for (const auto& f : factors) {
      if (f != "hand" && f != "side" && f != "condition" && f != "subject") {
        throw UsageError("unknown ANOVA factor '" + f + "' (hand, side, condition, subject)");
      }
    }
    if (std::set(factors.begin(), factors.end()).size() != factors.size()) {
      throw UsageError("repeated ANOVA factor");
    }
  }
  const std::string default_sensors = a.report == "shares" ? "S2,S3,S4,S5" : a.anova.empty() ? "" : "S2,S4";
  std::vector<SensorId> sensors;
  if (!a.sensors.empty() || !default_sensors.empty()) {
    sensors = parse_sensor_list(a.sensors.empty() ? default_sensors : a.sensors);
  } else {
    for (std::size_t k = 0; k < kSensorCount; ++k) sensors.push_back(SensorId::from_slot(k));
  }
  GroupBy group_by;
  if (a.report == "population") {
    for (const auto& g : split(a.group, ',')) {
      if (g == "hand") group_by.hand = true;
      else if (g == "sensor") group_by.sensor = true;
      else if (g == "condition") group_by.condition = true;
      else throw UsageError("unknown group field '" + g + "' (hand, sensor, condition)");
    }
  }

  const auto device = load_device(a.config);
  const auto sessions = load_sessions(a.in);
  if (sessions.empty()) throw StructureError("no sessions found in '" + a.in + "'");
  log.info("loaded {} session(s) from {}", sessions.size(), a.in);

  std::ostringstream o;
  const auto& cal = device.calibration;
  const auto& cfg = device.glove;

  if (!factors.empty()) {
    report_anova(o, sessions, factors, sensors, device, log);
  } else if (a.report == "summary") {
    o << "subject,hand,dominance,condition,sensor,n,mean_n,max_n,sd_n\n";
    for (const auto& s : sessions) {
      for (const auto id : sensors) {
        const auto profile = sensor_profile(s, id, cal, cfg);
        o << s.metadata.subject << ',' << to_string(s.metadata.hand.side) << ','
          << to_string(s.metadata.hand.dominance) << ',' << s.metadata.condition << ',' << id.label() << ','
          << profile.points.size();
        if (profile.points.empty()) {
          o << ",,,\n";
          continue;
        }
        const auto st = aggregate_stats(profile);
        o << ',' << format_double(st.mean()) << ',' << format_double(st.max()) << ','
          << (st.has_sd() ? format_double(st.sd()) : "") << '\n';
      }
    }
  } else if (a.report == "shares") {
    o << "subject,hand,condition,sensor,share_percent\n";
    for (const auto& s : sessions) {
      for (const auto& share : contribution_shares(s, sensors, cal, cfg)) {
        o << s.metadata.subject << ',' << to_string(s.metadata.hand.side) << ',' << s.metadata.condition << ','
          << share.sensor.label() << ',' << format_double(share.percent) << '\n';
      }
    }
  } else if (a.report == "population") {
    o << "hand,sensor,condition,mean_force_n,contributions\n";
    for (const auto& g : population_average(sessions, group_by, cal, cfg)) {
      o << (g.key.hand ? std::string{to_string(g.key.hand->dominance)} : "") << ','
        << (g.key.sensor ? g.key.sensor->label() : "") << ',' << g.key.condition.value_or("") << ','
        << format_double(g.mean_force_n) << ',' << g.contributions << '\n';
    }
  } else if (a.report == "expertise") {
    o << "subject,hand,condition,little_to_middle_ratio,samples_in_task\n";
    for (const auto& s : sessions) {
      const auto e = expertise_index(s, cal, cfg);
      o << s.metadata.subject << ',' << to_string(s.metadata.hand.side) << ',' << s.metadata.condition << ','
        << format_double(e.little_to_middle_ratio) << ',' << e.samples_in_task << '\n';
    }
  }
  write_output(a.out, out, o.str());
  return kExitOk;
}

// ---------------------------------------------------------------- plot

struct PlotArgs {
  std::string in;
  std::string config;
  std::string sensors = "S2,S4";
  std::string unit = "mV";
  std::string out;
  std::string title = "Individual grip force profiles";
};

int cmd_plot(const PlotArgs& a, std::ostream& out, spdlog::logger& log) {
  const auto sensors = parse_sensor_list(a.sensors);
  const bool newtons = a.unit == "N";
  const auto device = load_device(a.config);
  const auto sessions = load_sessions(a.in);
  if (sessions.empty()) throw StructureError("no sessions found in '" + a.in + "'");

  std::vector<PlotSeries> series;
  for (const auto& s : sessions) {
    for (const auto id : sensors) {
      PlotSeries ps;
      ps.label = s.metadata.subject + " " + std::string{to_string(s.metadata.hand.side)} + " " +
                 s.metadata.condition + " " + id.label();
      if (newtons) {
        for (const auto& p : sensor_profile(s, id, device.calibration, device.glove).points) {
          ps.points.emplace_back(p.timestamp_ms / 1000.0, p.force_n);
        }
      } else {
        for (const auto& p : s.samples[id.slot()]) {
          ps.points.emplace_back(p.timestamp_ms / 1000.0, static_cast<double>(p.voltage_mv));
        }
      }
      series.push_back(std::move(ps));
    }
  }
  PlotStyle style;
  style.title = a.title;
  style.y_label = newtons ? "grip force (N)" : "sensor output (mV)";
  const auto svg = render_profile_svg(series, style);

  write_output(a.out, out, svg);
  log.info("plotted {} series", series.size());
  return kExitOk;
}

// ---------------------------------------------------------------- monitor

struct MonitorArgs {
  std::string in;
  std::string stream;
  std::string config;
  std::string sensors;
  std::string hand;
  double threshold = 8.0;
  double hysteresis = 0.5;
  unsigned debounce = 2;
};

AlertPolicy policy_from(double threshold, double hysteresis, unsigned debounce, const std::string& sensors) {
  AlertPolicy policy;
  policy.threshold_n = threshold;
  policy.hysteresis_n = hysteresis;
  policy.debounce = debounce;
  if (!sensors.empty()) {
    policy.sensor_scope.reset();
    for (const auto id : parse_sensor_list(sensors)) policy.sensor_scope.set(id.slot());
  }
  try {
    validate(policy);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return policy;
}

int cmd_monitor(const MonitorArgs& a, std::ostream& out, spdlog::logger& log) {
  if (a.in.empty() == a.stream.empty()) throw UsageError("monitor needs exactly one of --in or --stream");
  const auto policy = policy_from(a.threshold, a.hysteresis, a.debounce, a.sensors);
  const auto device = load_device(a.config);

  std::vector<Session> sessions;
  if (!a.in.empty()) {
    sessions = load_sessions(a.in);
  } else {
    std::ifstream in(a.stream, std::ios::binary);
    if (!in) throw IoError("cannot open stream file '" + a.stream + "'");
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    IngestOptions options;
    if (!a.hand.empty()) options.expect_glove = parse_side_flag(a.hand);
    Ingestor ingestor({"stream", {}, "live", ""}, options);
    log_events(log, ingestor.feed(bytes).events, a.stream);
    log_events(log, ingestor.finish().events, a.stream);
    sessions.push_back(ingestor.take_session());
  }
  std::size_t raised = 0;
  for (const auto& s : sessions) {
    for (const auto& e : monitor_session(s, policy, device.calibration, device.glove)) {
      out << format_alert(e) << '\n';
      raised += e.raised() ? 1 : 0;
    }
  }
  log.info("{} alert(s) raised", raised);
  return kExitOk;
}

// ---------------------------------------------------------------- export

int cmd_export(const std::string& in, const std::string& out_path, std::ostream& out, spdlog::logger& log) {
  const auto sessions = load_sessions(in);
  std::ostringstream csv;
  write_combined_csv(csv, sessions);
  write_output(out_path, out, csv.str());
  log.info("exported {} session(s)", sessions.size());
  return kExitOk;
}

// ---------------------------------------------------------------- serve

struct ServeArgs {
  std::string out;
  std::string config;
  std::string subject = "anon";
  std::string condition = "baseline";
  std::string dominant = "right";
  std::uint16_t port = kDefaultPort;
  unsigned gloves = 2;
  double threshold = 8.0;
  double hysteresis = 0.5;
  unsigned debounce = 2;
  bool no_bell = false;
};

}  // namespace

ServeResult serve(const ServeOptions& options, std::ostream& out, std::ostream& err,
                  const std::function<void(std::uint16_t)>& on_listening) {
  validate(options.policy);
  if (options.connections < 1 || options.connections > 2) {
    throw ConfigError("serve handles one or two glove connections");
  }
  TcpListener listener(options.port);
  if (on_listening) on_listening(listener.port());

  std::mutex out_mutex;
  ServeResult result;
  std::vector<std::string> failures;
  const auto& cfg = options.device.glove;
  const auto& cal = options.device.calibration;

  {
    std::vector<std::jthread> workers;
    for (unsigned c = 0; c < options.connections; ++c) {
      auto stream = listener.accept();
      workers.emplace_back([&, stream = std::move(stream)]() mutable {
        try {
          IngestOptions io;
          io.dominant_side = options.dominant_side;
          Ingestor ingestor({options.subject, {}, options.condition, utc_now_iso()}, io);
          std::optional<AlertMonitor> monitor;
          std::vector<AlertEvent> alerts;
          std::vector<std::uint8_t> buf(4096);
          while (true) {
            const auto n = stream.read(buf);
            if (n == 0) break;
            const auto fed = ingestor.feed(std::span(buf.data(), n));
            for (const auto& frame : fed.accepted) {
              if (!monitor) monitor.emplace(frame.glove, options.policy);
              for (std::size_t k = 0; k < kSensorCount; ++k) {
                const auto f = force_from_voltage(Millivolts{static_cast<double>(frame.voltages_mv[k])}, cal, cfg);
                for (const auto& e : monitor->step({SensorId::from_slot(k), frame.timestamp_ms, f.value()})) {
                  std::lock_guard lock(out_mutex);
                  out << format_alert(e) << std::endl;
                  if (options.bell && e.raised()) err << '\a' << std::flush;
                  alerts.push_back(e);
                }
              }
            }
          }
          ingestor.finish();
          std::lock_guard lock(out_mutex);
          result.alerts.insert(result.alerts.end(), alerts.begin(), alerts.end());
          result.sessions.push_back(ingestor.take_session());
        } catch (const std::exception& e) {
          std::lock_guard lock(out_mutex);
          failures.push_back(e.what());
        }
      });
    }
  }
  if (!failures.empty()) throw TransportError("connection failed: " + failures.front());

  std::sort(result.sessions.begin(), result.sessions.end(),
            [](const Session& a, const Session& b) { return a.metadata.hand.side < b.metadata.hand.side; });
  for (std::size_t i = 1; i < result.sessions.size(); ++i) {
    if (result.sessions[i].metadata.hand.side == result.sessions[i - 1].metadata.hand.side) {
      throw StructureError("two connections carried the same glove");
    }
  }
  if (!options.out_dir.empty()) {
    for (const auto& s : result.sessions) result.manifests.push_back(record_session(s, options.out_dir));
  }
  return result;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"gripstream: grip-force glove telemetry pipeline", "gripstream"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Synthesize glove sessions and record or stream them");
  simulate->add_option("--config", sim.config, "Device config file")->check(CLI::ExistingFile);
  simulate->add_option("--plan", sim.plan, "Session plan file (replaces the profile flags)")->check(CLI::ExistingFile);
  simulate->add_option("--preset", sim.preset, "Profile preset")
      ->check(CLI::IsMember({"uniform", "precision-lift", "power-grip", "expert", "novice"}));
  simulate->add_option("--condition", sim.condition, "Music condition")
      ->check(CLI::IsMember({"baseline", "soft", "hardrock"}));
  simulate->add_option("--hand", sim.hand, "Gloves to simulate")->check(CLI::IsMember({"left", "right", "both"}));
  simulate->add_option("--dominant", sim.dominant, "Dominant hand")->check(CLI::IsMember({"left", "right"}));
  simulate->add_option("--subject", sim.subject, "Subject id (default sim<seed>)");
  simulate->add_option("--seed", sim.seed, "PRNG seed");
  simulate->add_option("--duration", sim.duration, "Session length in seconds")->check(CLI::PositiveNumber);
  simulate->add_option("--noise-sd", sim.noise_sd, "Voltage noise sd in mV")->check(CLI::NonNegativeNumber);
  simulate->add_option("--waveform", sim.waveform, "Force envelope")->check(CLI::IsMember({"hold", "lift"}));
  simulate->add_option("--lift-period", sim.lift_period, "Lift cycle period in seconds")->check(CLI::PositiveNumber);
  simulate->add_option("--subject-spread", sim.spread, "Relative sd of the per-subject force scale")
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--battery-drain", sim.drain, "Battery drain in mV/s")->check(CLI::NonNegativeNumber);
  simulate->add_option("--out", sim.out, "Directory for session files");
  simulate->add_option("--raw", sim.raw, "Also write each glove's byte stream into this directory");
  simulate->add_flag("--connect", sim.connect, "Stream to a running 'serve' instead of recording");
  simulate->add_flag("--realtime", sim.realtime, "Pace frames at the sample period");
  simulate->add_option("--port", sim.port, "Loopback port for --connect");

  ServeArgs srv;
  auto* serve_cmd = app.add_subcommand("serve", "Receive live glove streams, record and monitor them");
  serve_cmd->add_option("--port", srv.port, "Loopback port");
  serve_cmd->add_option("--gloves", srv.gloves, "Connections to accept")->check(CLI::Range(1, 2));
  serve_cmd->add_option("--out", srv.out, "Directory for session files")->required();
  serve_cmd->add_option("--config", srv.config, "Device config file")->check(CLI::ExistingFile);
  serve_cmd->add_option("--subject", srv.subject, "Subject id");
  serve_cmd->add_option("--condition", srv.condition, "Condition label");
  serve_cmd->add_option("--dominant", srv.dominant, "Dominant hand")->check(CLI::IsMember({"left", "right"}));
  serve_cmd->add_option("--threshold", srv.threshold, "Alert threshold in N");
  serve_cmd->add_option("--hysteresis", srv.hysteresis, "Alert hysteresis in N");
  serve_cmd->add_option("--debounce", srv.debounce, "Consecutive samples above threshold");
  serve_cmd->add_flag("--no-bell", srv.no_bell, "Do not ring the terminal bell on alerts");

  RecordArgs rec;
  auto* record = app.add_subcommand("record", "Decode a captured byte stream into session files");
  record->add_option("--in", rec.in, "Raw stream file")->required()->check(CLI::ExistingFile);
  record->add_option("--out", rec.out, "Directory for session files")->required();
  record->add_option("--subject", rec.subject, "Subject id");
  record->add_option("--condition", rec.condition, "Condition label");
  record->add_option("--hand", rec.hand, "Expected glove")->check(CLI::IsMember({"left", "right"}));
  record->add_option("--dominant", rec.dominant, "Dominant hand")->check(CLI::IsMember({"left", "right"}));

  AnalyzeArgs ana;
  auto* analyze = app.add_subcommand("analyze", "Statistics over recorded sessions as CSV");
  analyze->add_option("--in", ana.in, "Session directory")->required();
  analyze->add_option("--config", ana.config, "Device config file")->check(CLI::ExistingFile);
  analyze->add_option("--anova", ana.anova, "Comma-separated factors: hand, side, condition, subject");
  analyze->add_option("--sensor", ana.sensors, "Comma-separated sensors, e.g. S2,S4");
  analyze->add_option("--report", ana.report, "Report when --anova is absent")
      ->check(CLI::IsMember({"summary", "shares", "population", "expertise"}));
  analyze->add_option("--group", ana.group, "Grouping for the population report");
  analyze->add_option("--out", ana.out, "CSV file (default stdout)");

  PlotArgs plt;
  auto* plot = app.add_subcommand("plot", "Render sensor profiles as SVG");
  plot->add_option("--in", plt.in, "Session directory")->required();
  plot->add_option("--config", plt.config, "Device config file")->check(CLI::ExistingFile);
  plot->add_option("--sensor", plt.sensors, "Comma-separated sensors");
  plot->add_option("--unit", plt.unit, "Y axis unit")->check(CLI::IsMember({"mV", "N"}));
  plot->add_option("--title", plt.title, "Chart title");
  plot->add_option("--out", plt.out, "SVG file (default stdout)");

  MonitorArgs mon;
  auto* monitor = app.add_subcommand("monitor", "Replay sessions or a stream through the alert monitor");
  monitor->add_option("--in", mon.in, "Session directory");
  monitor->add_option("--stream", mon.stream, "Raw stream file")->check(CLI::ExistingFile);
  monitor->add_option("--config", mon.config, "Device config file")->check(CLI::ExistingFile);
  monitor->add_option("--hand", mon.hand, "Expected glove for --stream")->check(CLI::IsMember({"left", "right"}));
  monitor->add_option("--threshold", mon.threshold, "Alert threshold in N");
  monitor->add_option("--hysteresis", mon.hysteresis, "Alert hysteresis in N");
  monitor->add_option("--debounce", mon.debounce, "Consecutive samples above threshold");
  monitor->add_option("--sensor", mon.sensors, "Sensors to watch (default all)");

  std::string export_in;
  std::string export_out;
  auto* export_cmd = app.add_subcommand("export", "Write every session as one combined CSV");
  export_cmd->add_option("--in", export_in, "Session directory")->required();
  export_cmd->add_option("--out", export_out, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "gripstream: " << e.what() << '\n';
    return kExitUsage;
  }

  const auto log = make_logger(err);
  try {
    if (simulate->parsed()) return cmd_simulate(sim, out, *log);
    if (record->parsed()) return cmd_record(rec, out, *log);
    if (analyze->parsed()) return cmd_analyze(ana, out, *log);
    if (plot->parsed()) return cmd_plot(plt, out, *log);
    if (monitor->parsed()) return cmd_monitor(mon, out, *log);
    if (export_cmd->parsed()) return cmd_export(export_in, export_out, out, *log);
    if (serve_cmd->parsed()) {
      ServeOptions opts;
      opts.port = srv.port;
      opts.connections = srv.gloves;
      opts.out_dir = srv.out;
      opts.subject = srv.subject;
      opts.condition = srv.condition;
      opts.dominant_side = parse_side_flag(srv.dominant);
      opts.policy = policy_from(srv.threshold, srv.hysteresis, srv.debounce, "");
      opts.bell = !srv.no_bell;
      opts.device = load_device(srv.config);
      const auto result = serve(opts, out, err, [&](std::uint16_t port) {
        log->info("listening on 127.0.0.1:{} for {} glove(s)", port, srv.gloves);
      });
      for (const auto& m : result.manifests) print_manifest(out, m);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "gripstream: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    log->error("{}", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    log->error("{}", e.what());
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace gripstream::cli
