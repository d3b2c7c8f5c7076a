#include "gripstream/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include "gripstream/error.hpp"
#include "gripstream/key_value.hpp"

namespace gripstream {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kFormatTag = "gripstream-session-1";

void check_token(const std::string& value, const char* what) {
  if (value.empty()) throw StructureError(std::string(what) + " must not be empty");
  for (char c : value) {
    if (c == '/' || c == '\\' || c == '\t' || c == '\n' || c == ' ' || c == '\r') {
      throw StructureError(std::string(what) + " '" + value +
                           "' contains whitespace or a path separator");
    }
  }
}

Dominance dominance_for(Side side, Side dominant_side) {
  return side == dominant_side ? Dominance::Dominant : Dominance::NonDominant;
}

// "a b" pairs stored under battery.<i> and gap.<i>.
std::pair<std::uint64_t, std::uint64_t> parse_pair(const KeyValueFile& file,
                                                   const KeyValueFile::Entry& e) {
  const auto parts = split(e.value, ' ');
  if (parts.size() != 2) throw ParseError(file.source(), e.line, "expected two integers");
  const auto a = parse_uint(parts[0]);
  const auto b = parse_uint(parts[1]);
  if (!a || !b) throw ParseError(file.source(), e.line, "expected two integers");
  return {*a, *b};
}

std::vector<Sample> read_sensor_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw StructureError("missing sensor file '" + path.string() + "'");
  std::vector<Sample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(path.string(), line_no, "expected 'timestamp_ms<TAB>voltage_mv'");
    }
    const auto ts = parse_uint(std::string_view{line}.substr(0, tab));
    const auto mv = parse_uint(std::string_view{line}.substr(tab + 1));
    if (!ts || *ts > 0xFFFFFFFFULL) {
      throw ParseError(path.string(), line_no, "invalid timestamp '" + line.substr(0, tab) + "'");
    }
    if (!mv || *mv > kMaxVoltageMv) {
      throw ParseError(path.string(), line_no, "invalid voltage '" + line.substr(tab + 1) + "'");
    }
    if (!samples.empty() && *ts <= samples.back().timestamp_ms) {
      throw StructureError(path.string() + ":" + std::to_string(line_no) +
                           ": timestamps are not strictly increasing");
    }
    samples.push_back({static_cast<std::uint32_t>(*ts), static_cast<std::uint16_t>(*mv)});
  }
  return samples;
}

}  // namespace

std::size_t Session::total_samples() const {
  std::size_t n = 0;
  for (const auto& s : samples) n += s.size();
  return n;
}

void validate(const Session& session) {
  for (std::size_t k = 0; k < kSensorCount; ++k) {
    const auto& series = session.samples[k];
    for (std::size_t i = 1; i < series.size(); ++i) {
      if (series[i].timestamp_ms <= series[i - 1].timestamp_ms) {
        throw StructureError("S" + std::to_string(k + 1) + " timestamps not strictly increasing at index " +
                             std::to_string(i));
      }
    }
  }
}

Ingestor::Ingestor(SessionMetadata metadata, IngestOptions options)
    : options_(options), bound_(options.expect_glove) {
  session_.metadata = std::move(metadata);
  if (bound_) {
    session_.metadata.hand = Hand{*bound_, dominance_for(*bound_, options_.dominant_side)};
  }
}

FeedResult Ingestor::feed(std::span<const std::uint8_t> bytes) {
  ScanResult scan;
  scanner_.feed(bytes, scan);
  FeedResult out;
  // Scanner events and frames interleave by offset; merge so events stay in stream order.
  std::size_t e = 0;
  for (std::size_t i = 0; i < scan.frames.size(); ++i) {
    while (e < scan.events.size() && scan.events[e].at_byte_offset < scan.frame_offsets[i]) {
      out.events.push_back(scan.events[e++]);
    }
    accept(scan.frames[i], scan.frame_offsets[i], out);
  }
  while (e < scan.events.size()) out.events.push_back(scan.events[e++]);
  return out;
}

FeedResult Ingestor::finish() {
  ScanResult scan;
  scanner_.finish(scan);
  FeedResult out;
  out.events = std::move(scan.events);
  return out;
}

void Ingestor::accept(const Frame& frame, std::uint64_t offset, FeedResult& out) {
  if (!bound_) {
    bound_ = frame.glove;
    session_.metadata.hand = Hand{frame.glove, dominance_for(frame.glove, options_.dominant_side)};
  }
  if (frame.glove != *bound_) {
    out.events.push_back({StreamEventKind::ForeignGlove, offset, 0});
    return;
  }
  if (last_ && frame.timestamp_ms <= last_->timestamp_ms) {
    const bool duplicate = frame.seq == last_->seq && frame.timestamp_ms == last_->timestamp_ms;
    out.events.push_back(
        {duplicate ? StreamEventKind::DuplicateFrame : StreamEventKind::StaleFrame, offset, 0});
    return;
  }
  if (last_) {
    const auto missing = missing_between(last_->seq, frame.seq);
    // 0xFFFF means the seq did not advance although time did; not a gap.
    if (missing != 0 && missing != 0xFFFF) {
      StreamEvent gap{StreamEventKind::SequenceGap, offset, missing};
      out.events.push_back(gap);
      session_.gaps.push_back(gap);
    }
  }
  for (std::size_t s = 0; s < kSensorCount; ++s) {
    session_.samples[s].push_back({frame.timestamp_ms, frame.voltages_mv[s]});
  }
  session_.battery_trace.push_back({frame.timestamp_ms, frame.battery_mv});
  out.samples_appended += kSensorCount;
  out.accepted.push_back(frame);
  last_ = frame;
  ++frames_accepted_;
}

std::string session_stem(const SessionMetadata& metadata) {
  return metadata.subject + "_" + std::string{to_string(metadata.hand.side)} + "_" +
         metadata.condition;
}

fs::path sensor_file_name(const SessionMetadata& metadata, SensorId sensor) {
  return session_stem(metadata) + "_" + sensor.label() + ".tsv";
}

FileManifest record_session(const Session& session, const fs::path& directory) {
  check_token(session.metadata.subject, "subject");
  check_token(session.metadata.condition, "condition");
  for (char c : session.metadata.started_at) {
    if (c == '\n' || c == '\r') throw StructureError("started_at must be a single line");
  }

  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw IoError("cannot create '" + directory.string() + "': " + ec.message());

  FileManifest manifest;
  std::vector<std::string> completed;
  const auto fail = [&](const fs::path& p) {
    throw IoError("failed writing '" + p.string() + "'", completed);
  };

  manifest.metadata = directory / (session_stem(session.metadata) + ".meta");
  {
    std::ofstream out(manifest.metadata);
    if (!out) fail(manifest.metadata);
    std::size_t lines = 0;
    const auto put = [&](const std::string& key, const std::string& value) {
      out << key << " = " << value << '\n';
      ++lines;
    };
    put("format", std::string{kFormatTag});
    put("subject", session.metadata.subject);
    put("hand_side", std::string{to_string(session.metadata.hand.side)});
    put("hand_dominance", std::string{to_string(session.metadata.hand.dominance)});
    put("condition", session.metadata.condition);
    put("started_at", session.metadata.started_at);
    put("frames", std::to_string(session.battery_trace.size()));
    for (std::size_t i = 0; i < session.battery_trace.size(); ++i) {
      const auto& b = session.battery_trace[i];
      put("battery." + std::to_string(i),
          std::to_string(b.timestamp_ms) + " " + std::to_string(b.battery_mv));
    }
    for (std::size_t i = 0; i < session.gaps.size(); ++i) {
      const auto& g = session.gaps[i];
      put("gap." + std::to_string(i), std::to_string(g.at_byte_offset) + " " + std::to_string(g.count));
    }
    out.close();
    if (!out) fail(manifest.metadata);
    manifest.files.push_back({manifest.metadata, lines});
    completed.push_back(manifest.metadata.string());
  }

  for (std::size_t k = 0; k < kSensorCount; ++k) {
    const auto path = directory / sensor_file_name(session.metadata, SensorId::from_slot(k));
    std::ofstream out(path);
    if (!out) fail(path);
    for (const auto& s : session.samples[k]) out << s.timestamp_ms << '\t' << s.voltage_mv << '\n';
    out.close();
    if (!out) fail(path);
    manifest.files.push_back({path, session.samples[k].size()});
    completed.push_back(path.string());
  }
  return manifest;
}

Session load_session(const fs::path& path) {
  fs::path meta_path = path;
  if (fs::is_directory(path)) {
    std::vector<fs::path> metas;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.path().extension() == ".meta") metas.push_back(entry.path());
    }
    if (metas.size() != 1) {
      throw StructureError("'" + path.string() + "' holds " + std::to_string(metas.size()) +
                           " sessions; pass a .meta file");
    }
    meta_path = metas.front();
  }
  if (!fs::exists(meta_path)) throw StructureError("missing metadata file '" + meta_path.string() + "'");

  const auto file = KeyValueFile::load(meta_path.string());
  file.reject_unknown({"format", "subject", "hand_side", "hand_dominance", "condition", "started_at",
                       "frames", "battery.", "gap."});
  if (file.get_string("format") != std::string{kFormatTag}) {
    throw StructureError("'" + meta_path.string() + "' is not a gripstream session file");
  }
  const auto require = [&](const char* key) {
    auto v = file.get_string(key);
    if (!v) throw StructureError("'" + meta_path.string() + "' lacks key '" + key + "'");
    return *v;
  };

  Session session;
  try {
    session.metadata.subject = require("subject");
    session.metadata.hand.side = parse_side(require("hand_side"));
    session.metadata.hand.dominance = parse_dominance(require("hand_dominance"));
  } catch (const ConfigError& err) {
    throw StructureError("'" + meta_path.string() + "': " + err.what());
  }
  session.metadata.condition = require("condition");
  session.metadata.started_at = file.get_string("started_at").value_or("");
  const auto frames = file.get_uint("frames").value_or(0);

  for (const auto& e : file.entries()) {
    if (e.key.starts_with("battery.")) {
      const auto [ts, mv] = parse_pair(file, e);
      if (ts > 0xFFFFFFFFULL || mv > kMaxBatteryMv) {
        throw ParseError(file.source(), e.line, "battery point out of range");
      }
      session.battery_trace.push_back({static_cast<std::uint32_t>(ts), static_cast<std::uint16_t>(mv)});
    } else if (e.key.starts_with("gap.")) {
      const auto [offset, missing] = parse_pair(file, e);
      if (missing == 0 || missing > 0xFFFF) throw ParseError(file.source(), e.line, "gap count out of range");
      session.gaps.push_back({StreamEventKind::SequenceGap, offset, static_cast<std::uint32_t>(missing)});
    }
  }
  if (session.battery_trace.size() != frames) {
    throw StructureError("'" + meta_path.string() + "' declares " + std::to_string(frames) +
                         " frames but lists " + std::to_string(session.battery_trace.size()) +
                         " battery points");
  }

  const auto dir = meta_path.parent_path();
  for (std::size_t k = 0; k < kSensorCount; ++k) {
    session.samples[k] = read_sensor_file(dir / sensor_file_name(session.metadata, SensorId::from_slot(k)));
  }
  return session;
}

std::vector<Session> load_sessions(const fs::path& directory) {
  if (!fs::is_directory(directory)) {
    throw StructureError("'" + directory.string() + "' is not a directory");
  }
  std::vector<fs::path> metas;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.path().extension() == ".meta") metas.push_back(entry.path());
  }
  std::sort(metas.begin(), metas.end());
  std::vector<Session> out;
  out.reserve(metas.size());
  for (const auto& m : metas) out.push_back(load_session(m));
  return out;
}

SessionSummary session_summary(const Session& session) {
  SessionSummary out;
  std::optional<std::uint32_t> first_ts;
  std::optional<std::uint32_t> last_ts;
  for (std::size_t k = 0; k < kSensorCount; ++k) {
    const auto& series = session.samples[k];
    auto& s = out.sensors[k];
    s.count = series.size();
    out.total_samples += series.size();
    if (series.empty()) continue;
    const auto [lo, hi] = std::minmax_element(series.begin(), series.end(),
                                              [](const Sample& a, const Sample& b) {
                                                return a.voltage_mv < b.voltage_mv;
                                              });
    s.min_mv = lo->voltage_mv;
    s.max_mv = hi->voltage_mv;
    out.min_mv = out.min_mv ? std::min(*out.min_mv, *s.min_mv) : *s.min_mv;
    out.max_mv = out.max_mv ? std::max(*out.max_mv, *s.max_mv) : *s.max_mv;
    first_ts = first_ts ? std::min(*first_ts, series.front().timestamp_ms) : series.front().timestamp_ms;
    last_ts = last_ts ? std::max(*last_ts, series.back().timestamp_ms) : series.back().timestamp_ms;
  }
  if (first_ts) out.duration_ms = *last_ts - *first_ts;
  out.gap_count = session.gaps.size();
  for (const auto& g : session.gaps) out.missing_frames += g.count;
  if (!session.battery_trace.empty()) out.final_battery_mv = session.battery_trace.back().battery_mv;
  return out;
}

void write_combined_csv(std::ostream& out, std::span<const Session> sessions) {
  out << "timestamp_ms,glove,sensor,voltage_mv\n";
  struct Row {
    std::uint32_t ts;
    std::size_t slot;
    std::uint16_t mv;
  };
  for (const auto& session : sessions) {
    std::vector<Row> rows;
    rows.reserve(session.total_samples());
    for (std::size_t k = 0; k < kSensorCount; ++k) {
      for (const auto& s : session.samples[k]) rows.push_back({s.timestamp_ms, k, s.voltage_mv});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      return a.ts != b.ts ? a.ts < b.ts : a.slot < b.slot;
    });
    const char glove = side_letter(session.metadata.hand.side);
    for (const auto& r : rows) {
      out << r.ts << ',' << glove << ",S" << (r.slot + 1) << ',' << r.mv << '\n';
    }
  }
}

}  // namespace gripstream
