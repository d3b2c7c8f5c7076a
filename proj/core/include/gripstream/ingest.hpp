#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gripstream/model.hpp"
#include "gripstream/protocol.hpp"

namespace gripstream {

struct Sample {
  std::uint32_t timestamp_ms = 0;
  std::uint16_t voltage_mv = 0;

  bool operator==(const Sample&) const = default;
};

struct BatteryPoint {
  std::uint32_t timestamp_ms = 0;
  std::uint16_t battery_mv = 0;

  bool operator==(const BatteryPoint&) const = default;
};

struct SessionMetadata {
  std::string subject = "anon";
  Hand hand;
  std::string condition = "baseline";
  std::string started_at;

  bool operator==(const SessionMetadata&) const = default;
};

// One glove's recording. Per-sensor timestamps are strictly increasing.
struct Session {
  SessionMetadata metadata;
  std::array<std::vector<Sample>, kSensorCount> samples;
  std::vector<BatteryPoint> battery_trace;
  std::vector<StreamEvent> gaps;

  std::size_t total_samples() const;
  bool operator==(const Session&) const = default;
};

// Throws StructureError when a per-sensor series is not strictly increasing.
void validate(const Session& session);

struct IngestOptions {
  // When unset, the stream binds to the glove of its first valid frame.
  std::optional<Side> expect_glove;
  // Decides metadata.hand.dominance once the glove side is known.
  Side dominant_side = Side::Right;
};

struct FeedResult {
  std::size_t samples_appended = 0;
  std::vector<Frame> accepted;
  std::vector<StreamEvent> events;
};

// Decoder state for one glove connection. Not thread-safe; one per stream.
//
// Accepted frames append one sample per sensor and one battery point. A frame
// whose timestamp does not advance is dropped: DuplicateFrame when seq and
// timestamp both match the last accepted frame (first occurrence wins),
// StaleFrame otherwise. A forward jump in seq records a SequenceGap.
class Ingestor {
 public:
  explicit Ingestor(SessionMetadata metadata, IngestOptions options = {});

  FeedResult feed(std::span<const std::uint8_t> bytes);
  // Call at end of stream to flush a pending sync-loss report.
  FeedResult finish();

  const Session& session() const { return session_; }
  Session take_session() { return std::move(session_); }
  std::size_t frames_accepted() const { return frames_accepted_; }
  std::optional<Side> bound_glove() const { return bound_; }

 private:
  void accept(const Frame& frame, std::uint64_t offset, FeedResult& out);

  Session session_;
  IngestOptions options_;
  FrameScanner scanner_;
  std::optional<Side> bound_;
  std::optional<Frame> last_;
  std::size_t frames_accepted_ = 0;
};

struct ManifestEntry {
  std::filesystem::path path;
  std::size_t lines = 0;
};

struct FileManifest {
  std::filesystem::path metadata;
  std::vector<ManifestEntry> files;  // metadata file first, then S1..S12
};

// "<subject>_<side>_<condition>" as used in file names.
std::string session_stem(const SessionMetadata& metadata);
std::filesystem::path sensor_file_name(const SessionMetadata& metadata, SensorId sensor);

// Writes 12 TSV files "<stem>_S<k>.tsv" ("timestamp_ms\tvoltage_mv" per line)
// and "<stem>.meta". Creates the directory if needed. On failure throws
// IoError listing the files already written.
FileManifest record_session(const Session& session, const std::filesystem::path& directory);

// Accepts a .meta file, or a directory that holds exactly one session.
Session load_session(const std::filesystem::path& path);
// Every session in a directory, ordered by metadata file name.
std::vector<Session> load_sessions(const std::filesystem::path& directory);

struct SensorSummary {
  std::size_t count = 0;
  std::optional<std::uint16_t> min_mv;
  std::optional<std::uint16_t> max_mv;
};

struct SessionSummary {
  std::array<SensorSummary, kSensorCount> sensors{};
  std::size_t total_samples = 0;
  std::uint32_t duration_ms = 0;
  std::size_t gap_count = 0;
  std::uint64_t missing_frames = 0;
  std::optional<std::uint16_t> min_mv;
  std::optional<std::uint16_t> max_mv;
  std::optional<std::uint16_t> final_battery_mv;
};

SessionSummary session_summary(const Session& session);

// Header "timestamp_ms,glove,sensor,voltage_mv"; rows per session in time
// then sensor order.
void write_combined_csv(std::ostream& out, std::span<const Session> sessions);

}  // namespace gripstream
