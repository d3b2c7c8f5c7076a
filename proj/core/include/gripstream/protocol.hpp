#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "gripstream/model.hpp"

namespace gripstream {

// Wire layout, 36 bytes, all multi-byte fields little-endian:
//
//   off  size  field
//    0    1    sync 0xA5
//    1    1    glove 'L' (0x4C) or 'R' (0x52)
//    2    2    seq (wraps at 65536)
//    4    4    timestamp_ms since session start
//    8    2    battery_mv
//   10   24    voltages_mv S1..S12
//   34    2    CRC-16/CCITT-FALSE over bytes 1..33
inline constexpr std::size_t kFrameSize = 36;
inline constexpr std::uint8_t kSyncByte = 0xA5;
inline constexpr std::uint16_t kMaxVoltageMv = 3299;
inline constexpr std::uint16_t kMaxBatteryMv = 4300;

using FrameBytes = std::array<std::uint8_t, kFrameSize>;

// The CRC is a wire-only field: it is computed by encode_frame and verified by
// decode_frame, so a decoded Frame compares equal to the one encoded.
struct Frame {
  Side glove = Side::Left;
  std::uint16_t seq = 0;
  std::uint32_t timestamp_ms = 0;
  std::uint16_t battery_mv = 0;
  std::array<std::uint16_t, kSensorCount> voltages_mv{};

  bool operator==(const Frame&) const = default;
};

// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final xor.
std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data);

// Throws EncodingError when a voltage is >= 3300 mV or battery > 4300 mV.
FrameBytes encode_frame(const Frame& frame);
void encode_frame_into(const Frame& frame, std::vector<std::uint8_t>& out);

enum class DecodeError {
  SyncLoss,     // byte 0 is not the sync byte
  CrcMismatch,  // checksum does not match bytes 1..33
  BadLength,    // input is not exactly 36 bytes
  BadField,     // checksum valid but glove byte or a field is out of range
};

std::string_view to_string(DecodeError error);

using DecodeResult = std::variant<Frame, DecodeError>;

// Checks run in order: length, sync, CRC, fields.
DecodeResult decode_frame(std::span<const std::uint8_t> bytes);

enum class StreamEventKind {
  SyncLoss,        // garbage bytes skipped while hunting for a sync byte
  CrcMismatch,     // sync-framed 36 bytes with a bad checksum
  InvalidFrame,    // checksum valid but field out of range
  SequenceGap,     // one or more frames missing between two accepted frames
  DuplicateFrame,  // same seq and timestamp as an accepted frame; dropped
  StaleFrame,      // timestamp not after the last accepted frame; dropped
  ForeignGlove,    // glove byte differs from the one the stream is bound to
};

std::string_view to_string(StreamEventKind kind);

struct StreamEvent {
  StreamEventKind kind = StreamEventKind::SyncLoss;
  // Offset of the first byte concerned, counted from the start of the stream.
  std::uint64_t at_byte_offset = 0;
  // Number of missing frames for SequenceGap, skipped bytes for SyncLoss, else 0.
  std::uint32_t count = 0;

  bool operator==(const StreamEvent&) const = default;
};

struct ScanResult {
  std::vector<Frame> frames;
  // Stream offset of each frame's sync byte, parallel to `frames`.
  std::vector<std::uint64_t> frame_offsets;
  std::vector<StreamEvent> events;
};

// Incremental resynchronising decoder for one byte stream. Bytes may be fed in
// arbitrary chunks; a frame is emitted once all 36 of its bytes have arrived.
// After a checksum failure the scanner restarts its search one byte past the
// failed sync byte; the bytes skipped up to the next sync belong to that event.
class FrameScanner {
 public:
  ScanResult feed(std::span<const std::uint8_t> bytes);
  void feed(std::span<const std::uint8_t> bytes, ScanResult& out);

  // Reports a garbage run still open at end of stream. A SyncLoss event is
  // otherwise emitted when the run ends at the next sync byte.
  void finish(ScanResult& out);

  // Bytes held back waiting for the rest of a frame.
  std::span<const std::uint8_t> remainder() const {
    return std::span<const std::uint8_t>(buffer_).subspan(start_);
  }
  std::uint64_t bytes_consumed() const { return stream_offset_; }

 private:
  void compact();

  std::vector<std::uint8_t> buffer_;
  std::size_t start_ = 0;
  std::uint64_t stream_offset_ = 0;  // stream offset of buffer_[start_]
  std::uint64_t garbage_start_ = 0;
  std::uint32_t garbage_count_ = 0;
  // Bytes skipped right after a checksum failure are part of that event.
  bool skipping_after_crc_ = false;
};

struct StreamScan {
  std::vector<Frame> frames;
  std::vector<StreamEvent> events;
  std::vector<std::uint8_t> remainder;
};

// One-shot form of FrameScanner over a complete buffer.
StreamScan scan_stream(std::span<const std::uint8_t> buffer);

// Frames lost between two consecutive sequence numbers, modulo 2^16.
// 0 means `next` directly follows `previous` (65535 -> 0 included).
constexpr std::uint16_t missing_between(std::uint16_t previous, std::uint16_t next) {
  return static_cast<std::uint16_t>(static_cast<std::uint16_t>(next - previous) - 1U);
}

// Link load for `gloves` streams at the configured cadence, rounded up to a
// whole bit per second. Throws ConfigError for 0 gloves or a non-positive period.
std::uint64_t required_bandwidth(unsigned gloves, const GloveConfig& cfg);

inline constexpr std::uint64_t kLinkBudgetBps = 115'200;

}  // namespace gripstream
