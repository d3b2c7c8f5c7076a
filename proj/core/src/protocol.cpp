#include "gripstream/protocol.hpp"

#include <algorithm>

#include "gripstream/error.hpp"

namespace gripstream {

namespace {

constexpr std::size_t kCrcOffset = 34;

void put_u16(std::uint8_t* p, std::uint16_t v) {
  p[0] = static_cast<std::uint8_t>(v & 0xFFU);
  p[1] = static_cast<std::uint8_t>(v >> 8);
}

void put_u32(std::uint8_t* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>((v >> (8 * i)) & 0xFFU);
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

bool valid_glove_byte(std::uint8_t b) {
  return b == static_cast<std::uint8_t>(Side::Left) || b == static_cast<std::uint8_t>(Side::Right);
}

constexpr std::array<std::uint16_t, 256> make_crc_table() {
  std::array<std::uint16_t, 256> table{};
  for (unsigned i = 0; i < 256; ++i) {
    auto crc = static_cast<std::uint16_t>(i << 8);
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 0x8000U) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021U)
                            : static_cast<std::uint16_t>(crc << 1);
    }
    table[i] = crc;
  }
  return table;
}

constexpr auto kCrcTable = make_crc_table();

}  // namespace

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data) {
  std::uint16_t crc = 0xFFFF;
  for (auto b : data) {
    crc = static_cast<std::uint16_t>((crc << 8) ^ kCrcTable[((crc >> 8) ^ b) & 0xFFU]);
  }
  return crc;
}

FrameBytes encode_frame(const Frame& frame) {
  if (!valid_glove_byte(static_cast<std::uint8_t>(frame.glove))) {
    throw EncodingError("invalid glove id");
  }
  if (frame.battery_mv > kMaxBatteryMv) {
    throw EncodingError("battery " + std::to_string(frame.battery_mv) + " mV exceeds 4300 mV");
  }
  FrameBytes out{};
  out[0] = kSyncByte;
  out[1] = static_cast<std::uint8_t>(frame.glove);
  put_u16(&out[2], frame.seq);
  put_u32(&out[4], frame.timestamp_ms);
  put_u16(&out[8], frame.battery_mv);
  for (std::size_t i = 0; i < kSensorCount; ++i) {
    const auto mv = frame.voltages_mv[i];
    if (mv > kMaxVoltageMv) {
      throw EncodingError("S" + std::to_string(i + 1) + " voltage " + std::to_string(mv) +
                          " mV is not below 3300 mV");
    }
    put_u16(&out[10 + 2 * i], mv);
  }
  put_u16(&out[kCrcOffset],
          crc16_ccitt_false(std::span<const std::uint8_t>(out).subspan(1, kCrcOffset - 1)));
  return out;
}

void encode_frame_into(const Frame& frame, std::vector<std::uint8_t>& out) {
  const auto bytes = encode_frame(frame);
  out.insert(out.end(), bytes.begin(), bytes.end());
}

std::string_view to_string(DecodeError error) {
  switch (error) {
    case DecodeError::SyncLoss: return "sync loss";
    case DecodeError::CrcMismatch: return "CRC mismatch";
    case DecodeError::BadLength: return "bad length";
    case DecodeError::BadField: return "bad field";
  }
  return "?";
}

DecodeResult decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kFrameSize) return DecodeError::BadLength;
  if (bytes[0] != kSyncByte) return DecodeError::SyncLoss;
  const auto expected = get_u16(&bytes[kCrcOffset]);
  if (crc16_ccitt_false(bytes.subspan(1, kCrcOffset - 1)) != expected) {
    return DecodeError::CrcMismatch;
  }
  if (!valid_glove_byte(bytes[1])) return DecodeError::BadField;

  Frame f;
  f.glove = static_cast<Side>(bytes[1]);
  f.seq = get_u16(&bytes[2]);
  f.timestamp_ms = get_u32(&bytes[4]);
  f.battery_mv = get_u16(&bytes[8]);
  if (f.battery_mv > kMaxBatteryMv) return DecodeError::BadField;
  for (std::size_t i = 0; i < kSensorCount; ++i) {
    f.voltages_mv[i] = get_u16(&bytes[10 + 2 * i]);
    if (f.voltages_mv[i] > kMaxVoltageMv) return DecodeError::BadField;
  }
  return f;
}

std::string_view to_string(StreamEventKind kind) {
  switch (kind) {
    case StreamEventKind::SyncLoss: return "sync_loss";
    case StreamEventKind::CrcMismatch: return "crc_mismatch";
    case StreamEventKind::InvalidFrame: return "invalid_frame";
    case StreamEventKind::SequenceGap: return "sequence_gap";
    case StreamEventKind::DuplicateFrame: return "duplicate_frame";
    case StreamEventKind::StaleFrame: return "stale_frame";
    case StreamEventKind::ForeignGlove: return "foreign_glove";
  }
  return "?";
}

ScanResult FrameScanner::feed(std::span<const std::uint8_t> bytes) {
  ScanResult out;
  feed(bytes, out);
  return out;
}

void FrameScanner::feed(std::span<const std::uint8_t> bytes, ScanResult& out) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());

  while (start_ < buffer_.size()) {
    if (buffer_[start_] != kSyncByte) {
      if (!skipping_after_crc_) {
        if (garbage_count_ == 0) garbage_start_ = stream_offset_;
        ++garbage_count_;
      }
      ++start_;
      ++stream_offset_;
      continue;
    }

    // At a sync byte: any garbage run ends here.
    if (garbage_count_ > 0) {
      out.events.push_back({StreamEventKind::SyncLoss, garbage_start_, garbage_count_});
      garbage_count_ = 0;
    }
    skipping_after_crc_ = false;

    if (buffer_.size() - start_ < kFrameSize) break;

    const auto candidate = std::span<const std::uint8_t>(buffer_).subspan(start_, kFrameSize);
    const auto result = decode_frame(candidate);
    if (const auto* frame = std::get_if<Frame>(&result)) {
      out.frames.push_back(*frame);
      out.frame_offsets.push_back(stream_offset_);
      start_ += kFrameSize;
      stream_offset_ += kFrameSize;
    } else if (std::get<DecodeError>(result) == DecodeError::BadField) {
      out.events.push_back({StreamEventKind::InvalidFrame, stream_offset_, 0});
      start_ += kFrameSize;
      stream_offset_ += kFrameSize;
    } else {
      out.events.push_back({StreamEventKind::CrcMismatch, stream_offset_, 0});
      skipping_after_crc_ = true;
      ++start_;
      ++stream_offset_;
    }
  }
  compact();
}

void FrameScanner::finish(ScanResult& out) {
  if (garbage_count_ > 0) {
    out.events.push_back({StreamEventKind::SyncLoss, garbage_start_, garbage_count_});
    garbage_count_ = 0;
  }
}

void FrameScanner::compact() {
  if (start_ == 0) return;
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(start_));
  start_ = 0;
}

StreamScan scan_stream(std::span<const std::uint8_t> buffer) {
  FrameScanner scanner;
  ScanResult result;
  scanner.feed(buffer, result);
  scanner.finish(result);
  const auto rest = scanner.remainder();
  return StreamScan{std::move(result.frames), std::move(result.events),
                    std::vector<std::uint8_t>(rest.begin(), rest.end())};
}

std::uint64_t required_bandwidth(unsigned gloves, const GloveConfig& cfg) {
  if (gloves == 0) throw ConfigError("at least one glove is required");
  const auto period = cfg.sample_period.count();
  if (period <= 0) throw ConfigError("sample period must be > 0 ms");
  const std::uint64_t bits_per_ms_scaled = std::uint64_t{gloves} * kFrameSize * 8U * 1000U;
  const auto p = static_cast<std::uint64_t>(period);
  return (bits_per_ms_scaled + p - 1) / p;
}

}  // namespace gripstream
