#include <benchmark/benchmark.h>

#include <random>

#include "gripstream/protocol.hpp"

namespace gs = gripstream;

namespace {

gs::Frame sample_frame(std::uint16_t seq) {
  gs::Frame f;
  f.glove = gs::Side::Left;
  f.seq = seq;
  f.timestamp_ms = 20u * seq;
  f.battery_mv = 4100;
  for (std::size_t k = 0; k < f.voltages_mv.size(); ++k) f.voltages_mv[k] = static_cast<std::uint16_t>(100 * k + seq % 97);
  return f;
}

std::vector<std::uint8_t> frame_stream(std::size_t frames, bool with_noise) {
  std::vector<std::uint8_t> out;
  std::mt19937 rng(3);
  for (std::size_t i = 0; i < frames; ++i) {
    gs::encode_frame_into(sample_frame(static_cast<std::uint16_t>(i)), out);
    if (with_noise && i % 50 == 0) out.push_back(static_cast<std::uint8_t>(rng()));
  }
  return out;
}

void BM_Crc16(benchmark::State& state) {
  const auto bytes = gs::encode_frame(sample_frame(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gs::crc16_ccitt_false(std::span(bytes).subspan(1, 33)));
  }
  state.SetBytesProcessed(state.iterations() * 33);
}
BENCHMARK(BM_Crc16);

void BM_Encode(benchmark::State& state) {
  const auto frame = sample_frame(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gs::encode_frame(frame));
  }
}
BENCHMARK(BM_Encode);

void BM_Decode(benchmark::State& state) {
  const auto bytes = gs::encode_frame(sample_frame(7));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gs::decode_frame(bytes));
  }
}
BENCHMARK(BM_Decode);

void BM_ScanStream(benchmark::State& state) {
  const auto bytes = frame_stream(static_cast<std::size_t>(state.range(0)), state.range(1) != 0);
  for (auto _ : state) {
    gs::FrameScanner scanner;
    gs::ScanResult result;
    for (std::size_t off = 0; off < bytes.size(); off += 4096) {
      scanner.feed(std::span(bytes).subspan(off, std::min<std::size_t>(4096, bytes.size() - off)), result);
    }
    scanner.finish(result);
    benchmark::DoNotOptimize(result);
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(bytes.size()));
}
BENCHMARK(BM_ScanStream)->Args({500, 0})->Args({500, 1})->Args({30000, 0});

}  // namespace
