#include <benchmark/benchmark.h>

#include "gripstream/alerting.hpp"
#include "gripstream/device_sim.hpp"
#include "gripstream/ingest.hpp"
#include "gripstream/transport.hpp"

namespace gs = gripstream;

namespace {

const gs::GloveConfig kCfg{};
const gs::Calibration kCal{};

gs::SessionPlan one_glove_plan(double duration_s) {
  gs::SessionPlan plan;
  plan.subject = "bench";
  plan.condition = "soft";
  plan.seed = 11;
  plan.duration_s = duration_s;
  gs::GlovePlan g;
  g.hand = {gs::Side::Left, gs::Dominance::Dominant};
  g.profile = gs::make_preset("precision-lift", "soft");
  plan.gloves.push_back(g);
  return plan;
}

void BM_Synthesize(benchmark::State& state) {
  const auto plan = one_glove_plan(static_cast<double>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gs::synthesize_session(plan, kCfg, kCal));
  }
}
BENCHMARK(BM_Synthesize)->Arg(10)->Arg(600);

void BM_Ingest(benchmark::State& state) {
  const auto traj = gs::synthesize_session(one_glove_plan(static_cast<double>(state.range(0))), kCfg, kCal);
  const auto frames = gs::emit_frames(traj[0], kCal, kCfg);
  gs::MemorySink sink;
  gs::stream_session(frames, sink, gs::Pace::AsFastAsPossible);
  for (auto _ : state) {
    gs::Ingestor ing({"bench", {}, "soft", "bench"});
    ing.feed(sink.bytes());
    ing.finish();
    benchmark::DoNotOptimize(ing.take_session());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(frames.size()));
}
BENCHMARK(BM_Ingest)->Arg(10)->Arg(600);

void BM_MonitorSession(benchmark::State& state) {
  const auto traj = gs::synthesize_session(one_glove_plan(60), kCfg, kCal);
  const auto frames = gs::emit_frames(traj[0], kCal, kCfg);
  gs::MemorySink sink;
  gs::stream_session(frames, sink, gs::Pace::AsFastAsPossible);
  gs::Ingestor ing({"bench", {}, "soft", "bench"});
  ing.feed(sink.bytes());
  ing.finish();
  const auto session = ing.take_session();
  gs::AlertPolicy policy;
  policy.threshold_n = 2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gs::monitor_session(session, policy, kCal, kCfg));
  }
}
BENCHMARK(BM_MonitorSession);

}  // namespace
