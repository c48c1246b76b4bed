#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "rdg/agent/repertoire.hpp"
#include "rdg/resolver/resolver.hpp"
#include "rdg/sim/run_sim.hpp"

namespace {

const rdg::WorldMap& world() {
  static const auto m = rdg::WorldMap::load(std::string(RDG_DATA_DIR) + "/world.geojson");
  return m;
}

const rdg::Repertoire& repertoire() {
  static const auto r = rdg::Repertoire::load(std::string(RDG_DATA_DIR) + "/repertoire.json");
  return r;
}

void BM_ParseResolve(benchmark::State& state) {
  const rdg::DescriptionParser parser(world());
  rdg::ResolutionContext ctx;
  ctx.map = &world();
  for (const auto& [id, c] : world().countries()) ctx.known.insert(id);
  const std::vector<std::string> lines = {
      "Look at the um Africa ... top three biggest countries uh on top of Africa",
      "The one to the furthest right ... is Egypt",
      "Go two down ... that is South Sudan",
  };
  for (auto _ : state) benchmark::DoNotOptimize(rdg::resolve_episode(parser, lines, ctx));
}
BENCHMARK(BM_ParseResolve);

void BM_FuzzyName(benchmark::State& state) {
  const rdg::DescriptionParser parser(world());
  for (auto _ : state) benchmark::DoNotOptimize(parser.parse("I think it is Cnada or maybe Tanzanai"));
}
BENCHMARK(BM_FuzzyName);

void BM_HitTest(benchmark::State& state) {
  double lon = -180.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(world().hit_test({lon, 10.0}));
    lon = lon >= 179.0 ? -180.0 : lon + 1.0;
  }
}
BENCHMARK(BM_HitTest);

void BM_SimGame(benchmark::State& state) {
  rdg::SimConfig c;
  c.director.strategy = state.range(0) ? rdg::Strategy::anchor_navigator : rdg::Strategy::perfect;
  c.matcher.strategy = c.director.strategy;
  c.director.latency_ms = 3000;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    c.seed = seed++;
    benchmark::DoNotOptimize(rdg::run_sim(world(), repertoire(), c));
  }
}
BENCHMARK(BM_SimGame)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  benchmark::Initialize(&argc, argv);
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
