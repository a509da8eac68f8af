#include <benchmark/benchmark.h>

#include <string>

#include "ksync/conflict_graph.hpp"
#include "ksync/membership.hpp"
#include "ksync/testkit/fixtures.hpp"
#include "ksync/testkit/generators.hpp"

using namespace ksync;

namespace {

std::string fixture(const std::string& rel) { return std::string(KSYNC_FIXTURE_DIR) + "/" + rel; }

// A batch of random MSCs with up to `msgs` messages over 4 processes.
std::vector<Msc> batch(int msgs) {
  std::vector<Msc> out;
  for (std::uint64_t seed = 1; seed <= 64; ++seed) out.push_back(testkit::gen_msc(seed, msgs, 4));
  return out;
}

void BM_Closure(benchmark::State& state) {
  auto mscs = batch(static_cast<int>(state.range(0)));
  std::vector<ConflictGraph> graphs;
  for (const auto& m : mscs) graphs.push_back(build(m));
  for (auto _ : state) {
    for (const auto& g : graphs) benchmark::DoNotOptimize(extend(g));
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(graphs.size()));
}
BENCHMARK(BM_Closure)->Arg(6)->Arg(16)->Arg(48);

void BM_CausalOracle(benchmark::State& state) {
  auto mscs = batch(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    for (const auto& m : mscs) benchmark::DoNotOptimize(causal_delivery_oracle(m, Comm::Mailbox));
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(mscs.size()));
}
BENCHMARK(BM_CausalOracle)->Arg(4)->Arg(6)->Arg(8);

void BM_SyncOracleVersusGraph(benchmark::State& state) {
  auto mscs = batch(6);
  bool graph = state.range(0) == 1;
  for (auto _ : state) {
    for (const auto& m : mscs) {
      if (!causal_delivery_by_graph(m)) continue;
      if (graph) {
        benchmark::DoNotOptimize(k_synchronous_by_graph(m, 2));
      } else {
        benchmark::DoNotOptimize(k_synchronous_oracle(m, 2));
      }
    }
  }
}
BENCHMARK(BM_SyncOracleVersusGraph)->Arg(0)->Arg(1);

void BM_Explore(benchmark::State& state) {
  System sys = testkit::load_system(fixture("systems/fig2a.json"));
  int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(explore(sys, k));
}
BENCHMARK(BM_Explore)->DenseRange(1, 3);

void BM_Decide(benchmark::State& state) {
  System sys = testkit::load_system(fixture(state.range(0) ? "systems/fig2a_p2p.json"
                                                          : "systems/fig2a.json"));
  for (auto _ : state) benchmark::DoNotOptimize(decide_k_synchronizability(sys, 2));
}
BENCHMARK(BM_Decide)->Arg(0)->Arg(1);

void BM_DecideRandom(benchmark::State& state) {
  std::vector<System> systems;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) systems.push_back(testkit::gen_system(seed, 3, 4));
  for (auto _ : state) {
    for (const auto& s : systems) benchmark::DoNotOptimize(decide_k_synchronizability(s, 2));
  }
}
BENCHMARK(BM_DecideRandom);

}  // namespace

BENCHMARK_MAIN();
