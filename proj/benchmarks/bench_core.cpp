#include <benchmark/benchmark.h>

#include "ncbc/energy.hpp"
#include "ncbc/inference.hpp"
#include "ncbc/lattice_graph.hpp"
#include "ncbc/metrics.hpp"
#include "ncbc/phantom.hpp"

namespace {

using namespace ncbc;

Phantom phantom(std::size_t n) {
  const LatticeDims dims{n, n};
  const Image clean = make_test_card(dims);
  return make_synthetic_phantom(clean, default_bias_params(dims), {0.05 * clean.max(), 1});
}

void BM_BuildGraph(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto g = build_stochastic_graph({n, n}, CliqueConfig{}, seed++);
    benchmark::DoNotOptimize(g.edge_count());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_BuildGraph)->Arg(64)->Arg(128)->Arg(256);

void BM_Energy(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ph = phantom(n);
  const auto g = build_stochastic_graph(ph.observed.dims(), CliqueConfig{}, 0);
  const EnergyModel model(ph.observed, g, EnergyWeights{});
  for (auto _ : state) benchmark::DoNotOptimize(model.total(ph.truth, ph.true_bias));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_Energy)->Arg(64)->Arg(256);

void BM_Gradients(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto workers = static_cast<unsigned>(state.range(1));
  const auto ph = phantom(n);
  const auto g = build_stochastic_graph(ph.observed.dims(), CliqueConfig{}, 0);
  const EnergyModel model(ph.observed, g, EnergyWeights{}, workers);
  for (auto _ : state) {
    auto gm = model.grad_m(ph.truth, ph.true_bias);
    auto gb = model.grad_b(ph.truth, ph.true_bias);
    benchmark::DoNotOptimize(gm[0] + gb[0]);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_Gradients)->Args({64, 1})->Args({256, 1})->Args({256, 4});

void BM_Reconstruct(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ph = phantom(n);
  NcbcConfig cfg;
  cfg.max_iters = 100;
  for (auto _ : state) {
    auto r = ncbc_reconstruct(ph.observed, cfg);
    benchmark::DoNotOptimize(r.latent[0]);
  }
}
BENCHMARK(BM_Reconstruct)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_ProbabilityOfError(benchmark::State& state) {
  const auto ph = phantom(64);
  const auto rois = test_card_rois(ph.observed.dims());
  const auto p = roi_values(ph.observed, rois[0]);
  const auto b = roi_values(ph.observed, rois[1]);
  for (auto _ : state) benchmark::DoNotOptimize(probability_of_error(p, b));
}
BENCHMARK(BM_ProbabilityOfError);

}  // namespace

BENCHMARK_MAIN();
