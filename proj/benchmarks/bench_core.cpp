#include <benchmark/benchmark.h>

#include "lvlingam/cumulants.hpp"
#include "lvlingam/graph.hpp"
#include "lvlingam/iv.hpp"
#include "lvlingam/proxy.hpp"
#include "lvlingam/rootfind.hpp"
#include "lvlingam/synth.hpp"

using namespace lvlingam;

namespace {

WeightedModel model_for(const char* name) {
  return draw_model(preset(name).dag, NoiseFamily::kGamma, 7);
}

void BM_SampleData(benchmark::State& state) {
  const WeightedModel m = model_for("G1");
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_data(m, n, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleData)->Arg(10000)->Arg(100000);

// one fresh source per iteration so the memo does not hide the work
void BM_SampleCumulant(benchmark::State& state) {
  const Sample s = sample_data(model_for("G1"), static_cast<std::size_t>(state.range(0)), 1);
  const std::vector<std::size_t> idx(static_cast<std::size_t>(state.range(1)), 1);
  for (auto _ : state) {
    const auto src = make_sample_source(s);
    benchmark::DoNotOptimize(src->cumulant(idx));
  }
}
BENCHMARK(BM_SampleCumulant)->ArgsProduct({{10000, 100000}, {2, 4, 6}});

void BM_EffectPolynomial(benchmark::State& state) {
  const int l = static_cast<int>(state.range(0));
  const WeightedModel m = model_for(l == 1 ? "G1" : "G2");
  const Sample s = sample_data(m, 10000, 1);
  for (auto _ : state) {
    const auto src = make_sample_source(s);
    benchmark::DoNotOptimize(build_effect_polynomial(*src, 1, 2, l));
  }
}
BENCHMARK(BM_EffectPolynomial)->Arg(1)->Arg(2);

void BM_ProxyNoEdge(benchmark::State& state) {
  const Sample s = sample_data(model_for("G1"), static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    const auto src = make_sample_source(s);
    benchmark::DoNotOptimize(estimate_proxy_no_edge(*src, 1));
  }
}
BENCHMARK(BM_ProxyNoEdge)->Arg(10000)->Arg(100000);

void BM_ProxyRefined(benchmark::State& state) {
  const Sample s = sample_data(model_for("G3"), 10000, 1);
  for (auto _ : state) {
    const auto src = make_sample_source(s);
    benchmark::DoNotOptimize(estimate_proxy_edge_1lat_refined(*src));
  }
}
BENCHMARK(BM_ProxyRefined);

void BM_Iv(benchmark::State& state) {
  const PresetInfo info = preset("IV_2T_1I");
  const Sample s = sample_data(draw_model(info.dag, NoiseFamily::kGamma, 7), 10000, 1);
  for (auto _ : state) {
    const auto src = make_sample_source(s);
    try {
      benchmark::DoNotOptimize(estimate_iv(*src, info.dag, 0, {1, 2}, 3));
    } catch (const std::exception&) {
      state.SkipWithError("estimation failed");
      break;
    }
  }
}
BENCHMARK(BM_Iv);

void BM_PopulationCumulant(benchmark::State& state) {
  const WeightedModel m = model_for("IV_3T_2I");
  const std::vector<std::size_t> idx{0, 4, 4, 5, 7, 7};
  for (auto _ : state) {
    const auto src = make_population_source(m.scaled_bprime(), m.scaled_noise_cumulants(6));
    benchmark::DoNotOptimize(src->cumulant(idx));
  }
}
BENCHMARK(BM_PopulationCumulant);

}  // namespace

BENCHMARK_MAIN();
