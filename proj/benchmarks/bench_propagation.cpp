#include <benchmark/benchmark.h>

#include <random>

#include "wavecoder/model.hpp"
#include "wavecoder/propagation.hpp"

namespace {

using namespace wavecoder;

ComplexField noise_field(std::size_t n) {
  const Grid g = make_grid(n, 400e-6, 749.48e-6);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(0.0, 1.0);
  ComplexField f = zero_field(g);
  for (auto& v : f.values.data) v = {d(rng), d(rng)};
  return f;
}

void BM_AngularSpectrum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto w = static_cast<std::size_t>(state.range(1));
  const ComplexField f = noise_field(n);
  const AngularSpectrumPropagator prop(f.grid, 0.03, w);
  for (auto _ : state) benchmark::DoNotOptimize(prop.apply(f.values));
  state.counters["working_set"] = static_cast<double>(working_set_elements(PropagationMethod::AngularSpectrum, n, w));
}
BENCHMARK(BM_AngularSpectrum)->Args({64, 2})->Args({64, 4})->Args({200, 4})->Unit(benchmark::kMillisecond);

void BM_Direct(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ComplexField f = noise_field(n);
  const DirectPropagator prop(f.grid, 0.03);
  for (auto _ : state) benchmark::DoNotOptimize(prop.apply(f.values));
  state.counters["working_set"] = static_cast<double>(working_set_elements(PropagationMethod::Direct, n, 1));
}
BENCHMARK(BM_Direct)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

// Three phase layers with AS hops, the desk-scale classifier's optics.
void BM_D2nnForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Grid g = make_grid(n, 400e-6, 749.48e-6);
  std::vector<Layer> layers;
  for (int k = 0; k < 3; ++k) {
    layers.push_back({PhaseMask::phase_only(RealTensor({n, n}, 0.3 * k)),
                      make_segment(0.03, PropagationMethod::AngularSpectrum, 2)});
  }
  const Model m(g, make_segment(0.03, PropagationMethod::AngularSpectrum, 2), std::move(layers),
                make_segment(0.03, PropagationMethod::AngularSpectrum, 2),
                DetectorRegions{default_detector_layout(n)});
  const RealTensor input({n, n}, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(forward(m, input));
}
BENCHMARK(BM_D2nnForward)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
