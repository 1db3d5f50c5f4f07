#include <benchmark/benchmark.h>

#include <random>

#include "slabte/kernels.hpp"

using namespace slabte;

namespace {

struct Setup {
  Medium m{2, ScalarField::constant(1.0), ScalarField::constant(0.5), PhaseFunction::isotropic(2)};
  QuadratureSpec q;
  CollocationLayout layout;
  AngularCoupling coupling;
  std::vector<double> source;
  RayContext ctx;

  explicit Setup(int lateral)
      : q([] {
          QuadratureSpec s;
          s.angular_nodes = 32;
          return s;
        }()),
        layout(SlabDomain::with_window(2, -1, 1), GridSpec{lateral, 32}, q),
        coupling(AngularCoupling::build(m.phase, layout.angles())),
        ctx{&m, &layout, q.truncation_length(1.0), q.ray_panels} {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> f(layout.size());
    for (double& v : f) v = u(rng);
    source.resize(coupling.source_size(layout.spatial_size()));
    source_serial(coupling, f, source);
  }
};

void BM_SweepSerial(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)));
  std::vector<double> out(s.layout.size());
  for (auto _ : state) {
    sweep_serial(s.ctx, s.coupling, s.source, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
}

void BM_SweepParallel(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)));
  std::vector<double> out(s.layout.size());
  for (auto _ : state) {
    sweep_parallel(s.ctx, s.coupling, s.source, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
