// Serial reference kernels against their OpenMP versions.
#include "bl/kinetic.hpp"
#include "bl/loewner.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

namespace {

bl::KineticState bump(int nx) {
  const bl::PeriodicGrid g(nx, 2 * std::numbers::pi);
  return bl::init_from_function(bl::uniform_window(8.0, nx + 1), g, [](double w, double x) {
    const double c = w - 0.3 * std::sin(x);
    return (1 + 0.2 * std::cos(x)) * std::exp(-c * c);
  });
}

template <void (*Kernel)(bl::KineticState&, double)>
void advect(benchmark::State& state) {
  auto st = bump(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Kernel(st, 1e-3);
    benchmark::DoNotOptimize(st.phi.data());
  }
}

template <void (*Kernel)(bl::KineticState&, std::span<const double>, double)>
void kick(benchmark::State& state) {
  auto st = bump(static_cast<int>(state.range(0)));
  std::vector<double> force(static_cast<std::size_t>(st.nx()));
  for (int i = 0; i < st.nx(); ++i) force[static_cast<std::size_t>(i)] = 0.2 * std::sin(st.x.x(i));
  for (auto _ : state) {
    Kernel(st, force, 1e-3);
    benchmark::DoNotOptimize(st.phi.data());
  }
}

template <bool Parallel>
void map_many(benchmark::State& state) {
  const auto spec = bl::DrivingSpec::single(bl::TimeFunction::sine(0.0, 1.0, 3.0));
  std::vector<bl::cplx> z;
  for (int i = 0; i < state.range(0); ++i) z.emplace_back(-3.0 + 6.0 * i / static_cast<double>(state.range(0)), 0.5);
  for (auto _ : state) {
    auto f = Parallel ? bl::map_f_many(spec, z, 1.0) : bl::map_f_many_serial(spec, z, 1.0);
    benchmark::DoNotOptimize(f.data());
  }
}

}  // namespace

BENCHMARK(advect<bl::advect_x_serial>)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(advect<bl::advect_x_omp>)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(kick<bl::kick_w_serial>)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(kick<bl::kick_w_omp>)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(map_many<false>)->Arg(64)->Arg(256);
BENCHMARK(map_many<true>)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
