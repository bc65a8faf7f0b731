// Per-channel solve times on the default 16x16 array.

#include <benchmark/benchmark.h>

#include <hbf/channel.hpp>
#include <hbf/driver.hpp>
#include <hbf/rng.hpp>
#include <hbf/spectral.hpp>

namespace {

using namespace hbf;

SystemDims dims(int n_rf, int n) {
  SystemDims d;
  d.n_rf = n_rf;
  d.n_streams = 2;
  d.n_subcarriers = n;
  d.noise_var = 1.0;
  return d;
}

// args: algorithm index, subcarriers, RF chains
void BM_Solve(benchmark::State& state) {
  const auto alg = static_cast<driver::Algorithm>(state.range(0));
  const auto d = dims(static_cast<int>(state.range(2)), static_cast<int>(state.range(1)));
  const auto ch = channel::random_channel(7, d.n_tx, d.n_rx, d.n_subcarriers);
  const auto dicts = driver::make_dictionaries(ch);
  driver::SolverOptions o;
  o.algorithm = alg;
  state.SetLabel(driver::to_string(alg));
  for (auto _ : state) {
    benchmark::DoNotOptimize(driver::solve(ch.per_subcarrier, d, o, &dicts));
  }
}

void solve_args(benchmark::internal::Benchmark* b) {
  using A = driver::Algorithm;
  for (A a : {A::FULL_DIGITAL, A::MO, A::GEVD, A::EVD_LB, A::EVD_UB, A::OMP}) {
    b->Args({static_cast<long>(a), 1, 2});
    if (a != A::GEVD) b->Args({static_cast<long>(a), 16, 4});
  }
}
BENCHMARK(BM_Solve)->Apply(solve_args)->Unit(benchmark::kMillisecond);

void BM_WmmseMo(benchmark::State& state) {
  const auto d = dims(4, static_cast<int>(state.range(0)));
  const auto ch = channel::random_channel(7, d.n_tx, d.n_rx, d.n_subcarriers);
  driver::SolverOptions o;
  o.criterion = driver::Criterion::WMMSE;
  for (auto _ : state) benchmark::DoNotOptimize(driver::solve(ch.per_subcarrier, d, o));
}
BENCHMARK(BM_WmmseMo)->Arg(1)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_PowerGevd(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(3);
  const CMat a = random_gaussian(rng, n, n);
  const CMat b = random_gaussian(rng, n, n);
  const CMat u = a * a.adjoint();
  const CMat w = b * b.adjoint() + CMat::Identity(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(spectral::power_gevd(u, w, 50));
}
BENCHMARK(BM_PowerGevd)->Arg(8)->Arg(16)->Arg(64);

void BM_Channel(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(channel::random_channel(++seed, 16, 16, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_Channel)->Arg(1)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
