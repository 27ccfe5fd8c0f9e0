#include <vector>

#include <benchmark/benchmark.h>

#include "polwishart/distances.hpp"
#include "polwishart/estimation.hpp"
#include "polwishart/hypothesis.hpp"
#include "polwishart/wishart.hpp"

namespace pw = polwishart;

namespace {

pw::HermitianMatrix matrix_b() {
  using C = pw::Complex;
  return pw::HermitianMatrix::from_row_major(
      3, {C(360932, 0), C(11050, 3759), C(63896, 1581), C(11050, -3759), C(98960, 0),
          C(6593, 6868), C(63896, -1581), C(6593, -6868), C(208843, 0)});
}

const pw::WishartParams& law() {
  static const pw::WishartParams params(8.0, matrix_b());
  return params;
}

void BM_Sample(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(pw::sample(law(), n, ++seed));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sample)->Arg(49)->Arg(121)->Arg(400);

void BM_Fit(benchmark::State& state) {
  const auto s = pw::sample(law(), static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(pw::fit(s));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Fit)->Arg(49)->Arg(121)->Arg(400);

const std::vector<pw::DistanceMeasure>& measures() {
  static const std::vector<pw::DistanceMeasure> list{
      pw::DistanceMeasure::chi_square(), pw::DistanceMeasure::kullback_leibler(),
      pw::DistanceMeasure::renyi(0.9), pw::DistanceMeasure::bhattacharyya(),
      pw::DistanceMeasure::hellinger()};
  return list;
}

void BM_Distance(benchmark::State& state) {
  const auto& measure = measures()[static_cast<std::size_t>(state.range(0))];
  const pw::WishartParams other(9.0, pw::weighted_sum(1.05, matrix_b(), 0.0, matrix_b()));
  state.SetLabel(pw::to_string(measure));
  for (auto _ : state) benchmark::DoNotOptimize(pw::distance(measure, law(), other));
}
BENCHMARK(BM_Distance)->DenseRange(0, 4);

void BM_TestFromSamples(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = pw::sample(law(), n, 1);
  const auto b = pw::sample(law(), n, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        pw::run_test(pw::DistanceMeasure::kullback_leibler(), a, b, {0.01, 0.05}));
}
BENCHMARK(BM_TestFromSamples)->Arg(49)->Arg(400);

}  // namespace

BENCHMARK_MAIN();
