#include <benchmark/benchmark.h>

#include <vector>

#include "otd/decompose.hpp"
#include "otd/estimator.hpp"
#include "otd/flatten.hpp"
#include "otd/linalg.hpp"
#include "otd/moments.hpp"
#include "otd/rng.hpp"
#include "otd/tensor.hpp"

namespace {

otd::Tensor random_tensor(otd::Rng& rng, const otd::Shape& shape) {
  otd::Tensor t(shape);
  for (std::int64_t k = 0; k < t.size(); ++k) t[k] = rng.gaussian();
  return t;
}

void BM_flatten(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  otd::Rng rng(1);
  const auto t = random_tensor(rng, otd::Shape({n, n, n}));
  const otd::FlatteningMap sigma({1, 2, 2});
  for (auto _ : state) {
    benchmark::DoNotOptimize(otd::flatten(t, sigma));
  }
  state.SetItemsProcessed(state.iterations() * t.size());
}
BENCHMARK(BM_flatten)->Arg(8)->Arg(16)->Arg(32);

void BM_svd(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  otd::Rng rng(2);
  otd::Matrix a(n, 2 * n);
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < 2 * n; ++j) a(i, j) = rng.gaussian();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(otd::svd(a));
  }
}
BENCHMARK(BM_svd)->Arg(8)->Arg(16)->Arg(32);

void BM_decompose(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  otd::Rng rng(3);
  // Planted orthogonal rank-n cube so the recursion runs to completion.
  otd::Tensor t(otd::Shape({n, n, n}));
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t flat = (i * n + i) * n + i;
    t[flat] = static_cast<double>(n - i);
  }
  const auto sig = otd::Signature::singletons(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(otd::otd(t, sig));
  }
}
BENCHMARK(BM_decompose)->Arg(4)->Arg(8)->Arg(16);

void BM_empirical_moment(benchmark::State& state) {
  const std::int64_t count = state.range(0);
  otd::Rng rng(4);
  otd::SampleSet s;
  s.dim = 8;
  for (std::int64_t i = 0; i < count; ++i) s.points.push_back(rng.gaussian_vector(8));
  for (auto _ : state) {
    benchmark::DoNotOptimize(otd::empirical_moment(s, 3));
  }
  state.SetItemsProcessed(state.iterations() * count);
}
BENCHMARK(BM_empirical_moment)->Arg(1000)->Arg(10000);

void BM_identify(benchmark::State& state) {
  const std::int64_t dim = state.range(0);
  otd::MixtureModel model;
  model.dim = dim;
  model.weights = {0.5, 0.3, 0.2};
  model.means.assign(3, std::vector<double>(dim, 0.0));
  for (int i = 0; i < 3; ++i) model.means[i][i] = 1.0;
  const auto m2 = otd::model_moment(model, 2);
  const auto m3 = otd::model_moment(model, 3);
  otd::IdentifyOptions opts;
  opts.tol_rank = 1e-8;
  for (auto _ : state) {
    benchmark::DoNotOptimize(otd::identify(m2, m3, opts));
  }
}
BENCHMARK(BM_identify)->Arg(4)->Arg(8)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
