#include <benchmark/benchmark.h>

#include <conetest/cone.hpp>
#include <conetest/random.hpp>
#include <conetest/sample.hpp>
#include <conetest/statistics.hpp>

using namespace conetest;

namespace {

struct Problem {
  Vector x;
  Matrix m;
};

std::vector<Problem> problems(int p, int count) {
  Rng rng(p);
  std::vector<Problem> out;
  for (int i = 0; i < count; ++i) {
    Matrix a(p, p);
    for (int r = 0; r < p; ++r)
      for (int c = 0; c < p; ++c) a(r, c) = rng.normal();
    Vector x(p);
    for (int r = 0; r < p; ++r) x(r) = rng.normal();
    out.push_back({x, a * a.transpose() + Matrix::Identity(p, p)});
  }
  return out;
}

void BM_ProjectOrthant(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const auto probs = problems(p, 256);
  const auto cone = ConeSpec::orthant(p);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& pr = probs[i++ % probs.size()];
    benchmark::DoNotOptimize(project(pr.x, pr.m, cone).sq_norm_projection);
  }
}
BENCHMARK(BM_ProjectOrthant)->DenseRange(2, 10, 2);

void BM_ProjectBySubsets(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const auto probs = problems(p, 256);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& pr = probs[i++ % probs.size()];
    benchmark::DoNotOptimize(project_orthant_by_subsets(pr.x, pr.m).sq_norm_projection);
  }
}
BENCHMARK(BM_ProjectBySubsets)->DenseRange(2, 10, 2);

void BM_ClassifyFixedCovariance(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const auto probs = problems(p, 256);
  const OrthantClassifier cls(probs.front().m);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cls.classify(probs[i++ % probs.size()].x));
  }
}
BENCHMARK(BM_ClassifyFixedCovariance)->DenseRange(2, 8, 2);

void BM_ComputeAll(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  Rng rng(1);
  const Matrix f = Matrix::Identity(p, p);
  std::vector<SampleSummary> draws;
  for (int i = 0; i < 256; ++i) draws.push_back(draw_summary(rng, 20, Vector::Zero(p), f));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_all(draws[i++ % draws.size()]).uit_orthant);
  }
}
BENCHMARK(BM_ComputeAll)->DenseRange(2, 8, 2);

}  // namespace
