// Parallel kernels against their serial reference loops.
#include <benchmark/benchmark.h>

#include <random>

#include "iebsm/drift.hpp"
#include "iebsm/learners/random_forest.hpp"

using namespace iebsm;

namespace {

Schema make_schema(std::size_t d, std::size_t k) {
  std::vector<FeatureDescriptor> f;
  for (std::size_t i = 0; i < d; ++i) f.push_back({"f" + std::to_string(i), FeatureKind::Numeric});
  std::vector<std::string> c;
  for (std::size_t i = 0; i < k; ++i) c.push_back("c" + std::to_string(i));
  return Schema(f, c);
}

std::vector<Instance> make_data(std::size_t n, std::size_t d, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Instance> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].y = i % k;
    out[i].seq = i;
    out[i].x.resize(d);
    for (auto& v : out[i].x) v = static_cast<double>(out[i].y) + noise(rng);
  }
  return out;
}

void BM_ForestFit(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  const auto schema = make_schema(8, 3);
  const auto data = make_data(5000, 8, 3, 1);
  for (auto _ : state) {
    learners::RandomForest forest(schema, {32, true, 0, 42});
    if (parallel) forest.fit(data);
    else forest.fit_serial(data);
    benchmark::DoNotOptimize(forest.trees().size());
  }
}
BENCHMARK(BM_ForestFit)->Arg(0)->Arg(1)->ArgNames({"parallel"})->Unit(benchmark::kMillisecond);

void BM_ForestPredict(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  const auto schema = make_schema(8, 3);
  const auto data = make_data(5000, 8, 3, 2);
  learners::RandomForest forest(schema, {32, true, 0, 42});
  forest.fit(data);
  for (auto _ : state) {
    auto labels = parallel ? forest.predict_labels(data) : forest.predict_labels_serial(data);
    benchmark::DoNotOptimize(labels.data());
  }
}
BENCHMARK(BM_ForestPredict)->Arg(0)->Arg(1)->ArgNames({"parallel"})->Unit(benchmark::kMillisecond);

void BM_CheckWindows(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  const std::size_t d = 64, s = 2500;
  const auto schema = make_schema(d, 3);
  const auto data = make_data(2 * s, d, 3, 3);
  const std::vector<ClassIndex> preds(2 * s, 0);
  const std::span<const Instance> all(data);
  const std::span<const ClassIndex> ps(preds);
  const drift::WindowPair pair{all.first(s), all.subspan(s), ps.first(s), ps.subspan(s)};
  const auto strategy = drift::strategy_by_id("S4");
  for (auto _ : state) {
    auto v = parallel ? drift::check_windows(pair, strategy, schema) : drift::check_windows_serial(pair, strategy, schema);
    benchmark::DoNotOptimize(v.triggers.size());
  }
}
BENCHMARK(BM_CheckWindows)->Arg(0)->Arg(1)->ArgNames({"parallel"})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
