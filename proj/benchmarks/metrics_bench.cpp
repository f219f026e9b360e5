#include <benchmark/benchmark.h>

#include "chartdate/metrics.hpp"
#include "chartdate/synthetic.hpp"

namespace {

using namespace chartdate;

std::vector<Document> corpus(std::size_t n, int length) {
  SyntheticSpec spec;
  spec.kind = "smooth";
  spec.doc_length = length;
  return generate_corpus(make_model(spec), n, 5);
}

void BM_DistAlpha(benchmark::State& state) {
  const auto docs = corpus(2, static_cast<int>(state.range(0)));
  ShingleVocabulary sv;
  const auto p = vectorize(docs[0], 1, VectorMode::raw, sv);
  const auto q = vectorize(docs[1], 1, VectorMode::raw, sv);
  for (auto _ : state) benchmark::DoNotOptimize(dist_alpha(p, q, 1.0));
}
BENCHMARK(BM_DistAlpha)->Arg(50)->Arg(200)->Arg(1000);

void BM_SimGamma(benchmark::State& state) {
  const auto docs = corpus(2, static_cast<int>(state.range(0)));
  ShingleVocabulary sv;
  const auto p = vectorize(docs[0], 2, VectorMode::raw, sv);
  const auto q = vectorize(docs[1], 2, VectorMode::raw, sv);
  for (auto _ : state) benchmark::DoNotOptimize(sim_gamma(p, q, 0.5));
}
BENCHMARK(BM_SimGamma)->Arg(50)->Arg(200)->Arg(1000);

void BM_BroderDistance(benchmark::State& state) {
  const auto docs = corpus(2, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(broder_distance(docs[0], docs[1], 2));
}
BENCHMARK(BM_BroderDistance)->Arg(50)->Arg(200)->Arg(1000);

}  // namespace
