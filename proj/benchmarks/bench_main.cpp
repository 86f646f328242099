// Micro-benchmarks for the hot paths: preprocessing, sparse search, encoding,
// training steps and run evaluation.

#include <benchmark/benchmark.h>

#include "duorank/metrics.hpp"
#include "duorank/mining.hpp"
#include "duorank/retrieval.hpp"
#include "duorank/sparse.hpp"
#include "duorank/synth.hpp"
#include "duorank/trainer.hpp"

using namespace duorank;

namespace {

const SynthBenchmark& bench_data() {
  static const SynthBenchmark data = generate_synthetic_benchmark(1, 2000, 200);
  return data;
}

const SparseIndex& bench_index() {
  static const SparseIndex index =
      SparseIndex::build(bench_data().corpus, TokenizerConfig{}, SparseParams{});
  return index;
}

EncoderModel bench_model() {
  EncoderConfig cfg;
  cfg.tokenizer = TokenizerConfig{};
  return EncoderModel::init(cfg, 7);
}

}  // namespace

static void BM_Preprocess(benchmark::State& state) {
  const Analyzer analyzer{TokenizerConfig{}};
  const std::string& text = bench_data().corpus.at(0).text;
  for (auto _ : state) {
    benchmark::DoNotOptimize(analyzer.analyze(text));
  }
}
BENCHMARK(BM_Preprocess);

static void BM_SparseSearch(benchmark::State& state) {
  const auto& index = bench_index();
  const auto& queries = bench_data().queries;
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& q = queries.at(i++ % queries.size());
    benchmark::DoNotOptimize(index.search(q, state.range(0), SparseScorer::Bm25Plus));
  }
}
BENCHMARK(BM_SparseSearch)->Arg(10)->Arg(200);

static void BM_Encode(benchmark::State& state) {
  const auto model = bench_model();
  const std::string& text = bench_data().corpus.at(1).text;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.encode(text, Role::Passage));
  }
}
BENCHMARK(BM_Encode);

static void BM_DenseSearch(benchmark::State& state) {
  const auto model = bench_model();
  const auto emb = encode_corpus(model, bench_data().corpus);
  const auto& queries = bench_data().queries;
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& q = queries.at(i++ % queries.size());
    benchmark::DoNotOptimize(search_dense(q, model, emb, 10));
  }
}
BENCHMARK(BM_DenseSearch);

static void BM_GradientStep(benchmark::State& state) {
  const auto& data = bench_data();
  const auto model = bench_model();
  const auto index = bench_index();
  MiningConfig mcfg;
  mcfg.per_query_negatives = 30;
  std::vector<TrainingExample> examples;
  for (std::size_t i = 0; i < 2; ++i) {
    auto mined =
        mine_global(data.queries.at(i), data.qrels, index, mcfg, nullptr);
    examples.insert(examples.end(), mined.begin(), mined.end());
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_gradient(examples, model, data.corpus, 1.0));
  }
}
BENCHMARK(BM_GradientStep);

static void BM_EvaluateRun(benchmark::State& state) {
  const auto& data = bench_data();
  const auto& index = bench_index();
  std::vector<RankedList> run;
  for (const auto& q : data.queries.queries()) {
    run.push_back(index.search(q, 200, SparseScorer::Bm25Plus));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_run(run, data.qrels));
  }
}
BENCHMARK(BM_EvaluateRun);

BENCHMARK_MAIN();
