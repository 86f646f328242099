#pragma once

#include <cstdint>
#include <string>

#include "duorank/corpus.hpp"

namespace duorank {

struct SynthBenchmark {
  DocumentCollection corpus;
  QueryCollection queries;
  RelevanceJudgments qrels;
};

/// Seeded benchmark for end-to-end runs. Documents cluster into topics built
/// from concept words, each concept owning a few interchangeable surface
/// variants. A query paraphrases one document by swapping every concept word
/// for a sibling variant, so query/positive lexical overlap is low while the
/// concept signal survives. Trap documents from other topics receive exact
/// copies of query tokens, handing the sparse scorer confident wrong answers.
/// Every query has exactly one grade-1 positive.
SynthBenchmark generate_synthetic_benchmark(std::uint64_t seed,
                                            std::size_t n_docs,
                                            std::size_t n_queries);

/// Writes corpus.jsonl, queries.jsonl and qrels.tsv under out_dir.
SynthBenchmark write_synthetic_benchmark(std::uint64_t seed, std::size_t n_docs,
                                         std::size_t n_queries,
                                         const std::string& out_dir);

}  // namespace duorank
