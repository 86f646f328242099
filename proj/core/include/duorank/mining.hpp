#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "duorank/corpus.hpp"
#include "duorank/encoder.hpp"
#include "duorank/sparse.hpp"
#include "duorank/trainer.hpp"

namespace duorank {

struct MiningConfig {
  std::size_t a1 = 50;                  // phase-1 BM25+ pool size
  std::size_t per_query_negatives = 30; // sampled from the pool per example
  std::size_t a2 = 50;                  // phase-2 dense pool size
  std::size_t phase2_docs_per_query = 10;  // positive + hard negatives
  std::uint64_t seed = 0;

  void validate() const;
};

struct MiningStats {
  std::size_t skipped_no_positive = 0;  // queries without any positive grade
  std::size_t short_pool_warnings = 0;  // fewer negatives available than asked
};

/// Phase 1: negatives are a seeded uniform sample (without replacement) from
/// the query's top-a1 BM25+ pool minus all of its positives. One example per
/// positive. Easy documents are not materialized; they arise in-batch.
std::vector<TrainingExample> mine_global(const Query& query,
                                         const RelevanceJudgments& qrels,
                                         const SparseIndex& index,
                                         const MiningConfig& cfg,
                                         MiningStats* stats = nullptr);

/// Phase 2: hard negatives are the model's top-a2 dense results minus the
/// query's positives, kept in model-score order (hardest first); each example
/// takes the positive plus the top phase2_docs_per_query - 1 of them.
std::vector<TrainingExample> mine_hard(const Query& query,
                                       const RelevanceJudgments& qrels,
                                       const EncoderModel& model,
                                       const EmbeddingMatrix& corpus_embeddings,
                                       const MiningConfig& cfg,
                                       MiningStats* stats = nullptr);

/// Runs the per-query miners over a whole query set; output sorted by query
/// id (then by positive id) so the dataset is independent of iteration order.
std::vector<TrainingExample> mine_global_all(const QueryCollection& queries,
                                             const RelevanceJudgments& qrels,
                                             const SparseIndex& index,
                                             const MiningConfig& cfg,
                                             MiningStats* stats = nullptr);
std::vector<TrainingExample> mine_hard_all(const QueryCollection& queries,
                                           const RelevanceJudgments& qrels,
                                           const EncoderModel& model,
                                           const EmbeddingMatrix& corpus_embeddings,
                                           const MiningConfig& cfg,
                                           MiningStats* stats = nullptr);

// --- mined dataset files: JSONL {"query_id", "positive", "negatives"} ---

void write_mined(std::span<const TrainingExample> examples,
                 const std::string& path);
std::vector<TrainingExample> read_mined(const std::string& path,
                                        const QueryCollection& queries);

}  // namespace duorank
