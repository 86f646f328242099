#pragma once

#include <span>
#include <string>
#include <vector>

#include "duorank/corpus.hpp"
#include "duorank/encoder.hpp"

namespace duorank {

/// One unit-norm row per document, corpus order preserved.
EmbeddingMatrix encode_corpus(const EncoderModel& model,
                              const DocumentCollection& docs);

/// Per-row dot products of the encoded query against the matrix, full length.
std::vector<double> dense_scores(const Query& query, const EncoderModel& model,
                                 const EmbeddingMatrix& matrix);

/// Exhaustive (flat) top-k dense search; no approximation.
RankedList search_dense(const Query& query, const EncoderModel& model,
                        const EmbeddingMatrix& matrix, std::size_t k);

/// Top-k of a full score array under the (score desc, doc id asc) rule.
/// Throws on NaN scores or length mismatch.
RankedList rank_from_scores(std::span<const double> scores,
                            std::span<const std::string> doc_ids,
                            const std::string& query_id, std::size_t k);

struct EnsembleConfig {
  std::vector<std::string> checkpoints;  // model files, M1..Mt
  std::vector<double> weights;           // w1..wt
  double alpha = 0.1;                    // BM25+ weight
  bool normalize_sparse = false;         // per-query min-max on the b vector

  void validate() const;
};

/// Loaded models plus their precomputed corpus embeddings, ready to score.
class Ensemble {
 public:
  Ensemble(std::vector<EncoderModel> models,
           std::vector<EmbeddingMatrix> matrices, std::vector<double> weights,
           double alpha, bool normalize_sparse);

  /// Builds from checkpoints, encoding the corpus once per model.
  static Ensemble from_config(const EnsembleConfig& cfg,
                              const TokenizerConfig& tokenizer,
                              const DocumentCollection& docs);

  std::size_t model_count() const { return models_.size(); }

  /// Final per-document scores: sum_i w_i * Sim(VQ_i, VD_ij) + alpha * b_j,
  /// where b holds one raw sparse score per corpus document (0 for documents
  /// the sparse engine did not return) and is min-max normalized per query
  /// when normalize_sparse is set.
  std::vector<double> score(const Query& query,
                            std::span<const double> sparse_scores) const;

  RankedList search(const Query& query, std::span<const double> sparse_scores,
                    std::size_t k) const;

  const std::vector<std::string>& doc_ids() const;

 private:
  std::vector<EncoderModel> models_;
  std::vector<EmbeddingMatrix> matrices_;
  std::vector<double> weights_;
  double alpha_ = 0.0;
  bool normalize_sparse_ = false;
};

}  // namespace duorank
