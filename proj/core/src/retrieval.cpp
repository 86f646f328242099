#include "duorank/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "duorank/common.hpp"

namespace duorank {

EmbeddingMatrix encode_corpus(const EncoderModel& model,
                              const DocumentCollection& docs) {
  std::vector<std::string> ids;
  std::vector<float> data;
  ids.reserve(docs.size());
  data.reserve(docs.size() * model.dim());
  for (const auto& doc : docs.docs()) {
    ids.push_back(doc.id);
    for (double v : model.encode(doc.text, Role::Passage)) {
      data.push_back(static_cast<float>(v));
    }
  }
  return EmbeddingMatrix(model.dim(), std::move(ids), std::move(data));
}

std::vector<double> dense_scores(const Query& query, const EncoderModel& model,
                                 const EmbeddingMatrix& matrix) {
  if (matrix.dim() != model.dim()) {
    throw ValidationError("dense search: matrix dim " +
                          std::to_string(matrix.dim()) +
                          " does not match model dim " +
                          std::to_string(model.dim()));
  }
  const auto q = model.encode(query.text, Role::Query);
  std::vector<double> scores(matrix.rows());
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    const auto row = matrix.row(i);
    double dot = 0.0;
    for (std::uint32_t r = 0; r < matrix.dim(); ++r) {
      dot += q[r] * static_cast<double>(row[r]);
    }
    scores[i] = dot;
  }
  return scores;
}

RankedList rank_from_scores(std::span<const double> scores,
                            std::span<const std::string> doc_ids,
                            const std::string& query_id, std::size_t k) {
  if (scores.size() != doc_ids.size()) {
    throw ValidationError("rank_from_scores: length mismatch");
  }
  if (k == 0) throw ValidationError("rank_from_scores: k must be >= 1");
  for (double s : scores) {
    if (std::isnan(s)) {
      throw RuntimeError("rank_from_scores: NaN score for query " + query_id);
    }
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + take, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return rank_before(scores[a], doc_ids[a], scores[b],
                                         doc_ids[b]);
                    });
  RankedList out{query_id, {}};
  out.items.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.items.push_back(RankedItem{doc_ids[order[i]], scores[order[i]]});
  }
  return out;
}

RankedList search_dense(const Query& query, const EncoderModel& model,
                        const EmbeddingMatrix& matrix, std::size_t k) {
  const auto scores = dense_scores(query, model, matrix);
  return rank_from_scores(scores, matrix.ids(), query.id, k);
}

void EnsembleConfig::validate() const {
  if (checkpoints.empty()) {
    throw ValidationError("ensemble: at least one model checkpoint required");
  }
  if (weights.size() != checkpoints.size()) {
    throw ValidationError("ensemble: weight count " +
                          std::to_string(weights.size()) +
                          " does not match checkpoint count " +
                          std::to_string(checkpoints.size()));
  }
  bool any = alpha != 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) throw ValidationError("ensemble: non-finite weight");
    any = any || w != 0.0;
  }
  if (!std::isfinite(alpha)) throw ValidationError("ensemble: non-finite alpha");
  if (!any) {
    throw ValidationError("ensemble: all weights and alpha are zero");
  }
}

Ensemble::Ensemble(std::vector<EncoderModel> models,
                   std::vector<EmbeddingMatrix> matrices,
                   std::vector<double> weights, double alpha,
                   bool normalize_sparse)
    : models_(std::move(models)),
      matrices_(std::move(matrices)),
      weights_(std::move(weights)),
      alpha_(alpha),
      normalize_sparse_(normalize_sparse) {
  if (models_.empty() || models_.size() != matrices_.size() ||
      models_.size() != weights_.size()) {
    throw ValidationError("ensemble: models, matrices and weights must align");
  }
  for (std::size_t i = 0; i < models_.size(); ++i) {
    if (matrices_[i].dim() != models_[i].dim()) {
      throw ValidationError("ensemble: matrix dim mismatch for model " +
                            std::to_string(i + 1));
    }
    if (matrices_[i].ids() != matrices_[0].ids()) {
      throw ValidationError("ensemble: corpus embeddings disagree on ids");
    }
  }
}

Ensemble Ensemble::from_config(const EnsembleConfig& cfg,
                               const TokenizerConfig& tokenizer,
                               const DocumentCollection& docs) {
  cfg.validate();
  std::vector<EncoderModel> models;
  std::vector<EmbeddingMatrix> matrices;
  models.reserve(cfg.checkpoints.size());
  for (const auto& path : cfg.checkpoints) {
    models.push_back(EncoderModel::load(path, tokenizer));
    matrices.push_back(encode_corpus(models.back(), docs));
  }
  return Ensemble(std::move(models), std::move(matrices), cfg.weights,
                  cfg.alpha, cfg.normalize_sparse);
}

std::vector<double> Ensemble::score(const Query& query,
                                    std::span<const double> sparse_scores) const {
  const std::size_t n = matrices_[0].rows();
  if (sparse_scores.size() != n) {
    throw ValidationError("ensemble: sparse score vector has " +
                          std::to_string(sparse_scores.size()) +
                          " entries, corpus has " + std::to_string(n));
  }
  std::vector<double> total(n, 0.0);
  for (std::size_t m = 0; m < models_.size(); ++m) {
    const auto part = dense_scores(query, models_[m], matrices_[m]);
    for (std::size_t j = 0; j < n; ++j) total[j] += weights_[m] * part[j];
  }

  if (alpha_ != 0.0) {
    if (normalize_sparse_) {
      double lo = sparse_scores[0], hi = sparse_scores[0];
      for (double s : sparse_scores) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
      const double range = hi - lo;
      for (std::size_t j = 0; j < n; ++j) {
        const double norm = range > 0.0 ? (sparse_scores[j] - lo) / range : 0.0;
        total[j] += alpha_ * norm;
      }
    } else {
      for (std::size_t j = 0; j < n; ++j) total[j] += alpha_ * sparse_scores[j];
    }
  }
  for (double s : total) {
    if (std::isnan(s)) {
      throw RuntimeError("ensemble: NaN score for query " + query.id);
    }
  }
  return total;
}

RankedList Ensemble::search(const Query& query,
                            std::span<const double> sparse_scores,
                            std::size_t k) const {
  return rank_from_scores(score(query, sparse_scores), matrices_[0].ids(),
                          query.id, k);
}

const std::vector<std::string>& Ensemble::doc_ids() const {
  return matrices_[0].ids();
}

}  // namespace duorank
