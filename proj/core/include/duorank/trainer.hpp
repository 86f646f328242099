#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "duorank/corpus.hpp"
#include "duorank/encoder.hpp"

namespace duorank {

/// One query with its positive and mined negatives. The positive never
/// appears among the negatives and negatives are distinct.
struct TrainingExample {
  Query query;
  std::string positive;
  std::vector<std::string> negatives;

  void validate() const;
};

/// In-batch layout: example i owns columns [i*C, (i+1)*C), positive first,
/// then its negatives. The similarity matrix S = Q P^T is B x (B*C); columns
/// outside a row's own block act as that row's easy documents.
struct TrainingBatch {
  std::size_t batch_size = 0;      // B
  std::size_t docs_per_query = 0;  // C
  std::uint32_t dim = 0;
  std::vector<double> query_embs;          // B x dim, row-major
  std::vector<double> doc_embs;            // (B*C) x dim, row-major
  std::vector<std::size_t> positive_index; // per row, into the B*C columns
  std::vector<std::string> column_doc_ids; // B*C
  std::vector<char> masked;                // B x (B*C); 1 = out of denominator

  std::size_t columns() const { return batch_size * docs_per_query; }
  /// S entries row-major, shape B x (B*C).
  std::vector<double> similarity_matrix() const;
};

struct BatchOptions {
  /// Mask in-batch columns that qrels mark relevant to the row's query
  /// (false negatives). The row's own positive column is always kept.
  bool mask_in_batch_positives = true;
  const RelevanceJudgments* qrels = nullptr;
};

/// All examples must share the same C; throws ValidationError otherwise.
TrainingBatch assemble_batch(std::span<const TrainingExample> examples,
                             const EncoderModel& model,
                             const DocumentCollection& corpus,
                             const BatchOptions& opts = {});

/// Mean over rows of -log softmax probability of the positive, logits
/// S[i][j] / temperature over the unmasked columns. temperature = 1 is the
/// plain InfoNCE objective.
double infonce_loss(const TrainingBatch& batch, double temperature = 1.0);

struct GradientResult {
  /// d(loss)/dW in the model's bucket-major weight layout.
  std::vector<double> grad;
  double loss = 0.0;
  /// Encodings that hit the near-zero-norm fallback; their gradient is zero.
  std::size_t degenerate_units = 0;
};

/// Exact analytic gradient of infonce_loss with respect to the weight
/// matrix, including the L2-normalization Jacobian of encode().
GradientResult loss_gradient(std::span<const TrainingExample> examples,
                             const EncoderModel& model,
                             const DocumentCollection& corpus,
                             double temperature,
                             const BatchOptions& opts = {});

struct TrainConfig {
  double learning_rate = 0.5;
  int epochs = 40;
  std::size_t batch_size = 2;  // B; phase 2 trains with B = 1
  double temperature = 1.0;
  int grad_accum_steps = 1;
  std::uint64_t seed = 0;
  bool shuffle = true;
  bool mask_in_batch_positives = true;

  void validate() const;
};

struct TrainStep {
  int epoch = 0;  // 1-based
  int step = 0;   // 1-based optimizer step within the epoch
  double loss = 0.0;
};

struct TrainResult {
  EncoderModel model;
  std::vector<TrainStep> history;
  /// Batches whose examples disagreed on C and were truncated to the
  /// batch-wide minimum.
  std::size_t truncated_batches = 0;
  std::size_t degenerate_units = 0;
};

/// Plain gradient descent: W <- W - lr * g_hat, where g_hat averages
/// grad_accum_steps micro-batch gradients (the trailing group averages over
/// what remains). Shuffle order is derived from (seed, epoch). Throws
/// RuntimeError when the loss turns non-finite. When log_path is non-empty,
/// appends one JSON line {"epoch", "step", "loss"} per optimizer step.
TrainResult train(const EncoderModel& model,
                  std::span<const TrainingExample> dataset,
                  const DocumentCollection& corpus, const TrainConfig& cfg,
                  const RelevanceJudgments* qrels = nullptr,
                  const std::string& log_path = {});

}  // namespace duorank
