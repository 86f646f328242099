#include "duorank/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "duorank/common.hpp"
#include "duorank/rng.hpp"

namespace duorank {

namespace {

constexpr double kDegenerateNorm = 1e-12;

/// A micro-batch resolved down to token bags; the shared input of the loss
/// and gradient paths.
struct PreparedBatch {
  std::size_t batch_size = 0;
  std::size_t docs_per_query = 0;
  std::vector<TokenBag> query_bags;          // B
  std::vector<const TokenBag*> doc_bags;     // B*C (may alias shared cache)
  std::vector<std::string> column_doc_ids;   // B*C
  std::vector<std::size_t> positive_index;   // B
  std::vector<char> masked;                  // B x (B*C)

  std::size_t columns() const { return batch_size * docs_per_query; }
};

/// Doc-id -> passage token bag, filled lazily; lives across epochs so each
/// document is tokenized once.
class BagCache {
 public:
  BagCache(const EncoderModel& model, const DocumentCollection& corpus)
      : model_(model), corpus_(corpus) {}

  const TokenBag* passage(const std::string& doc_id) {
    auto it = cache_.find(doc_id);
    if (it != cache_.end()) return &it->second;
    const Document* doc = corpus_.find(doc_id);
    if (doc == nullptr) {
      throw ValidationError("training references unknown document id: " +
                            doc_id);
    }
    auto [pos, inserted] =
        cache_.emplace(doc_id, model_.token_bag(doc->text, Role::Passage));
    return &pos->second;
  }

 private:
  const EncoderModel& model_;
  const DocumentCollection& corpus_;
  std::unordered_map<std::string, TokenBag> cache_;
};

PreparedBatch prepare_batch(std::span<const TrainingExample> examples,
                            const EncoderModel& model, BagCache& bags,
                            const BatchOptions& opts,
                            std::size_t docs_per_query) {
  PreparedBatch pb;
  pb.batch_size = examples.size();
  pb.docs_per_query = docs_per_query;
  const std::size_t cols = pb.columns();
  pb.query_bags.reserve(pb.batch_size);
  pb.doc_bags.reserve(cols);
  pb.column_doc_ids.reserve(cols);
  pb.positive_index.reserve(pb.batch_size);

  for (std::size_t i = 0; i < examples.size(); ++i) {
    const TrainingExample& ex = examples[i];
    pb.query_bags.push_back(model.token_bag(ex.query.text, Role::Query));
    pb.positive_index.push_back(i * docs_per_query);
    pb.doc_bags.push_back(bags.passage(ex.positive));
    pb.column_doc_ids.push_back(ex.positive);
    for (std::size_t n = 0; n + 1 < docs_per_query; ++n) {
      pb.doc_bags.push_back(bags.passage(ex.negatives[n]));
      pb.column_doc_ids.push_back(ex.negatives[n]);
    }
  }

  pb.masked.assign(pb.batch_size * cols, 0);
  if (opts.mask_in_batch_positives && opts.qrels != nullptr) {
    for (std::size_t i = 0; i < pb.batch_size; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        if (j == pb.positive_index[i]) continue;
        if (opts.qrels->is_relevant(examples[i].query.id,
                                    pb.column_doc_ids[j])) {
          pb.masked[i * cols + j] = 1;
        }
      }
    }
  }
  return pb;
}

struct EncodedUnit {
  std::vector<double> embedding;  // unit norm (or the e1 fallback)
  std::vector<double> raw;
  double norm = 0.0;
  bool degenerate = false;
};

EncodedUnit encode_unit(const EncoderModel& model, const TokenBag& bag) {
  EncodedUnit u;
  auto [raw, norm] = model.project(bag);
  u.raw = std::move(raw);
  u.norm = norm;
  if (norm < kDegenerateNorm) {
    u.degenerate = true;
    u.embedding.assign(model.dim(), 0.0);
    u.embedding[0] = 1.0;
  } else {
    u.embedding.resize(model.dim());
    for (std::size_t r = 0; r < u.embedding.size(); ++r) {
      u.embedding[r] = u.raw[r] / norm;
    }
  }
  return u;
}

/// Softmax statistics of one row over its unmasked columns.
struct RowSoftmax {
  double loss = 0.0;
  std::vector<double> prob;  // per column; 0 where masked
};

RowSoftmax row_softmax(std::span<const double> sims, std::span<const char> mask,
                       std::size_t positive, double temperature) {
  RowSoftmax out;
  out.prob.assign(sims.size(), 0.0);
  double max_logit = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < sims.size(); ++j) {
    if (mask[j] && j != positive) continue;
    if (!std::isfinite(sims[j])) {
      throw RuntimeError("non-finite similarity in training batch");
    }
    max_logit = std::max(max_logit, sims[j] / temperature);
  }
  double denom = 0.0;
  for (std::size_t j = 0; j < sims.size(); ++j) {
    if (mask[j] && j != positive) continue;
    out.prob[j] = std::exp(sims[j] / temperature - max_logit);
    denom += out.prob[j];
  }
  for (double& p : out.prob) p /= denom;
  out.loss = -std::log(out.prob[positive]);
  return out;
}

/// Accumulates the loss and (optionally) the weight gradient of a prepared
/// batch. grad, when present, is in the model's bucket-major layout and is
/// ADDED to, so callers can accumulate across micro-batches.
double batch_loss_grad(const PreparedBatch& pb, const EncoderModel& model,
                       double temperature, std::vector<double>* grad,
                       std::vector<std::uint32_t>* touched,
                       std::size_t* degenerate_units) {
  const std::size_t b = pb.batch_size;
  const std::size_t cols = pb.columns();
  const std::uint32_t dim = model.dim();

  std::vector<EncodedUnit> queries(b);
  std::vector<EncodedUnit> docs(cols);
  for (std::size_t i = 0; i < b; ++i) {
    queries[i] = encode_unit(model, pb.query_bags[i]);
  }
  // Identical doc columns (duplicated in-batch documents) are still encoded
  // per column; they contribute independently, mirroring the S matrix.
  for (std::size_t j = 0; j < cols; ++j) {
    docs[j] = encode_unit(model, *pb.doc_bags[j]);
  }
  if (degenerate_units != nullptr) {
    for (const auto& u : queries) *degenerate_units += u.degenerate ? 1 : 0;
    for (const auto& u : docs) *degenerate_units += u.degenerate ? 1 : 0;
  }

  // dL/dS, scaled by 1/(B * temperature).
  std::vector<double> sims(cols);
  std::vector<double> dsim(b * cols, 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      sims[j] = similarity(queries[i].embedding, docs[j].embedding);
    }
    const auto row =
        row_softmax(sims, std::span(pb.masked).subspan(i * cols, cols),
                    pb.positive_index[i], temperature);
    loss += row.loss;
    if (grad != nullptr) {
      const double scale = 1.0 / (static_cast<double>(b) * temperature);
      for (std::size_t j = 0; j < cols; ++j) {
        double g = row.prob[j];
        if (j == pb.positive_index[i]) g -= 1.0;
        dsim[i * cols + j] = g * scale;
      }
    }
  }
  loss /= static_cast<double>(b);
  if (grad == nullptr) return loss;

  // Backprop through the normalization into W, unit by unit. The gradient of
  // e = r / |r| pulls back as (g - (g.e)e) / |r|; degenerate units contribute
  // nothing.
  std::vector<double> dase(dim);
  auto scatter = [&](const EncodedUnit& u, const TokenBag& bag,
                     std::span<const double> d_embedding) {
    if (u.degenerate) return;
    double dot = 0.0;
    for (std::uint32_t r = 0; r < dim; ++r) dot += d_embedding[r] * u.embedding[r];
    for (std::uint32_t r = 0; r < dim; ++r) {
      dase[r] = (d_embedding[r] - dot * u.embedding[r]) / u.norm;
    }
    for (const auto& [bucket, weight] : bag) {
      double* col = grad->data() + static_cast<std::size_t>(bucket) * dim;
      for (std::uint32_t r = 0; r < dim; ++r) col[r] += dase[r] * weight;
      if (touched != nullptr) touched->push_back(bucket);
    }
  };

  std::vector<double> d_emb(dim);
  for (std::size_t i = 0; i < b; ++i) {
    std::fill(d_emb.begin(), d_emb.end(), 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
      const double g = dsim[i * cols + j];
      if (g == 0.0) continue;
      for (std::uint32_t r = 0; r < dim; ++r) {
        d_emb[r] += g * docs[j].embedding[r];
      }
    }
    scatter(queries[i], pb.query_bags[i], d_emb);
  }
  for (std::size_t j = 0; j < cols; ++j) {
    std::fill(d_emb.begin(), d_emb.end(), 0.0);
    bool any = false;
    for (std::size_t i = 0; i < b; ++i) {
      const double g = dsim[i * cols + j];
      if (g == 0.0) continue;
      any = true;
      for (std::uint32_t r = 0; r < dim; ++r) {
        d_emb[r] += g * queries[i].embedding[r];
      }
    }
    if (any) scatter(docs[j], *pb.doc_bags[j], d_emb);
  }
  return loss;
}

std::size_t common_docs_per_query(std::span<const TrainingExample> examples) {
  if (examples.empty()) {
    throw ValidationError("batch assembly requires at least one example");
  }
  const std::size_t c = 1 + examples.front().negatives.size();
  for (const auto& ex : examples) {
    if (1 + ex.negatives.size() != c) {
      throw ValidationError(
          "batch examples disagree on docs-per-query: query " + ex.query.id +
          " has " + std::to_string(1 + ex.negatives.size()) + ", expected " +
          std::to_string(c));
    }
  }
  return c;
}

}  // namespace

void TrainingExample::validate() const {
  if (query.id.empty()) throw ValidationError("training example without query id");
  if (positive.empty()) {
    throw ValidationError("training example for query " + query.id +
                          " has no positive");
  }
  std::unordered_set<std::string> seen;
  for (const auto& n : negatives) {
    if (n == positive) {
      throw ValidationError("query " + query.id +
                            ": positive appears among negatives: " + n);
    }
    if (!seen.insert(n).second) {
      throw ValidationError("query " + query.id + ": duplicate negative " + n);
    }
  }
}

std::vector<double> TrainingBatch::similarity_matrix() const {
  std::vector<double> s(batch_size * columns());
  for (std::size_t i = 0; i < batch_size; ++i) {
    for (std::size_t j = 0; j < columns(); ++j) {
      double dot = 0.0;
      for (std::uint32_t r = 0; r < dim; ++r) {
        dot += query_embs[i * dim + r] * doc_embs[j * dim + r];
      }
      s[i * columns() + j] = dot;
    }
  }
  return s;
}

TrainingBatch assemble_batch(std::span<const TrainingExample> examples,
                             const EncoderModel& model,
                             const DocumentCollection& corpus,
                             const BatchOptions& opts) {
  for (const auto& ex : examples) ex.validate();
  const std::size_t c = common_docs_per_query(examples);
  BagCache bags(model, corpus);
  PreparedBatch pb = prepare_batch(examples, model, bags, opts, c);

  TrainingBatch batch;
  batch.batch_size = pb.batch_size;
  batch.docs_per_query = c;
  batch.dim = model.dim();
  batch.positive_index = pb.positive_index;
  batch.column_doc_ids = pb.column_doc_ids;
  batch.masked = pb.masked;
  batch.query_embs.resize(batch.batch_size * batch.dim);
  batch.doc_embs.resize(pb.columns() * batch.dim);
  for (std::size_t i = 0; i < pb.batch_size; ++i) {
    const auto u = encode_unit(model, pb.query_bags[i]);
    std::copy(u.embedding.begin(), u.embedding.end(),
              batch.query_embs.begin() + i * batch.dim);
  }
  for (std::size_t j = 0; j < pb.columns(); ++j) {
    const auto u = encode_unit(model, *pb.doc_bags[j]);
    std::copy(u.embedding.begin(), u.embedding.end(),
              batch.doc_embs.begin() + j * batch.dim);
  }
  return batch;
}

double infonce_loss(const TrainingBatch& batch, double temperature) {
  if (!(temperature > 0)) {
    throw ValidationError("infonce: temperature must be > 0");
  }
  const std::size_t cols = batch.columns();
  const auto sims = batch.similarity_matrix();
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.batch_size; ++i) {
    const auto row = row_softmax(
        std::span(sims).subspan(i * cols, cols),
        std::span(batch.masked).subspan(i * cols, cols),
        batch.positive_index[i], temperature);
    loss += row.loss;
  }
  return loss / static_cast<double>(batch.batch_size);
}

GradientResult loss_gradient(std::span<const TrainingExample> examples,
                             const EncoderModel& model,
                             const DocumentCollection& corpus,
                             double temperature, const BatchOptions& opts) {
  if (!(temperature > 0)) {
    throw ValidationError("infonce: temperature must be > 0");
  }
  for (const auto& ex : examples) ex.validate();
  const std::size_t c = common_docs_per_query(examples);
  BagCache bags(model, corpus);
  PreparedBatch pb = prepare_batch(examples, model, bags, opts, c);

  GradientResult out;
  out.grad.assign(model.weights().size(), 0.0);
  out.loss = batch_loss_grad(pb, model, temperature, &out.grad, nullptr,
                             &out.degenerate_units);
  return out;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0) || !std::isfinite(learning_rate)) {
    throw ValidationError("train: learning_rate must be finite and >= 0");
  }
  if (epochs < 1) throw ValidationError("train: epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("train: batch size must be >= 1");
  if (!(temperature > 0)) throw ValidationError("train: temperature must be > 0");
  if (grad_accum_steps < 1) {
    throw ValidationError("train: grad_accum_steps must be >= 1");
  }
}

TrainResult train(const EncoderModel& model,
                  std::span<const TrainingExample> dataset,
                  const DocumentCollection& corpus, const TrainConfig& cfg,
                  const RelevanceJudgments* qrels,
                  const std::string& log_path) {
  cfg.validate();
  if (dataset.empty()) throw ValidationError("train: empty dataset");
  for (const auto& ex : dataset) ex.validate();

  TrainResult result;
  result.model = model;
  EncoderModel& m = result.model;
  const std::uint32_t dim = m.dim();

  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path, std::ios::trunc);
    if (!log) throw RuntimeError("cannot write training log: " + log_path);
  }

  BagCache bags(m, corpus);
  BatchOptions opts;
  opts.mask_in_batch_positives = cfg.mask_in_batch_positives;
  opts.qrels = qrels;

  std::vector<double> grad(m.weights().size(), 0.0);
  std::vector<std::uint32_t> touched;

  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) {
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
      rng.shuffle(order);
    }

    int step = 0;
    std::size_t cursor = 0;
    while (cursor < order.size()) {
      double group_loss = 0.0;
      int group_micro = 0;
      for (int micro = 0; micro < cfg.grad_accum_steps && cursor < order.size();
           ++micro) {
        const std::size_t take =
            std::min(cfg.batch_size, order.size() - cursor);
        std::vector<TrainingExample> batch_examples;
        batch_examples.reserve(take);
        std::size_t min_c = std::numeric_limits<std::size_t>::max();
        for (std::size_t k = 0; k < take; ++k) {
          batch_examples.push_back(dataset[order[cursor + k]]);
          min_c = std::min(min_c, 1 + batch_examples.back().negatives.size());
        }
        cursor += take;
        bool truncated = false;
        for (auto& ex : batch_examples) {
          if (1 + ex.negatives.size() > min_c) {
            ex.negatives.resize(min_c - 1);
            truncated = true;
          }
        }
        if (truncated) ++result.truncated_batches;

        PreparedBatch pb =
            prepare_batch(batch_examples, m, bags, opts, min_c);
        group_loss += batch_loss_grad(pb, m, cfg.temperature, &grad, &touched,
                                      &result.degenerate_units);
        ++group_micro;
      }

      const double mean_loss = group_loss / group_micro;
      if (!std::isfinite(mean_loss)) {
        throw RuntimeError("train: non-finite loss at epoch " +
                           std::to_string(epoch) + ", step " +
                           std::to_string(step + 1));
      }
      ++step;

      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
      const double scale = cfg.learning_rate / group_micro;
      for (std::uint32_t bucket : touched) {
        double* w = m.mutable_weights().data() +
                    static_cast<std::size_t>(bucket) * dim;
        double* g = grad.data() + static_cast<std::size_t>(bucket) * dim;
        for (std::uint32_t r = 0; r < dim; ++r) {
          w[r] -= scale * g[r];
          g[r] = 0.0;
        }
      }
      touched.clear();

      result.history.push_back(TrainStep{epoch, step, mean_loss});
      if (log.is_open()) {
        log << nlohmann::json{{"epoch", epoch}, {"step", step},
                              {"loss", mean_loss}}
                   .dump()
            << "\n";
      }
    }
  }
  return result;
}

}  // namespace duorank
