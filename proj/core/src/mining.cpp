#include "duorank/mining.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "duorank/common.hpp"
#include "duorank/retrieval.hpp"
#include "duorank/rng.hpp"

namespace duorank {

namespace {

using nlohmann::json;

/// Per-(query, positive) RNG stream: mining output does not depend on the
/// order queries are processed in.
Rng example_rng(const MiningConfig& cfg, const std::string& query_id,
                const std::string& positive) {
  return Rng(mix_seed(mix_seed(cfg.seed, fnv1a64(query_id)), fnv1a64(positive)));
}

std::vector<TrainingExample> examples_from_pool(
    const Query& query, const std::vector<std::string>& positives,
    const std::vector<std::string>& pool_in_rank_order, bool sample,
    std::size_t negatives_per_example, const MiningConfig& cfg,
    MiningStats* stats) {
  std::unordered_set<std::string> positive_set(positives.begin(),
                                               positives.end());
  std::vector<std::string> candidates;
  candidates.reserve(pool_in_rank_order.size());
  for (const auto& id : pool_in_rank_order) {
    if (!positive_set.count(id)) candidates.push_back(id);
  }

  std::vector<TrainingExample> out;
  out.reserve(positives.size());
  for (const auto& positive : positives) {
    TrainingExample ex;
    ex.query = query;
    ex.positive = positive;
    if (candidates.size() < negatives_per_example && stats != nullptr) {
      ++stats->short_pool_warnings;
    }
    const std::size_t take = std::min(negatives_per_example, candidates.size());
    if (sample) {
      Rng rng = example_rng(cfg, query.id, positive);
      for (std::size_t idx :
           rng.sample_without_replacement(candidates.size(), take)) {
        ex.negatives.push_back(candidates[idx]);
      }
    } else {
      ex.negatives.assign(candidates.begin(), candidates.begin() + take);
    }
    ex.validate();
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

void MiningConfig::validate() const {
  if (a1 < 1) throw ValidationError("mining: a1 must be >= 1");
  if (a2 < 1) throw ValidationError("mining: a2 must be >= 1");
  if (per_query_negatives > a1) {
    throw ValidationError("mining: per_query_negatives must be <= a1");
  }
  if (phase2_docs_per_query < 2) {
    throw ValidationError("mining: phase2_docs_per_query must be >= 2");
  }
  if (phase2_docs_per_query > a2 + 1) {
    throw ValidationError("mining: phase2_docs_per_query must be <= a2 + 1");
  }
}

std::vector<TrainingExample> mine_global(const Query& query,
                                         const RelevanceJudgments& qrels,
                                         const SparseIndex& index,
                                         const MiningConfig& cfg,
                                         MiningStats* stats) {
  cfg.validate();
  const auto positives = qrels.positives(query.id);
  if (positives.empty()) {
    if (stats != nullptr) ++stats->skipped_no_positive;
    return {};
  }
  const RankedList top = index.search(query, cfg.a1, SparseScorer::Bm25Plus);
  std::vector<std::string> pool;
  pool.reserve(top.items.size());
  for (const auto& item : top.items) pool.push_back(item.doc_id);
  return examples_from_pool(query, positives, pool, /*sample=*/true,
                            cfg.per_query_negatives, cfg, stats);
}

std::vector<TrainingExample> mine_hard(const Query& query,
                                       const RelevanceJudgments& qrels,
                                       const EncoderModel& model,
                                       const EmbeddingMatrix& corpus_embeddings,
                                       const MiningConfig& cfg,
                                       MiningStats* stats) {
  cfg.validate();
  const auto positives = qrels.positives(query.id);
  if (positives.empty()) {
    if (stats != nullptr) ++stats->skipped_no_positive;
    return {};
  }
  const RankedList top = search_dense(query, model, corpus_embeddings, cfg.a2);
  std::vector<std::string> pool;
  pool.reserve(top.items.size());
  for (const auto& item : top.items) pool.push_back(item.doc_id);
  return examples_from_pool(query, positives, pool, /*sample=*/false,
                            cfg.phase2_docs_per_query - 1, cfg, stats);
}

namespace {

template <typename MineOne>
std::vector<TrainingExample> mine_all(const QueryCollection& queries,
                                      MineOne&& mine_one) {
  std::vector<TrainingExample> all;
  for (const auto& q : queries.queries()) {
    auto part = mine_one(q);
    all.insert(all.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  std::sort(all.begin(), all.end(),
            [](const TrainingExample& a, const TrainingExample& b) {
              if (a.query.id != b.query.id) return a.query.id < b.query.id;
              return a.positive < b.positive;
            });
  return all;
}

}  // namespace

std::vector<TrainingExample> mine_global_all(const QueryCollection& queries,
                                             const RelevanceJudgments& qrels,
                                             const SparseIndex& index,
                                             const MiningConfig& cfg,
                                             MiningStats* stats) {
  return mine_all(queries, [&](const Query& q) {
    return mine_global(q, qrels, index, cfg, stats);
  });
}

std::vector<TrainingExample> mine_hard_all(const QueryCollection& queries,
                                           const RelevanceJudgments& qrels,
                                           const EncoderModel& model,
                                           const EmbeddingMatrix& corpus_embeddings,
                                           const MiningConfig& cfg,
                                           MiningStats* stats) {
  return mine_all(queries, [&](const Query& q) {
    return mine_hard(q, qrels, model, corpus_embeddings, cfg, stats);
  });
}

void write_mined(std::span<const TrainingExample> examples,
                 const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RuntimeError("cannot write mined dataset: " + path);
  for (const auto& ex : examples) {
    json negatives = json::array();
    for (const auto& n : ex.negatives) negatives.push_back(n);
    out << json{{"query_id", ex.query.id},
                {"positive", ex.positive},
                {"negatives", std::move(negatives)}}
               .dump()
        << "\n";
  }
}

std::vector<TrainingExample> read_mined(const std::string& path,
                                        const QueryCollection& queries) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open mined dataset: " + path);
  std::vector<TrainingExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": malformed JSON line");
    }
    TrainingExample ex;
    const std::string qid = j.at("query_id").get<std::string>();
    const Query* q = queries.find(qid);
    if (q == nullptr) {
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": unknown query id " + qid);
    }
    ex.query = *q;
    ex.positive = j.at("positive").get<std::string>();
    for (const auto& n : j.at("negatives")) {
      ex.negatives.push_back(n.get<std::string>());
    }
    ex.validate();
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace duorank
