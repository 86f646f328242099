// Independent reference implementations the test suites check against.
// Everything here recomputes results from first principles (raw token
// streams, direct formula evaluation, full sorts) without touching the
// library's index/encoder internals.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "duorank/corpus.hpp"
#include "duorank/text.hpp"

namespace oracles {

// --- sparse scoring, straight from the formulas over token lists ---

struct TokenizedCorpus {
  std::vector<std::string> ids;
  std::vector<std::vector<std::string>> docs;
  double avgdl = 0.0;
  std::map<std::string, std::size_t> doc_frequencies;  // by direct counting

  static TokenizedCorpus from(const duorank::DocumentCollection& corpus,
                              const duorank::Analyzer& analyzer) {
    TokenizedCorpus out;
    std::size_t total = 0;
    for (const auto& d : corpus.docs()) {
      out.ids.push_back(d.id);
      out.docs.push_back(analyzer.analyze(d.text));
      total += out.docs.back().size();
      std::set<std::string> distinct(out.docs.back().begin(),
                                     out.docs.back().end());
      for (const auto& term : distinct) ++out.doc_frequencies[term];
    }
    out.avgdl = static_cast<double>(total) / static_cast<double>(out.docs.size());
    return out;
  }

  std::size_t df(const std::string& term) const {
    auto it = doc_frequencies.find(term);
    return it == doc_frequencies.end() ? 0 : it->second;
  }
};

inline double bm25plus_oracle(const TokenizedCorpus& corpus,
                              const std::vector<std::string>& query_tokens,
                              std::size_t doc, double k1, double b,
                              double delta) {
  std::set<std::string> distinct(query_tokens.begin(), query_tokens.end());
  const double n = static_cast<double>(corpus.docs.size());
  const double dl = static_cast<double>(corpus.docs[doc].size());
  double score = 0.0;
  for (const auto& term : distinct) {
    const auto tf = static_cast<double>(
        std::count(corpus.docs[doc].begin(), corpus.docs[doc].end(), term));
    if (tf == 0) continue;
    const double df = static_cast<double>(corpus.df(term));
    const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
    const double tf_part =
        (k1 + 1.0) * tf / (k1 * (1.0 - b + b * dl / corpus.avgdl) + tf) + delta;
    score += idf * tf_part;
  }
  return score;
}

/// Plain BM25 (no lower-bound bonus), as its own formula rather than
/// delta = 0 substitution.
inline double bm25_oracle(const TokenizedCorpus& corpus,
                          const std::vector<std::string>& query_tokens,
                          std::size_t doc, double k1, double b) {
  std::set<std::string> distinct(query_tokens.begin(), query_tokens.end());
  const double n = static_cast<double>(corpus.docs.size());
  const double dl = static_cast<double>(corpus.docs[doc].size());
  double score = 0.0;
  for (const auto& term : distinct) {
    const auto tf = static_cast<double>(
        std::count(corpus.docs[doc].begin(), corpus.docs[doc].end(), term));
    if (tf == 0) continue;
    const double df = static_cast<double>(corpus.df(term));
    const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
    score += idf * ((k1 + 1.0) * tf /
                    (k1 * (1.0 - b + b * dl / corpus.avgdl) + tf));
  }
  return score;
}

/// Dense tf-idf cosine over the union vocabulary.
inline double tfidf_oracle(const TokenizedCorpus& corpus,
                           const std::vector<std::string>& query_tokens,
                           std::size_t doc) {
  std::map<std::string, double> qv, dv;
  for (const auto& t : query_tokens) qv[t] += 1.0;
  for (const auto& t : corpus.docs[doc]) dv[t] += 1.0;
  const double n = static_cast<double>(corpus.docs.size());
  auto idf = [&](const std::string& term) {
    return std::log((1.0 + n) / (1.0 + static_cast<double>(corpus.df(term)))) +
           1.0;
  };
  for (auto& [term, tf] : qv) tf *= idf(term);
  for (auto& [term, tf] : dv) tf *= idf(term);
  double dot = 0.0, qn = 0.0, dn = 0.0;
  for (const auto& [term, w] : qv) {
    qn += w * w;
    auto it = dv.find(term);
    if (it != dv.end()) dot += w * it->second;
  }
  for (const auto& [term, w] : dv) dn += w * w;
  if (qn == 0.0 || dn == 0.0) return 0.0;
  return dot / (std::sqrt(qn) * std::sqrt(dn));
}

/// Full sort of (score, id) pairs under the global tie rule.
inline duorank::RankedList full_sort_oracle(const std::vector<double>& scores,
                                            const std::vector<std::string>& ids,
                                            const std::string& query_id,
                                            std::size_t k) {
  std::vector<std::pair<double, std::string>> rows;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    rows.emplace_back(scores[i], ids[i]);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  duorank::RankedList out{query_id, {}};
  for (std::size_t i = 0; i < std::min(k, rows.size()); ++i) {
    out.items.push_back(duorank::RankedItem{rows[i].second, rows[i].first});
  }
  return out;
}

// --- InfoNCE as direct softmax cross-entropy (no log-sum-exp tricks) ---

/// sims: row-major B x cols; keep[i][j] false drops the column from row i's
/// denominator (positives are always kept by the caller's construction).
inline double softmax_ce_oracle(const std::vector<double>& sims,
                                const std::vector<char>& keep,
                                const std::vector<std::size_t>& positives,
                                std::size_t rows, std::size_t cols,
                                double temperature) {
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    double denom = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      if (keep[i * cols + j]) {
        denom += std::exp(sims[i * cols + j] / temperature);
      }
    }
    const double num = std::exp(sims[i * cols + positives[i]] / temperature);
    total += -std::log(num / denom);
  }
  return total / static_cast<double>(rows);
}

// --- retrieval metrics, re-derived per query ---

inline double recall_oracle(const std::vector<std::string>& ranking,
                            const std::set<std::string>& relevant, int k) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min<std::size_t>(ranking.size(), k); ++i) {
    hits += relevant.count(ranking[i]);
  }
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

inline double mrr_oracle(const std::vector<std::string>& ranking,
                         const std::set<std::string>& relevant, int k) {
  for (std::size_t i = 0; i < std::min<std::size_t>(ranking.size(), k); ++i) {
    if (relevant.count(ranking[i])) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

inline double map_oracle(const std::vector<std::string>& ranking,
                         const std::set<std::string>& relevant, int k) {
  double ap = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min<std::size_t>(ranking.size(), k); ++i) {
    if (relevant.count(ranking[i])) {
      ++hits;
      double precision = static_cast<double>(hits) / static_cast<double>(i + 1);
      ap += precision;
    }
  }
  return ap / static_cast<double>(relevant.size());
}

inline double ndcg_oracle(const std::vector<std::string>& ranking,
                          const std::map<std::string, int>& grades, int k) {
  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min<std::size_t>(ranking.size(), k); ++i) {
    auto it = grades.find(ranking[i]);
    const int g = it == grades.end() ? 0 : it->second;
    dcg += (std::pow(2.0, g) - 1.0) / (std::log(i + 2.0) / std::log(2.0));
  }
  std::vector<int> ideal;
  for (const auto& [doc, g] : grades) ideal.push_back(g);
  std::sort(ideal.rbegin(), ideal.rend());
  double idcg = 0.0;
  for (std::size_t i = 0; i < std::min<std::size_t>(ideal.size(), k); ++i) {
    idcg += (std::pow(2.0, ideal[i]) - 1.0) / (std::log(i + 2.0) / std::log(2.0));
  }
  return dcg / idcg;
}

}  // namespace oracles
