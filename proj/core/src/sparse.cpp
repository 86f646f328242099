#include "duorank/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "binio.hpp"
#include "duorank/common.hpp"

namespace duorank {

namespace {

std::vector<std::string> distinct(std::vector<std::string> tokens) {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

std::map<std::string, std::uint32_t> term_counts(
    const std::vector<std::string>& tokens) {
  std::map<std::string, std::uint32_t> counts;
  for (const auto& t : tokens) ++counts[t];
  return counts;
}

}  // namespace

void SparseParams::validate() const {
  if (!(k1 > 0)) throw ValidationError("sparse: k1 must be > 0");
  if (!(b >= 0 && b <= 1)) throw ValidationError("sparse: b must be in [0,1]");
  if (!(delta >= 0)) throw ValidationError("sparse: delta must be >= 0");
}

SparseIndex SparseIndex::build(const DocumentCollection& docs,
                               const TokenizerConfig& cfg,
                               const SparseParams& params) {
  params.validate();
  if (docs.empty()) throw ValidationError("sparse: cannot index an empty corpus");

  SparseIndex idx;
  idx.params_ = params;
  idx.analyzer_ = Analyzer(cfg);
  idx.doc_ids_.reserve(docs.size());
  idx.doc_lengths_.reserve(docs.size());

  std::uint64_t total_tokens = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const Document& d = docs.at(i);
    const auto tokens = idx.analyzer_.analyze(d.text);
    idx.doc_ids_.push_back(d.id);
    idx.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
    total_tokens += tokens.size();
    if (tokens.empty()) ++idx.empty_doc_warnings_;
    for (const auto& [term, tf] : term_counts(tokens)) {
      idx.postings_[term].push_back(
          Posting{static_cast<std::uint32_t>(i), tf});
    }
  }
  if (total_tokens == 0) {
    throw ValidationError("sparse: corpus tokenized to zero tokens");
  }
  idx.avg_doc_length_ =
      static_cast<double>(total_tokens) / static_cast<double>(docs.size());

  // Per-doc tf*idf norms, accumulated in token order for reproducibility.
  idx.tfidf_norms_.assign(docs.size(), 0.0);
  for (const auto& [term, plist] : idx.postings_) {
    const double idf = idx.tfidf_idf(static_cast<std::uint32_t>(plist.size()));
    for (const Posting& p : plist) {
      const double w = idf * static_cast<double>(p.tf);
      idx.tfidf_norms_[p.doc] += w * w;
    }
  }
  for (double& n : idx.tfidf_norms_) n = std::sqrt(n);
  return idx;
}

std::uint32_t SparseIndex::doc_frequency(const std::string& token) const {
  auto it = postings_.find(token);
  return it == postings_.end() ? 0
                               : static_cast<std::uint32_t>(it->second.size());
}

std::uint32_t SparseIndex::term_frequency(const std::string& token,
                                          std::size_t doc_index) const {
  auto it = postings_.find(token);
  if (it == postings_.end()) return 0;
  const auto& plist = it->second;
  auto p = std::lower_bound(plist.begin(), plist.end(), doc_index,
                            [](const Posting& a, std::size_t d) {
                              return a.doc < d;
                            });
  return (p != plist.end() && p->doc == doc_index) ? p->tf : 0;
}

double SparseIndex::bm25plus_idf(std::uint32_t df) const {
  const double n = static_cast<double>(doc_count());
  return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

double SparseIndex::tfidf_idf(std::uint32_t df) const {
  const double n = static_cast<double>(doc_count());
  return std::log((1.0 + n) / (1.0 + df)) + 1.0;
}

double SparseIndex::bm25plus_score(const std::vector<std::string>& query_tokens,
                                   std::size_t doc_index) const {
  if (doc_index >= doc_count()) {
    throw ValidationError("sparse: document index out of range");
  }
  const double dl = doc_lengths_[doc_index];
  const double len_norm =
      params_.k1 * (1.0 - params_.b + params_.b * dl / avg_doc_length_);
  double score = 0.0;
  for (const auto& term : distinct(query_tokens)) {
    const std::uint32_t tf = term_frequency(term, doc_index);
    if (tf == 0) continue;
    const double tf_part =
        (params_.k1 + 1.0) * tf / (len_norm + tf) + params_.delta;
    score += bm25plus_idf(doc_frequency(term)) * tf_part;
  }
  return score;
}

double SparseIndex::tfidf_score(const std::vector<std::string>& query_tokens,
                                std::size_t doc_index) const {
  if (doc_index >= doc_count()) {
    throw ValidationError("sparse: document index out of range");
  }
  double dot = 0.0;
  double query_sq = 0.0;
  for (const auto& [term, qtf] : term_counts(query_tokens)) {
    const double idf = tfidf_idf(doc_frequency(term));
    const double qw = idf * static_cast<double>(qtf);
    query_sq += qw * qw;
    const std::uint32_t dtf = term_frequency(term, doc_index);
    if (dtf > 0) dot += qw * idf * static_cast<double>(dtf);
  }
  const double qnorm = std::sqrt(query_sq);
  const double dnorm = tfidf_norms_[doc_index];
  if (qnorm == 0.0 || dnorm == 0.0) return 0.0;
  return dot / (qnorm * dnorm);
}

std::vector<double> SparseIndex::score_all(const Query& query,
                                           SparseScorer scorer) const {
  const auto tokens = analyzer_.analyze(query.text);
  std::vector<double> scores(doc_count(), 0.0);
  if (scorer == SparseScorer::Bm25Plus) {
    for (const auto& term : distinct(tokens)) {
      auto it = postings_.find(term);
      if (it == postings_.end()) continue;
      const double idf = bm25plus_idf(static_cast<std::uint32_t>(it->second.size()));
      for (const Posting& p : it->second) {
        const double dl = doc_lengths_[p.doc];
        const double len_norm =
            params_.k1 * (1.0 - params_.b + params_.b * dl / avg_doc_length_);
        scores[p.doc] +=
            idf * ((params_.k1 + 1.0) * p.tf / (len_norm + p.tf) + params_.delta);
      }
    }
  } else {
    double query_sq = 0.0;
    for (const auto& [term, qtf] : term_counts(tokens)) {
      const std::uint32_t df = doc_frequency(term);
      const double idf = tfidf_idf(df);
      const double qw = idf * static_cast<double>(qtf);
      query_sq += qw * qw;
      if (df == 0) continue;
      for (const Posting& p : postings_.at(term)) {
        scores[p.doc] += qw * idf * static_cast<double>(p.tf);
      }
    }
    const double qnorm = std::sqrt(query_sq);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double dnorm = tfidf_norms_[i];
      scores[i] = (qnorm == 0.0 || dnorm == 0.0) ? 0.0
                                                 : scores[i] / (qnorm * dnorm);
    }
  }
  return scores;
}

RankedList SparseIndex::search(const Query& query, std::size_t k,
                               SparseScorer scorer) const {
  if (k == 0) throw ValidationError("sparse: k must be >= 1");
  const auto scores = score_all(query, scorer);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + take, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return rank_before(scores[a], doc_ids_[a], scores[b],
                                         doc_ids_[b]);
                    });
  RankedList out{query.id, {}};
  out.items.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.items.push_back(RankedItem{doc_ids_[order[i]], scores[order[i]]});
  }
  return out;
}

std::vector<std::string> SparseIndex::analyze_query(const std::string& text) const {
  return analyzer_.analyze(text);
}

namespace {
constexpr char kIndexMagic[4] = {'S', 'I', 'X', '1'};
constexpr std::uint32_t kIndexVersion = 1;
}  // namespace

void SparseIndex::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeError("cannot write index file: " + path);
  out.write(kIndexMagic, 4);
  binio::put_u32(out, kIndexVersion);
  binio::put_f64(out, params_.k1);
  binio::put_f64(out, params_.b);
  binio::put_f64(out, params_.delta);

  const TokenizerConfig& cfg = analyzer_.config();
  out.put(cfg.mode == TokenizerMode::UnicodeWords ? 0 : 1);
  out.put(static_cast<char>(cfg.ngram));
  out.put(cfg.lowercase ? 1 : 0);
  binio::put_u32(out, static_cast<std::uint32_t>(cfg.stopwords.size()));
  for (const auto& w : cfg.stopwords) binio::put_string(out, w);
  binio::put_u32(out, static_cast<std::uint32_t>(cfg.strip_categories.size()));
  for (const auto& c : cfg.strip_categories) binio::put_string(out, c);

  binio::put_u32(out, static_cast<std::uint32_t>(doc_count()));
  binio::put_f64(out, avg_doc_length_);
  binio::put_u64(out, empty_doc_warnings_);
  for (const auto& id : doc_ids_) binio::put_string(out, id);
  for (std::uint32_t len : doc_lengths_) binio::put_u32(out, len);

  binio::put_u32(out, static_cast<std::uint32_t>(postings_.size()));
  for (const auto& [term, plist] : postings_) {
    binio::put_string(out, term);
    binio::put_u32(out, static_cast<std::uint32_t>(plist.size()));
    for (const Posting& p : plist) {
      binio::put_u32(out, p.doc);
      binio::put_u32(out, p.tf);
    }
  }
  if (!out) throw RuntimeError("failed writing index file: " + path);
}

SparseIndex SparseIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open index file: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (std::string_view(magic, 4) != std::string_view(kIndexMagic, 4)) {
    throw ValidationError(path + ": not a sparse index file");
  }
  if (binio::get_u32(in) != kIndexVersion) {
    throw ValidationError(path + ": unsupported index version");
  }
  SparseIndex idx;
  idx.params_.k1 = binio::get_f64(in);
  idx.params_.b = binio::get_f64(in);
  idx.params_.delta = binio::get_f64(in);

  TokenizerConfig cfg;
  cfg.mode = in.get() == 0 ? TokenizerMode::UnicodeWords : TokenizerMode::CharNgram;
  cfg.ngram = in.get();
  cfg.lowercase = in.get() != 0;
  cfg.stopwords.clear();
  for (std::uint32_t i = 0, n = binio::get_u32(in); i < n; ++i) {
    cfg.stopwords.insert(binio::get_string(in));
  }
  cfg.strip_categories.clear();
  for (std::uint32_t i = 0, n = binio::get_u32(in); i < n; ++i) {
    cfg.strip_categories.insert(binio::get_string(in));
  }
  idx.analyzer_ = Analyzer(cfg);

  const std::uint32_t doc_count = binio::get_u32(in);
  idx.avg_doc_length_ = binio::get_f64(in);
  idx.empty_doc_warnings_ = binio::get_u64(in);
  idx.doc_ids_.reserve(doc_count);
  for (std::uint32_t i = 0; i < doc_count; ++i) {
    idx.doc_ids_.push_back(binio::get_string(in));
  }
  idx.doc_lengths_.reserve(doc_count);
  for (std::uint32_t i = 0; i < doc_count; ++i) {
    idx.doc_lengths_.push_back(binio::get_u32(in));
  }

  const std::uint32_t vocab = binio::get_u32(in);
  for (std::uint32_t i = 0; i < vocab; ++i) {
    std::string term = binio::get_string(in);
    const std::uint32_t plen = binio::get_u32(in);
    std::vector<Posting> plist;
    plist.reserve(plen);
    for (std::uint32_t p = 0; p < plen; ++p) {
      Posting post;
      post.doc = binio::get_u32(in);
      post.tf = binio::get_u32(in);
      plist.push_back(post);
    }
    idx.postings_.emplace(std::move(term), std::move(plist));
  }
  if (!in) throw ValidationError(path + ": truncated index file");

  idx.tfidf_norms_.assign(doc_count, 0.0);
  for (const auto& [term, plist] : idx.postings_) {
    const double idf = idx.tfidf_idf(static_cast<std::uint32_t>(plist.size()));
    for (const Posting& p : plist) {
      const double w = idf * static_cast<double>(p.tf);
      idx.tfidf_norms_[p.doc] += w * w;
    }
  }
  for (double& n : idx.tfidf_norms_) n = std::sqrt(n);
  return idx;
}

}  // namespace duorank
