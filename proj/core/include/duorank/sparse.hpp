#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "duorank/corpus.hpp"
#include "duorank/text.hpp"

namespace duorank {

struct SparseParams {
  double k1 = 1.2;
  double b = 0.75;
  double delta = 1.0;  // BM25+ lower-bound bonus; 0 recovers plain BM25

  void validate() const;
};

enum class SparseScorer { Bm25Plus, TfIdf };

struct Posting {
  std::uint32_t doc = 0;
  std::uint32_t tf = 0;
};

/// Inverted index over a tokenized corpus. Immutable after build; concurrent
/// searches are safe.
class SparseIndex {
 public:
  SparseIndex() = default;

  static SparseIndex build(const DocumentCollection& docs,
                           const TokenizerConfig& cfg,
                           const SparseParams& params);

  std::size_t doc_count() const { return doc_ids_.size(); }
  double avg_doc_length() const { return avg_doc_length_; }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  const std::vector<std::uint32_t>& doc_lengths() const { return doc_lengths_; }
  const SparseParams& params() const { return params_; }
  const TokenizerConfig& tokenizer() const { return analyzer_.config(); }
  std::size_t empty_doc_warnings() const { return empty_doc_warnings_; }

  std::uint32_t doc_frequency(const std::string& token) const;
  std::uint32_t term_frequency(const std::string& token,
                               std::size_t doc_index) const;

  /// Sum over distinct query tokens present in the document of
  ///   idf(t) * ((k1+1)*tf / (k1*(1-b+b*dl/avgdl) + tf) + delta),
  /// idf(t) = ln((N - df + 0.5)/(df + 0.5) + 1).
  double bm25plus_score(const std::vector<std::string>& query_tokens,
                        std::size_t doc_index) const;

  /// Cosine of L2-normalized tf*idf vectors, idf(t) = ln((1+N)/(1+df)) + 1.
  double tfidf_score(const std::vector<std::string>& query_tokens,
                     std::size_t doc_index) const;

  /// Exhaustive scoring of every document, then top-k under the
  /// (score desc, doc id asc) rule. Zero-score documents participate.
  RankedList search(const Query& query, std::size_t k,
                    SparseScorer scorer) const;

  /// Full per-document score array in corpus order (Bm25Plus scorer); used as
  /// the b vector of the ensemble.
  std::vector<double> score_all(const Query& query, SparseScorer scorer) const;

  std::vector<std::string> analyze_query(const std::string& text) const;

  void save(const std::string& path) const;
  static SparseIndex load(const std::string& path);

 private:
  double bm25plus_idf(std::uint32_t df) const;
  double tfidf_idf(std::uint32_t df) const;
  double doc_tfidf_norm(std::size_t doc_index) const;

  SparseParams params_;
  Analyzer analyzer_;
  std::map<std::string, std::vector<Posting>> postings_;
  std::vector<std::string> doc_ids_;
  std::vector<std::uint32_t> doc_lengths_;
  double avg_doc_length_ = 0.0;
  std::vector<double> tfidf_norms_;  // per-doc L2 norm of the tf*idf vector
  std::size_t empty_doc_warnings_ = 0;
};

}  // namespace duorank
