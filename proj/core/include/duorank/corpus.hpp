#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace duorank {

struct Document {
  std::string id;
  std::string text;
  std::optional<std::string> title;
};

struct Query {
  std::string id;
  std::string text;
};

/// Immutable after load; safe for concurrent reads.
class DocumentCollection {
 public:
  DocumentCollection() = default;
  explicit DocumentCollection(std::vector<Document> docs);

  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  const Document& at(std::size_t i) const { return docs_.at(i); }
  const std::vector<Document>& docs() const { return docs_; }

  /// npos when absent.
  std::size_t index_of(const std::string& id) const;
  const Document* find(const std::string& id) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> index_;
};

class QueryCollection {
 public:
  QueryCollection() = default;
  explicit QueryCollection(std::vector<Query> queries);

  std::size_t size() const { return queries_.size(); }
  const Query& at(std::size_t i) const { return queries_.at(i); }
  const std::vector<Query>& queries() const { return queries_; }
  const Query* find(const std::string& id) const;

 private:
  std::vector<Query> queries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// query-id -> doc-id -> grade. Grade > 0 means relevant.
struct RelevanceJudgments {
  std::map<std::string, std::map<std::string, int>> entries;

  int grade(const std::string& query_id, const std::string& doc_id) const;
  bool is_relevant(const std::string& query_id, const std::string& doc_id) const {
    return grade(query_id, doc_id) > 0;
  }
  /// Doc ids with grade > 0 for the query, sorted.
  std::vector<std::string> positives(const std::string& query_id) const;
};

struct RankedItem {
  std::string doc_id;
  double score = 0.0;
};

/// Scores non-increasing, ties broken by ascending doc id, no duplicate ids.
struct RankedList {
  std::string query_id;
  std::vector<RankedItem> items;

  /// Throws ValidationError when an invariant is broken (NaN, order, dups).
  void validate() const;
};

/// The global orderings used for every ranking in the project.
inline bool rank_before(double score_a, const std::string& id_a, double score_b,
                        const std::string& id_b) {
  if (score_a != score_b) return score_a > score_b;
  return id_a < id_b;
}

/// Unit-norm rows, one id per row, row-major f32 storage.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::uint32_t dim, std::vector<std::string> ids,
                  std::vector<float> data);

  std::uint32_t dim() const { return dim_; }
  std::size_t rows() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

  /// Checks every row norm is within 1e-6 of 1.
  void validate() const;

 private:
  std::uint32_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> data_;
};

// --- JSONL corpus / query files: {"id": ..., "text": ..., "title"?: ...} ---

DocumentCollection load_corpus(const std::string& path);
QueryCollection load_queries(const std::string& path);
void write_corpus(const DocumentCollection& docs, const std::string& path);
void write_queries(const QueryCollection& queries, const std::string& path);

// --- TREC qrels: qid <ws> 0 <ws> docid <ws> grade ---

struct QrelsLoadResult {
  RelevanceJudgments qrels;
  std::size_t overwrite_warnings = 0;  // duplicate (query, doc) lines; last wins
};

QrelsLoadResult load_qrels(const std::string& path);
void write_qrels(const RelevanceJudgments& qrels, const std::string& path);

// --- TREC run files: "qid Q0 docid rank score tag", score at 6 decimals ---

void write_run(std::span<const RankedList> lists, const std::string& tag,
               const std::string& path);
std::vector<RankedList> read_run(const std::string& path);

// --- Embedding files: "EMB1" binary, or JSONL when the path ends in .jsonl ---

void write_embeddings(const EmbeddingMatrix& m, const std::string& path);
EmbeddingMatrix read_embeddings(const std::string& path);

}  // namespace duorank
