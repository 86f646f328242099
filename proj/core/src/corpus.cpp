#include "duorank/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <unordered_set>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "binio.hpp"
#include "duorank/common.hpp"

namespace duorank {

namespace {

using nlohmann::json;

std::string trimmed(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeError("cannot write file: " + path);
  return out;
}

}  // namespace

DocumentCollection::DocumentCollection(std::vector<Document> docs)
    : docs_(std::move(docs)) {
  index_.reserve(docs_.size());
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    if (docs_[i].id.empty()) {
      throw ValidationError("document at position " + std::to_string(i) +
                            " has an empty id");
    }
    if (!index_.emplace(docs_[i].id, i).second) {
      throw ValidationError("duplicate document id: " + docs_[i].id);
    }
  }
}

std::size_t DocumentCollection::index_of(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? npos : it->second;
}

const Document* DocumentCollection::find(const std::string& id) const {
  auto i = index_of(id);
  return i == npos ? nullptr : &docs_[i];
}

QueryCollection::QueryCollection(std::vector<Query> queries)
    : queries_(std::move(queries)) {
  index_.reserve(queries_.size());
  for (std::size_t i = 0; i < queries_.size(); ++i) {
    if (queries_[i].id.empty()) {
      throw ValidationError("query at position " + std::to_string(i) +
                            " has an empty id");
    }
    if (!index_.emplace(queries_[i].id, i).second) {
      throw ValidationError("duplicate query id: " + queries_[i].id);
    }
  }
}

const Query* QueryCollection::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &queries_[it->second];
}

int RelevanceJudgments::grade(const std::string& query_id,
                              const std::string& doc_id) const {
  auto q = entries.find(query_id);
  if (q == entries.end()) return 0;
  auto d = q->second.find(doc_id);
  return d == q->second.end() ? 0 : d->second;
}

std::vector<std::string> RelevanceJudgments::positives(
    const std::string& query_id) const {
  std::vector<std::string> out;
  auto q = entries.find(query_id);
  if (q == entries.end()) return out;
  for (const auto& [doc, grade] : q->second) {
    if (grade > 0) out.push_back(doc);
  }
  return out;
}

void RankedList::validate() const {
  std::unordered_set<std::string_view> seen;
  seen.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!seen.insert(items[i].doc_id).second) {
      throw ValidationError("ranked list for query " + query_id +
                            " repeats doc id " + items[i].doc_id);
    }
    if (!std::isfinite(items[i].score)) {
      throw ValidationError("ranked list for query " + query_id +
                            " has a non-finite score at rank " +
                            std::to_string(i + 1));
    }
    if (items[i].doc_id.empty()) {
      throw ValidationError("ranked list for query " + query_id +
                            " has an empty doc id");
    }
    if (i > 0 && !rank_before(items[i - 1].score, items[i - 1].doc_id,
                              items[i].score, items[i].doc_id)) {
      throw ValidationError("ranked list for query " + query_id +
                            " is out of order at rank " + std::to_string(i + 1));
    }
  }
}

EmbeddingMatrix::EmbeddingMatrix(std::uint32_t dim, std::vector<std::string> ids,
                                 std::vector<float> data)
    : dim_(dim), ids_(std::move(ids)), data_(std::move(data)) {
  if (dim_ == 0) throw ValidationError("embedding matrix dim must be positive");
  if (data_.size() != ids_.size() * static_cast<std::size_t>(dim_)) {
    throw ValidationError("embedding matrix shape mismatch");
  }
}

void EmbeddingMatrix::validate() const {
  for (std::size_t i = 0; i < rows(); ++i) {
    double sq = 0.0;
    for (float v : row(i)) sq += static_cast<double>(v) * v;
    const double norm = std::sqrt(sq);
    if (!(std::fabs(norm - 1.0) <= 1e-6)) {
      throw ValidationError("embedding row " + ids_[i] + " has norm " +
                            std::to_string(norm) + ", expected 1");
    }
  }
}

namespace {

std::vector<json> parse_jsonl(const std::string& path) {
  auto in = open_input(path);
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trimmed(line).empty() && in.peek() == EOF) break;  // trailing newline
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": malformed JSON line");
    }
    out.push_back(std::move(j));
  }
  return out;
}

std::string required_string(const json& j, const char* key,
                            const std::string& where) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw ValidationError(where + ": missing string field \"" + key + "\"");
  }
  return j[key].get<std::string>();
}

}  // namespace

DocumentCollection load_corpus(const std::string& path) {
  std::vector<Document> docs;
  std::size_t lineno = 0;
  for (const auto& j : parse_jsonl(path)) {
    ++lineno;
    const std::string where = path + ":" + std::to_string(lineno);
    Document d;
    d.id = required_string(j, "id", where);
    d.text = required_string(j, "text", where);
    if (j.contains("title")) d.title = j["title"].get<std::string>();
    if (trimmed(d.text).empty()) {
      throw ValidationError(where + ": document " + d.id + " has empty text");
    }
    docs.push_back(std::move(d));
  }
  return DocumentCollection(std::move(docs));
}

QueryCollection load_queries(const std::string& path) {
  std::vector<Query> queries;
  std::size_t lineno = 0;
  for (const auto& j : parse_jsonl(path)) {
    ++lineno;
    const std::string where = path + ":" + std::to_string(lineno);
    Query q;
    q.id = required_string(j, "id", where);
    q.text = required_string(j, "text", where);
    queries.push_back(std::move(q));
  }
  return QueryCollection(std::move(queries));
}

void write_corpus(const DocumentCollection& docs, const std::string& path) {
  auto out = open_output(path);
  for (const auto& d : docs.docs()) {
    json j{{"id", d.id}, {"text", d.text}};
    if (d.title) j["title"] = *d.title;
    out << j.dump() << "\n";
  }
}

void write_queries(const QueryCollection& queries, const std::string& path) {
  auto out = open_output(path);
  for (const auto& q : queries.queries()) {
    out << json{{"id", q.id}, {"text", q.text}}.dump() << "\n";
  }
}

QrelsLoadResult load_qrels(const std::string& path) {
  auto in = open_input(path);
  QrelsLoadResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trimmed(line).empty()) continue;
    std::istringstream fields(line);
    std::string qid, iter, docid, grade_str, extra;
    if (!(fields >> qid >> iter >> docid >> grade_str) || (fields >> extra)) {
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": expected 4 columns (qid 0 docid grade)");
    }
    int grade = 0;
    try {
      std::size_t consumed = 0;
      grade = std::stoi(grade_str, &consumed);
      if (consumed != grade_str.size()) throw std::invalid_argument(grade_str);
    } catch (const std::exception&) {
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": non-integer grade \"" + grade_str + "\"");
    }
    if (grade < 0) {
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": negative grade " + std::to_string(grade));
    }
    auto& per_query = result.qrels.entries[qid];
    auto [it, inserted] = per_query.emplace(docid, grade);
    if (!inserted) {
      it->second = grade;  // last line wins
      ++result.overwrite_warnings;
    }
  }
  return result;
}

void write_qrels(const RelevanceJudgments& qrels, const std::string& path) {
  auto out = open_output(path);
  for (const auto& [qid, docs] : qrels.entries) {
    for (const auto& [docid, grade] : docs) {
      out << qid << "\t0\t" << docid << "\t" << grade << "\n";
    }
  }
}

void write_run(std::span<const RankedList> lists, const std::string& tag,
               const std::string& path) {
  auto out = open_output(path);
  char score_buf[32];
  for (const auto& list : lists) {
    list.validate();
    for (std::size_t i = 0; i < list.items.size(); ++i) {
      std::snprintf(score_buf, sizeof(score_buf), "%.6f", list.items[i].score);
      out << list.query_id << " Q0 " << list.items[i].doc_id << " " << (i + 1)
          << " " << score_buf << " " << tag << "\n";
    }
  }
}

std::vector<RankedList> read_run(const std::string& path) {
  auto in = open_input(path);
  std::vector<RankedList> lists;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trimmed(line).empty()) continue;
    std::istringstream fields(line);
    std::string qid, q0, docid, rank_str, score_str, tag;
    if (!(fields >> qid >> q0 >> docid >> rank_str >> score_str >> tag)) {
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": expected 6 run-file columns");
    }
    double score = 0.0;
    try {
      score = std::stod(score_str);
    } catch (const std::exception&) {
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": bad score \"" + score_str + "\"");
    }
    if (lists.empty() || lists.back().query_id != qid) {
      lists.push_back(RankedList{qid, {}});
    }
    lists.back().items.push_back(RankedItem{docid, score});
  }
  return lists;
}

void write_embeddings(const EmbeddingMatrix& m, const std::string& path) {
  m.validate();
  if (path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl") {
    auto out = open_output(path);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      json vec = json::array();
      for (float v : m.row(i)) vec.push_back(v);
      out << json{{"id", m.ids()[i]}, {"vec", std::move(vec)}}.dump() << "\n";
    }
    return;
  }
  auto out = open_output(path);
  out.write("EMB1", 4);
  binio::put_u32(out, m.dim());
  binio::put_u32(out, static_cast<std::uint32_t>(m.rows()));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const std::string& id = m.ids()[i];
    if (id.size() > 0xFFFF) {
      throw ValidationError("embedding id too long: " + id.substr(0, 32));
    }
    binio::put_u16(out, static_cast<std::uint16_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (float v : m.row(i)) binio::put_f32(out, v);
  }
  if (!out) throw RuntimeError("failed writing embeddings to " + path);
}

EmbeddingMatrix read_embeddings(const std::string& path) {
  auto in = open_input(path);
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() == 4 && std::string_view(magic, 4) == "EMB1") {
    const std::uint32_t dim = binio::get_u32(in);
    const std::uint32_t count = binio::get_u32(in);
    if (!in || dim == 0) {
      throw ValidationError(path + ": bad embedding header");
    }
    std::vector<std::string> ids;
    std::vector<float> data;
    ids.reserve(count);
    data.reserve(static_cast<std::size_t>(count) * dim);
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint16_t len = binio::get_u16(in);
      std::string id(len, '\0');
      in.read(id.data(), len);
      for (std::uint32_t k = 0; k < dim; ++k) data.push_back(binio::get_f32(in));
      if (!in) {
        throw ValidationError(path + ": truncated embedding file at row " +
                              std::to_string(i));
      }
      ids.push_back(std::move(id));
    }
    return EmbeddingMatrix(dim, std::move(ids), std::move(data));
  }

  // JSONL fallback: {"id": ..., "vec": [...]}.
  std::vector<std::string> ids;
  std::vector<float> data;
  std::uint32_t dim = 0;
  std::size_t lineno = 0;
  for (const auto& j : parse_jsonl(path)) {
    ++lineno;
    const std::string where = path + ":" + std::to_string(lineno);
    if (!j.contains("id") || !j.contains("vec") || !j["vec"].is_array()) {
      throw ValidationError(where + ": expected {\"id\", \"vec\"}");
    }
    if (dim == 0) {
      dim = static_cast<std::uint32_t>(j["vec"].size());
      if (dim == 0) throw ValidationError(where + ": empty vector");
    } else if (j["vec"].size() != dim) {
      throw ValidationError(where + ": vector length " +
                            std::to_string(j["vec"].size()) +
                            " does not match dim " + std::to_string(dim));
    }
    ids.push_back(j["id"].get<std::string>());
    for (const auto& v : j["vec"]) data.push_back(v.get<float>());
  }
  if (ids.empty()) throw ValidationError(path + ": not an embedding file");
  return EmbeddingMatrix(dim, std::move(ids), std::move(data));
}

}  // namespace duorank
