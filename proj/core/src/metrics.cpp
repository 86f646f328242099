#include "duorank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "duorank/common.hpp"

namespace duorank {

namespace {

std::size_t depth(std::span<const std::string> ranking, int k) {
  return std::min(ranking.size(), static_cast<std::size_t>(k));
}

}  // namespace

void EvalCutoffs::validate() const {
  if (recall.empty()) throw ValidationError("eval: no recall cutoffs");
  for (int k : recall) {
    if (k < 1) throw ValidationError("eval: cutoffs must be >= 1");
  }
  if (mrr < 1 || map < 1 || ndcg < 1) {
    throw ValidationError("eval: cutoffs must be >= 1");
  }
}

double recall_at_k(std::span<const std::string> ranking,
                   const std::set<std::string>& relevant, int k) {
  if (relevant.empty()) throw ValidationError("recall: empty relevant set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < depth(ranking, k); ++i) {
    if (relevant.count(ranking[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double mrr_at_k(std::span<const std::string> ranking,
                const std::set<std::string>& relevant, int k) {
  if (relevant.empty()) throw ValidationError("mrr: empty relevant set");
  for (std::size_t i = 0; i < depth(ranking, k); ++i) {
    if (relevant.count(ranking[i])) {
      return 1.0 / static_cast<double>(i + 1);
    }
  }
  return 0.0;
}

double map_at_k(std::span<const std::string> ranking,
                const std::set<std::string>& relevant, int k) {
  if (relevant.empty()) throw ValidationError("map: empty relevant set");
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < depth(ranking, k); ++i) {
    if (relevant.count(ranking[i])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(relevant.size());
}

double ndcg_at_k(std::span<const std::string> ranking,
                 const std::map<std::string, int>& grades, int k) {
  std::vector<int> judged;
  judged.reserve(grades.size());
  bool any_positive = false;
  for (const auto& [doc, grade] : grades) {
    if (grade < 0) throw ValidationError("ndcg: negative grade for " + doc);
    judged.push_back(grade);
    any_positive = any_positive || grade > 0;
  }
  if (!any_positive) throw ValidationError("ndcg: no positive grades");

  auto gain = [](int grade) { return std::exp2(grade) - 1.0; };
  auto discount = [](std::size_t rank1) { return std::log2(rank1 + 1.0); };

  double dcg = 0.0;
  for (std::size_t i = 0; i < depth(ranking, k); ++i) {
    auto it = grades.find(ranking[i]);
    if (it != grades.end() && it->second > 0) {
      dcg += gain(it->second) / discount(i + 1);
    }
  }
  std::sort(judged.begin(), judged.end(), std::greater<int>());
  double idcg = 0.0;
  for (std::size_t i = 0; i < std::min(judged.size(), static_cast<std::size_t>(k));
       ++i) {
    if (judged[i] <= 0) break;
    idcg += gain(judged[i]) / discount(i + 1);
  }
  return dcg / idcg;
}

MetricReport evaluate_run(std::span<const RankedList> run,
                          const RelevanceJudgments& qrels,
                          const EvalCutoffs& cutoffs) {
  cutoffs.validate();
  if (run.empty()) throw ValidationError("eval: empty run");

  MetricReport report;
  report.cutoffs = cutoffs;
  for (int k : cutoffs.recall) report.metric_order.push_back("R@" + std::to_string(k));
  report.metric_order.push_back("MRR@" + std::to_string(cutoffs.mrr));
  report.metric_order.push_back("MAP@" + std::to_string(cutoffs.map));
  report.metric_order.push_back("nDCG@" + std::to_string(cutoffs.ndcg));

  // Sorted query order keeps aggregation independent of run-file order.
  std::map<std::string, const RankedList*> by_query;
  for (const auto& list : run) by_query.emplace(list.query_id, &list);

  for (const auto& [qid, list] : by_query) {
    auto judged = qrels.entries.find(qid);
    if (judged == qrels.entries.end()) {
      ++report.skipped_not_judged;
      continue;
    }
    std::set<std::string> relevant;
    for (const auto& [doc, grade] : judged->second) {
      if (grade > 0) relevant.insert(doc);
    }
    if (relevant.empty()) {
      ++report.skipped_no_relevant;
      continue;
    }
    std::vector<std::string> ranking;
    ranking.reserve(list->items.size());
    for (const auto& item : list->items) ranking.push_back(item.doc_id);

    for (int k : cutoffs.recall) {
      report.per_query["R@" + std::to_string(k)][qid] =
          recall_at_k(ranking, relevant, k);
    }
    report.per_query["MRR@" + std::to_string(cutoffs.mrr)][qid] =
        mrr_at_k(ranking, relevant, cutoffs.mrr);
    report.per_query["MAP@" + std::to_string(cutoffs.map)][qid] =
        map_at_k(ranking, relevant, cutoffs.map);
    report.per_query["nDCG@" + std::to_string(cutoffs.ndcg)][qid] =
        ndcg_at_k(ranking, judged->second, cutoffs.ndcg);
    ++report.queries_evaluated;
  }

  for (const auto& name : report.metric_order) {
    double sum = 0.0;
    const auto& values = report.per_query[name];
    for (const auto& [qid, v] : values) sum += v;
    report.macro[name] =
        values.empty() ? 0.0 : sum / static_cast<double>(values.size());
  }
  return report;
}

std::string MetricReport::to_json() const {
  nlohmann::json j;
  j["queries_evaluated"] = queries_evaluated;
  j["skipped_no_relevant"] = skipped_no_relevant;
  j["skipped_not_judged"] = skipped_not_judged;
  j["metrics"] = nlohmann::json::object();
  for (const auto& name : metric_order) {
    j["metrics"][name] = macro.at(name);
  }
  j["per_query"] = nlohmann::json::object();
  for (const auto& [name, values] : per_query) {
    for (const auto& [qid, v] : values) j["per_query"][qid][name] = v;
  }
  return j.dump(2);
}

std::string MetricReport::to_table() const {
  std::ostringstream out;
  char buf[32];
  for (const auto& name : metric_order) {
    out << name;
    out << std::string(name.size() >= 9 ? 1 : 9 - name.size(), ' ');
  }
  out << "\n";
  for (const auto& name : metric_order) {
    std::snprintf(buf, sizeof(buf), "%-9.4f", macro.at(name));
    out << buf;
  }
  out << "\n";
  return out.str();
}

}  // namespace duorank
