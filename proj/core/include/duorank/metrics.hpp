#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "duorank/corpus.hpp"

namespace duorank {

struct EvalCutoffs {
  std::vector<int> recall = {3, 5, 10, 20, 50, 100, 200};
  int mrr = 10;
  int map = 10;
  int ndcg = 10;

  void validate() const;
};

/// Per-query values and macro averages, keyed by metric label
/// ("R@10", "MRR@10", "MAP@10", "nDCG@10").
struct MetricReport {
  EvalCutoffs cutoffs;
  std::vector<std::string> metric_order;  // table column order
  std::map<std::string, std::map<std::string, double>> per_query;
  std::map<std::string, double> macro;
  std::size_t queries_evaluated = 0;
  std::size_t skipped_no_relevant = 0;  // judged but no positive grade
  std::size_t skipped_not_judged = 0;   // in the run but absent from qrels

  std::string to_json() const;
  /// Aligned one-row table; columns follow metric_order.
  std::string to_table() const;
};

/// |top-k of ranking that are relevant| / |relevant|.
double recall_at_k(std::span<const std::string> ranking,
                   const std::set<std::string>& relevant, int k);

/// 1 / rank of the first relevant document within the top k, 0 on a miss.
double mrr_at_k(std::span<const std::string> ranking,
                const std::set<std::string>& relevant, int k);

/// Average precision truncated at k, divided by the total number of relevant
/// documents (even when that exceeds k).
double map_at_k(std::span<const std::string> ranking,
                const std::set<std::string>& relevant, int k);

/// DCG@k / IDCG@k with gain 2^grade - 1 and log2(rank + 1) discounts; the
/// ideal ranking sorts judged documents by descending grade.
double ndcg_at_k(std::span<const std::string> ranking,
                 const std::map<std::string, int>& grades, int k);

/// Evaluates every run query that has at least one positive judgment.
/// Unjudged run queries are skipped and counted.
MetricReport evaluate_run(std::span<const RankedList> run,
                          const RelevanceJudgments& qrels,
                          const EvalCutoffs& cutoffs = {});

}  // namespace duorank
