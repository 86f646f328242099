// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 9 drives the installed CLI binary (path via --cli).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "duorank/common.hpp"
#include "duorank/metrics.hpp"
#include "duorank/mining.hpp"
#include "duorank/pipeline.hpp"
#include "duorank/retrieval.hpp"
#include "duorank/rng.hpp"
#include "duorank/sparse.hpp"
#include "duorank/synth.hpp"
#include "duorank/trainer.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace duorank;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int criterion, const std::string& name, bool pass,
            const std::string& detail = "") {
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << "criterion " << criterion
            << ": " << name;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << "\n";
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Silences the pipeline's stage logging for the duration of a call.
template <typename Fn>
auto quietly(Fn&& fn) {
  std::ostringstream sink;
  auto* old = std::cout.rdbuf(sink.rdbuf());
  try {
    auto result = fn();
    std::cout.rdbuf(old);
    return result;
  } catch (...) {
    std::cout.rdbuf(old);
    throw;
  }
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------
// Criterion 1: gradient correctness against central finite differences.
// ---------------------------------------------------------------------------

DocumentCollection gradient_corpus(Rng& rng, std::size_t n_docs) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < n_docs; ++i) {
    std::string text;
    const std::size_t len = 1 + rng.next_below(6);
    for (std::size_t w = 0; w < len; ++w) {
      if (!text.empty()) text += ' ';
      text += "g" + std::to_string(rng.next_below(48));
    }
    docs.push_back(Document{"d" + std::to_string(i), text, std::nullopt});
  }
  return DocumentCollection(std::move(docs));
}

void criterion_gradient() {
  const auto start = Clock::now();
  EncoderConfig ecfg;
  ecfg.dim = 8;
  ecfg.buckets = 32;

  std::size_t checked = 0;
  double worst = 0.0;
  bool pass = true;
  for (int instance = 0; instance < 100 && pass; ++instance) {
    Rng rng(mix_seed(424242, instance));
    const auto corpus = gradient_corpus(rng, 24);
    const auto model = EncoderModel::init(ecfg, mix_seed(7, instance));

    std::vector<TrainingExample> examples(2);  // B=2, C=3
    for (std::size_t i = 0; i < 2; ++i) {
      examples[i].query.id = "q" + std::to_string(i);
      examples[i].query.text = "g" + std::to_string(rng.next_below(48)) + " g" +
                               std::to_string(rng.next_below(48));
      auto picks = rng.sample_without_replacement(corpus.size(), 3);
      examples[i].positive = corpus.at(picks[0]).id;
      examples[i].negatives = {corpus.at(picks[1]).id, corpus.at(picks[2]).id};
    }
    const double temperature = instance % 2 == 0 ? 1.0 : 0.5;
    const auto grad = loss_gradient(examples, model, corpus, temperature);

    EncoderModel probe = model;
    auto& w = probe.mutable_weights();
    for (int s = 0; s < 12; ++s) {
      const std::size_t coord = rng.next_below(w.size());
      const double h = 1e-4;
      const double saved = w[coord];
      w[coord] = saved + h;
      const double up = infonce_loss(
          assemble_batch(examples, probe, corpus), temperature);
      w[coord] = saved - h;
      const double down = infonce_loss(
          assemble_batch(examples, probe, corpus), temperature);
      w[coord] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = grad.grad[coord];
      const double rel = std::fabs(numeric - analytic) /
                         std::max({std::fabs(numeric), std::fabs(analytic), 1e-6});
      worst = std::max(worst, rel);
      ++checked;
      if (rel > 1e-4) {
        pass = false;
        break;
      }
    }
  }
  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << checked << " coordinates, worst rel err " << worst << ", "
         << elapsed << " s";
  report(1, "gradient matches central finite differences",
         pass && elapsed < 10.0, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 2: InfoNCE equals a direct softmax cross-entropy oracle.
// ---------------------------------------------------------------------------

void criterion_infonce() {
  Rng rng(515151);
  bool pass = true;
  double worst = 0.0;
  for (int iter = 0; iter < 1000 && pass; ++iter) {
    TrainingBatch batch;
    batch.batch_size = 1 + rng.next_below(4);
    batch.docs_per_query = 2 + rng.next_below(6);
    batch.dim = 4 + static_cast<std::uint32_t>(rng.next_below(8));
    const std::size_t cols = batch.columns();
    auto unit_row = [&](std::vector<double>& out) {
      double sq = 0.0;
      std::vector<double> v(batch.dim);
      for (auto& x : v) {
        x = rng.next_in(-1, 1);
        sq += x * x;
      }
      const double inv = 1.0 / std::sqrt(sq);
      for (double x : v) out.push_back(x * inv);
    };
    for (std::size_t i = 0; i < batch.batch_size; ++i) {
      unit_row(batch.query_embs);
      batch.positive_index.push_back(i * batch.docs_per_query);
    }
    for (std::size_t j = 0; j < cols; ++j) {
      unit_row(batch.doc_embs);
      batch.column_doc_ids.push_back("c" + std::to_string(j));
    }
    batch.masked.assign(batch.batch_size * cols, 0);
    // Random extra masking away from the positives.
    for (std::size_t i = 0; i < batch.batch_size; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        if (j != batch.positive_index[i] && rng.next_below(6) == 0) {
          batch.masked[i * cols + j] = 1;
        }
      }
    }
    const double temperature = 0.25 + rng.next_unit();

    std::vector<char> keep(batch.batch_size * cols);
    for (std::size_t i = 0; i < batch.batch_size; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        keep[i * cols + j] = batch.masked[i * cols + j] == 0 ||
                             j == batch.positive_index[i];
      }
    }
    const double expected = oracles::softmax_ce_oracle(
        batch.similarity_matrix(), keep, batch.positive_index,
        batch.batch_size, cols, temperature);
    const double got = infonce_loss(batch, temperature);
    worst = std::max(worst, std::fabs(got - expected));
    if (std::fabs(got - expected) > 1e-10) pass = false;
  }

  // Equal-similarity rows: loss must be exactly ln(m).
  double worst_ln = 0.0;
  for (std::size_t m = 2; m <= 8; ++m) {
    TrainingBatch batch;
    batch.batch_size = 1;
    batch.docs_per_query = m;
    batch.dim = 3;
    batch.query_embs = {1.0, 0.0, 0.0};
    for (std::size_t j = 0; j < m; ++j) {
      batch.doc_embs.insert(batch.doc_embs.end(), {0.0, 1.0, 0.0});
      batch.column_doc_ids.push_back("c" + std::to_string(j));
    }
    batch.positive_index = {0};
    batch.masked.assign(m, 0);
    const double lnm =
        std::fabs(infonce_loss(batch) - std::log(static_cast<double>(m)));
    worst_ln = std::max(worst_ln, lnm);
    if (lnm > 1e-12) pass = false;
  }

  std::ostringstream detail;
  detail << "1000 batches, worst |diff| " << worst << ", ln(m) dev " << worst_ln;
  report(2, "InfoNCE equals the softmax cross-entropy oracle", pass,
         detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 3: similarity-matrix shape law over (B, C).
// ---------------------------------------------------------------------------

void criterion_shape() {
  Rng rng(626262);
  const auto corpus = gradient_corpus(rng, 64);
  EncoderConfig ecfg;
  ecfg.dim = 8;
  ecfg.buckets = 32;
  const auto model = EncoderModel::init(ecfg, 3);
  bool pass = true;
  for (std::size_t b = 1; b <= 4 && pass; ++b) {
    for (std::size_t c = 2; c <= 8 && pass; ++c) {
      std::vector<TrainingExample> examples(b);
      for (std::size_t i = 0; i < b; ++i) {
        examples[i].query.id = "q" + std::to_string(i);
        examples[i].query.text = "g1 g2";
        auto picks = rng.sample_without_replacement(corpus.size(), c);
        examples[i].positive = corpus.at(picks[0]).id;
        for (std::size_t j = 1; j < c; ++j) {
          examples[i].negatives.push_back(corpus.at(picks[j]).id);
        }
      }
      const auto batch = assemble_batch(examples, model, corpus);
      pass = pass && batch.batch_size == b && batch.docs_per_query == c &&
             batch.columns() == b * c &&
             batch.similarity_matrix().size() == b * (b * c);
      if (b == 1) {
        pass = pass && batch.similarity_matrix().size() == c;
      }
    }
  }
  report(3, "batch assembly yields B x (B*C) similarity matrices", pass,
         "B in 1..4, C in 2..8; B=1 gives 1 x C");
}

// ---------------------------------------------------------------------------
// Criterion 4: sparse top-k equals exhaustive formula evaluation.
// ---------------------------------------------------------------------------

void criterion_sparse_oracle() {
  TokenizerConfig tok;
  const Analyzer analyzer(tok);
  bool pass = true;
  double worst_delta0 = 0.0;
  std::size_t comparisons = 0;

  for (int trial = 0; trial < 50 && pass; ++trial) {
    Rng rng(mix_seed(737373, trial));
    const std::size_t n_docs = 20 + rng.next_below(481);   // <= 500
    const std::size_t n_queries = 5 + rng.next_below(46);  // <= 50
    const std::size_t vocab = 15 + rng.next_below(60);

    std::vector<Document> docs;
    for (std::size_t i = 0; i < n_docs; ++i) {
      std::string text;
      const std::size_t len = 2 + rng.next_below(30);
      for (std::size_t w = 0; w < len; ++w) {
        if (!text.empty()) text += ' ';
        text += "t" + std::to_string(rng.next_below(vocab));
      }
      docs.push_back(Document{"d" + std::to_string(i), text, std::nullopt});
    }
    const DocumentCollection corpus(std::move(docs));
    const SparseParams params;
    const auto index = SparseIndex::build(corpus, tok, params);
    SparseParams no_delta = params;
    no_delta.delta = 0.0;
    const auto index0 = SparseIndex::build(corpus, tok, no_delta);
    const auto tokenized = oracles::TokenizedCorpus::from(corpus, analyzer);

    for (std::size_t q = 0; q < n_queries && pass; ++q) {
      std::string text;
      const std::size_t len = 1 + rng.next_below(5);
      for (std::size_t w = 0; w < len; ++w) {
        if (!text.empty()) text += ' ';
        text += "t" + std::to_string(rng.next_below(vocab));
      }
      const Query query{"q" + std::to_string(q), text};
      const auto tokens = analyzer.analyze(text);
      const std::size_t k = 1 + rng.next_below(n_docs);

      for (const auto scorer : {SparseScorer::Bm25Plus, SparseScorer::TfIdf}) {
        std::vector<double> expected(n_docs);
        for (std::size_t d = 0; d < n_docs; ++d) {
          expected[d] = scorer == SparseScorer::Bm25Plus
                            ? oracles::bm25plus_oracle(tokenized, tokens, d,
                                                       params.k1, params.b,
                                                       params.delta)
                            : oracles::tfidf_oracle(tokenized, tokens, d);
        }
        const auto got = index.search(query, k, scorer);
        const auto want =
            oracles::full_sort_oracle(expected, index.doc_ids(), query.id, k);
        if (got.items.size() != want.items.size()) {
          pass = false;
          break;
        }
        for (std::size_t i = 0; i < got.items.size(); ++i) {
          ++comparisons;
          if (got.items[i].doc_id != want.items[i].doc_id ||
              std::fabs(got.items[i].score - want.items[i].score) > 1e-9) {
            pass = false;
            break;
          }
        }
      }

      // delta = 0 must reduce BM25+ to plain BM25.
      const std::size_t probe = rng.next_below(n_docs);
      const double reduced = index0.bm25plus_score(tokens, probe);
      const double plain =
          oracles::bm25_oracle(tokenized, tokens, probe, params.k1, params.b);
      worst_delta0 = std::max(worst_delta0, std::fabs(reduced - plain));
      if (std::fabs(reduced - plain) > 1e-12) pass = false;
    }
  }
  std::ostringstream detail;
  detail << comparisons << " ranked items compared, delta0 dev " << worst_delta0;
  report(4, "sparse top-k equals exhaustive formula evaluation", pass,
         detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 5: metric suite equals brute-force oracles + hand cases.
// ---------------------------------------------------------------------------

void criterion_metric_oracle() {
  bool pass = true;
  double worst = 0.0;
  Rng rng(848484);
  const EvalCutoffs cutoffs;

  for (int run_idx = 0; run_idx < 200 && pass; ++run_idx) {
    RelevanceJudgments qrels;
    std::vector<RankedList> run;
    const std::size_t n_queries = 2 + rng.next_below(12);
    for (std::size_t q = 0; q < n_queries; ++q) {
      const std::string qid = "q" + std::to_string(q);
      const std::size_t n = 5 + rng.next_below(250);
      std::vector<std::string> ranking;
      for (std::size_t i = 0; i < n; ++i) {
        ranking.push_back("d" + std::to_string(i));
      }
      rng.shuffle(ranking);
      RankedList list{qid, {}};
      for (std::size_t i = 0; i < n; ++i) {
        list.items.push_back(
            RankedItem{ranking[i], static_cast<double>(n - i)});
      }
      run.push_back(std::move(list));
      const std::size_t judged = 1 + rng.next_below(12);
      for (std::size_t j = 0; j < judged; ++j) {
        qrels.entries[qid]["d" + std::to_string(rng.next_below(n))] =
            static_cast<int>(rng.next_below(4));
      }
      qrels.entries[qid]["d0"] = 1;  // at least one positive
    }

    const auto report_got = evaluate_run(run, qrels, cutoffs);

    // Recompute every cell with the oracles.
    for (const auto& list : run) {
      const auto& judged = qrels.entries.at(list.query_id);
      std::set<std::string> relevant;
      for (const auto& [doc, g] : judged) {
        if (g > 0) relevant.insert(doc);
      }
      std::vector<std::string> ranking;
      for (const auto& item : list.items) ranking.push_back(item.doc_id);

      auto cell = [&](const std::string& metric) {
        return report_got.per_query.at(metric).at(list.query_id);
      };
      for (int k : cutoffs.recall) {
        const double dev = std::fabs(cell("R@" + std::to_string(k)) -
                                     oracles::recall_oracle(ranking, relevant, k));
        worst = std::max(worst, dev);
        if (dev > 1e-9) pass = false;
      }
      const double devs[] = {
          std::fabs(cell("MRR@10") - oracles::mrr_oracle(ranking, relevant, 10)),
          std::fabs(cell("MAP@10") - oracles::map_oracle(ranking, relevant, 10)),
          std::fabs(cell("nDCG@10") - oracles::ndcg_oracle(ranking, judged, 10)),
      };
      for (double dev : devs) {
        worst = std::max(worst, dev);
        if (dev > 1e-9) pass = false;
      }
    }
  }

  // Hand-computed cases.
  const double map_case = map_at_k(
      std::vector<std::string>{"d1", "x", "d2", "y"}, {"d1", "d2"}, 10);
  if (std::fabs(map_case - 5.0 / 6.0) > 1e-5) pass = false;
  const double ndcg_case =
      ndcg_at_k(std::vector<std::string>{"x", "r1", "r2"},
                {{"r1", 1}, {"r2", 1}}, 10);
  if (std::fabs(ndcg_case - 0.69343) > 1e-5) pass = false;

  std::ostringstream detail;
  detail << "200 runs, worst |diff| " << worst << ", MAP " << map_case
         << ", nDCG " << ndcg_case;
  report(5, "metrics equal brute-force oracles and hand cases", pass,
         detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 6: ensemble identity and scale invariance.
// ---------------------------------------------------------------------------

void criterion_ensemble() {
  Rng rng(959595);
  EncoderConfig ecfg;
  ecfg.dim = 16;
  ecfg.buckets = 512;
  std::vector<Document> docs;
  for (std::size_t i = 0; i < 150; ++i) {
    std::string text;
    for (std::size_t w = 0; w < 4 + rng.next_below(8); ++w) {
      if (!text.empty()) text += ' ';
      text += "e" + std::to_string(rng.next_below(70));
    }
    docs.push_back(Document{"d" + std::to_string(i), text, std::nullopt});
  }
  const DocumentCollection corpus(std::move(docs));
  const auto m1 = EncoderModel::init(ecfg, 1);
  const auto m2 = EncoderModel::init(ecfg, 2);
  const auto e1 = encode_corpus(m1, corpus);
  const auto e2 = encode_corpus(m2, corpus);

  bool identity_pass = true;
  {
    Ensemble identity({m1}, {e1}, {1.0}, 0.0, false);
    std::vector<double> zeros(corpus.size(), 0.0);
    for (int t = 0; t < 20; ++t) {
      const Query q{"q", "e" + std::to_string(rng.next_below(70))};
      const auto direct = search_dense(q, m1, e1, corpus.size());
      const auto via = identity.search(q, zeros, corpus.size());
      for (std::size_t i = 0; i < direct.items.size(); ++i) {
        identity_pass = identity_pass &&
                        direct.items[i].doc_id == via.items[i].doc_id &&
                        direct.items[i].score == via.items[i].score;
      }
    }
  }

  bool scale_pass = true;
  for (int t = 0; t < 100; ++t) {
    const double w1 = rng.next_in(-1, 1);
    const double w2 = rng.next_in(-1, 1);
    const double alpha = rng.next_in(0, 2);
    const double lambda = std::exp(rng.next_in(-2, 2));
    std::vector<double> sparse(corpus.size());
    for (auto& s : sparse) s = rng.next_in(0, 12);
    Ensemble base({m1, m2}, {e1, e2}, {w1, w2}, alpha, false);
    Ensemble scaled({m1, m2}, {e1, e2}, {lambda * w1, lambda * w2},
                    lambda * alpha, false);
    const Query q{"q", "e" + std::to_string(rng.next_below(70)) + " e" +
                           std::to_string(rng.next_below(70))};
    const auto a = base.search(q, sparse, corpus.size());
    const auto b = scaled.search(q, sparse, corpus.size());
    for (std::size_t i = 0; i < a.items.size(); ++i) {
      scale_pass = scale_pass && a.items[i].doc_id == b.items[i].doc_id;
    }
  }
  report(6, "ensemble identity and positive-scale invariance",
         identity_pass && scale_pass, "identity exact, 100 scaled configs");
}

// ---------------------------------------------------------------------------
// Criterion 7: mined negatives never contain the query's positives.
// ---------------------------------------------------------------------------

void criterion_mining() {
  TokenizerConfig tok;
  bool pass = true;
  std::size_t examples_checked = 0;
  EncoderConfig ecfg;
  ecfg.dim = 16;
  ecfg.buckets = 512;

  for (int trial = 0; trial < 10 && pass; ++trial) {
    Rng rng(mix_seed(10101, trial));
    const std::size_t n_docs = 60 + rng.next_below(200);
    std::vector<Document> docs;
    for (std::size_t i = 0; i < n_docs; ++i) {
      std::string text;
      for (std::size_t w = 0; w < 3 + rng.next_below(12); ++w) {
        if (!text.empty()) text += ' ';
        text += "m" + std::to_string(rng.next_below(40));
      }
      docs.push_back(Document{"d" + std::to_string(i), text, std::nullopt});
    }
    const DocumentCollection corpus(std::move(docs));
    const auto index = SparseIndex::build(corpus, tok, SparseParams{});
    const auto model = EncoderModel::init(ecfg, trial);
    const auto emb = encode_corpus(model, corpus);

    std::vector<Query> qs;
    RelevanceJudgments qrels;
    for (int q = 0; q < 15; ++q) {
      const std::string qid = "q" + std::to_string(q);
      qs.push_back(Query{qid, "m" + std::to_string(rng.next_below(40)) + " m" +
                                  std::to_string(rng.next_below(40))});
      // One to three positives per query.
      const std::size_t n_pos = 1 + rng.next_below(3);
      for (std::size_t p = 0; p < n_pos; ++p) {
        qrels.entries[qid]["d" + std::to_string(rng.next_below(n_docs))] = 1;
      }
    }
    const QueryCollection queries(qs);

    MiningConfig mcfg;
    mcfg.a1 = 20;
    mcfg.per_query_negatives = 10;
    mcfg.a2 = 20;
    mcfg.phase2_docs_per_query = 8;
    mcfg.seed = mix_seed(999, trial);

    const auto global = mine_global_all(queries, qrels, index, mcfg);
    const auto hard = mine_hard_all(queries, qrels, model, emb, mcfg);
    for (const auto* dataset : {&global, &hard}) {
      for (const auto& ex : *dataset) {
        ++examples_checked;
        const auto positives = qrels.positives(ex.query.id);
        for (const auto& n : ex.negatives) {
          if (std::find(positives.begin(), positives.end(), n) !=
              positives.end()) {
            pass = false;
          }
        }
      }
    }
  }
  report(7, "mined datasets respect the positive set difference", pass,
         std::to_string(examples_checked) + " examples checked");
}

// ---------------------------------------------------------------------------
// Criterion 8: two-phase ordering at desk scale, median over 5 seeds.
// ---------------------------------------------------------------------------

void criterion_two_phase() {
  const auto start = Clock::now();
  testutil::TempDir tmp("accept8");
  std::vector<double> bm25_r10, p1_r10, p1_mrr, p2_mrr;

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const std::string data_dir = tmp.file("data" + std::to_string(seed));
    write_synthetic_benchmark(seed, 2000, 200, data_dir);
    PipelineConfig cfg = PipelineConfig::defaults();
    cfg.corpus_path = data_dir + "/corpus.jsonl";
    cfg.queries_path = data_dir + "/queries.jsonl";
    cfg.qrels_path = data_dir + "/qrels.tsv";
    cfg.workdir = tmp.file("work" + std::to_string(seed));
    cfg.seed = seed;
    const auto result = quietly([&] { return run_pipeline(cfg); });
    bm25_r10.push_back(result.reports.at("bm25plus").macro.at("R@10"));
    p1_r10.push_back(result.reports.at("dense_phase1").macro.at("R@10"));
    p1_mrr.push_back(result.reports.at("dense_phase1").macro.at("MRR@10"));
    p2_mrr.push_back(result.reports.at("dense_phase2").macro.at("MRR@10"));
  }
  const double elapsed = seconds_since(start);

  const bool recall_ok = median(p1_r10) >= median(bm25_r10);
  const bool mrr_ok = median(p2_mrr) >= median(p1_mrr);
  std::ostringstream detail;
  detail.precision(4);
  detail << "median R@10 dense " << median(p1_r10) << " vs bm25+ "
         << median(bm25_r10) << "; median MRR@10 phase2 " << median(p2_mrr)
         << " vs phase1 " << median(p1_mrr) << "; " << elapsed << " s";
  report(8, "two-phase ordering holds at desk scale",
         recall_ok && mrr_ok && elapsed <= 300.0, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 9: run-all --single-thread is byte-deterministic.
// ---------------------------------------------------------------------------

void criterion_determinism(const std::string& cli) {
  testutil::TempDir tmp("accept9");
  write_synthetic_benchmark(21, 400, 40, tmp.file("data"));
  std::ofstream cfg(tmp.file("run.conf"));
  cfg << "corpus = " << tmp.file("data/corpus.jsonl") << "\n"
      << "queries = " << tmp.file("data/queries.jsonl") << "\n"
      << "qrels = " << tmp.file("data/qrels.tsv") << "\n"
      << "seed = 5\n"
      << "phase1.epochs = 5\n"
      << "phase2.epochs = 5\n";
  cfg.close();

  bool pass = true;
  std::string detail;
  if (cli.empty()) {
    pass = false;
    detail = "no --cli path provided";
  } else {
    for (int run_idx = 1; run_idx <= 2 && pass; ++run_idx) {
      const std::string wd = tmp.file("w" + std::to_string(run_idx));
      const std::string command = cli + " run-all --single-thread --config " +
                                  tmp.file("run.conf") + " --workdir " + wd +
                                  " > " + tmp.file("out" + std::to_string(run_idx)) +
                                  " 2>&1";
      if (std::system(command.c_str()) != 0) {
        pass = false;
        detail = "run-all exited nonzero";
      }
    }
    if (pass) {
      const auto a = testutil::slurp(tmp.file("w1/report.json"));
      const auto b = testutil::slurp(tmp.file("w2/report.json"));
      pass = !a.empty() && a == b;
      detail = "report.json " + std::to_string(a.size()) + " bytes, " +
               (pass ? "identical" : "DIFFER");
    }
  }
  report(9, "run-all --single-thread reports are byte-identical", pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--cli") cli = argv[i + 1];
  }

  const auto start = Clock::now();
  try {
    criterion_gradient();
    criterion_infonce();
    criterion_shape();
    criterion_sparse_oracle();
    criterion_metric_oracle();
    criterion_ensemble();
    criterion_mining();
    criterion_two_phase();
    criterion_determinism(cli);
  } catch (const std::exception& e) {
    std::cout << "[FAIL] acceptance suite aborted: " << e.what() << "\n";
    return 1;
  }
  std::cout << (failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED")
            << " (" << seconds_since(start) << " s total)\n";
  return failures == 0 ? 0 : 1;
}
