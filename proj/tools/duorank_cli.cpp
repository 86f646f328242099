// duorank: two-phase dense retrieval pipeline over a BM25+ first stage.
//
// Subcommands mirror the pipeline stages; `run-all` chains them and writes
// report.json. Exit codes: 0 success, 2 invalid input/config, 1 runtime
// failure.

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "duorank/common.hpp"
#include "duorank/metrics.hpp"
#include "duorank/mining.hpp"
#include "duorank/pipeline.hpp"
#include "duorank/retrieval.hpp"
#include "duorank/rng.hpp"
#include "duorank/sparse.hpp"
#include "duorank/synth.hpp"
#include "duorank/trainer.hpp"

namespace fs = std::filesystem;
using namespace duorank;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string workdir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

PipelineConfig load_config(const CommonOpts& opts) {
  PipelineConfig cfg = opts.config_path.empty()
                           ? PipelineConfig::defaults()
                           : PipelineConfig::from_file(opts.config_path);
  if (!opts.workdir.empty()) cfg.workdir = opts.workdir;
  if (opts.seed_set) cfg.seed = opts.seed;
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "pipeline config file");
  cmd->add_option("--workdir", opts.workdir, "artifact directory override");
  cmd->add_option("--seed", opts.seed, "seed override")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
}

void require_inputs(const PipelineConfig& cfg) {
  if (cfg.corpus_path.empty()) {
    throw ValidationError("a config with corpus/queries/qrels paths is required");
  }
  cfg.validate();
}

EncoderModel load_model(const PipelineConfig& cfg, const std::string& path) {
  return EncoderModel::load(path, cfg.tokenizer);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"two-phase dense retrieval pipeline"};
  app.require_subcommand(1);

  // --- build-index ---
  CommonOpts idx_opts;
  auto* cmd_index = app.add_subcommand("build-index", "build the sparse index");
  add_common(cmd_index, idx_opts);
  cmd_index->callback([&] {
    PipelineConfig cfg = load_config(idx_opts);
    require_inputs(cfg);
    WorkdirLayout wd(cfg.workdir);
    wd.create_dirs();
    SparseIndex index =
        SparseIndex::build(load_corpus(cfg.corpus_path), cfg.tokenizer, cfg.sparse);
    index.save(wd.index_file);
    std::cout << "indexed " << index.doc_count() << " documents -> "
              << wd.index_file << "\n";
  });

  // --- mine-phase1 / mine-phase2 ---
  CommonOpts mine1_opts;
  auto* cmd_mine1 =
      app.add_subcommand("mine-phase1", "mine BM25+ negatives per query");
  add_common(cmd_mine1, mine1_opts);
  cmd_mine1->callback([&] {
    PipelineConfig cfg = load_config(mine1_opts);
    require_inputs(cfg);
    WorkdirLayout wd(cfg.workdir);
    wd.create_dirs();
    MiningConfig mining = cfg.mining;
    mining.seed = mix_seed(cfg.seed, 2);
    MiningStats stats;
    const auto mined = mine_global_all(
        load_queries(cfg.queries_path), load_qrels(cfg.qrels_path).qrels,
        SparseIndex::load(wd.index_file), mining, &stats);
    write_mined(mined, wd.mined_phase1);
    std::cout << mined.size() << " examples -> " << wd.mined_phase1 << " ("
              << stats.skipped_no_positive << " queries skipped, "
              << stats.short_pool_warnings << " short pools)\n";
  });

  CommonOpts mine2_opts;
  auto* cmd_mine2 =
      app.add_subcommand("mine-phase2", "mine hard negatives with the phase-1 model");
  add_common(cmd_mine2, mine2_opts);
  cmd_mine2->callback([&] {
    PipelineConfig cfg = load_config(mine2_opts);
    require_inputs(cfg);
    WorkdirLayout wd(cfg.workdir);
    wd.create_dirs();
    const EncoderModel m1 = load_model(cfg, wd.ckpt_phase1);
    const DocumentCollection corpus = load_corpus(cfg.corpus_path);
    if (!fs::exists(wd.emb_phase1)) {
      write_embeddings(encode_corpus(m1, corpus), wd.emb_phase1);
    }
    MiningConfig mining = cfg.mining;
    mining.seed = mix_seed(cfg.seed, 2);
    MiningStats stats;
    const auto mined = mine_hard_all(
        load_queries(cfg.queries_path), load_qrels(cfg.qrels_path).qrels, m1,
        read_embeddings(wd.emb_phase1), mining, &stats);
    write_mined(mined, wd.mined_phase2);
    std::cout << mined.size() << " examples -> " << wd.mined_phase2 << "\n";
  });

  // --- train-phase1 / train-phase2 ---
  CommonOpts train1_opts;
  auto* cmd_train1 =
      app.add_subcommand("train-phase1", "contrastive training on mined negatives");
  add_common(cmd_train1, train1_opts);
  cmd_train1->callback([&] {
    PipelineConfig cfg = load_config(train1_opts);
    require_inputs(cfg);
    WorkdirLayout wd(cfg.workdir);
    wd.create_dirs();
    const QueryCollection queries = load_queries(cfg.queries_path);
    const auto dataset = read_mined(wd.mined_phase1, queries);
    const auto qrels = load_qrels(cfg.qrels_path).qrels;
    TrainConfig phase1 = cfg.phase1;
    phase1.seed = mix_seed(cfg.seed, 3);
    EncoderModel model =
        EncoderModel::init(cfg.encoder_config(), mix_seed(cfg.seed, 1));
    TrainResult r = train(model, dataset, load_corpus(cfg.corpus_path), phase1,
                          &qrels, wd.log_phase1);
    r.model.save(wd.ckpt_phase1);
    std::cout << "phase-1 loss " << r.history.front().loss << " -> "
              << r.history.back().loss << ", checkpoint " << wd.ckpt_phase1
              << "\n";
  });

  CommonOpts train2_opts;
  auto* cmd_train2 =
      app.add_subcommand("train-phase2", "fine-tune on hard negatives (B = 1)");
  add_common(cmd_train2, train2_opts);
  cmd_train2->callback([&] {
    PipelineConfig cfg = load_config(train2_opts);
    require_inputs(cfg);
    WorkdirLayout wd(cfg.workdir);
    wd.create_dirs();
    const QueryCollection queries = load_queries(cfg.queries_path);
    const auto dataset = read_mined(wd.mined_phase2, queries);
    const auto qrels = load_qrels(cfg.qrels_path).qrels;
    TrainConfig phase2 = cfg.phase2;
    phase2.seed = mix_seed(cfg.seed, 4);
    const EncoderModel m1 = load_model(cfg, wd.ckpt_phase1);
    TrainResult r = train(m1, dataset, load_corpus(cfg.corpus_path), phase2,
                          &qrels, wd.log_phase2);
    r.model.save(wd.ckpt_phase2);
    std::cout << "phase-2 loss " << r.history.front().loss << " -> "
              << r.history.back().loss << ", checkpoint " << wd.ckpt_phase2
              << "\n";
  });

  // --- encode ---
  CommonOpts enc_opts;
  std::string enc_model, enc_out;
  auto* cmd_encode = app.add_subcommand("encode", "pre-encode the corpus");
  add_common(cmd_encode, enc_opts);
  cmd_encode->add_option("--model", enc_model, "encoder checkpoint")->required();
  cmd_encode->add_option("--out", enc_out, "embedding file (.emb or .jsonl)")
      ->required();
  cmd_encode->callback([&] {
    PipelineConfig cfg = load_config(enc_opts);
    require_inputs(cfg);
    const EncoderModel model = load_model(cfg, enc_model);
    write_embeddings(encode_corpus(model, load_corpus(cfg.corpus_path)), enc_out);
    std::cout << "embeddings -> " << enc_out << "\n";
  });

  // --- search ---
  CommonOpts search_opts;
  std::string search_model, search_emb, search_scorer = "dense";
  std::string search_out = "-", search_tag = "duorank";
  std::size_t search_k = 10;
  auto* cmd_search = app.add_subcommand("search", "rank the corpus per query");
  add_common(cmd_search, search_opts);
  cmd_search->add_option("--model", search_model,
                         "encoder checkpoint (dense search)");
  cmd_search->add_option("--emb", search_emb,
                         "precomputed corpus embeddings (optional)");
  cmd_search->add_option("--scorer", search_scorer,
                         "dense | bm25plus | tfidf");
  cmd_search->add_option("--k", search_k, "results per query");
  cmd_search->add_option("--out", search_out, "run file ('-' for stdout)");
  cmd_search->add_option("--tag", search_tag, "run tag");
  cmd_search->callback([&] {
    PipelineConfig cfg = load_config(search_opts);
    require_inputs(cfg);
    const QueryCollection queries = load_queries(cfg.queries_path);
    std::vector<RankedList> lists;
    if (search_scorer == "dense") {
      if (search_model.empty()) {
        throw ValidationError("search: --model is required for dense search");
      }
      const EncoderModel model = load_model(cfg, search_model);
      EmbeddingMatrix emb =
          search_emb.empty()
              ? encode_corpus(model, load_corpus(cfg.corpus_path))
              : read_embeddings(search_emb);
      for (const auto& q : queries.queries()) {
        lists.push_back(search_dense(q, model, emb, search_k));
      }
    } else if (search_scorer == "bm25plus" || search_scorer == "tfidf") {
      const SparseIndex index =
          SparseIndex::load(WorkdirLayout(cfg.workdir).index_file);
      const SparseScorer scorer = search_scorer == "bm25plus"
                                      ? SparseScorer::Bm25Plus
                                      : SparseScorer::TfIdf;
      for (const auto& q : queries.queries()) {
        lists.push_back(index.search(q, search_k, scorer));
      }
    } else {
      throw ValidationError("search: unknown scorer " + search_scorer);
    }
    if (search_out == "-") {
      const std::string tmp =
          fs::temp_directory_path() /
          ("duorank_search_" + std::to_string(::getpid()) + ".run");
      write_run(lists, search_tag, tmp);
      std::cout << std::ifstream(tmp).rdbuf();
      fs::remove(tmp);
    } else {
      write_run(lists, search_tag, search_out);
      std::cout << lists.size() << " queries -> " << search_out << "\n";
    }
  });

  // --- ensemble ---
  CommonOpts ens_opts;
  std::vector<std::string> ens_ckpts;
  std::string ens_out = "ensemble.run";
  std::size_t ens_k = 10;
  auto* cmd_ensemble =
      app.add_subcommand("ensemble", "weighted multi-model + BM25+ scoring");
  add_common(cmd_ensemble, ens_opts);
  cmd_ensemble->add_option("--checkpoints", ens_ckpts,
                           "model checkpoints (default: phase2, phase1)");
  cmd_ensemble->add_option("--k", ens_k, "results per query");
  cmd_ensemble->add_option("--out", ens_out, "run file");
  cmd_ensemble->callback([&] {
    PipelineConfig cfg = load_config(ens_opts);
    require_inputs(cfg);
    WorkdirLayout wd(cfg.workdir);
    EnsembleConfig ecfg;
    ecfg.checkpoints = ens_ckpts.empty()
                           ? std::vector<std::string>{wd.ckpt_phase2, wd.ckpt_phase1}
                           : ens_ckpts;
    ecfg.weights = cfg.ensemble_weights;
    ecfg.weights.resize(ecfg.checkpoints.size(), 0.0);
    ecfg.alpha = cfg.ensemble_alpha;
    ecfg.normalize_sparse = cfg.ensemble_normalize_sparse;
    const DocumentCollection corpus = load_corpus(cfg.corpus_path);
    const Ensemble ensemble = Ensemble::from_config(ecfg, cfg.tokenizer, corpus);
    const SparseIndex index = SparseIndex::load(wd.index_file);
    const QueryCollection queries = load_queries(cfg.queries_path);
    std::vector<RankedList> lists;
    for (const auto& q : queries.queries()) {
      lists.push_back(
          ensemble.search(q, index.score_all(q, SparseScorer::Bm25Plus), ens_k));
    }
    write_run(lists, "ensemble", ens_out);
    std::cout << lists.size() << " queries -> " << ens_out << "\n";
  });

  // --- eval ---
  std::string eval_run, eval_qrels, eval_json;
  std::vector<int> eval_cut;
  int eval_mrr = 10, eval_map = 10, eval_ndcg = 10;
  auto* cmd_eval = app.add_subcommand("eval", "score a run file against qrels");
  cmd_eval->add_option("--run", eval_run, "run file")->required();
  cmd_eval->add_option("--qrels", eval_qrels, "qrels file")->required();
  cmd_eval->add_option("--cutoffs", eval_cut, "recall cutoffs")->delimiter(',');
  cmd_eval->add_option("--mrr-k", eval_mrr, "MRR cutoff");
  cmd_eval->add_option("--map-k", eval_map, "MAP cutoff");
  cmd_eval->add_option("--ndcg-k", eval_ndcg, "nDCG cutoff");
  cmd_eval->add_option("--json", eval_json, "also write the report as JSON");
  cmd_eval->callback([&] {
    EvalCutoffs cutoffs;
    if (!eval_cut.empty()) cutoffs.recall = eval_cut;
    cutoffs.mrr = eval_mrr;
    cutoffs.map = eval_map;
    cutoffs.ndcg = eval_ndcg;
    const auto run = read_run(eval_run);
    const MetricReport report =
        evaluate_run(run, load_qrels(eval_qrels).qrels, cutoffs);
    std::cout << report.to_table();
    std::cout << report.queries_evaluated << " queries evaluated, "
              << report.skipped_no_relevant << " without positives, "
              << report.skipped_not_judged << " not judged\n";
    if (!eval_json.empty()) {
      std::ofstream out(eval_json, std::ios::trunc);
      if (!out) throw RuntimeError("cannot write " + eval_json);
      out << report.to_json() << "\n";
    }
  });

  // --- run-all ---
  CommonOpts all_opts;
  bool single_thread = false;
  auto* cmd_all = app.add_subcommand("run-all", "full pipeline + report.json");
  add_common(cmd_all, all_opts);
  cmd_all->add_flag("--single-thread", single_thread,
                    "force sequential execution (bit-reproducible)");
  cmd_all->callback([&] {
    PipelineConfig cfg = load_config(all_opts);
    if (single_thread) cfg.single_thread = true;
    const PipelineResult result = run_pipeline(cfg);
    for (const auto& [name, report] : result.reports) {
      std::cout << "== " << name << "\n" << report.to_table();
    }
    std::cout << "report: " << result.report_path << "\n";
  });

  // --- synth-bench ---
  std::string synth_out = "synth";
  std::uint64_t synth_seed = 1;
  std::size_t synth_docs = 2000, synth_queries = 200;
  auto* cmd_synth =
      app.add_subcommand("synth-bench", "generate a seeded synthetic benchmark");
  cmd_synth->add_option("--out", synth_out, "output directory");
  cmd_synth->add_option("--seed", synth_seed, "generator seed");
  cmd_synth->add_option("--docs", synth_docs, "number of documents");
  cmd_synth->add_option("--queries", synth_queries, "number of queries");
  cmd_synth->callback([&] {
    const auto bench = write_synthetic_benchmark(synth_seed, synth_docs,
                                                 synth_queries, synth_out);
    std::cout << bench.corpus.size() << " docs, " << bench.queries.size()
              << " queries -> " << synth_out << "/{corpus.jsonl,queries.jsonl,qrels.tsv}\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // bad flags and arguments are validation failures
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
