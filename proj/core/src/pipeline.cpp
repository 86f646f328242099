#include "duorank/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "duorank/common.hpp"
#include "duorank/rng.hpp"

namespace duorank {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

TrainConfig phase_defaults(std::size_t batch_size) {
  TrainConfig cfg;
  cfg.batch_size = batch_size;
  return cfg;
}

TrainConfig parse_phase(const KvConfig& kv, const std::string& prefix,
                        const TrainConfig& base) {
  TrainConfig cfg = base;
  cfg.learning_rate = kv.get_double(prefix + ".lr", cfg.learning_rate);
  cfg.epochs = static_cast<int>(kv.get_int(prefix + ".epochs", cfg.epochs));
  cfg.batch_size = static_cast<std::size_t>(
      kv.get_int(prefix + ".B", static_cast<std::int64_t>(cfg.batch_size)));
  cfg.temperature = kv.get_double(prefix + ".temperature", cfg.temperature);
  cfg.grad_accum_steps = static_cast<int>(
      kv.get_int(prefix + ".grad_accum", cfg.grad_accum_steps));
  cfg.shuffle = kv.get_bool(prefix + ".shuffle", cfg.shuffle);
  cfg.mask_in_batch_positives = kv.get_bool(
      prefix + ".mask_in_batch_positives", cfg.mask_in_batch_positives);
  return cfg;
}

void log_stage(const std::string& name, const std::string& detail) {
  std::cout << "[" << name << "] " << detail << "\n";
}

template <typename Fn>
auto run_stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw RuntimeError("stage " + name + " failed: " + e.what());
  }
}

json report_entry(const MetricReport& r) {
  json metrics = json::object();
  for (const auto& name : r.metric_order) metrics[name] = r.macro.at(name);
  return json{{"metrics", std::move(metrics)},
              {"queries_evaluated", r.queries_evaluated},
              {"skipped_no_relevant", r.skipped_no_relevant},
              {"skipped_not_judged", r.skipped_not_judged}};
}

}  // namespace

PipelineConfig PipelineConfig::defaults() {
  PipelineConfig cfg;
  cfg.phase1 = phase_defaults(2);
  cfg.phase2 = phase_defaults(1);
  return cfg;
}

PipelineConfig PipelineConfig::from_kv(const KvConfig& kv) {
  PipelineConfig cfg = defaults();
  cfg.corpus_path = kv.get_string("corpus", cfg.corpus_path);
  cfg.queries_path = kv.get_string("queries", cfg.queries_path);
  cfg.qrels_path = kv.get_string("qrels", cfg.qrels_path);
  cfg.workdir = kv.get_string("workdir", cfg.workdir);
  cfg.seed = kv.get_u64("seed", cfg.seed);
  cfg.single_thread = kv.get_bool("single_thread", cfg.single_thread);

  const std::string mode = kv.get_string("tokenizer.mode", "words");
  if (mode == "words") {
    cfg.tokenizer.mode = TokenizerMode::UnicodeWords;
  } else if (mode == "ngram") {
    cfg.tokenizer.mode = TokenizerMode::CharNgram;
  } else {
    throw ValidationError("config: tokenizer.mode must be words or ngram");
  }
  cfg.tokenizer.ngram =
      static_cast<int>(kv.get_int("tokenizer.ngram", cfg.tokenizer.ngram));
  cfg.tokenizer.lowercase =
      kv.get_bool("tokenizer.lowercase", cfg.tokenizer.lowercase);
  if (kv.has("tokenizer.strip")) {
    cfg.tokenizer.strip_categories.clear();
    for (const auto& c : kv.get_list("tokenizer.strip")) {
      cfg.tokenizer.strip_categories.insert(c);
    }
  }
  if (kv.has("tokenizer.stopwords")) {
    cfg.tokenizer.stopwords =
        read_stopword_file(kv.require_string("tokenizer.stopwords"));
  }

  cfg.sparse.k1 = kv.get_double("sparse.k1", cfg.sparse.k1);
  cfg.sparse.b = kv.get_double("sparse.b", cfg.sparse.b);
  cfg.sparse.delta = kv.get_double("sparse.delta", cfg.sparse.delta);

  cfg.encoder_dim = static_cast<std::uint32_t>(
      kv.get_int("encoder.dim", cfg.encoder_dim));
  cfg.encoder_buckets = static_cast<std::uint32_t>(
      kv.get_int("encoder.buckets", cfg.encoder_buckets));
  cfg.encoder_role_prefix =
      kv.get_bool("encoder.role_prefix", cfg.encoder_role_prefix);

  cfg.mining.a1 =
      static_cast<std::size_t>(kv.get_int("mining.a1", cfg.mining.a1));
  cfg.mining.per_query_negatives = static_cast<std::size_t>(
      kv.get_int("mining.negatives", cfg.mining.per_query_negatives));
  cfg.mining.a2 =
      static_cast<std::size_t>(kv.get_int("mining.a2", cfg.mining.a2));
  cfg.mining.phase2_docs_per_query = static_cast<std::size_t>(kv.get_int(
      "mining.docs_per_query", cfg.mining.phase2_docs_per_query));

  cfg.phase1 = parse_phase(kv, "phase1", cfg.phase1);
  cfg.phase2 = parse_phase(kv, "phase2", cfg.phase2);
  cfg.phase2_enabled = kv.get_bool("phase2.enabled", cfg.phase2_enabled);

  if (kv.has("ensemble.weights")) {
    cfg.ensemble_weights.clear();
    for (const auto& w : kv.get_list("ensemble.weights")) {
      cfg.ensemble_weights.push_back(std::stod(w));
    }
  }
  cfg.ensemble_alpha = kv.get_double("ensemble.alpha", cfg.ensemble_alpha);
  cfg.ensemble_normalize_sparse =
      kv.get_bool("ensemble.normalize_sparse", cfg.ensemble_normalize_sparse);

  if (kv.has("eval.cutoffs")) {
    cfg.cutoffs.recall.clear();
    for (const auto& c : kv.get_list("eval.cutoffs")) {
      cfg.cutoffs.recall.push_back(std::stoi(c));
    }
  }
  cfg.cutoffs.mrr = static_cast<int>(kv.get_int("eval.mrr", cfg.cutoffs.mrr));
  cfg.cutoffs.map = static_cast<int>(kv.get_int("eval.map", cfg.cutoffs.map));
  cfg.cutoffs.ndcg = static_cast<int>(kv.get_int("eval.ndcg", cfg.cutoffs.ndcg));
  return cfg;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  return from_kv(KvConfig::parse_file(path));
}

EncoderConfig PipelineConfig::encoder_config() const {
  EncoderConfig e;
  e.dim = encoder_dim;
  e.buckets = encoder_buckets;
  e.role_prefix = encoder_role_prefix;
  e.tokenizer = tokenizer;
  return e;
}

void PipelineConfig::validate() const {
  if (corpus_path.empty() || queries_path.empty() || qrels_path.empty()) {
    throw ValidationError("pipeline: corpus, queries and qrels paths required");
  }
  for (const auto& p : {corpus_path, queries_path, qrels_path}) {
    if (!fs::exists(p)) throw ValidationError("pipeline: no such file: " + p);
  }
  tokenizer.validate();
  sparse.validate();
  encoder_config().validate();
  mining.validate();
  phase1.validate();
  if (phase2_enabled) {
    phase2.validate();
    if (phase2.batch_size != 1) {
      throw ValidationError(
          "pipeline: phase 2 trains with batch size 1, got B=" +
          std::to_string(phase2.batch_size));
    }
  }
  cutoffs.validate();
  if (ensemble_weights.empty()) {
    throw ValidationError("pipeline: ensemble needs at least one weight");
  }
}

WorkdirLayout::WorkdirLayout(const std::string& workdir)
    : index_file(workdir + "/index/sparse.idx"),
      mined_phase1(workdir + "/mined/phase1.jsonl"),
      mined_phase2(workdir + "/mined/phase2.jsonl"),
      ckpt_phase1(workdir + "/ckpt/phase1.ckpt"),
      ckpt_phase2(workdir + "/ckpt/phase2.ckpt"),
      emb_phase1(workdir + "/emb/phase1.emb"),
      emb_phase2(workdir + "/emb/phase2.emb"),
      log_phase1(workdir + "/logs/phase1_train.jsonl"),
      log_phase2(workdir + "/logs/phase2_train.jsonl"),
      runs_dir(workdir + "/runs"),
      report_file(workdir + "/report.json") {}

void WorkdirLayout::create_dirs() const {
  for (const auto& f :
       {index_file, mined_phase1, ckpt_phase1, emb_phase1, log_phase1}) {
    fs::create_directories(fs::path(f).parent_path());
  }
  fs::create_directories(runs_dir);
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  const WorkdirLayout wd(cfg.workdir);
  wd.create_dirs();

  const DocumentCollection corpus = load_corpus(cfg.corpus_path);
  const QueryCollection queries = load_queries(cfg.queries_path);
  const RelevanceJudgments qrels = load_qrels(cfg.qrels_path).qrels;

  // Derived seeds keep the stages decorrelated under one top-level seed.
  const std::uint64_t init_seed = mix_seed(cfg.seed, 1);
  MiningConfig mining = cfg.mining;
  mining.seed = mix_seed(cfg.seed, 2);
  TrainConfig phase1 = cfg.phase1;
  phase1.seed = mix_seed(cfg.seed, 3);
  TrainConfig phase2 = cfg.phase2;
  phase2.seed = mix_seed(cfg.seed, 4);

  // 1. Sparse index.
  if (!fs::exists(wd.index_file)) {
    run_stage("build-index", [&] {
      SparseIndex index = SparseIndex::build(corpus, cfg.tokenizer, cfg.sparse);
      index.save(wd.index_file);
      log_stage("build-index",
                "indexed " + std::to_string(index.doc_count()) + " documents");
      return 0;
    });
  } else {
    log_stage("build-index", "reusing " + wd.index_file);
  }
  const SparseIndex index = SparseIndex::load(wd.index_file);

  // 2. Phase-1 mining.
  if (!fs::exists(wd.mined_phase1)) {
    run_stage("mine-phase1", [&] {
      MiningStats stats;
      const auto mined = mine_global_all(queries, qrels, index, mining, &stats);
      write_mined(mined, wd.mined_phase1);
      log_stage("mine-phase1",
                std::to_string(mined.size()) + " examples (" +
                    std::to_string(stats.skipped_no_positive) +
                    " queries without positives, " +
                    std::to_string(stats.short_pool_warnings) +
                    " short pools)");
      return 0;
    });
  } else {
    log_stage("mine-phase1", "reusing " + wd.mined_phase1);
  }

  // 3. Phase-1 training.
  if (!fs::exists(wd.ckpt_phase1)) {
    run_stage("train-phase1", [&] {
      const auto dataset = read_mined(wd.mined_phase1, queries);
      EncoderModel model = EncoderModel::init(cfg.encoder_config(), init_seed);
      TrainResult r =
          train(model, dataset, corpus, phase1, &qrels, wd.log_phase1);
      r.model.save(wd.ckpt_phase1);
      log_stage("train-phase1",
                "loss " + std::to_string(r.history.front().loss) + " -> " +
                    std::to_string(r.history.back().loss));
      return 0;
    });
  } else {
    log_stage("train-phase1", "reusing " + wd.ckpt_phase1);
  }

  // 4. Corpus embeddings under M1.
  if (!fs::exists(wd.emb_phase1)) {
    run_stage("encode-phase1", [&] {
      const EncoderModel m1 = EncoderModel::load(wd.ckpt_phase1, cfg.tokenizer);
      write_embeddings(encode_corpus(m1, corpus), wd.emb_phase1);
      return 0;
    });
  } else {
    log_stage("encode-phase1", "reusing " + wd.emb_phase1);
  }

  if (cfg.phase2_enabled) {
    // 5. Phase-2 mining with M1.
    if (!fs::exists(wd.mined_phase2)) {
      run_stage("mine-phase2", [&] {
        const EncoderModel m1 =
            EncoderModel::load(wd.ckpt_phase1, cfg.tokenizer);
        const EmbeddingMatrix emb = read_embeddings(wd.emb_phase1);
        MiningStats stats;
        const auto mined =
            mine_hard_all(queries, qrels, m1, emb, mining, &stats);
        write_mined(mined, wd.mined_phase2);
        log_stage("mine-phase2", std::to_string(mined.size()) + " examples");
        return 0;
      });
    } else {
      log_stage("mine-phase2", "reusing " + wd.mined_phase2);
    }

    // 6. Phase-2 training continues from the persisted M1.
    if (!fs::exists(wd.ckpt_phase2)) {
      run_stage("train-phase2", [&] {
        const auto dataset = read_mined(wd.mined_phase2, queries);
        const EncoderModel m1 =
            EncoderModel::load(wd.ckpt_phase1, cfg.tokenizer);
        TrainResult r =
            train(m1, dataset, corpus, phase2, &qrels, wd.log_phase2);
        r.model.save(wd.ckpt_phase2);
        log_stage("train-phase2",
                  "loss " + std::to_string(r.history.front().loss) + " -> " +
                      std::to_string(r.history.back().loss));
        return 0;
      });
    } else {
      log_stage("train-phase2", "reusing " + wd.ckpt_phase2);
    }

    // 7. Corpus embeddings under M2.
    if (!fs::exists(wd.emb_phase2)) {
      run_stage("encode-phase2", [&] {
        const EncoderModel m2 =
            EncoderModel::load(wd.ckpt_phase2, cfg.tokenizer);
        write_embeddings(encode_corpus(m2, corpus), wd.emb_phase2);
        return 0;
      });
    } else {
      log_stage("encode-phase2", "reusing " + wd.emb_phase2);
    }
  }

  // 8. Runs: sparse baseline, per-phase dense, ensemble.
  int max_k = cfg.cutoffs.recall.front();
  for (int k : cfg.cutoffs.recall) max_k = std::max(max_k, k);
  max_k = std::max({max_k, cfg.cutoffs.mrr, cfg.cutoffs.map, cfg.cutoffs.ndcg});
  const auto k = static_cast<std::size_t>(max_k);

  std::map<std::string, std::string> run_files;
  run_files["bm25plus"] = wd.runs_dir + "/bm25plus.run";
  run_files["dense_phase1"] = wd.runs_dir + "/dense_phase1.run";
  if (cfg.phase2_enabled) {
    run_files["dense_phase2"] = wd.runs_dir + "/dense_phase2.run";
    run_files["ensemble"] = wd.runs_dir + "/ensemble.run";
  }

  run_stage("search", [&] {
    if (!fs::exists(run_files["bm25plus"])) {
      std::vector<RankedList> lists;
      for (const auto& q : queries.queries()) {
        lists.push_back(index.search(q, k, SparseScorer::Bm25Plus));
      }
      write_run(lists, "bm25plus", run_files["bm25plus"]);
    }
    if (!fs::exists(run_files["dense_phase1"])) {
      const EncoderModel m1 = EncoderModel::load(wd.ckpt_phase1, cfg.tokenizer);
      const EmbeddingMatrix emb = read_embeddings(wd.emb_phase1);
      std::vector<RankedList> lists;
      for (const auto& q : queries.queries()) {
        lists.push_back(search_dense(q, m1, emb, k));
      }
      write_run(lists, "dense_phase1", run_files["dense_phase1"]);
    }
    if (cfg.phase2_enabled) {
      if (!fs::exists(run_files["dense_phase2"])) {
        const EncoderModel m2 =
            EncoderModel::load(wd.ckpt_phase2, cfg.tokenizer);
        const EmbeddingMatrix emb = read_embeddings(wd.emb_phase2);
        std::vector<RankedList> lists;
        for (const auto& q : queries.queries()) {
          lists.push_back(search_dense(q, m2, emb, k));
        }
        write_run(lists, "dense_phase2", run_files["dense_phase2"]);
      }
      if (!fs::exists(run_files["ensemble"])) {
        EnsembleConfig ecfg;
        ecfg.checkpoints = {wd.ckpt_phase2, wd.ckpt_phase1};
        ecfg.weights = cfg.ensemble_weights;
        ecfg.weights.resize(ecfg.checkpoints.size(), 0.0);
        ecfg.alpha = cfg.ensemble_alpha;
        ecfg.normalize_sparse = cfg.ensemble_normalize_sparse;
        const Ensemble ensemble =
            Ensemble::from_config(ecfg, cfg.tokenizer, corpus);
        std::vector<RankedList> lists;
        for (const auto& q : queries.queries()) {
          const auto sparse = index.score_all(q, SparseScorer::Bm25Plus);
          lists.push_back(ensemble.search(q, sparse, k));
        }
        write_run(lists, "ensemble", run_files["ensemble"]);
      }
    }
    return 0;
  });

  // 9. Evaluation and the final report.
  PipelineResult result;
  result.report_path = wd.report_file;
  run_stage("eval", [&] {
    json runs = json::object();
    for (const auto& [name, path] : run_files) {
      const auto lists = read_run(path);
      MetricReport report = evaluate_run(lists, qrels, cfg.cutoffs);
      runs[name] = report_entry(report);
      result.reports.emplace(name, std::move(report));
    }
    json report{{"seed", cfg.seed},
                {"queries", queries.size()},
                {"documents", corpus.size()},
                {"runs", std::move(runs)}};
    std::ofstream out(wd.report_file, std::ios::trunc | std::ios::binary);
    if (!out) throw RuntimeError("cannot write " + wd.report_file);
    out << report.dump(2) << "\n";
    return 0;
  });
  log_stage("eval", "report written to " + wd.report_file);
  return result;
}

}  // namespace duorank
