#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "duorank/config.hpp"
#include "duorank/metrics.hpp"
#include "duorank/mining.hpp"
#include "duorank/retrieval.hpp"
#include "duorank/sparse.hpp"
#include "duorank/trainer.hpp"

namespace duorank {

/// Everything an end-to-end run needs. The defaults are the desk-scale
/// configuration run-all uses when a key is absent.
struct PipelineConfig {
  std::string corpus_path;
  std::string queries_path;
  std::string qrels_path;
  std::string workdir = "work";
  std::uint64_t seed = 1;
  bool single_thread = true;  // stages are sequential either way; kept as an
                              // explicit reproducibility switch

  TokenizerConfig tokenizer;
  SparseParams sparse;
  std::uint32_t encoder_dim = 64;
  std::uint32_t encoder_buckets = 65536;
  bool encoder_role_prefix = true;
  MiningConfig mining;
  TrainConfig phase1;
  TrainConfig phase2;
  bool phase2_enabled = true;
  std::vector<double> ensemble_weights = {0.6, 0.4};  // (phase2, phase1)
  double ensemble_alpha = 0.1;
  bool ensemble_normalize_sparse = false;
  EvalCutoffs cutoffs;

  static PipelineConfig defaults();
  static PipelineConfig from_kv(const KvConfig& kv);
  static PipelineConfig from_file(const std::string& path);

  /// Rejects missing inputs and phase-2 batch sizes other than 1.
  void validate() const;
  EncoderConfig encoder_config() const;
};

/// Fixed artifact layout under the workdir.
struct WorkdirLayout {
  explicit WorkdirLayout(const std::string& workdir);
  std::string index_file;
  std::string mined_phase1;
  std::string mined_phase2;
  std::string ckpt_phase1;
  std::string ckpt_phase2;
  std::string emb_phase1;
  std::string emb_phase2;
  std::string log_phase1;
  std::string log_phase2;
  std::string runs_dir;
  std::string report_file;
  void create_dirs() const;
};

struct PipelineResult {
  std::map<std::string, MetricReport> reports;  // by run name
  std::string report_path;
};

/// Runs index -> mine -> train (phase 1) -> encode -> mine hard -> train
/// (phase 2) -> encode -> search/ensemble -> evaluate. Every stage persists
/// its artifact and is skipped when the artifact already exists, so deleting
/// downstream files resumes from the last valid stage. A stage failure
/// aborts with the stage name; earlier artifacts stay on disk.
PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace duorank
