#include "duorank/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "binio.hpp"
#include "duorank/common.hpp"
#include "duorank/rng.hpp"

namespace duorank {

namespace {
constexpr char kCheckpointMagic[4] = {'E', 'N', 'C', '1'};
constexpr double kDegenerateNorm = 1e-12;
}  // namespace

void EncoderConfig::validate() const {
  if (dim < 2) throw ValidationError("encoder: dim must be >= 2");
  if (buckets < dim) {
    throw ValidationError("encoder: bucket count must be >= dim");
  }
  tokenizer.validate();
}

EncoderModel EncoderModel::init(const EncoderConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  EncoderModel m;
  m.cfg_ = cfg;
  m.analyzer_ = Analyzer(cfg.tokenizer);
  m.seed_ = seed;
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.buckets));
  m.weights_.resize(static_cast<std::size_t>(cfg.dim) * cfg.buckets);
  Rng rng(seed);
  for (double& w : m.weights_) w = rng.next_in(-scale, scale);
  return m;
}

TokenBag EncoderModel::token_bag(std::string_view text, Role role) const {
  std::vector<std::string> tokens = analyzer_.analyze(text);
  if (cfg_.role_prefix) {
    tokens.push_back(role == Role::Query ? "query:" : "passage:");
  }
  std::vector<std::pair<std::uint32_t, double>> counts;
  for (const auto& t : tokens) {
    counts.emplace_back(static_cast<std::uint32_t>(fnv1a64(t) % cfg_.buckets),
                        1.0);
  }
  std::sort(counts.begin(), counts.end());
  TokenBag bag;
  double sq = 0.0;
  for (const auto& [bucket, one] : counts) {
    if (!bag.empty() && bag.back().first == bucket) {
      bag.back().second += one;
    } else {
      bag.emplace_back(bucket, one);
    }
  }
  for (const auto& [bucket, count] : bag) sq += count * count;
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& [bucket, count] : bag) count *= inv;
  }
  return bag;
}

std::pair<std::vector<double>, double> EncoderModel::project(
    const TokenBag& bag) const {
  std::vector<double> raw(cfg_.dim, 0.0);
  for (const auto& [bucket, weight] : bag) {
    const double* col =
        weights_.data() + static_cast<std::size_t>(bucket) * cfg_.dim;
    for (std::uint32_t r = 0; r < cfg_.dim; ++r) {
      raw[r] += col[r] * weight;
    }
  }
  double sq = 0.0;
  for (double v : raw) sq += v * v;
  return {std::move(raw), std::sqrt(sq)};
}

std::vector<double> EncoderModel::encode(std::string_view text, Role role) const {
  auto [raw, norm] = project(token_bag(text, role));
  if (norm < kDegenerateNorm) {
    std::fill(raw.begin(), raw.end(), 0.0);
    raw[0] = 1.0;
    return raw;
  }
  for (double& v : raw) v /= norm;
  return raw;
}

double similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw ValidationError("similarity: dimension mismatch (" +
                          std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void EncoderModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeError("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, 4);
  binio::put_u32(out, cfg_.dim);
  binio::put_u32(out, cfg_.buckets);
  binio::put_u32(out, cfg_.role_prefix ? 1u : 0u);
  binio::put_u64(out, seed_);
  for (std::uint32_t r = 0; r < cfg_.dim; ++r) {
    for (std::uint32_t c = 0; c < cfg_.buckets; ++c) {
      binio::put_f32(out, static_cast<float>(weight_at(r, c)));
    }
  }
  if (!out) throw RuntimeError("failed writing checkpoint: " + path);
}

EncoderModel EncoderModel::load(const std::string& path,
                                const TokenizerConfig& tokenizer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (std::string_view(magic, 4) != std::string_view(kCheckpointMagic, 4)) {
    throw ValidationError(path + ": not an encoder checkpoint");
  }
  EncoderModel m;
  m.cfg_.dim = binio::get_u32(in);
  m.cfg_.buckets = binio::get_u32(in);
  m.cfg_.role_prefix = (binio::get_u32(in) & 1u) != 0;
  m.cfg_.tokenizer = tokenizer;
  m.seed_ = binio::get_u64(in);
  m.cfg_.validate();
  m.analyzer_ = Analyzer(tokenizer);
  const std::size_t n = static_cast<std::size_t>(m.cfg_.dim) * m.cfg_.buckets;
  m.weights_.resize(n);
  for (std::uint32_t r = 0; r < m.cfg_.dim; ++r) {
    for (std::uint32_t c = 0; c < m.cfg_.buckets; ++c) {
      m.weights_[static_cast<std::size_t>(c) * m.cfg_.dim + r] =
          static_cast<double>(binio::get_f32(in));
    }
  }
  if (!in) throw ValidationError(path + ": truncated checkpoint");
  for (double w : m.weights_) {
    if (!std::isfinite(w)) {
      throw ValidationError(path + ": checkpoint contains non-finite weights");
    }
  }
  return m;
}

}  // namespace duorank
