#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "duorank/text.hpp"

namespace duorank {

enum class Role { Query, Passage };

/// Sparse bag-of-tokens vector over hash buckets, L2-normalized.
/// Entries are (bucket, weight) sorted by bucket.
using TokenBag = std::vector<std::pair<std::uint32_t, double>>;

struct EncoderConfig {
  std::uint32_t dim = 64;
  std::uint32_t buckets = 65536;  // hashing-trick vocabulary size
  bool role_prefix = true;        // prepend a "query:" / "passage:" marker token
  TokenizerConfig tokenizer;

  void validate() const;
};

/// Dual encoder over a hashed bag of tokens: embed(text) is the unit-normalized
/// projection W * x, where x is the unit-normalized bucket-count vector. One
/// weight matrix serves both roles. Immutable during encoding; training makes
/// a copy.
class EncoderModel {
 public:
  EncoderModel() = default;

  /// Weights i.i.d. uniform(-1/sqrt(V), 1/sqrt(V)) from mt19937_64(seed).
  static EncoderModel init(const EncoderConfig& cfg, std::uint64_t seed);

  std::uint32_t dim() const { return cfg_.dim; }
  std::uint32_t buckets() const { return cfg_.buckets; }
  std::uint64_t seed() const { return seed_; }
  const EncoderConfig& config() const { return cfg_; }
  const Analyzer& analyzer() const { return analyzer_; }

  /// Bucket-major storage: entry (row, bucket) lives at bucket * dim + row,
  /// keeping per-token columns contiguous. Checkpoints store the row-major
  /// dim x buckets view.
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& mutable_weights() { return weights_; }
  double weight_at(std::uint32_t row, std::uint32_t bucket) const {
    return weights_[static_cast<std::size_t>(bucket) * cfg_.dim + row];
  }

  /// Hashed, counted and L2-normalized tokens (with the role marker when
  /// enabled). Empty text with no marker yields an empty bag.
  TokenBag token_bag(std::string_view text, Role role) const;

  /// Unit-norm embedding. Near-zero projections (norm < 1e-12) fall back to
  /// the first basis vector so downstream math never sees NaNs.
  std::vector<double> encode(std::string_view text, Role role) const;

  /// W * x and its norm, before normalization; shared by encode and the
  /// training gradients.
  std::pair<std::vector<double>, double> project(const TokenBag& bag) const;

  void save(const std::string& path) const;
  static EncoderModel load(const std::string& path,
                           const TokenizerConfig& tokenizer = {});

 private:
  EncoderConfig cfg_;
  Analyzer analyzer_;
  std::uint64_t seed_ = 0;
  std::vector<double> weights_;
};

/// Plain dot product; throws on dimension mismatch.
double similarity(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace duorank
