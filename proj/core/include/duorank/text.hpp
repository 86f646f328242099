#pragma once

#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace duorank {

enum class TokenizerMode { UnicodeWords, CharNgram };

/// Settings shared by the sparse and dense paths. `strip_categories` holds
/// two-letter Unicode general categories, or a one-letter prefix plus '*'
/// ("P*" strips all punctuation). Stopwords are compared after case folding
/// when `lowercase` is set.
struct TokenizerConfig {
  TokenizerMode mode = TokenizerMode::UnicodeWords;
  int ngram = 2;  // CharNgram size, 2..4
  bool lowercase = true;
  std::set<std::string> stopwords;
  std::set<std::string> strip_categories = {"P*", "S*"};

  void validate() const;
  bool operator==(const TokenizerConfig&) const = default;
};

/// Cleans raw text: NFKC normalization, category stripping, optional case
/// folding (iterated to a fixpoint so the result is stable under a second
/// pass), then whitespace collapsed to single spaces and trimmed.
std::string preprocess(std::string_view text, const TokenizerConfig& cfg);

/// Splits preprocessed text. UnicodeWords: maximal runs of letter / mark /
/// number codepoints, stopwords dropped. CharNgram: every overlapping run of
/// `ngram` codepoints of the whitespace-stripped text, no stopword filtering.
std::vector<std::string> tokenize(std::string_view preprocessed,
                                  const TokenizerConfig& cfg);

/// One stopword per line, UTF-8. Blank lines ignored.
std::set<std::string> read_stopword_file(const std::string& path);

/// Precompiled tokenizer: normalizes the stopword set once so per-document
/// calls stay cheap.
class Analyzer {
 public:
  Analyzer() : Analyzer(TokenizerConfig{}) {}
  explicit Analyzer(TokenizerConfig cfg);

  std::string preprocess(std::string_view text) const;
  std::vector<std::string> tokenize(std::string_view preprocessed) const;
  /// preprocess + tokenize.
  std::vector<std::string> analyze(std::string_view raw) const;

  const TokenizerConfig& config() const { return cfg_; }

 private:
  TokenizerConfig cfg_;
  std::unordered_set<std::string> stopwords_;
};

namespace unicode {

/// Invalid byte sequences decode to U+FFFD.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(const std::u32string& cps);

/// Canonical-compatibility normalization (decompose, reorder, compose).
std::u32string nfkc(const std::u32string& cps);

/// Full case folding (one codepoint may fold to several).
std::u32string casefold(const std::u32string& cps);

/// Two-letter general category ("Lu", "Po", ...; unassigned yields "Cn").
std::string_view category(char32_t cp);

bool is_whitespace(char32_t cp);

}  // namespace unicode

}  // namespace duorank
