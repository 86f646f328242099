#include "duorank/text.hpp"

#include <fstream>

#include "duorank/common.hpp"

namespace duorank {

namespace {

bool category_stripped(char32_t cp, const std::set<std::string>& strip) {
  if (strip.empty()) return false;
  const std::string_view cat = unicode::category(cp);
  for (const auto& pat : strip) {
    if (pat.empty()) continue;
    if (pat.size() == 1 || (pat.size() == 2 && pat[1] == '*')) {
      if (pat[0] == cat[0]) return true;
    } else if (pat == cat) {
      return true;
    }
  }
  return false;
}

std::u32string strip_categories(const std::u32string& s,
                                const std::set<std::string>& strip) {
  std::u32string out;
  out.reserve(s.size());
  for (char32_t cp : s) {
    if (!category_stripped(cp, strip)) out.push_back(cp);
  }
  return out;
}

// Normalize, strip, fold. Stripping can expose new composable pairs and
// folding can emit foldable expansions, so preprocess() iterates this to a
// fixpoint; in practice two passes suffice.
std::u32string clean_pass(const std::u32string& s, const TokenizerConfig& cfg) {
  std::u32string out = strip_categories(unicode::nfkc(s), cfg.strip_categories);
  if (cfg.lowercase) out = unicode::casefold(out);
  return out;
}

std::u32string collapse_whitespace(const std::u32string& s) {
  std::u32string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char32_t cp : s) {
    if (unicode::is_whitespace(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(U' ');
      pending_space = false;
    }
    out.push_back(cp);
  }
  return out;
}

bool is_word_cp(char32_t cp) {
  const char c = unicode::category(cp)[0];
  return c == 'L' || c == 'M' || c == 'N';
}

std::string canonical_stopword(const std::string& raw, bool lowercase) {
  std::u32string s = unicode::nfkc(unicode::decode_utf8(raw));
  if (lowercase) s = unicode::casefold(s);
  return unicode::encode_utf8(s);
}

}  // namespace

void TokenizerConfig::validate() const {
  if (mode == TokenizerMode::CharNgram && (ngram < 2 || ngram > 4)) {
    throw ValidationError("tokenizer: char-ngram size must be in [2,4], got " +
                          std::to_string(ngram));
  }
}

Analyzer::Analyzer(TokenizerConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (const auto& w : cfg_.stopwords) {
    stopwords_.insert(canonical_stopword(w, cfg_.lowercase));
  }
}

std::string Analyzer::preprocess(std::string_view text) const {
  std::u32string cur = unicode::decode_utf8(text);
  for (int pass = 0; pass < 4; ++pass) {
    std::u32string next = clean_pass(cur, cfg_);
    const bool stable = next == cur;
    cur = std::move(next);
    if (stable) break;
  }
  return unicode::encode_utf8(collapse_whitespace(cur));
}

std::vector<std::string> Analyzer::tokenize(std::string_view preprocessed) const {
  const std::u32string cps = unicode::decode_utf8(preprocessed);
  std::vector<std::string> tokens;
  if (cfg_.mode == TokenizerMode::UnicodeWords) {
    std::u32string run;
    auto flush = [&] {
      if (run.empty()) return;
      std::string tok = unicode::encode_utf8(run);
      if (!stopwords_.count(tok)) tokens.push_back(std::move(tok));
      run.clear();
    };
    for (char32_t cp : cps) {
      if (is_word_cp(cp)) {
        run.push_back(cp);
      } else {
        flush();
      }
    }
    flush();
  } else {
    std::u32string squeezed;
    squeezed.reserve(cps.size());
    for (char32_t cp : cps) {
      if (!unicode::is_whitespace(cp)) squeezed.push_back(cp);
    }
    const std::size_t n = static_cast<std::size_t>(cfg_.ngram);
    if (squeezed.size() >= n) {
      for (std::size_t i = 0; i + n <= squeezed.size(); ++i) {
        tokens.push_back(unicode::encode_utf8(squeezed.substr(i, n)));
      }
    }
  }
  return tokens;
}

std::vector<std::string> Analyzer::analyze(std::string_view raw) const {
  return tokenize(preprocess(raw));
}

std::string preprocess(std::string_view text, const TokenizerConfig& cfg) {
  return Analyzer(cfg).preprocess(text);
}

std::vector<std::string> tokenize(std::string_view preprocessed,
                                  const TokenizerConfig& cfg) {
  return Analyzer(cfg).tokenize(preprocessed);
}

std::set<std::string> read_stopword_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open stopword file: " + path);
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) words.insert(line);
  }
  return words;
}

}  // namespace duorank
