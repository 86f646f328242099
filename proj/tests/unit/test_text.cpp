#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "duorank/common.hpp"
#include "duorank/rng.hpp"
#include "duorank/text.hpp"

using namespace duorank;

namespace {

std::u32string parse_hex_codepoints(const std::string& field) {
  std::u32string out;
  std::istringstream in(field);
  std::string hex;
  while (in >> hex) {
    out.push_back(static_cast<char32_t>(std::stoul(hex, nullptr, 16)));
  }
  return out;
}

std::vector<std::pair<std::u32string, std::u32string>> load_cases(
    const std::string& name) {
  std::ifstream in(std::string(DUORANK_TEST_DATA_DIR) + "/" + name);
  REQUIRE(in.good());
  std::vector<std::pair<std::u32string, std::u32string>> cases;
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    cases.emplace_back(parse_hex_codepoints(line.substr(0, tab)),
                       parse_hex_codepoints(line.substr(tab + 1)));
  }
  REQUIRE(cases.size() > 100);
  return cases;
}

TokenizerConfig words_cfg() {
  TokenizerConfig cfg;
  cfg.mode = TokenizerMode::UnicodeWords;
  return cfg;
}

TokenizerConfig ngram_cfg(int n) {
  TokenizerConfig cfg;
  cfg.mode = TokenizerMode::CharNgram;
  cfg.ngram = n;
  return cfg;
}

}  // namespace

TEST_CASE("nfkc matches the reference vectors") {
  for (const auto& [input, expected] : load_cases("nfkc_cases.tsv")) {
    CHECK(unicode::nfkc(input) == expected);
  }
}

TEST_CASE("casefold matches the reference vectors") {
  for (const auto& [input, expected] : load_cases("casefold_cases.tsv")) {
    CHECK(unicode::casefold(input) == expected);
  }
}

TEST_CASE("utf8 round trip and replacement") {
  CHECK(unicode::encode_utf8(unicode::decode_utf8("héllo wörld")) ==
        "héllo wörld");
  CHECK(unicode::encode_utf8(unicode::decode_utf8("日本語")) == "日本語");
  // Lone continuation byte decodes to U+FFFD.
  const auto bad = unicode::decode_utf8("\x80");
  REQUIRE(bad.size() == 1);
  CHECK(bad[0] == char32_t{0xFFFD});
}

TEST_CASE("category lookup") {
  CHECK(unicode::category(U'A') == "Lu");
  CHECK(unicode::category(U'a') == "Ll");
  CHECK(unicode::category(U'5') == "Nd");
  CHECK(unicode::category(U'!') == "Po");
  CHECK(unicode::category(U'+') == "Sm");
  CHECK(unicode::category(U' ') == "Zs");
  CHECK(unicode::category(char32_t{0x3042}) == "Lo");  // hiragana A
  CHECK(unicode::category(char32_t{0x0301}) == "Mn");
}

TEST_CASE("preprocess strips punctuation and folds case") {
  CHECK(preprocess("Hello,  WORLD!!", words_cfg()) == "hello world");
  CHECK(preprocess("", words_cfg()) == "");
  CHECK(preprocess("ＡＢＣ", words_cfg()) == "abc");
}

TEST_CASE("preprocess handles stripped-away compatibility expansions") {
  // Parenthesized forms expand to punctuation that must also be stripped.
  CHECK(preprocess("⑴⑵", words_cfg()) == "12");
  CHECK(preprocess("Straße", words_cfg()) == "strasse");
}

TEST_CASE("preprocess without lowercase keeps case") {
  TokenizerConfig cfg = words_cfg();
  cfg.lowercase = false;
  CHECK(preprocess("Hello WORLD", cfg) == "Hello WORLD");
}

TEST_CASE("preprocess is idempotent on fuzzed input") {
  Rng rng(20240817);
  TokenizerConfig cfg = words_cfg();
  for (int iter = 0; iter < 300; ++iter) {
    std::u32string s;
    const std::size_t len = 1 + rng.next_below(30);
    for (std::size_t i = 0; i < len; ++i) {
      static const std::pair<char32_t, char32_t> ranges[] = {
          {0x20, 0x7E},     {0xA0, 0x2FF},    {0x300, 0x36F},
          {0x3040, 0x30FF}, {0xFF00, 0xFFEF}, {0x2460, 0x24FF},
          {0xAC00, 0xD7A3}, {0x1100, 0x11C0}, {0xFB00, 0xFB4F},
      };
      const auto& [lo, hi] = ranges[rng.next_below(std::size(ranges))];
      s.push_back(static_cast<char32_t>(lo + rng.next_below(hi - lo + 1)));
    }
    const std::string raw = unicode::encode_utf8(s);
    const std::string once = preprocess(raw, cfg);
    CHECK(preprocess(once, cfg) == once);
  }
}

TEST_CASE("preprocess is deterministic") {
  const std::string text = "Mixed ＴＥＸＴ with ｶﾀｶﾅ and marks x̨́";
  CHECK(preprocess(text, words_cfg()) == preprocess(text, words_cfg()));
}

TEST_CASE("word tokenization drops stopwords") {
  TokenizerConfig cfg = words_cfg();
  cfg.stopwords = {"the"};
  CHECK(tokenize("the cat sat", cfg) ==
        std::vector<std::string>{"cat", "sat"});
}

TEST_CASE("stopwords are compared after case folding") {
  TokenizerConfig cfg = words_cfg();
  cfg.stopwords = {"The"};  // list entry folds to "the"
  const std::string pre = preprocess("The cat", cfg);
  CHECK(tokenize(pre, cfg) == std::vector<std::string>{"cat"});
}

TEST_CASE("character bigrams") {
  CHECK(tokenize("abcd", ngram_cfg(2)) ==
        std::vector<std::string>{"ab", "bc", "cd"});
  CHECK(tokenize("ab", ngram_cfg(3)) == std::vector<std::string>{});
}

TEST_CASE("character ngrams count codepoints, not bytes") {
  // Five codepoints of Japanese -> four bigrams.
  const std::string five = "こんにちは";
  const auto grams = tokenize(five, ngram_cfg(2));
  REQUIRE(grams.size() == 4);
  CHECK(grams[0] == "こん");
  CHECK(grams[3] == "ちは");
}

TEST_CASE("ngram count follows the codepoint formula") {
  Rng rng(99);
  for (int iter = 0; iter < 200; ++iter) {
    const int n = 2 + static_cast<int>(rng.next_below(3));
    std::u32string s;
    const std::size_t len = rng.next_below(12);
    for (std::size_t i = 0; i < len; ++i) {
      s.push_back(rng.next_below(2) == 0
                      ? U' '
                      : static_cast<char32_t>(U'a' + rng.next_below(26)));
    }
    std::size_t without_spaces = 0;
    for (char32_t c : s) without_spaces += c == U' ' ? 0 : 1;
    const auto grams = tokenize(unicode::encode_utf8(s), ngram_cfg(n));
    const std::size_t expected =
        without_spaces + 1 > static_cast<std::size_t>(n)
            ? without_spaces - n + 1
            : (without_spaces >= static_cast<std::size_t>(n) ? 1 : 0);
    CHECK(grams.size() == expected);
  }
}

TEST_CASE("ngram size is validated") {
  CHECK_THROWS_AS(Analyzer(ngram_cfg(1)), ValidationError);
  CHECK_THROWS_AS(Analyzer(ngram_cfg(5)), ValidationError);
  CHECK_NOTHROW(Analyzer(ngram_cfg(4)));
}

TEST_CASE("strip categories accept exact and wildcard patterns") {
  TokenizerConfig cfg = words_cfg();
  cfg.strip_categories = {"Po"};
  CHECK(preprocess("a.b+c", cfg) == "ab+c");
  cfg.strip_categories = {"P*", "S*"};
  CHECK(preprocess("a.b+c", cfg) == "abc");
}
