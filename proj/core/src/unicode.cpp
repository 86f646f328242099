#include <algorithm>
#include <cstdint>

#include "duorank/text.hpp"
#include "unicode_tables.hpp"

namespace duorank::unicode {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

// Hangul syllable arithmetic (UAX #15 §3.12).
constexpr char32_t kSBase = 0xAC00, kLBase = 0x1100, kVBase = 0x1161,
                   kTBase = 0x11A7;
constexpr int kLCount = 19, kVCount = 21, kTCount = 28;
constexpr int kNCount = kVCount * kTCount;
constexpr int kSCount = kLCount * kNCount;

const char* const kCategoryNames[] = {
    "Cc", "Cf", "Cn", "Co", "Cs", "Ll", "Lm", "Lo", "Lt", "Lu",
    "Mc", "Me", "Mn", "Nd", "Nl", "No", "Pc", "Pd", "Pe", "Pf",
    "Pi", "Po", "Ps", "Sc", "Sk", "Sm", "So", "Zl", "Zp", "Zs",
};

const uni::DecompEntry* find_decomp(char32_t cp) {
  const auto* end = uni::kDecompEntries + uni::kDecompEntryCount;
  const auto* it = std::lower_bound(
      uni::kDecompEntries, end, cp,
      [](const uni::DecompEntry& e, char32_t c) { return e.cp < c; });
  return (it != end && it->cp == cp) ? it : nullptr;
}

std::uint8_t combining_class(char32_t cp) {
  const auto* end = uni::kCccEntries + uni::kCccEntryCount;
  const auto* it = std::lower_bound(
      uni::kCccEntries, end, cp,
      [](const uni::CccEntry& e, char32_t c) { return e.cp < c; });
  return (it != end && it->cp == cp) ? it->ccc : 0;
}

char32_t compose_pair(char32_t a, char32_t b) {
  // Hangul LV / LVT composition.
  if (a >= kLBase && a < kLBase + kLCount && b >= kVBase &&
      b < kVBase + kVCount) {
    return kSBase + ((a - kLBase) * kVCount + (b - kVBase)) * kTCount;
  }
  if (a >= kSBase && a < kSBase + kSCount && (a - kSBase) % kTCount == 0 &&
      b > kTBase && b < kTBase + kTCount) {
    return a + (b - kTBase);
  }
  const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
  const auto* end = uni::kCompEntries + uni::kCompEntryCount;
  const auto* it = std::lower_bound(
      uni::kCompEntries, end, key,
      [](const uni::CompEntry& e, std::uint64_t k) { return e.key < k; });
  return (it != end && it->key == key) ? it->composed : 0;
}

void decompose_into(char32_t cp, std::u32string& out) {
  if (cp >= kSBase && cp < kSBase + kSCount) {
    const int s = static_cast<int>(cp - kSBase);
    out.push_back(kLBase + s / kNCount);
    out.push_back(kVBase + (s % kNCount) / kTCount);
    if (s % kTCount != 0) out.push_back(kTBase + s % kTCount);
    return;
  }
  if (const auto* e = find_decomp(cp)) {
    // Pool entries are already fully expanded.
    out.append(uni::kDecompPool + e->offset, e->len);
    return;
  }
  out.push_back(cp);
}

// Stable-sorts runs of nonzero combining class by class value.
void canonical_order(std::u32string& s) {
  for (std::size_t i = 1; i < s.size(); ++i) {
    const std::uint8_t cc = combining_class(s[i]);
    if (cc == 0) continue;
    std::size_t j = i;
    while (j > 0 && combining_class(s[j - 1]) > cc) {
      std::swap(s[j - 1], s[j]);
      --j;
    }
  }
}

std::u32string compose(const std::u32string& s) {
  std::u32string out;
  out.reserve(s.size());
  std::ptrdiff_t last_starter = -1;
  int last_cc = -1;  // ccc of the most recent kept char after the starter
  for (char32_t c : s) {
    const int cc = combining_class(c);
    if (last_starter >= 0 && last_cc < cc) {
      if (char32_t comp = compose_pair(out[last_starter], c)) {
        out[last_starter] = comp;
        continue;
      }
    }
    if (cc == 0) {
      last_starter = static_cast<std::ptrdiff_t>(out.size());
      last_cc = -1;
    } else {
      last_cc = cc;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::u32string decode_utf8(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  const auto n = bytes.size();
  while (i < n) {
    const unsigned char b0 = bytes[i];
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
      min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
      min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
      min = 0x10000;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (i + len > n) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const unsigned char bk = bytes[i + k];
      if ((bk & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (bk & 0x3F);
    }
    if (!ok || cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(const std::u32string& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

std::u32string nfkc(const std::u32string& cps) {
  std::u32string decomposed;
  decomposed.reserve(cps.size() * 2);
  for (char32_t cp : cps) decompose_into(cp, decomposed);
  canonical_order(decomposed);
  return compose(decomposed);
}

std::u32string casefold(const std::u32string& cps) {
  std::u32string out;
  out.reserve(cps.size());
  const auto* end = uni::kFoldEntries + uni::kFoldEntryCount;
  for (char32_t cp : cps) {
    const auto* it = std::lower_bound(
        uni::kFoldEntries, end, cp,
        [](const uni::FoldEntry& e, char32_t c) { return e.cp < c; });
    if (it != end && it->cp == cp) {
      out.append(uni::kFoldPool + it->offset, it->len);
    } else {
      out.push_back(cp);
    }
  }
  return out;
}

std::string_view category(char32_t cp) {
  const auto* end = uni::kCatRanges + uni::kCatRangeCount;
  const auto* it = std::upper_bound(
      uni::kCatRanges, end, cp,
      [](char32_t c, const uni::CatRange& r) { return c < r.lo; });
  if (it == uni::kCatRanges) return "Cn";
  --it;
  return cp <= it->hi ? kCategoryNames[it->cat] : "Cn";
}

bool is_whitespace(char32_t cp) {
  const auto* end = uni::kWhitespace + uni::kWhitespaceCount;
  return std::binary_search(uni::kWhitespace, end, cp);
}

}  // namespace duorank::unicode
