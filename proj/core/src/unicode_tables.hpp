// Table declarations for the generated Unicode data
// (see scripts/gen_unicode_tables.py).
#pragma once

#include <cstddef>
#include <cstdint>

namespace duorank::uni {

struct DecompEntry {
  char32_t cp;
  std::uint32_t offset;
  std::uint16_t len;
};

struct CccEntry {
  char32_t cp;
  std::uint8_t ccc;
};

struct CompEntry {
  std::uint64_t key;  // (first << 32) | second
  char32_t composed;
};

struct FoldEntry {
  char32_t cp;
  std::uint32_t offset;
  std::uint8_t len;
};

struct CatRange {
  char32_t lo;
  char32_t hi;
  std::uint8_t cat;  // index into the two-letter category list
};

extern const DecompEntry kDecompEntries[];
extern const std::size_t kDecompEntryCount;
extern const char32_t kDecompPool[];

extern const CccEntry kCccEntries[];
extern const std::size_t kCccEntryCount;

extern const CompEntry kCompEntries[];
extern const std::size_t kCompEntryCount;

extern const FoldEntry kFoldEntries[];
extern const std::size_t kFoldEntryCount;

extern const char32_t kFoldPool[];

extern const CatRange kCatRanges[];
extern const std::size_t kCatRangeCount;

extern const char32_t kWhitespace[];
extern const std::size_t kWhitespaceCount;

}  // namespace duorank::uni
