#!/usr/bin/env python3
"""Regenerates core/src/unicode_tables.cpp from Python's unicodedata.

Also refreshes tests/data/nfkc_cases.tsv and tests/data/casefold_cases.tsv,
the reference vectors the text tests check against. Run from the repo root:

    python3 scripts/gen_unicode_tables.py
"""

import random
import sys
import unicodedata

MAX_CP = 0x110000
HANGUL_S_BASE, HANGUL_S_COUNT = 0xAC00, 11172

CATEGORIES = [
    "Cc", "Cf", "Cn", "Co", "Cs",
    "Ll", "Lm", "Lo", "Lt", "Lu",
    "Mc", "Me", "Mn",
    "Nd", "Nl", "No",
    "Pc", "Pd", "Pe", "Pf", "Pi", "Po", "Ps",
    "Sc", "Sk", "Sm", "So",
    "Zl", "Zp", "Zs",
]


def is_surrogate(cp):
    return 0xD800 <= cp <= 0xDFFF


def is_hangul_syllable(cp):
    return HANGUL_S_BASE <= cp < HANGUL_S_BASE + HANGUL_S_COUNT


def gen_decomp():
    entries = []  # (cp, [expansion...]) fully expanded NFKD
    pool = []
    for cp in range(MAX_CP):
        if is_surrogate(cp) or is_hangul_syllable(cp):
            continue
        ch = chr(cp)
        d = unicodedata.normalize("NFKD", ch)
        if d != ch:
            exp = [ord(c) for c in d]
            entries.append((cp, len(pool), len(exp)))
            pool.extend(exp)
    return entries, pool


def gen_ccc():
    out = []
    for cp in range(MAX_CP):
        if is_surrogate(cp):
            continue
        c = unicodedata.combining(chr(cp))
        if c:
            out.append((cp, c))
    return out


def gen_comp():
    pairs = []
    for cp in range(MAX_CP):
        if is_surrogate(cp) or is_hangul_syllable(cp):
            continue
        dec = unicodedata.decomposition(chr(cp))
        if not dec or dec.startswith("<"):
            continue
        parts = dec.split()
        if len(parts) != 2:
            continue
        a, b = int(parts[0], 16), int(parts[1], 16)
        # composing a+b must round-trip; this folds in the exclusion list
        if unicodedata.normalize("NFC", chr(a) + chr(b)) == chr(cp):
            pairs.append(((a << 32) | b, cp))
    pairs.sort()
    return pairs


def gen_casefold():
    entries = []
    pool = []
    for cp in range(MAX_CP):
        if is_surrogate(cp):
            continue
        ch = chr(cp)
        f = ch.casefold()
        if f != ch:
            exp = [ord(c) for c in f]
            entries.append((cp, len(pool), len(exp)))
            pool.extend(exp)
    return entries, pool


def gen_categories():
    ranges = []
    lo = 0
    cur = unicodedata.category(chr(0))
    for cp in range(1, MAX_CP):
        cat = "Cs" if is_surrogate(cp) else unicodedata.category(chr(cp))
        if cat != cur:
            ranges.append((lo, cp - 1, cur))
            lo, cur = cp, cat
    ranges.append((lo, MAX_CP - 1, cur))
    return ranges


def gen_whitespace():
    return [cp for cp in range(MAX_CP)
            if not is_surrogate(cp) and chr(cp).isspace()]


def emit_cpp(out):
    decomp_entries, decomp_pool = gen_decomp()
    ccc = gen_ccc()
    comp = gen_comp()
    fold_entries, fold_pool = gen_casefold()
    cats = gen_categories()
    ws = gen_whitespace()

    w = out.write
    w("// Generated by scripts/gen_unicode_tables.py; do not edit.\n")
    w("// Unicode data version %s.\n\n" % unicodedata.unidata_version)
    w('#include "unicode_tables.hpp"\n\n')
    w("namespace duorank::uni {\n\n")

    w("const DecompEntry kDecompEntries[] = {\n")
    for cp, off, n in decomp_entries:
        w("  {0x%X,%d,%d},\n" % (cp, off, n))
    w("};\n")
    w("const std::size_t kDecompEntryCount = %d;\n\n" % len(decomp_entries))

    w("const char32_t kDecompPool[] = {\n")
    for i in range(0, len(decomp_pool), 12):
        w("  " + ",".join("0x%X" % c for c in decomp_pool[i:i + 12]) + ",\n")
    w("};\n\n")

    w("const CccEntry kCccEntries[] = {\n")
    for cp, c in ccc:
        w("  {0x%X,%d},\n" % (cp, c))
    w("};\n")
    w("const std::size_t kCccEntryCount = %d;\n\n" % len(ccc))

    w("const CompEntry kCompEntries[] = {\n")
    for key, cp in comp:
        w("  {0x%XULL,0x%X},\n" % (key, cp))
    w("};\n")
    w("const std::size_t kCompEntryCount = %d;\n\n" % len(comp))

    w("const FoldEntry kFoldEntries[] = {\n")
    for cp, off, n in fold_entries:
        w("  {0x%X,%d,%d},\n" % (cp, off, n))
    w("};\n")
    w("const std::size_t kFoldEntryCount = %d;\n\n" % len(fold_entries))

    w("const char32_t kFoldPool[] = {\n")
    for i in range(0, len(fold_pool), 12):
        w("  " + ",".join("0x%X" % c for c in fold_pool[i:i + 12]) + ",\n")
    w("};\n\n")

    w("const CatRange kCatRanges[] = {\n")
    for lo, hi, cat in cats:
        w("  {0x%X,0x%X,%d},\n" % (lo, hi, CATEGORIES.index(cat)))
    w("};\n")
    w("const std::size_t kCatRangeCount = %d;\n\n" % len(cats))

    w("const char32_t kWhitespace[] = {\n")
    w("  " + ",".join("0x%X" % c for c in ws) + ",\n")
    w("};\n")
    w("const std::size_t kWhitespaceCount = %d;\n\n" % len(ws))

    w("}  // namespace duorank::uni\n")


def interesting_strings():
    rng = random.Random(20240817)
    fixed = [
        "ＡＢＣ",
        "ﬁﬂﬃ",
        "①②③ ⑴⑵",
        "Ⅷ Ⅸ ⅸ",
        "ｶﾞｷﾞｸﾞ ﾊﾟﾋﾟ",
        "café café",
        "ą́ ą́",
        "각 각",
        "가나다 한국어",
        "Straße STRASSE ß ẞ",
        "İstanbul ı",
        "ΣΊΣΥΦΟΣ σίσυφος ς",
        "ẋ̣ ẋ̣",
        "ẛ st ﬅ",
        "㈱ ㋿ ㍿",
        "é́́",
        "    space",
        "½ ¾ ⅓",
        "ｈｅｌｌｏ ＷＯＲＬＤ",
        "ωΩ℧ KＫ",
        "日本語のテキスト",
        "Ĳ ĳ Ǆ ǅ ǆ",
        "ﷺ",
        "ΐ ΰ",
        "ᾲᾳᾴ",
        "ȫ ō̈",
        "Ω K Å",
    ]
    ranges = [
        (0x20, 0x7E), (0xA0, 0x2FF), (0x300, 0x36F), (0x370, 0x3FF),
        (0x1E00, 0x1EFF), (0x3040, 0x30FF), (0xFF00, 0xFFEF),
        (0xAC00, 0xD7A3), (0x1100, 0x11FF), (0x2100, 0x214F),
        (0x2460, 0x24FF), (0xFB00, 0xFB4F), (0x4E00, 0x4EFF),
    ]
    out = list(fixed)
    for _ in range(260):
        n = rng.randint(1, 24)
        s = []
        for _ in range(n):
            lo, hi = ranges[rng.randrange(len(ranges))]
            cp = rng.randint(lo, hi)
            if is_surrogate(cp):
                cp = 0x41
            s.append(chr(cp))
        out.append("".join(s))
    return out


def emit_cases(nfkc_path, fold_path):
    def hexes(s):
        return " ".join("%04X" % ord(c) for c in s)

    with open(nfkc_path, "w", encoding="utf-8") as f:
        for s in interesting_strings():
            f.write("%s\t%s\n" % (hexes(s), hexes(unicodedata.normalize("NFKC", s))))
    with open(fold_path, "w", encoding="utf-8") as f:
        for s in interesting_strings():
            f.write("%s\t%s\n" % (hexes(s), hexes(s.casefold())))


def main():
    cpp = sys.argv[1] if len(sys.argv) > 1 else "core/src/unicode_tables.cpp"
    with open(cpp, "w", encoding="utf-8") as f:
        emit_cpp(f)
    emit_cases("tests/data/nfkc_cases.tsv", "tests/data/casefold_cases.tsv")
    print("wrote", cpp)


if __name__ == "__main__":
    main()
