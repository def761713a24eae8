#!/usr/bin/env python3
"""Regenerate the Unicode tables and the normalization test vectors.

The C++ normalizer works from tables pinned to one Unicode version so that
token streams (and therefore index fingerprints and run files) do not drift
across hosts with different ICU/libc versions.  Tables come from Python's
unicodedata module; test vectors are produced by Python's own normalize() and
str.casefold(), which serve as the reference implementation the C++ code is
tested against.

Usage (from the repository root):
    python3 tools/gen_unicode_tables.py

Rewrites:
    include/clirkit/unicode_data.hpp
    tests/data/unicode_vectors.tsv
"""

import random
import sys
import unicodedata

MAX_CP = 0x110000
HANGUL_FIRST = 0xAC00
HANGUL_LAST = 0xD7A3

CLS_OTHER = 0
CLS_LETTER = 1
CLS_DIGIT = 2
CLS_MARK_NSP = 3
CLS_MARK_OTHER = 4
CLS_CONNECTOR = 5

LETTER_CATS = {"Lu", "Ll", "Lt", "Lm", "Lo", "Nl"}


def char_class(cp: int) -> int:
    cat = unicodedata.category(chr(cp))
    if cat in LETTER_CATS:
        return CLS_LETTER
    if cat == "Nd":
        return CLS_DIGIT
    if cat == "Mn":
        return CLS_MARK_NSP
    if cat in ("Mc", "Me"):
        return CLS_MARK_OTHER
    if cat == "Pc":
        return CLS_CONNECTOR
    return CLS_OTHER


def build_class_ranges():
    ranges = []
    start = 0
    cur = char_class(0)
    for cp in range(1, MAX_CP):
        cls = char_class(cp)
        if cls != cur:
            if cur != CLS_OTHER:
                ranges.append((start, cp - 1, cur))
            start = cp
            cur = cls
    if cur != CLS_OTHER:
        ranges.append((start, MAX_CP - 1, cur))
    return ranges


def build_ccc_ranges():
    ranges = []
    start = None
    cur = 0
    for cp in range(MAX_CP):
        ccc = unicodedata.combining(chr(cp))
        if ccc != cur:
            if cur != 0:
                ranges.append((start, cp - 1, cur))
            start = cp
            cur = ccc
    if cur != 0:
        ranges.append((start, MAX_CP - 1, cur))
    return ranges


class SeqPool:
    def __init__(self):
        self.pool = []
        self.known = {}

    def add(self, seq):
        key = tuple(seq)
        if key in self.known:
            return self.known[key]
        off = len(self.pool)
        self.pool.extend(seq)
        self.known[key] = off
        return off


def build_mappings(pool):
    nfd, nfkd, fold = [], [], []
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        if HANGUL_FIRST <= cp <= HANGUL_LAST:
            continue  # Hangul is decomposed/composed algorithmically
        c = chr(cp)
        d = unicodedata.normalize("NFD", c)
        if d != c:
            seq = [ord(x) for x in d]
            nfd.append((cp, pool.add(seq), len(seq)))
        kd = unicodedata.normalize("NFKD", c)
        if kd != c:
            seq = [ord(x) for x in kd]
            nfkd.append((cp, pool.add(seq), len(seq)))
        f = c.casefold()
        if f != c:
            seq = [ord(x) for x in f]
            fold.append((cp, pool.add(seq), len(seq)))
    return nfd, nfkd, fold


def build_compositions():
    pairs = []
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        c = chr(cp)
        raw = unicodedata.decomposition(c)
        if not raw or raw.startswith("<"):
            continue
        parts = raw.split()
        if len(parts) != 2:
            continue
        a, b = int(parts[0], 16), int(parts[1], 16)
        # composition exclusions fall out of the round-trip check
        if unicodedata.normalize("NFC", unicodedata.normalize("NFD", c)) == c:
            pairs.append(((a << 21) | b, cp))
    pairs.sort()
    return pairs


def emit_header(path, class_ranges, ccc_ranges, nfd, nfkd, fold, pool, comps):
    def rows(items, fmt, per_line):
        out = []
        for i in range(0, len(items), per_line):
            out.append("    " + " ".join(fmt(x) for x in items[i : i + per_line]))
        return "\n".join(out)

    with open(path, "w") as f:
        f.write("#pragma once\n\n")
        f.write("// Generated by tools/gen_unicode_tables.py from Python's unicodedata\n")
        f.write("// (Unicode %s). Do not edit by hand.\n\n" % unicodedata.unidata_version)
        f.write("#include <cstdint>\n\n")
        f.write("namespace clirkit::unicode::data {\n\n")
        f.write('inline constexpr char kUnicodeVersion[] = "%s";\n\n' % unicodedata.unidata_version)

        f.write("struct ClassRange { uint32_t first; uint32_t last; uint8_t cls; };\n")
        f.write("struct CccRange { uint32_t first; uint32_t last; uint8_t ccc; };\n")
        f.write("struct Mapping { uint32_t cp; uint32_t offset; uint8_t len; };\n")
        f.write("struct Composition { uint64_t key; uint32_t composed; };\n\n")

        f.write("// cp class ranges: 1=letter 2=digit 3=nonspacing mark 4=other mark 5=connector\n")
        f.write("inline constexpr ClassRange kClassRanges[] = {\n")
        f.write(rows(class_ranges, lambda r: "{%d,%d,%d}," % r, 6))
        f.write("\n};\n\n")

        f.write("inline constexpr CccRange kCccRanges[] = {\n")
        f.write(rows(ccc_ranges, lambda r: "{%d,%d,%d}," % r, 6))
        f.write("\n};\n\n")

        for name, table in (("kNfd", nfd), ("kNfkd", nfkd), ("kCaseFold", fold)):
            f.write("inline constexpr Mapping %s[] = {\n" % name)
            f.write(rows(table, lambda r: "{%d,%d,%d}," % r, 6))
            f.write("\n};\n\n")

        f.write("inline constexpr uint32_t kSeqPool[] = {\n")
        f.write(rows(pool.pool, lambda v: "%d," % v, 16))
        f.write("\n};\n\n")

        f.write("// canonical composition pairs, key = (first << 21) | second, sorted\n")
        f.write("inline constexpr Composition kCompose[] = {\n")
        f.write(rows(comps, lambda r: "{%dull,%d}," % r, 4))
        f.write("\n};\n\n")
        f.write("}  // namespace clirkit::unicode::data\n")


# ---------------------------------------------------------------------------
# test vectors


def strip_marks(s):
    return "".join(ch for ch in s if unicodedata.category(ch) != "Mn")


def pipeline(s, form, fold, strip):
    out = unicodedata.normalize(form, s)
    if fold:
        out = unicodedata.normalize(form, out.casefold())
    if strip:
        out = unicodedata.normalize(form, strip_marks(unicodedata.normalize("NFD", out)))
    return out


def hexseq(s):
    return " ".join("%04X" % ord(c) for c in s) if s else "-"


def emit_vectors(path, inputs):
    with open(path, "w") as f:
        f.write("# input\tnfc\tnfkc\tnfc_fold\tnfkc_fold\tnfkc_fold_strip\n")
        f.write("# code points as hex sequences; '-' is the empty string\n")
        for s in inputs:
            cols = [
                hexseq(s),
                hexseq(unicodedata.normalize("NFC", s)),
                hexseq(unicodedata.normalize("NFKC", s)),
                hexseq(pipeline(s, "NFC", True, False)),
                hexseq(pipeline(s, "NFKC", True, False)),
                hexseq(pipeline(s, "NFKC", True, True)),
            ]
            f.write("\t".join(cols) + "\n")


def gather_vector_inputs():
    rng = random.Random(0x5EED)
    inputs = []
    # every code point with a compatibility or canonical decomposition
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF or HANGUL_FIRST <= cp <= HANGUL_LAST:
            continue
        c = chr(cp)
        if unicodedata.normalize("NFKD", c) != c or c.casefold() != c:
            inputs.append(c)
    # Hangul samples
    for cp in range(HANGUL_FIRST, HANGUL_LAST + 1, 517):
        inputs.append(chr(cp))
    # classic trouble spots
    for s in ("Café", "café", "café", "İstanbul", "İ̖", "ẞ", "ﬁn",
              "¼", "①23", "ṩ", "ṩ", "ṩ", "̈́",
              "각", "각", "ǅungla", "ʼn"):
        inputs.append(s)
    # random combining clusters
    marks = [cp for cp in range(MAX_CP)
             if unicodedata.category(chr(cp)) == "Mn" and unicodedata.combining(chr(cp))]
    bases = [ord(c) for c in "aeiouAEIOUszc"] + [0x3B1, 0x430, 0x5D0, 0x915]
    for _ in range(600):
        base = chr(rng.choice(bases))
        cluster = base + "".join(chr(rng.choice(marks)) for _ in range(rng.randint(1, 3)))
        inputs.append(cluster)
    # random mixed strings
    pool = [cp for cp in range(0x20, 0x2FA20)
            if not (0xD800 <= cp <= 0xDFFF) and unicodedata.category(chr(cp)) != "Cn"]
    for _ in range(600):
        inputs.append("".join(chr(rng.choice(pool)) for _ in range(rng.randint(2, 12))))
    return inputs


def verify_idempotence(inputs):
    bad = 0
    for s in inputs:
        for form in ("NFC", "NFKC"):
            for fold in (False, True):
                for strip in (False, True):
                    once = pipeline(s, form, fold, strip)
                    twice = pipeline(once, form, fold, strip)
                    if once != twice:
                        bad += 1
                        print("not idempotent: %s form=%s fold=%s strip=%s"
                              % (hexseq(s), form, fold, strip), file=sys.stderr)
    return bad


def main():
    print("unicodedata version:", unicodedata.unidata_version)
    class_ranges = build_class_ranges()
    ccc_ranges = build_ccc_ranges()
    pool = SeqPool()
    nfd, nfkd, fold = build_mappings(pool)
    comps = build_compositions()
    print("class ranges: %d, ccc ranges: %d" % (len(class_ranges), len(ccc_ranges)))
    print("nfd: %d, nfkd: %d, fold: %d, pool: %d, compose: %d"
          % (len(nfd), len(nfkd), len(fold), len(pool.pool), len(comps)))
    emit_header("include/clirkit/unicode_data.hpp",
                class_ranges, ccc_ranges, nfd, nfkd, fold, pool, comps)

    inputs = gather_vector_inputs()
    bad = verify_idempotence(inputs)
    print("idempotence violations in reference pipeline: %d" % bad)
    emit_vectors("tests/data/unicode_vectors.tsv", inputs)
    print("wrote %d vectors" % len(inputs))


if __name__ == "__main__":
    main()
