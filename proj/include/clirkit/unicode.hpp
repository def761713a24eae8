#pragma once

// Unicode primitives pinned to the table snapshot in unicode_data.hpp:
// UTF-8 codec, NFC/NFKC normalization, full case folding, combining-mark
// removal, and the character classes the tokenizer needs. Normalization
// follows the canonical decompose / reorder / compose scheme; Hangul is
// handled algorithmically.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "unicode_data.hpp"
#include "util.hpp"

namespace clirkit::unicode {

enum class CharClass : uint8_t {
    other = 0,
    letter = 1,
    digit = 2,
    mark_nonspacing = 3,
    mark_other = 4,
    connector = 5,
};

inline CharClass char_class(char32_t cp) {
    const auto* begin = std::begin(data::kClassRanges);
    const auto* end = std::end(data::kClassRanges);
    auto it = std::upper_bound(begin, end, cp, [](char32_t v, const data::ClassRange& r) {
        return v < r.first;
    });
    if (it == begin) return CharClass::other;
    --it;
    if (cp >= it->first && cp <= it->last) return static_cast<CharClass>(it->cls);
    return CharClass::other;
}

inline bool is_letter(char32_t cp) { return char_class(cp) == CharClass::letter; }
inline bool is_digit(char32_t cp) { return char_class(cp) == CharClass::digit; }
inline bool is_mark(char32_t cp) {
    auto c = char_class(cp);
    return c == CharClass::mark_nonspacing || c == CharClass::mark_other;
}

inline uint8_t combining_class(char32_t cp) {
    const auto* begin = std::begin(data::kCccRanges);
    const auto* end = std::end(data::kCccRanges);
    auto it = std::upper_bound(begin, end, cp, [](char32_t v, const data::CccRange& r) {
        return v < r.first;
    });
    if (it == begin) return 0;
    --it;
    if (cp >= it->first && cp <= it->last) return it->ccc;
    return 0;
}

// ---------------------------------------------------------------------------
// UTF-8

inline std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        uint8_t b0 = static_cast<uint8_t>(s[i]);
        uint32_t cp = 0;
        size_t len = 0;
        if (b0 < 0x80) {
            cp = b0;
            len = 1;
        } else if ((b0 & 0xE0) == 0xC0) {
            cp = b0 & 0x1F;
            len = 2;
        } else if ((b0 & 0xF0) == 0xE0) {
            cp = b0 & 0x0F;
            len = 3;
        } else if ((b0 & 0xF8) == 0xF0) {
            cp = b0 & 0x07;
            len = 4;
        } else {
            fail("invalid UTF-8 byte at offset ", i);
        }
        if (i + len > s.size()) fail("truncated UTF-8 sequence at offset ", i);
        for (size_t k = 1; k < len; ++k) {
            uint8_t b = static_cast<uint8_t>(s[i + k]);
            if ((b & 0xC0) != 0x80) fail("invalid UTF-8 continuation at offset ", i + k);
            cp = (cp << 6) | (b & 0x3F);
        }
        static constexpr uint32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
        if (cp < kMin[len]) fail("overlong UTF-8 sequence at offset ", i);
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
            fail("invalid code point in UTF-8 at offset ", i);
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
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

inline std::string encode_utf8(const std::u32string& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) append_utf8(out, cp);
    return out;
}

// ---------------------------------------------------------------------------
// normalization

enum class Form : uint8_t { nfc, nfkc };

namespace detail {

constexpr char32_t kHangulSBase = 0xAC00;
constexpr char32_t kHangulLBase = 0x1100;
constexpr char32_t kHangulVBase = 0x1161;
constexpr char32_t kHangulTBase = 0x11A7;
constexpr int kHangulVCount = 21;
constexpr int kHangulTCount = 28;
constexpr int kHangulNCount = kHangulVCount * kHangulTCount;  // 588
constexpr int kHangulSCount = 11172;

inline const data::Mapping* find_mapping(const data::Mapping* begin, const data::Mapping* end,
                                         char32_t cp) {
    auto it = std::lower_bound(begin, end, cp, [](const data::Mapping& m, char32_t v) {
        return m.cp < v;
    });
    if (it != end && it->cp == cp) return it;
    return nullptr;
}

inline void decompose_cp(std::u32string& out, char32_t cp, bool compat) {
    if (cp >= kHangulSBase && cp < kHangulSBase + kHangulSCount) {
        char32_t s = cp - kHangulSBase;
        out.push_back(kHangulLBase + s / kHangulNCount);
        out.push_back(kHangulVBase + (s % kHangulNCount) / kHangulTCount);
        if (s % kHangulTCount != 0) out.push_back(kHangulTBase + s % kHangulTCount);
        return;
    }
    const data::Mapping* m =
        compat ? find_mapping(std::begin(data::kNfkd), std::end(data::kNfkd), cp)
               : find_mapping(std::begin(data::kNfd), std::end(data::kNfd), cp);
    if (m) {
        for (uint8_t k = 0; k < m->len; ++k) out.push_back(data::kSeqPool[m->offset + k]);
    } else {
        out.push_back(cp);
    }
}

/// Canonical ordering: stable exchange of adjacent reorderable marks.
inline void canonical_reorder(std::u32string& s) {
    for (size_t i = 1; i < s.size(); ++i) {
        uint8_t ccc = combining_class(s[i]);
        if (ccc == 0) continue;
        size_t j = i;
        while (j > 0) {
            uint8_t prev = combining_class(s[j - 1]);
            if (prev == 0 || prev <= ccc) break;
            std::swap(s[j - 1], s[j]);
            --j;
        }
    }
}

inline std::optional<char32_t> compose_pair(char32_t a, char32_t b) {
    // Hangul LV / LVT
    if (a >= kHangulLBase && a < kHangulLBase + 19 && b >= kHangulVBase &&
        b < kHangulVBase + kHangulVCount) {
        return kHangulSBase + ((a - kHangulLBase) * kHangulVCount + (b - kHangulVBase)) *
                                  kHangulTCount;
    }
    if (a >= kHangulSBase && a < kHangulSBase + kHangulSCount &&
        (a - kHangulSBase) % kHangulTCount == 0 && b > kHangulTBase &&
        b < kHangulTBase + kHangulTCount) {
        return a + (b - kHangulTBase);
    }
    uint64_t key = (static_cast<uint64_t>(a) << 21) | b;
    auto it = std::lower_bound(std::begin(data::kCompose), std::end(data::kCompose), key,
                               [](const data::Composition& c, uint64_t v) { return c.key < v; });
    if (it != std::end(data::kCompose) && it->key == key) return it->composed;
    return std::nullopt;
}

inline std::u32string compose(const std::u32string& in) {
    std::u32string out;
    out.reserve(in.size());
    ptrdiff_t last_starter = -1;
    int last_ccc = -1;  // ccc of the last appended char after the starter
    for (char32_t cp : in) {
        int ccc = combining_class(cp);
        if (last_starter >= 0) {
            bool blocked = (out.size() - 1 != static_cast<size_t>(last_starter)) &&
                           last_ccc >= ccc;
            if (!blocked) {
                if (auto comp = compose_pair(out[static_cast<size_t>(last_starter)], cp)) {
                    out[static_cast<size_t>(last_starter)] = *comp;
                    continue;
                }
            }
        }
        out.push_back(cp);
        if (ccc == 0) {
            last_starter = static_cast<ptrdiff_t>(out.size()) - 1;
            last_ccc = -1;
        } else {
            last_ccc = ccc;
        }
    }
    return out;
}

}  // namespace detail

/// Full decomposition (NFD or NFKD) with canonical ordering.
inline std::u32string decompose(const std::u32string& in, bool compat) {
    std::u32string out;
    out.reserve(in.size() * 2);
    for (char32_t cp : in) detail::decompose_cp(out, cp, compat);
    detail::canonical_reorder(out);
    return out;
}

inline std::u32string normalize(const std::u32string& in, Form form) {
    return detail::compose(decompose(in, form == Form::nfkc));
}

/// Full case folding (one pass; callers re-normalize afterwards).
inline std::u32string case_fold(const std::u32string& in) {
    std::u32string out;
    out.reserve(in.size());
    for (char32_t cp : in) {
        const data::Mapping* m =
            detail::find_mapping(std::begin(data::kCaseFold), std::end(data::kCaseFold), cp);
        if (m) {
            for (uint8_t k = 0; k < m->len; ++k) out.push_back(data::kSeqPool[m->offset + k]);
        } else {
            out.push_back(cp);
        }
    }
    return out;
}

/// Drops nonspacing marks; input is expected to be fully decomposed.
inline std::u32string remove_nonspacing_marks(const std::u32string& in) {
    std::u32string out;
    out.reserve(in.size());
    for (char32_t cp : in)
        if (char_class(cp) != CharClass::mark_nonspacing) out.push_back(cp);
    return out;
}

}  // namespace clirkit::unicode
