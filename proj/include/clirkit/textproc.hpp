#pragma once

// Language-aware text preprocessing: character-level normalization followed
// by token-level steps (tokenize, stopword removal, stemming). The same
// pipeline is applied to documents at index time and to queries at retrieval
// time; everything here is a pure function of (text, policy).

#include <algorithm>
#include <array>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "porter.hpp"
#include "unicode.hpp"
#include "util.hpp"

namespace clirkit::text {

enum class UnicodeForm : uint8_t { nfc, nfkc };
enum class TokenizerKind : uint8_t { rule_based_unicode };
enum class StopwordsKind : uint8_t { none, builtin, file };
enum class StemmerKind : uint8_t { none, porter };

struct CharNormalization {
    UnicodeForm unicode_form = UnicodeForm::nfkc;
    bool case_fold = true;
    bool strip_diacritics = false;

    bool operator==(const CharNormalization&) const = default;
};

struct ProcessingPolicy {
    std::string language;  // ISO 639-1 code
    CharNormalization char_normalization;
    TokenizerKind tokenizer = TokenizerKind::rule_based_unicode;
    StopwordsKind stopwords = StopwordsKind::none;
    std::string stopword_file;  // used when stopwords == StopwordsKind::file
    StemmerKind stemmer = StemmerKind::none;

    bool operator==(const ProcessingPolicy&) const = default;
};

using TokenStream = std::vector<std::string>;
using StopwordSet = std::unordered_set<std::string>;

/// The builtin English stopword list: 33 common function words, frozen by test.
inline constexpr std::array<std::string_view, 33> kBuiltinStopwordsEn = {
    "a",    "an",   "and",  "are",   "as",    "at",   "be",   "but",  "by",
    "for",  "if",   "in",   "into",  "is",    "it",   "no",   "not",  "of",
    "on",   "or",   "such", "that",  "the",   "their", "then", "there",
    "these", "they", "this", "to",   "was",   "will", "with",
};

inline void validate_policy(const ProcessingPolicy& policy) {
    if (policy.stemmer == StemmerKind::porter && policy.language != "en")
        fail("stemmer 'porter' is only valid for language 'en', got '", policy.language, "'");
    if (policy.stopwords == StopwordsKind::builtin && policy.language != "en")
        fail("no builtin stopword list for language '", policy.language, "'");
    if (policy.stopwords == StopwordsKind::file && policy.stopword_file.empty())
        fail("stopwords 'file' requires a file path");
}

inline StopwordSet resolve_stopwords(const ProcessingPolicy& policy) {
    StopwordSet set;
    switch (policy.stopwords) {
        case StopwordsKind::none:
            break;
        case StopwordsKind::builtin:
            if (policy.language != "en")
                fail("no builtin stopword list for language '", policy.language, "'");
            for (auto w : kBuiltinStopwordsEn) set.emplace(w);
            break;
        case StopwordsKind::file: {
            std::istringstream in(read_file(policy.stopword_file));
            std::string line;
            while (std::getline(in, line)) {
                size_t start = line.find_first_not_of(" \t\r");
                if (start == std::string::npos || line[start] == '#') continue;
                size_t end = line.find_last_not_of(" \t\r");
                set.emplace(line.substr(start, end - start + 1));
            }
            break;
        }
    }
    return set;
}

/// Character-level normalization: Unicode normalization to the configured
/// form, then case folding, then diacritic stripping, re-normalizing after
/// each mutating step so the whole map is idempotent.
inline std::string normalize_chars(const std::string& text, const ProcessingPolicy& policy) {
    const auto& cn = policy.char_normalization;
    auto form = cn.unicode_form == UnicodeForm::nfkc ? unicode::Form::nfkc : unicode::Form::nfc;
    auto cps = unicode::normalize(unicode::decode_utf8(text), form);
    if (cn.case_fold) cps = unicode::normalize(unicode::case_fold(cps), form);
    if (cn.strip_diacritics)
        cps = unicode::normalize(
            unicode::remove_nonspacing_marks(unicode::decompose(cps, false)), form);
    return unicode::encode_utf8(cps);
}

namespace detail {

inline bool is_word_cp(char32_t cp) {
    switch (unicode::char_class(cp)) {
        case unicode::CharClass::letter:
        case unicode::CharClass::digit:
        case unicode::CharClass::mark_nonspacing:
        case unicode::CharClass::mark_other:
        case unicode::CharClass::connector:
            return true;
        default:
            return false;
    }
}

inline bool is_apostrophe(char32_t cp) { return cp == U'\'' || cp == U'’'; }
inline bool is_num_sep(char32_t cp) { return cp == U'.' || cp == U','; }

}  // namespace detail

/// Rule-based Unicode word tokenizer. Tokens are maximal runs of word
/// characters (letters, digits, marks, connectors); an apostrophe between
/// letters and a period/comma between digits do not split. Trailing
/// possessive <apostrophe>s is removed, and tokens without at least one
/// letter or digit are dropped.
inline TokenStream tokenize(const std::string& text, const ProcessingPolicy& = {}) {
    auto cps = unicode::decode_utf8(text);
    const size_t n = cps.size();
    TokenStream out;
    size_t i = 0;
    while (i < n) {
        if (!detail::is_word_cp(cps[i])) {
            ++i;
            continue;
        }
        size_t start = i;
        ++i;
        while (i < n) {
            if (detail::is_word_cp(cps[i])) {
                ++i;
                continue;
            }
            if (i + 1 < n) {
                if (detail::is_apostrophe(cps[i]) && unicode::is_letter(cps[i - 1]) &&
                    unicode::is_letter(cps[i + 1])) {
                    i += 2;
                    continue;
                }
                if (detail::is_num_sep(cps[i]) && unicode::is_digit(cps[i - 1]) &&
                    unicode::is_digit(cps[i + 1])) {
                    i += 2;
                    continue;
                }
            }
            break;
        }
        std::u32string tok(cps.begin() + static_cast<ptrdiff_t>(start),
                           cps.begin() + static_cast<ptrdiff_t>(i));
        if (tok.size() >= 2 && detail::is_apostrophe(tok[tok.size() - 2]) && tok.back() == U's')
            tok.resize(tok.size() - 2);
        bool has_alnum = std::any_of(tok.begin(), tok.end(), [](char32_t c) {
            return unicode::is_letter(c) || unicode::is_digit(c);
        });
        if (has_alnum) out.push_back(unicode::encode_utf8(tok));
    }
    return out;
}

inline TokenStream remove_stopwords(const TokenStream& tokens, const StopwordSet& stopwords) {
    if (stopwords.empty()) return tokens;
    TokenStream out;
    out.reserve(tokens.size());
    for (const auto& t : tokens)
        if (!stopwords.count(t)) out.push_back(t);
    return out;
}

inline TokenStream remove_stopwords(const TokenStream& tokens, const ProcessingPolicy& policy) {
    return remove_stopwords(tokens, resolve_stopwords(policy));
}

inline std::string stem(const std::string& token) { return porter_stem(token); }

/// A compiled policy: stopword list resolved once, then process() is cheap
/// and safe to call from many threads at once.
class TextPipeline {
  public:
    explicit TextPipeline(ProcessingPolicy policy)
        : policy_(std::move(policy)), stopwords_(resolve_stopwords(policy_)) {
        validate_policy(policy_);
    }

    const ProcessingPolicy& policy() const { return policy_; }

    TokenStream process(const std::string& text) const {
        auto tokens = tokenize(normalize_chars(text, policy_), policy_);
        if (!stopwords_.empty()) tokens = remove_stopwords(tokens, stopwords_);
        if (policy_.stemmer == StemmerKind::porter)
            for (auto& t : tokens) t = porter_stem(t);
        return tokens;
    }

  private:
    ProcessingPolicy policy_;
    StopwordSet stopwords_;
};

inline TokenStream process(const std::string& text, const ProcessingPolicy& policy) {
    return TextPipeline(policy).process(text);
}

}  // namespace clirkit::text
