#pragma once

// First-stage retrieval: topic loading, query construction (including
// selection of a query translation), BM25 and Dirichlet-smoothed query
// likelihood scoring, RM3 pseudo-relevance feedback, PSQ projection of
// cross-language queries, and the 6-column run file format.
//
// Ordering rule used everywhere a ranking is produced or consumed:
// score descending, ties broken by doc id descending.

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "index.hpp"
#include "textproc.hpp"
#include "util.hpp"

namespace clirkit::retrieval {

// ---------------------------------------------------------------------------
// topics

enum class TranslationSource : uint8_t { none, machine, human };

inline const char* translation_source_name(TranslationSource s) {
    switch (s) {
        case TranslationSource::none: return "none";
        case TranslationSource::machine: return "machine";
        case TranslationSource::human: return "human";
    }
    return "?";
}

struct Translation {
    std::string language;
    TranslationSource source = TranslationSource::machine;
    std::string title;
    std::string desc;

    bool operator==(const Translation&) const = default;
};

struct Topic {
    std::string id;
    std::string language;
    std::string title;
    std::string desc;
    std::vector<Translation> translations;

    bool operator==(const Topic&) const = default;
};

/// Topic JSONL: one object per line with id, language, title, desc and an
/// optional translations array of {language, source, title, desc}.
inline std::vector<Topic> load_topics(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open topic file: ", path.string());
    std::vector<Topic> topics;
    std::set<std::string> seen;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail(path.string(), " line ", line_no, ": invalid JSON: ", e.what());
        }
        Topic t;
        try {
            t.id = j.at("id").get<std::string>();
            t.language = j.value("language", "");
            t.title = j.value("title", "");
            t.desc = j.value("desc", "");
            for (const auto& tj : j.value("translations", nlohmann::json::array())) {
                Translation tr;
                tr.language = tj.at("language").get<std::string>();
                std::string src = tj.at("source").get<std::string>();
                if (src == "machine")
                    tr.source = TranslationSource::machine;
                else if (src == "human")
                    tr.source = TranslationSource::human;
                else
                    fail("translation source must be 'machine' or 'human', got '", src, "'");
                tr.title = tj.value("title", "");
                tr.desc = tj.value("desc", "");
                t.translations.push_back(std::move(tr));
            }
        } catch (const nlohmann::json::exception& e) {
            fail(path.string(), " line ", line_no, ": ", e.what());
        }
        if (t.id.empty() || t.id.find_first_of(" \t\r\n\v\f") != std::string::npos)
            fail(path.string(), " line ", line_no,
                 ": topic id must be non-empty without whitespace");
        if (!seen.insert(t.id).second)
            fail(path.string(), " line ", line_no, ": duplicate topic id '", t.id, "'");
        std::set<std::pair<std::string, TranslationSource>> pairs;
        for (const auto& tr : t.translations)
            if (!pairs.insert({tr.language, tr.source}).second)
                fail(path.string(), " line ", line_no, ": topic '", t.id,
                     "' has more than one (", tr.language, ", ",
                     translation_source_name(tr.source), ") translation");
        topics.push_back(std::move(t));
    }
    return topics;
}

// ---------------------------------------------------------------------------
// queries

struct Query {
    std::string id;
    std::map<std::string, double> weights;  // term -> weight, all positive

    bool operator==(const Query&) const = default;
};

struct TopicFields {
    bool title = true;
    bool desc = false;

    bool operator==(const TopicFields&) const = default;
};

struct TranslationSelector {
    std::string language;
    TranslationSource source = TranslationSource::none;
};

/// Raw (untokenized) query text for a topic: the selected fields of the
/// topic itself or of the selected translation, title then desc.
inline std::string query_text(const Topic& topic, TopicFields fields,
                              const TranslationSelector& selector) {
    const std::string* title = &topic.title;
    const std::string* desc = &topic.desc;
    if (selector.source != TranslationSource::none) {
        const Translation* found = nullptr;
        for (const auto& tr : topic.translations)
            if (tr.language == selector.language && tr.source == selector.source) found = &tr;
        if (!found)
            fail("topic '", topic.id, "' has no ", translation_source_name(selector.source),
                 " translation into '", selector.language, "'");
        title = &found->title;
        desc = &found->desc;
    }
    std::string text;
    if (fields.title) text = *title;
    if (fields.desc) {
        if (!text.empty()) text += " ";
        text += *desc;
    }
    return text;
}

inline Query make_query(const Topic& topic, TopicFields fields,
                        const TranslationSelector& selector, const text::TextPipeline& pipe) {
    Query q;
    q.id = topic.id;
    for (const auto& token : pipe.process(query_text(topic, fields, selector)))
        q.weights[token] += 1.0;
    return q;
}

// ---------------------------------------------------------------------------
// ranked lists and run files

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;

    bool operator==(const ScoredDoc&) const = default;
};

struct RankedList {
    std::string topic_id;
    std::vector<ScoredDoc> entries;

    bool operator==(const RankedList&) const = default;
};

inline bool ranked_before(const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id > b.doc_id;
}

inline void sort_ranked(std::vector<ScoredDoc>& entries, size_t k) {
    std::sort(entries.begin(), entries.end(), ranked_before);
    if (entries.size() > k) entries.resize(k);
}

/// 6-column run format: topic Q0 doc rank score tag, single-space separated,
/// scores with 6 decimal places. Lists are emitted in the given order.
inline void write_run(const std::vector<RankedList>& lists, const std::filesystem::path& path,
                      const std::string& tag) {
    std::string out;
    char score_buf[64];
    for (const auto& list : lists) {
        int rank = 1;
        for (const auto& e : list.entries) {
            std::snprintf(score_buf, sizeof(score_buf), "%.6f", e.score);
            out += concat(list.topic_id, " Q0 ", e.doc_id, " ", rank, " ", score_buf, " ", tag,
                          "\n");
            ++rank;
        }
    }
    write_file(path, out);
}

struct RunEntry {
    std::string topic_id;
    std::string doc_id;
    double score = 0.0;
    std::string tag;
};

/// Parse a run file; entries are returned in file order, one group per
/// topic in order of first appearance. The rank column is ignored.
inline std::vector<RankedList> parse_run(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open run file: ", path.string());
    std::vector<RankedList> lists;
    std::map<std::string, size_t> topic_pos;
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string topic, q0, doc, rank, score_str, tag;
        if (!(ls >> topic >> q0 >> doc >> rank >> score_str >> tag))
            fail(path.string(), " line ", line_no, ": expected 6 run-file columns");
        double score = 0.0;
        try {
            score = std::stod(score_str);
        } catch (const std::exception&) {
            fail(path.string(), " line ", line_no, ": bad score '", score_str, "'");
        }
        if (!seen.insert({topic, doc}).second)
            fail(path.string(), " line ", line_no, ": duplicate (topic, doc) pair (", topic, ", ",
                 doc, ")");
        auto it = topic_pos.find(topic);
        if (it == topic_pos.end()) {
            it = topic_pos.emplace(topic, lists.size()).first;
            lists.push_back(RankedList{topic, {}});
        }
        lists[it->second].entries.push_back({doc, score});
    }
    return lists;
}

// ---------------------------------------------------------------------------
// lexical scoring

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;

    bool operator==(const Bm25Params&) const = default;
};

struct QldParams {
    double mu = 1000.0;

    bool operator==(const QldParams&) const = default;
};

namespace detail {

inline uint32_t tf_in(const index::PostingList& postings, uint32_t doc) {
    auto it = std::lower_bound(postings.begin(), postings.end(), doc,
                               [](const index::Posting& p, uint32_t d) { return p.doc < d; });
    if (it != postings.end() && it->doc == doc) return it->tf;
    return 0;
}

inline std::set<uint32_t> candidate_docs(const index::InvertedIndex& idx, const Query& query) {
    std::set<uint32_t> docs;
    for (const auto& [term, w] : query.weights)
        for (const auto& p : idx.postings(term)) docs.insert(p.doc);
    return docs;
}

inline double bm25_idf(double df, double n) {
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

}  // namespace detail

inline RankedList score_bm25(const index::InvertedIndex& idx, const Query& query, size_t k,
                             const Bm25Params& params) {
    if (k < 1) fail("retrieval depth k must be >= 1");
    RankedList out;
    out.topic_id = query.id;
    const double n = static_cast<double>(idx.doc_count());
    const double avg = idx.stats().avg_doc_len;
    for (uint32_t doc : detail::candidate_docs(idx, query)) {
        double len = idx.doc_len(doc);
        double score = 0.0;
        for (const auto& [term, w] : query.weights) {
            const auto& postings = idx.postings(term);
            if (postings.empty()) continue;
            double tf = detail::tf_in(postings, doc);
            if (tf == 0.0) continue;
            double idf = detail::bm25_idf(static_cast<double>(postings.size()), n);
            score += w * idf * (tf * (params.k1 + 1.0)) /
                     (tf + params.k1 * (1.0 - params.b + params.b * len / avg));
        }
        if (score != 0.0) out.entries.push_back({idx.doc_id(doc), score});
    }
    sort_ranked(out.entries, k);
    return out;
}

inline RankedList score_qld(const index::InvertedIndex& idx, const Query& query, size_t k,
                            const QldParams& params) {
    if (k < 1) fail("retrieval depth k must be >= 1");
    if (!(params.mu > 0.0)) fail("qld mu must be > 0");
    RankedList out;
    out.topic_id = query.id;
    const double total = static_cast<double>(idx.total_tokens());
    const double mu = params.mu;
    for (uint32_t doc : detail::candidate_docs(idx, query)) {
        double len = idx.doc_len(doc);
        double score = 0.0;
        for (const auto& [term, w] : query.weights) {
            double ctf = static_cast<double>(idx.ctf(term));
            if (ctf == 0.0) continue;  // unseen terms contribute nothing
            double tf = detail::tf_in(idx.postings(term), doc);
            double p_c = ctf / total;
            score += w * std::log((tf + mu * p_c) / (len + mu));
        }
        out.entries.push_back({idx.doc_id(doc), score});
    }
    sort_ranked(out.entries, k);
    return out;
}

// ---------------------------------------------------------------------------
// RM3 pseudo-relevance feedback

struct Rm3Params {
    int fb_docs = 10;
    int fb_terms = 10;
    double orig_weight = 0.5;

    bool operator==(const Rm3Params&) const = default;
};

/// RM3 expansion: relevance model over the BM25 feedback set, interpolated
/// with the normalized original query. Returns the original query unchanged
/// (and logs) when no feedback documents are retrieved. The stopword set is
/// the document-side policy's list; stopwords never enter the expansion.
inline Query rm3_expand(const index::InvertedIndex& idx, const Query& query,
                        const Rm3Params& params, const Bm25Params& bm25,
                        const text::StopwordSet& stopwords = {}) {
    if (params.fb_docs < 1 || params.fb_terms < 1) fail("rm3 fb_docs and fb_terms must be >= 1");
    if (params.orig_weight < 0.0 || params.orig_weight > 1.0)
        fail("rm3 orig_weight must be in [0, 1]");

    auto feedback = score_bm25(idx, query, static_cast<size_t>(params.fb_docs), bm25);
    if (feedback.entries.empty()) {
        log_warn(concat("rm3: no feedback documents for topic '", query.id,
                        "', query left unexpanded"));
        return query;
    }

    // P(d): BM25 scores normalized by their sum over the feedback set.
    std::map<uint32_t, double> doc_prob;  // ordinal -> P(d)
    {
        std::map<std::string, uint32_t> ordinal_of;
        for (uint32_t i = 0; i < idx.doc_count(); ++i) ordinal_of[idx.doc_id(i)] = i;
        double sum = 0.0;
        for (const auto& e : feedback.entries) sum += e.score;
        for (const auto& e : feedback.entries) doc_prob[ordinal_of.at(e.doc_id)] = e.score / sum;
    }

    // relevance model P(w|R) = sum_d P(w|d) P(d) over feedback docs
    std::map<std::string, double> rel_model;
    for (const auto& [term, entry] : idx.dictionary()) {
        if (stopwords.count(term)) continue;
        double p = 0.0;
        for (const auto& [doc, pd] : doc_prob) {
            uint32_t tf = detail::tf_in(entry.postings, doc);
            if (tf == 0) continue;
            p += (static_cast<double>(tf) / static_cast<double>(idx.doc_len(doc))) * pd;
        }
        if (p > 0.0) rel_model[term] = p;
    }

    // keep the top fb_terms by P(w|R), ties by term ascending
    std::vector<std::pair<std::string, double>> ranked(rel_model.begin(), rel_model.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > static_cast<size_t>(params.fb_terms))
        ranked.resize(static_cast<size_t>(params.fb_terms));
    double kept_mass = 0.0;
    for (const auto& [term, p] : ranked) kept_mass += p;

    // interpolate with the original query normalized to sum 1
    double orig_sum = 0.0;
    for (const auto& [term, w] : query.weights) orig_sum += w;
    Query out;
    out.id = query.id;
    const double lambda = params.orig_weight;
    for (const auto& [term, w] : query.weights) {
        double v = lambda * (w / orig_sum);
        if (v > 0.0) out.weights[term] = v;
    }
    for (const auto& [term, p] : ranked) {
        double v = (1.0 - lambda) * (p / kept_mass);
        if (v > 0.0) out.weights[term] += v;
    }
    return out;
}

// ---------------------------------------------------------------------------
// PSQ: probabilistic structured queries

struct TranslationTable {
    // source term -> (target term, p(t|s)) sorted by p descending, term ascending
    std::map<std::string, std::vector<std::pair<std::string, double>>> entries;
};

/// Table file: UTF-8 lines "source_term target_term probability".
inline TranslationTable load_translation_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open translation table: ", path.string());
    TranslationTable table;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string source, target, prob_str;
        if (!(ls >> source >> target >> prob_str))
            fail(path.string(), " line ", line_no,
                 ": expected 'source_term target_term probability'");
        double p = 0.0;
        try {
            p = std::stod(prob_str);
        } catch (const std::exception&) {
            fail(path.string(), " line ", line_no, ": bad probability '", prob_str, "'");
        }
        if (!(p > 0.0) || p > 1.0)
            fail(path.string(), " line ", line_no, ": probability must be in (0, 1], got ",
                 prob_str);
        table.entries[source].push_back({target, p});
    }
    for (auto& [source, targets] : table.entries) {
        double sum = 0.0;
        for (const auto& [t, p] : targets) sum += p;
        if (sum > 1.0 + 1e-6)
            fail(path.string(), ": translation probabilities for '", source, "' sum to ", sum,
                 " > 1");
        std::sort(targets.begin(), targets.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
    }
    return table;
}

struct PsqPruning {
    double min_prob = 0.01;
    double cum_prob = 0.97;
    int max_translations = 32;

    bool operator==(const PsqPruning&) const = default;
};

struct ProjectedTerm {
    std::string source;
    double weight = 0.0;
    std::vector<std::pair<std::string, double>> targets;  // renormalized to sum 1
};

struct StructuredQuery {
    std::string id;
    std::vector<ProjectedTerm> terms;  // source ascending
};

/// Project each source term onto its pruned, renormalized translation set:
/// translations below min_prob are dropped, the list is cut where adding the
/// next translation would push cumulative mass past cum_prob (the top
/// translation is always kept) and at max_translations, and the survivors
/// are renormalized to sum 1. Source terms absent from the table are dropped
/// with a log line; a query with no translatable term is an error.
inline StructuredQuery psq_project(const Query& query, const TranslationTable& table,
                                   const PsqPruning& pruning) {
    if (pruning.max_translations < 1) fail("psq max_translations must be >= 1");
    StructuredQuery out;
    out.id = query.id;
    for (const auto& [source, w] : query.weights) {
        auto it = table.entries.find(source);
        if (it == table.entries.end()) {
            log_info(concat("psq: query term '", source, "' not in translation table, dropped"));
            continue;
        }
        ProjectedTerm pt;
        pt.source = source;
        pt.weight = w;
        double cum = 0.0;
        for (const auto& [target, p] : it->second) {
            if (p < pruning.min_prob) break;  // sorted descending
            if (!pt.targets.empty() &&
                (cum + p > pruning.cum_prob ||
                 pt.targets.size() >= static_cast<size_t>(pruning.max_translations)))
                break;
            pt.targets.push_back({target, p});
            cum += p;
        }
        if (pt.targets.empty()) {
            log_info(concat("psq: query term '", source,
                            "' has no translation above min_prob, dropped"));
            continue;
        }
        for (auto& [target, p] : pt.targets) p /= cum;
        out.terms.push_back(std::move(pt));
    }
    if (out.terms.empty())
        fail("untranslatable query '", query.id, "': no query term has a usable translation");
    return out;
}

enum class ScoringModel : uint8_t { bm25, qld };

/// Score a projected query against a target-language index using projected
/// term statistics: tf~(s,d) = sum_t p(t|s) tf(t,d), df~(s) = min(N, sum_t
/// p(t|s) df(t)), ctf~(s) = sum_t p(t|s) ctf(t), plugged into the chosen
/// model's formula.
inline RankedList score_psq(const index::InvertedIndex& idx, const StructuredQuery& query,
                            size_t k, ScoringModel model, const Bm25Params& bm25,
                            const QldParams& qld) {
    if (k < 1) fail("retrieval depth k must be >= 1");
    if (model == ScoringModel::qld && !(qld.mu > 0.0)) fail("qld mu must be > 0");
    RankedList out;
    out.topic_id = query.id;
    const double n = static_cast<double>(idx.doc_count());
    const double avg = idx.stats().avg_doc_len;
    const double total = static_cast<double>(idx.total_tokens());

    struct TermStats {
        double df = 0.0;
        double ctf = 0.0;
    };
    std::vector<TermStats> stats(query.terms.size());
    std::set<uint32_t> candidates;
    for (size_t i = 0; i < query.terms.size(); ++i) {
        for (const auto& [target, p] : query.terms[i].targets) {
            const auto& postings = idx.postings(target);
            stats[i].df += p * static_cast<double>(postings.size());
            stats[i].ctf += p * static_cast<double>(idx.ctf(target));
            for (const auto& posting : postings) candidates.insert(posting.doc);
        }
        stats[i].df = std::min(stats[i].df, n);
    }

    for (uint32_t doc : candidates) {
        double len = idx.doc_len(doc);
        double score = 0.0;
        for (size_t i = 0; i < query.terms.size(); ++i) {
            const auto& pt = query.terms[i];
            double tf = 0.0;
            for (const auto& [target, p] : pt.targets)
                tf += p * static_cast<double>(detail::tf_in(idx.postings(target), doc));
            if (model == ScoringModel::bm25) {
                if (tf == 0.0) continue;
                double idf = detail::bm25_idf(stats[i].df, n);
                score += pt.weight * idf * (tf * (bm25.k1 + 1.0)) /
                         (tf + bm25.k1 * (1.0 - bm25.b + bm25.b * len / avg));
            } else {
                if (stats[i].ctf == 0.0) continue;
                double p_c = stats[i].ctf / total;
                score += pt.weight * std::log((tf + qld.mu * p_c) / (len + qld.mu));
            }
        }
        if (model == ScoringModel::bm25) {
            if (score != 0.0) out.entries.push_back({idx.doc_id(doc), score});
        } else {
            out.entries.push_back({idx.doc_id(doc), score});
        }
    }
    sort_ranked(out.entries, k);
    return out;
}

}  // namespace clirkit::retrieval
