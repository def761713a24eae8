#pragma once

// Run scoring: qrels parsing, average precision, nDCG (linear gain,
// 1/log2(i+1) discount) and recall, each at a cutoff depth, reported per
// topic and as the arithmetic mean over topics with at least one relevant
// document. Run entries are re-sorted by (score desc, doc id desc) before
// scoring; the rank column in the file is never trusted.

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "retrieval.hpp"
#include "util.hpp"

namespace clirkit::eval {

struct Qrels {
    // topic -> doc -> grade (>= 0)
    std::map<std::string, std::map<std::string, int>> grades;
};

/// 4-column qrels: topic iteration doc grade. The iteration column is
/// ignored; grades must be non-negative integers.
inline Qrels load_qrels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open qrels file: ", path.string());
    Qrels qrels;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string topic, iteration, doc, grade_str;
        if (!(ls >> topic >> iteration >> doc >> grade_str))
            fail(path.string(), " line ", line_no, ": expected 'topic iter doc grade'");
        int grade = 0;
        try {
            size_t used = 0;
            grade = std::stoi(grade_str, &used);
            if (used != grade_str.size()) throw std::invalid_argument(grade_str);
        } catch (const std::exception&) {
            fail(path.string(), " line ", line_no, ": bad relevance grade '", grade_str, "'");
        }
        if (grade < 0)
            fail(path.string(), " line ", line_no, ": bad relevance grade '", grade_str, "'");
        auto& topic_grades = qrels.grades[topic];
        if (!topic_grades.emplace(doc, grade).second)
            fail(path.string(), " line ", line_no, ": duplicate qrels pair (", topic, ", ", doc,
                 ")");
    }
    return qrels;
}

namespace detail {
inline size_t relevant_count(const std::map<std::string, int>& grades) {
    size_t r = 0;
    for (const auto& [doc, g] : grades)
        if (g >= 1) ++r;
    return r;
}
}  // namespace detail

/// AP = (1/R) * sum over relevant retrieved positions i <= depth of
/// (#relevant in top i)/i. Undefined (nullopt) when the topic has no
/// relevant document.
inline std::optional<double> average_precision(const std::vector<retrieval::ScoredDoc>& ranked,
                                               const std::map<std::string, int>& grades,
                                               size_t depth = 1000) {
    size_t r = detail::relevant_count(grades);
    if (r == 0) return std::nullopt;
    double sum = 0.0;
    size_t hits = 0;
    for (size_t i = 0; i < ranked.size() && i < depth; ++i) {
        auto it = grades.find(ranked[i].doc_id);
        if (it != grades.end() && it->second >= 1) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(r);
}

/// nDCG with linear gain: DCG = sum grade_i / log2(i+1); IDCG from all
/// judged grades sorted descending. Undefined when IDCG is 0.
inline std::optional<double> ndcg(const std::vector<retrieval::ScoredDoc>& ranked,
                                  const std::map<std::string, int>& grades, size_t depth = 1000) {
    double dcg = 0.0;
    for (size_t i = 0; i < ranked.size() && i < depth; ++i) {
        auto it = grades.find(ranked[i].doc_id);
        if (it != grades.end() && it->second > 0)
            dcg += static_cast<double>(it->second) / std::log2(static_cast<double>(i + 2));
    }
    std::vector<int> ideal;
    for (const auto& [doc, g] : grades)
        if (g > 0) ideal.push_back(g);
    std::sort(ideal.begin(), ideal.end(), std::greater<int>());
    double idcg = 0.0;
    for (size_t i = 0; i < ideal.size() && i < depth; ++i)
        idcg += static_cast<double>(ideal[i]) / std::log2(static_cast<double>(i + 2));
    if (idcg == 0.0) return std::nullopt;
    return dcg / idcg;
}

/// |relevant in top depth| / R. Undefined when R = 0.
inline std::optional<double> recall(const std::vector<retrieval::ScoredDoc>& ranked,
                                    const std::map<std::string, int>& grades,
                                    size_t depth = 1000) {
    size_t r = detail::relevant_count(grades);
    if (r == 0) return std::nullopt;
    size_t hits = 0;
    for (size_t i = 0; i < ranked.size() && i < depth; ++i) {
        auto it = grades.find(ranked[i].doc_id);
        if (it != grades.end() && it->second >= 1) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(r);
}

// ---------------------------------------------------------------------------
// measures and reports

struct Measure {
    enum class Kind : uint8_t { map, ndcg, recall } kind = Kind::map;
    size_t depth = 1000;
    std::string label;  // as given in the configuration, e.g. "ndcg@1000"
};

inline Measure parse_measure(const std::string& spec) {
    Measure m;
    m.label = spec;
    std::string name = spec;
    auto at = spec.find('@');
    if (at != std::string::npos) {
        name = spec.substr(0, at);
        std::string depth_str = spec.substr(at + 1);
        try {
            size_t used = 0;
            long d = std::stol(depth_str, &used);
            if (used != depth_str.size() || d < 1) throw std::invalid_argument(depth_str);
            m.depth = static_cast<size_t>(d);
        } catch (const std::exception&) {
            throw ValidationError(concat("bad measure depth in '", spec, "'"));
        }
    }
    if (name == "map")
        m.kind = Measure::Kind::map;
    else if (name == "ndcg")
        m.kind = Measure::Kind::ndcg;
    else if (name == "recall")
        m.kind = Measure::Kind::recall;
    else
        throw ValidationError(concat("unknown measure '", spec,
                                     "' (expected map, ndcg or recall, optionally with @depth)"));
    return m;
}

struct MetricReport {
    std::vector<std::string> measure_labels;                    // config order
    std::map<std::string, std::map<std::string, double>> per_topic;  // topic -> label -> value
    std::map<std::string, double> aggregate;                    // label -> mean

    /// TSV rows: topic <TAB> metric <TAB> value, topics ascending, measures
    /// in config order, the "all" aggregate rows last.
    std::string to_tsv() const {
        std::string out;
        char buf[32];
        for (const auto& [topic, values] : per_topic) {
            for (const auto& label : measure_labels) {
                std::snprintf(buf, sizeof(buf), "%.4f", values.at(label));
                out += concat(topic, "\t", label, "\t", buf, "\n");
            }
        }
        for (const auto& label : measure_labels) {
            std::snprintf(buf, sizeof(buf), "%.4f", aggregate.at(label));
            out += concat("all", "\t", label, "\t", buf, "\n");
        }
        return out;
    }
};

inline std::optional<double> compute_measure(const Measure& m,
                                             const std::vector<retrieval::ScoredDoc>& ranked,
                                             const std::map<std::string, int>& grades) {
    switch (m.kind) {
        case Measure::Kind::map: return average_precision(ranked, grades, m.depth);
        case Measure::Kind::ndcg: return ndcg(ranked, grades, m.depth);
        case Measure::Kind::recall: return recall(ranked, grades, m.depth);
    }
    return std::nullopt;
}

/// Score a run file against qrels. Topics in the run but absent from the
/// qrels (or with no relevant document) are excluded with a warning; an
/// empty topic intersection is an error.
inline MetricReport evaluate(const std::filesystem::path& run_path,
                             const std::filesystem::path& qrels_path,
                             const std::vector<std::string>& measure_specs) {
    std::vector<Measure> measures;
    for (const auto& spec : measure_specs) measures.push_back(parse_measure(spec));
    if (measures.empty()) throw ValidationError("no measures requested");

    auto qrels = load_qrels(qrels_path);
    auto lists = retrieval::parse_run(run_path);

    MetricReport report;
    for (const auto& m : measures) report.measure_labels.push_back(m.label);

    for (auto& list : lists) {
        auto it = qrels.grades.find(list.topic_id);
        if (it == qrels.grades.end()) {
            log_warn(concat("topic '", list.topic_id, "' not in qrels, excluded from scoring"));
            continue;
        }
        std::sort(list.entries.begin(), list.entries.end(), retrieval::ranked_before);
        std::map<std::string, double> values;
        bool defined = true;
        for (const auto& m : measures) {
            auto v = compute_measure(m, list.entries, it->second);
            if (!v) {
                defined = false;
                break;
            }
            values[m.label] = *v;
        }
        if (!defined) {
            log_warn(concat("topic '", list.topic_id,
                            "' has no relevant document, excluded from scoring"));
            continue;
        }
        report.per_topic[list.topic_id] = std::move(values);
    }
    if (report.per_topic.empty())
        fail("no overlap between run topics and judged topics with relevant documents");
    for (const auto& label : report.measure_labels) {
        double sum = 0.0;
        for (const auto& [topic, values] : report.per_topic) sum += values.at(label);
        report.aggregate[label] = sum / static_cast<double>(report.per_topic.size());
    }
    return report;
}

}  // namespace clirkit::eval
