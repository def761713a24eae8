#pragma once

// Experiment configuration: a strict JSON document (lines whose first
// non-blank character is '#' are comments), parsed with duplicate-key
// detection, defaulted, validated, and serializable back out; the pipeline
// plan derived from it; per-stage fingerprints (SHA-256 over canonical
// serializations chained through upstream stages, with external inputs
// hashed by content); and the .done manifests that make runs resumable.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "eval.hpp"
#include "rerank.hpp"
#include "retrieval.hpp"
#include "textproc.hpp"
#include "util.hpp"

namespace clirkit::config {

using nlohmann::json;

// ---------------------------------------------------------------------------
// configuration model

enum class RetrievalModel : uint8_t { bm25, qld, psq };
enum class RerankMode : uint8_t { inproc, external };

struct DocumentsConfig {
    std::string input_path;
    std::string format = "jsonl";
    std::string language;
    bool store_raw = true;

    bool operator==(const DocumentsConfig&) const = default;
};

struct TopicsConfig {
    std::string input_path;
    retrieval::TopicFields fields;  // title by default
    std::string query_language;     // defaults to documents.language
    retrieval::TranslationSource translation_source = retrieval::TranslationSource::none;

    bool operator==(const TopicsConfig&) const = default;
};

struct PsqConfig {
    std::string table_path;
    retrieval::PsqPruning pruning;
    retrieval::ScoringModel scoring = retrieval::ScoringModel::bm25;

    bool operator==(const PsqConfig&) const = default;
};

struct Rm3Config {
    bool enabled = false;
    retrieval::Rm3Params params;

    bool operator==(const Rm3Config&) const = default;
};

struct RetrieveConfig {
    RetrievalModel model = RetrievalModel::bm25;
    int k = 1000;
    retrieval::Bm25Params bm25;
    retrieval::QldParams qld;
    Rm3Config rm3;
    PsqConfig psq;

    bool operator==(const RetrieveConfig&) const = default;
};

struct RerankConfig {
    bool enabled = false;
    RerankMode mode = RerankMode::inproc;
    std::string name;                   // registered reranker, inproc mode
    std::vector<std::string> command;   // argv prefix, external mode

    bool operator==(const RerankConfig&) const = default;
};

struct ScoreConfig {
    std::string qrels_path;
    std::vector<std::string> measures = {"map", "ndcg@1000", "recall@1000"};

    bool operator==(const ScoreConfig&) const = default;
};

struct ExperimentConfig {
    std::string run_name;
    std::string output_dir;
    DocumentsConfig documents;
    std::map<std::string, text::ProcessingPolicy> text;  // language -> policy
    int index_chunks = 1;
    TopicsConfig topics;
    RetrieveConfig retrieve;
    RerankConfig rerank;
    ScoreConfig score;

    bool operator==(const ExperimentConfig&) const = default;

    const text::ProcessingPolicy& policy_for(const std::string& language) const {
        auto it = text.find(language);
        if (it == text.end()) fail("no processing policy for language '", language, "'");
        return it->second;
    }
};

inline text::ProcessingPolicy default_policy(const std::string& language) {
    text::ProcessingPolicy p;
    p.language = language;
    return p;
}

// ---------------------------------------------------------------------------
// strict JSON parsing: '#' comment lines, duplicate-key detection,
// position-reported syntax errors

namespace detail {

inline std::string strip_comment_lines(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (eol == std::string::npos ? text.size() : eol) - pos);
        size_t first = line.find_first_not_of(" \t\r");
        bool comment = first != std::string_view::npos && line[first] == '#';
        if (!comment) out.append(line);
        if (eol == std::string::npos) break;
        out.push_back('\n');
        pos = eol + 1;
    }
    return out;
}

/// SAX handler that builds a json value and rejects duplicate object keys.
struct StrictBuilder {
    struct Frame {
        json value;
        std::set<std::string> keys;
        std::string pending_key;
    };

    std::vector<Frame> stack;
    json result;
    std::string error;

    bool emit(json v) {
        if (stack.empty()) {
            result = std::move(v);
            return true;
        }
        Frame& top = stack.back();
        if (top.value.is_array())
            top.value.push_back(std::move(v));
        else
            top.value[top.pending_key] = std::move(v);
        return true;
    }

    bool null() { return emit(nullptr); }
    bool boolean(bool v) { return emit(v); }
    bool number_integer(json::number_integer_t v) { return emit(v); }
    bool number_unsigned(json::number_unsigned_t v) { return emit(v); }
    bool number_float(json::number_float_t v, const std::string&) { return emit(v); }
    bool string(std::string& v) { return emit(v); }
    bool binary(json::binary_t& v) { return emit(std::move(v)); }
    bool start_object(std::size_t) {
        stack.push_back({json::object(), {}, ""});
        return true;
    }
    bool key(std::string& k) {
        Frame& top = stack.back();
        if (!top.keys.insert(k).second) {
            error = concat("syntax error: duplicate key '", k, "'");
            return false;
        }
        top.pending_key = k;
        return true;
    }
    bool end_object() {
        json v = std::move(stack.back().value);
        stack.pop_back();
        return emit(std::move(v));
    }
    bool start_array(std::size_t) {
        stack.push_back({json::array(), {}, ""});
        return true;
    }
    bool end_array() {
        json v = std::move(stack.back().value);
        stack.pop_back();
        return emit(std::move(v));
    }
    bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex) {
        error = concat("syntax error: ", ex.what());
        return false;
    }
};

}  // namespace detail

/// Parse config text to a JSON document, enforcing the strict surface rules.
inline json parse_config_document(const std::string& text) {
    std::string stripped = detail::strip_comment_lines(text);
    detail::StrictBuilder builder;
    bool ok = json::sax_parse(stripped, &builder);
    if (!ok || !builder.error.empty())
        throw ValidationError(builder.error.empty() ? "syntax error in config" : builder.error);
    if (!builder.result.is_object()) throw ValidationError("config root must be an object");
    return builder.result;
}

// ---------------------------------------------------------------------------
// json <-> struct mapping

namespace detail {

class ObjectReader {
  public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw ValidationError(concat("expected an object at '", path_, "'"));
    }

    const json* maybe(const char* key) {
        consumed_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() || it->is_null() ? nullptr : &*it;
    }

    std::string string_or(const char* key, std::string def) {
        const json* v = maybe(key);
        if (!v) return def;
        if (!v->is_string()) throw type_error(key, "a string");
        return v->get<std::string>();
    }

    bool bool_or(const char* key, bool def) {
        const json* v = maybe(key);
        if (!v) return def;
        if (!v->is_boolean()) throw type_error(key, "a boolean");
        return v->get<bool>();
    }

    double double_or(const char* key, double def) {
        const json* v = maybe(key);
        if (!v) return def;
        if (!v->is_number()) throw type_error(key, "a number");
        return v->get<double>();
    }

    int int_or(const char* key, int def) {
        const json* v = maybe(key);
        if (!v) return def;
        if (!v->is_number_integer() && !v->is_number_unsigned())
            throw type_error(key, "an integer");
        return v->get<int>();
    }

    std::vector<std::string> string_list_or(const char* key, std::vector<std::string> def) {
        const json* v = maybe(key);
        if (!v) return def;
        if (!v->is_array()) throw type_error(key, "a list of strings");
        std::vector<std::string> out;
        for (const auto& e : *v) {
            if (!e.is_string()) throw type_error(key, "a list of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    std::string child_path(const char* key) const {
        return path_.empty() ? key : concat(path_, ".", key);
    }

    void finish() {
        for (const auto& [key, value] : j_.items())
            if (!consumed_.count(key))
                throw ValidationError(concat("unknown key '", child_path(key.c_str()), "'"));
    }

  private:
    ValidationError type_error(const char* key, const char* expected) const {
        return ValidationError(concat("expected ", expected, " at '", child_path(key), "'"));
    }

    const json& j_;
    std::string path_;
    std::set<std::string> consumed_;
};

template <typename Enum>
Enum parse_enum(const std::string& value, const char* path,
                std::initializer_list<std::pair<const char*, Enum>> mapping) {
    for (const auto& [name, v] : mapping)
        if (value == name) return v;
    std::string allowed;
    for (const auto& [name, v] : mapping) allowed += concat(allowed.empty() ? "" : ", ", name);
    throw ValidationError(concat("invalid value '", value, "' at '", path, "' (expected one of: ",
                                 allowed, ")"));
}

inline text::ProcessingPolicy parse_policy(const json& j, const std::string& language,
                                           const std::string& path) {
    text::ProcessingPolicy p = default_policy(language);
    ObjectReader r(j, path);
    if (const json* cn = r.maybe("char_normalization")) {
        ObjectReader rc(*cn, path + ".char_normalization");
        p.char_normalization.unicode_form =
            parse_enum<text::UnicodeForm>(rc.string_or("unicode_form", "nfkc"), (path + ".unicode_form").c_str(),
                       {{"nfc", text::UnicodeForm::nfc}, {"nfkc", text::UnicodeForm::nfkc}});
        p.char_normalization.case_fold = rc.bool_or("case_fold", true);
        p.char_normalization.strip_diacritics = rc.bool_or("strip_diacritics", false);
        rc.finish();
    }
    std::string tok = r.string_or("tokenizer", "rule_based_unicode");
    if (tok != "rule_based_unicode")
        throw ValidationError(concat("invalid value '", tok, "' at '", path,
                                     ".tokenizer' (expected rule_based_unicode)"));
    if (const json* sw = r.maybe("stopwords")) {
        if (sw->is_string()) {
            p.stopwords = parse_enum<text::StopwordsKind>(sw->get<std::string>(), (path + ".stopwords").c_str(),
                                     {{"none", text::StopwordsKind::none},
                                      {"builtin", text::StopwordsKind::builtin}});
        } else if (sw->is_object()) {
            ObjectReader rs(*sw, path + ".stopwords");
            p.stopwords = text::StopwordsKind::file;
            p.stopword_file = rs.string_or("file", "");
            rs.finish();
            if (p.stopword_file.empty())
                throw ValidationError(concat("'", path, ".stopwords.file' must be a path"));
        } else {
            throw ValidationError(concat("expected a string or {\"file\": path} at '", path,
                                         ".stopwords'"));
        }
    }
    p.stemmer = parse_enum<text::StemmerKind>(r.string_or("stemmer", "none"), (path + ".stemmer").c_str(),
                           {{"none", text::StemmerKind::none},
                            {"porter", text::StemmerKind::porter}});
    r.finish();
    return p;
}

inline json policy_to_json(const text::ProcessingPolicy& p) {
    json cn{{"unicode_form",
             p.char_normalization.unicode_form == text::UnicodeForm::nfkc ? "nfkc" : "nfc"},
            {"case_fold", p.char_normalization.case_fold},
            {"strip_diacritics", p.char_normalization.strip_diacritics}};
    json out{{"char_normalization", cn}, {"tokenizer", "rule_based_unicode"}};
    switch (p.stopwords) {
        case text::StopwordsKind::none: out["stopwords"] = "none"; break;
        case text::StopwordsKind::builtin: out["stopwords"] = "builtin"; break;
        case text::StopwordsKind::file: out["stopwords"] = json{{"file", p.stopword_file}}; break;
    }
    out["stemmer"] = p.stemmer == text::StemmerKind::porter ? "porter" : "none";
    return out;
}

}  // namespace detail

/// Map a parsed JSON document onto the configuration model, filling defaults.
inline ExperimentConfig config_from_document(const json& doc) {
    ExperimentConfig c;
    detail::ObjectReader r(doc, "");
    c.run_name = r.string_or("run_name", "");
    c.output_dir = r.string_or("output_dir", "");

    if (const json* docs = r.maybe("documents")) {
        detail::ObjectReader rd(*docs, "documents");
        c.documents.input_path = rd.string_or("input_path", "");
        c.documents.format = rd.string_or("format", "jsonl");
        c.documents.language = rd.string_or("language", "");
        c.documents.store_raw = rd.bool_or("store_raw", true);
        rd.finish();
    }
    if (const json* textj = r.maybe("text")) {
        if (!textj->is_object()) throw ValidationError("expected an object at 'text'");
        for (const auto& [lang, policy] : textj->items())
            c.text[lang] = detail::parse_policy(policy, lang, concat("text.", lang));
    }
    if (const json* idx = r.maybe("index")) {
        detail::ObjectReader ri(*idx, "index");
        c.index_chunks = ri.int_or("chunks", 1);
        ri.finish();
    }
    if (const json* topics = r.maybe("topics")) {
        detail::ObjectReader rt(*topics, "topics");
        c.topics.input_path = rt.string_or("input_path", "");
        auto fields = rt.string_list_or("fields", {"title"});
        c.topics.fields = {};
        c.topics.fields.title = false;
        for (const auto& f : fields) {
            if (f == "title")
                c.topics.fields.title = true;
            else if (f == "desc")
                c.topics.fields.desc = true;
            else
                throw ValidationError(concat("invalid topic field '", f,
                                             "' (expected title or desc)"));
        }
        c.topics.query_language = rt.string_or("query_language", "");
        c.topics.translation_source = detail::parse_enum<retrieval::TranslationSource>(
            rt.string_or("translation_source", "none"), "topics.translation_source",
            {{"none", retrieval::TranslationSource::none},
             {"machine", retrieval::TranslationSource::machine},
             {"human", retrieval::TranslationSource::human}});
        rt.finish();
    }
    if (const json* ret = r.maybe("retrieve")) {
        detail::ObjectReader rr(*ret, "retrieve");
        c.retrieve.model = detail::parse_enum<RetrievalModel>(rr.string_or("model", "bm25"), "retrieve.model",
                                              {{"bm25", RetrievalModel::bm25},
                                               {"qld", RetrievalModel::qld},
                                               {"psq", RetrievalModel::psq}});
        c.retrieve.k = rr.int_or("k", 1000);
        if (const json* bm = rr.maybe("bm25")) {
            detail::ObjectReader rb(*bm, "retrieve.bm25");
            c.retrieve.bm25.k1 = rb.double_or("k1", 0.9);
            c.retrieve.bm25.b = rb.double_or("b", 0.4);
            rb.finish();
        }
        if (const json* qld = rr.maybe("qld")) {
            detail::ObjectReader rq(*qld, "retrieve.qld");
            c.retrieve.qld.mu = rq.double_or("mu", 1000.0);
            rq.finish();
        }
        if (const json* rm3 = rr.maybe("rm3")) {
            detail::ObjectReader rm(*rm3, "retrieve.rm3");
            c.retrieve.rm3.enabled = rm.bool_or("enabled", false);
            c.retrieve.rm3.params.fb_docs = rm.int_or("fb_docs", 10);
            c.retrieve.rm3.params.fb_terms = rm.int_or("fb_terms", 10);
            c.retrieve.rm3.params.orig_weight = rm.double_or("orig_weight", 0.5);
            rm.finish();
        }
        if (const json* psq = rr.maybe("psq")) {
            detail::ObjectReader rp(*psq, "retrieve.psq");
            c.retrieve.psq.table_path = rp.string_or("table_path", "");
            c.retrieve.psq.pruning.min_prob = rp.double_or("min_prob", 0.01);
            c.retrieve.psq.pruning.cum_prob = rp.double_or("cum_prob", 0.97);
            c.retrieve.psq.pruning.max_translations = rp.int_or("max_translations", 32);
            c.retrieve.psq.scoring = detail::parse_enum<retrieval::ScoringModel>(
                rp.string_or("scoring", "bm25"), "retrieve.psq.scoring",
                {{"bm25", retrieval::ScoringModel::bm25}, {"qld", retrieval::ScoringModel::qld}});
            rp.finish();
        }
        rr.finish();
    }
    if (const json* rer = r.maybe("rerank")) {
        detail::ObjectReader rr(*rer, "rerank");
        c.rerank.enabled = rr.bool_or("enabled", false);
        c.rerank.mode = detail::parse_enum<RerankMode>(rr.string_or("mode", "inproc"), "rerank.mode",
                                           {{"inproc", RerankMode::inproc},
                                            {"external", RerankMode::external}});
        c.rerank.name = rr.string_or("name", "");
        c.rerank.command = rr.string_list_or("command", {});
        rr.finish();
    }
    if (const json* sc = r.maybe("score")) {
        detail::ObjectReader rs(*sc, "score");
        c.score.qrels_path = rs.string_or("qrels_path", "");
        c.score.measures = rs.string_list_or("measures", {"map", "ndcg@1000", "recall@1000"});
        rs.finish();
    }
    r.finish();

    // defaults that depend on other fields
    if (c.topics.query_language.empty()) c.topics.query_language = c.documents.language;
    if (!c.documents.language.empty() && !c.text.count(c.documents.language))
        c.text[c.documents.language] = default_policy(c.documents.language);
    if (!c.topics.query_language.empty() && !c.text.count(c.topics.query_language))
        c.text[c.topics.query_language] = default_policy(c.topics.query_language);
    return c;
}

inline json to_document(const ExperimentConfig& c) {
    json text = json::object();
    for (const auto& [lang, policy] : c.text) text[lang] = detail::policy_to_json(policy);

    std::vector<std::string> fields;
    if (c.topics.fields.title) fields.push_back("title");
    if (c.topics.fields.desc) fields.push_back("desc");

    const char* model = c.retrieve.model == RetrievalModel::bm25  ? "bm25"
                        : c.retrieve.model == RetrievalModel::qld ? "qld"
                                                                  : "psq";
    return json{
        {"run_name", c.run_name},
        {"output_dir", c.output_dir},
        {"documents",
         {{"input_path", c.documents.input_path},
          {"format", c.documents.format},
          {"language", c.documents.language},
          {"store_raw", c.documents.store_raw}}},
        {"text", text},
        {"index", {{"chunks", c.index_chunks}}},
        {"topics",
         {{"input_path", c.topics.input_path},
          {"fields", fields},
          {"query_language", c.topics.query_language},
          {"translation_source",
           retrieval::translation_source_name(c.topics.translation_source)}}},
        {"retrieve",
         {{"model", model},
          {"k", c.retrieve.k},
          {"bm25", {{"k1", c.retrieve.bm25.k1}, {"b", c.retrieve.bm25.b}}},
          {"qld", {{"mu", c.retrieve.qld.mu}}},
          {"rm3",
           {{"enabled", c.retrieve.rm3.enabled},
            {"fb_docs", c.retrieve.rm3.params.fb_docs},
            {"fb_terms", c.retrieve.rm3.params.fb_terms},
            {"orig_weight", c.retrieve.rm3.params.orig_weight}}},
          {"psq",
           {{"table_path", c.retrieve.psq.table_path},
            {"min_prob", c.retrieve.psq.pruning.min_prob},
            {"cum_prob", c.retrieve.psq.pruning.cum_prob},
            {"max_translations", c.retrieve.psq.pruning.max_translations},
            {"scoring",
             c.retrieve.psq.scoring == retrieval::ScoringModel::bm25 ? "bm25" : "qld"}}}}},
        {"rerank",
         {{"enabled", c.rerank.enabled},
          {"mode", c.rerank.mode == RerankMode::inproc ? "inproc" : "external"},
          {"name", c.rerank.name},
          {"command", c.rerank.command}}},
        {"score", {{"qrels_path", c.score.qrels_path}, {"measures", c.score.measures}}},
    };
}

inline std::string serialize(const ExperimentConfig& c) { return to_document(c).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// validation

inline bool valid_language_code(const std::string& code) {
    return code.size() == 2 && code[0] >= 'a' && code[0] <= 'z' && code[1] >= 'a' &&
           code[1] <= 'z';
}

inline void validate(const ExperimentConfig& c) {
    auto check = [](bool ok, const std::string& message) {
        if (!ok) throw ValidationError(message);
    };
    check(!c.run_name.empty(), "run_name must be set");
    check(c.run_name.find_first_of(" \t\r\n") == std::string::npos,
          "run_name must not contain whitespace (it is used as the run tag)");
    check(!c.output_dir.empty(), "output_dir must be set");
    check(!c.documents.input_path.empty(), "documents.input_path must be set");
    check(c.documents.format == "jsonl",
          concat("documents.format must be 'jsonl', got '", c.documents.format, "'"));
    check(valid_language_code(c.documents.language),
          concat("documents.language must be an ISO 639-1 code, got '", c.documents.language,
                 "'"));
    check(!c.topics.input_path.empty(), "topics.input_path must be set");
    check(c.topics.fields.title || c.topics.fields.desc, "topics.fields must be non-empty");
    check(valid_language_code(c.topics.query_language),
          concat("topics.query_language must be an ISO 639-1 code, got '",
                 c.topics.query_language, "'"));
    check(c.index_chunks >= 1, "index.chunks must be a positive integer");
    check(c.retrieve.k >= 1, "retrieve.k must be a positive integer");
    check(c.retrieve.bm25.k1 >= 0.0, "retrieve.bm25.k1 must be >= 0");
    check(c.retrieve.bm25.b >= 0.0 && c.retrieve.bm25.b <= 1.0,
          "retrieve.bm25.b must be in [0, 1]");
    check(c.retrieve.qld.mu > 0.0, "retrieve.qld.mu must be > 0");
    check(c.retrieve.rm3.params.fb_docs >= 1, "retrieve.rm3.fb_docs must be a positive integer");
    check(c.retrieve.rm3.params.fb_terms >= 1,
          "retrieve.rm3.fb_terms must be a positive integer");
    check(c.retrieve.rm3.params.orig_weight >= 0.0 && c.retrieve.rm3.params.orig_weight <= 1.0,
          "retrieve.rm3.orig_weight must be in [0, 1]");
    if (c.retrieve.model == RetrievalModel::psq) {
        check(!c.retrieve.psq.table_path.empty(),
              "retrieve.model 'psq' requires retrieve.psq.table_path");
        check(!c.retrieve.rm3.enabled, "rm3 expansion is not supported with the psq model");
    }
    check(c.retrieve.psq.pruning.min_prob >= 0.0 && c.retrieve.psq.pruning.min_prob <= 1.0,
          "retrieve.psq.min_prob must be in [0, 1]");
    check(c.retrieve.psq.pruning.cum_prob > 0.0 && c.retrieve.psq.pruning.cum_prob <= 1.0,
          "retrieve.psq.cum_prob must be in (0, 1]");
    check(c.retrieve.psq.pruning.max_translations >= 1,
          "retrieve.psq.max_translations must be a positive integer");
    for (const auto& [lang, policy] : c.text) {
        check(valid_language_code(lang),
              concat("text policies must be keyed by ISO 639-1 codes, got '", lang, "'"));
        check(policy.language == lang,
              concat("policy language mismatch for 'text.", lang, "'"));
        try {
            text::validate_policy(policy);
        } catch (const Error& e) {
            throw ValidationError(concat("text.", lang, ": ", e.what()));
        }
    }
    if (c.rerank.enabled) {
        check(c.documents.store_raw,
              "rerank requires documents.store_raw (rerankers read the doc store)");
        if (c.rerank.mode == RerankMode::inproc) {
            check(!c.rerank.name.empty(), "rerank.mode 'inproc' requires rerank.name");
            check(rerank::RerankerRegistry::global().contains(c.rerank.name),
                  concat("unknown reranker '", c.rerank.name, "'"));
        } else {
            check(!c.rerank.command.empty(), "rerank.mode 'external' requires rerank.command");
        }
    }
    for (const auto& m : c.score.measures) eval::parse_measure(m);  // throws on bad specs
}

/// Parse, default and validate a config file's text.
inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c = config_from_document(parse_config_document(text));
    validate(c);
    return c;
}

// ---------------------------------------------------------------------------
// overrides ("dotted.path=value", applied to the document before validation)

inline void apply_override(json& doc, const std::string& setting) {
    auto eq = setting.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ValidationError(concat("override must look like key=value, got '", setting, "'"));
    std::string path = setting.substr(0, eq);
    std::string value_text = setting.substr(eq + 1);

    json value;
    try {
        value = json::parse(value_text);
    } catch (const json::exception&) {
        value = value_text;  // not valid JSON: treat as a plain string
    }

    json* node = &doc;
    size_t pos = 0;
    while (true) {
        size_t dot = path.find('.', pos);
        std::string part = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (part.empty())
            throw ValidationError(concat("bad override path '", path, "'"));
        if (dot == std::string::npos) {
            (*node)[part] = std::move(value);
            break;
        }
        if (!node->contains(part)) (*node)[part] = json::object();
        node = &(*node)[part];
        if (!node->is_object())
            throw ValidationError(concat("override path '", path,
                                         "' crosses a non-object value at '", part, "'"));
        pos = dot + 1;
    }
}

// ---------------------------------------------------------------------------
// pipeline plan and stage fingerprints

enum class Stage : uint8_t { ingest, index, retrieve, rerank, score };

inline const char* stage_name(Stage s) {
    switch (s) {
        case Stage::ingest: return "ingest";
        case Stage::index: return "index";
        case Stage::retrieve: return "retrieve";
        case Stage::rerank: return "rerank";
        case Stage::score: return "score";
    }
    return "?";
}

inline std::optional<Stage> stage_from_name(const std::string& name) {
    for (Stage s : {Stage::ingest, Stage::index, Stage::retrieve, Stage::rerank, Stage::score})
        if (name == stage_name(s)) return s;
    return std::nullopt;
}

struct PipelinePlan {
    std::vector<Stage> stages;
    std::vector<std::string> fingerprints;  // 64-hex-char digest per stage

    std::optional<size_t> position(Stage s) const {
        for (size_t i = 0; i < stages.size(); ++i)
            if (stages[i] == s) return i;
        return std::nullopt;
    }
};

namespace detail {

inline json stage_material(const ExperimentConfig& c, Stage stage, const std::string& upstream) {
    json material{{"stage", stage_name(stage)}};
    if (!upstream.empty()) material["upstream"] = upstream;
    json inputs = json::object();
    switch (stage) {
        case Stage::ingest: {
            material["config"] = json{{"documents",
                                       {{"format", c.documents.format},
                                        {"language", c.documents.language},
                                        {"store_raw", c.documents.store_raw}}}};
            inputs["documents"] = sha256_file(c.documents.input_path);
            break;
        }
        case Stage::index: {
            const auto& policy = c.policy_for(c.documents.language);
            material["config"] =
                json{{"chunks", c.index_chunks}, {"policy", policy_to_json(policy)}};
            if (policy.stopwords == text::StopwordsKind::file)
                inputs["stopwords"] = sha256_file(policy.stopword_file);
            break;
        }
        case Stage::retrieve: {
            const auto& policy = c.policy_for(c.topics.query_language);
            json retrieve = to_document(c).at("retrieve");
            retrieve.at("psq").erase("table_path");  // the table participates by content
            material["config"] = json{
                {"retrieve", retrieve},
                {"topics",
                 {{"fields", to_document(c).at("topics").at("fields")},
                  {"query_language", c.topics.query_language},
                  {"translation_source",
                   retrieval::translation_source_name(c.topics.translation_source)}}},
                {"policy", policy_to_json(policy)}};
            inputs["topics"] = sha256_file(c.topics.input_path);
            if (c.retrieve.model == RetrievalModel::psq)
                inputs["psq_table"] = sha256_file(c.retrieve.psq.table_path);
            if (policy.stopwords == text::StopwordsKind::file)
                inputs["stopwords"] = sha256_file(policy.stopword_file);
            break;
        }
        case Stage::rerank: {
            material["config"] = json{
                {"mode", c.rerank.mode == RerankMode::inproc ? "inproc" : "external"},
                {"name", c.rerank.name},
                {"command", c.rerank.command}};
            break;
        }
        case Stage::score: {
            material["config"] = json{{"measures", c.score.measures}};
            inputs["qrels"] = sha256_file(c.score.qrels_path);
            break;
        }
    }
    material["inputs"] = inputs;
    return material;
}

}  // namespace detail

/// Stages present in execution order, each with its chained fingerprint.
/// Fingerprints hash the canonical serialization of the stage id, the config
/// subtree that affects the stage, content hashes of the stage's external
/// input files, and the upstream stage's fingerprint, so any upstream change
/// cascades downstream.
inline PipelinePlan plan(const ExperimentConfig& c) {
    PipelinePlan p;
    p.stages = {Stage::ingest, Stage::index, Stage::retrieve};
    if (c.rerank.enabled) p.stages.push_back(Stage::rerank);
    if (!c.score.qrels_path.empty()) p.stages.push_back(Stage::score);
    std::string upstream;
    for (Stage s : p.stages) {
        upstream = sha256_hex(detail::stage_material(c, s, upstream).dump());
        p.fingerprints.push_back(upstream);
    }
    return p;
}

inline std::string stage_fingerprint(const ExperimentConfig& c, Stage stage) {
    PipelinePlan p = plan(c);
    auto pos = p.position(stage);
    if (!pos) fail("stage '", stage_name(stage), "' is not part of this pipeline");
    return p.fingerprints[*pos];
}

// ---------------------------------------------------------------------------
// stage manifests and resume detection

struct StageManifest {
    std::string digest;
    std::string finished_at;
    std::vector<std::string> artifact_paths;
};

inline std::filesystem::path manifest_path(const std::filesystem::path& output_dir, Stage stage) {
    return output_dir / "manifest" / concat(stage_name(stage), ".done");
}

inline void write_manifest(const std::filesystem::path& output_dir, Stage stage,
                           const StageManifest& manifest) {
    json j{{"digest", manifest.digest},
           {"finished_at", manifest.finished_at},
           {"artifact_paths", manifest.artifact_paths}};
    write_file(manifest_path(output_dir, stage), j.dump(2) + "\n");
}

inline std::optional<StageManifest> read_manifest(const std::filesystem::path& output_dir,
                                                  Stage stage) {
    auto path = manifest_path(output_dir, stage);
    if (!std::filesystem::exists(path)) return std::nullopt;
    try {
        json j = json::parse(read_file(path));
        StageManifest m;
        m.digest = j.at("digest").get<std::string>();
        m.finished_at = j.at("finished_at").get<std::string>();
        m.artifact_paths = j.at("artifact_paths").get<std::vector<std::string>>();
        return m;
    } catch (const std::exception& e) {
        log_warn(concat("corrupted manifest ", path.string(), " treated as absent: ", e.what()));
        return std::nullopt;
    }
}

/// Index of the first stage that must run: the first whose manifest is
/// absent, unreadable, or carries a different fingerprint. Returns
/// plan.stages.size() when everything is up to date.
inline size_t find_resume_point(const std::filesystem::path& output_dir,
                                const PipelinePlan& plan) {
    for (size_t i = 0; i < plan.stages.size(); ++i) {
        auto manifest = read_manifest(output_dir, plan.stages[i]);
        if (!manifest || manifest->digest != plan.fingerprints[i]) return i;
    }
    return plan.stages.size();
}

inline std::string timestamp_utc_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace clirkit::config
