// Acceptance suite: eight end-to-end criteria, each printed as one
// [PASS]/[FAIL] line. Run with no arguments for all criteria or with a list
// of criterion numbers. Exits nonzero if any selected criterion fails.

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/stat.h>

#include "clirkit/clirkit.hpp"
#include "support/gen.hpp"
#include "support/oracle.hpp"
#include "support/tmpdir.hpp"

using namespace clirkit;
using testsupport::TempDir;

namespace {

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw CheckFailure(what);
}

void require_close(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol))
        throw CheckFailure(concat(what, ": got ", got, ", want ", want, " (tol ", tol, ")"));
}

text::TextPipeline plain_pipeline(const std::string& lang = "xx") {
    text::ProcessingPolicy p;
    p.language = lang;
    return text::TextPipeline(p);
}

retrieval::Query query_of(const std::map<std::string, double>& weights) {
    retrieval::Query q;
    q.id = "q";
    q.weights = weights;
    return q;
}

void require_equal_rankings(const std::vector<retrieval::ScoredDoc>& got,
                            const std::vector<oracle::Scored>& want, const std::string& what) {
    require(got.size() == want.size(),
            concat(what, ": size ", got.size(), " vs ", want.size()));
    for (size_t i = 0; i < want.size(); ++i) {
        require(got[i].doc_id == want[i].id,
                concat(what, ": rank ", i + 1, " doc ", got[i].doc_id, " vs ", want[i].id));
        require_close(got[i].score, want[i].score, 1e-9, concat(what, ": rank ", i + 1));
    }
}

// ---------------------------------------------------------------------------
// criterion 1: BM25/QLD equivalence with the full-scan oracle

void criterion_scoring_oracle() {
    std::mt19937 rng(1111);
    auto start = std::chrono::steady_clock::now();
    for (int round = 0; round < 20; ++round) {
        size_t n_docs = 100 + static_cast<size_t>(round) * 45;  // 100..955
        size_t vocab = 150 + static_cast<size_t>(round) * 10;
        auto corpus = gen::make_corpus(n_docs, vocab, rng);
        auto pipe = plain_pipeline();
        auto idx = index::InvertedIndex::build(corpus.docs, pipe);
        oracle::FullScanScorer reference(corpus.token_docs);
        for (int qi = 0; qi < 20; ++qi) {
            auto weights = gen::make_query_terms(vocab, rng);
            auto query = query_of(weights);
            auto label = concat("corpus ", round, " query ", qi);
            require_equal_rankings(
                retrieval::score_bm25(idx, query, 100, {0.9, 0.4}).entries,
                reference.bm25(weights, 100, 0.9, 0.4), "bm25 " + label);
            require_equal_rankings(
                retrieval::score_qld(idx, query, 100, {1000.0}).entries,
                reference.qld(weights, 100, 1000.0), "qld " + label);
        }
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    require(secs < 60.0, concat("runtime ", secs, "s exceeds the 60s budget"));
}

// ---------------------------------------------------------------------------
// shared pipeline fixture

struct PipelineFixture {
    explicit PipelineFixture(const TempDir& dir, size_t n_docs = 60, size_t n_topics = 6,
                             size_t vocab = 80) {
        std::mt19937 rng(20260809);
        auto corpus = gen::make_corpus(n_docs, vocab, rng, "en");
        doc_ids.reserve(corpus.docs.size());
        std::string docs;
        for (const auto& d : corpus.docs) {
            doc_ids.push_back(d.id);
            docs += nlohmann::json{{"id", d.id}, {"text", d.text}}.dump() + "\n";
        }
        write_file(dir / "docs.jsonl", docs);

        std::string topics;
        for (size_t t = 0; t < n_topics; ++t) {
            topics += nlohmann::json{{"id", std::to_string(100 + t)},
                                     {"language", "en"},
                                     {"title", concat("w", t, " w", t + 2)},
                                     {"desc", concat("w", 2 * t + 1)}}
                          .dump() +
                      "\n";
        }
        write_file(dir / "topics.jsonl", topics);

        std::string qrels;
        for (size_t t = 0; t < n_topics; ++t)
            for (int j = 0; j < 12; ++j)
                qrels += concat(100 + t, " 0 ", doc_ids[(t * 11 + j * 5) % doc_ids.size()], " ",
                                j % 3, "\n");
        write_file(dir / "qrels.txt", qrels);
    }

    std::vector<std::string> doc_ids;
};

nlohmann::json base_config(const TempDir& dir, const std::string& out_name) {
    return nlohmann::json{
        {"run_name", "acc"},
        {"output_dir", (dir / out_name).string()},
        {"documents", {{"input_path", (dir / "docs.jsonl").string()}, {"language", "en"}}},
        {"topics",
         {{"input_path", (dir / "topics.jsonl").string()}, {"fields", {"title", "desc"}}}},
        {"retrieve", {{"model", "bm25"}, {"k", 30}}},
        {"score", {{"qrels_path", (dir / "qrels.txt").string()}}},
    };
}

pipeline::RunOptions options_for(const std::filesystem::path& config_path) {
    pipeline::RunOptions opt;
    opt.config_path = config_path.string();
    return opt;
}

/// The score stage echoes its report to stdout; keep the criterion output to
/// one line each by swallowing std::cout while a pipeline runs in process.
void run_quietly(const pipeline::RunOptions& options) {
    std::ostringstream sink;
    auto* old = std::cout.rdbuf(sink.rdbuf());
    try {
        pipeline::run_experiment(options);
    } catch (...) {
        std::cout.rdbuf(old);
        throw;
    }
    std::cout.rdbuf(old);
}

// criterion 2: chunked builds merge to the single-pass index, and chunking
// never changes the downstream run file

void criterion_chunk_merge() {
    std::mt19937 rng(2222);
    auto corpus = gen::make_corpus(211, 120, rng);
    auto pipe = plain_pipeline();
    auto reference = index::InvertedIndex::build(corpus.docs, pipe);
    for (size_t n_chunks : {1u, 2u, 3u, 7u}) {
        std::vector<index::InvertedIndex> chunks;
        size_t base = corpus.docs.size() / n_chunks, rem = corpus.docs.size() % n_chunks;
        size_t start = 0;
        for (size_t i = 0; i < n_chunks; ++i) {
            size_t size = base + (i < rem ? 1 : 0);
            std::vector<corpus::Document> slice(corpus.docs.begin() + start,
                                                corpus.docs.begin() + start + size);
            chunks.push_back(index::InvertedIndex::build(slice, pipe));
            start += size;
        }
        require(index::InvertedIndex::merge(chunks) == reference,
                concat("merged index with ", n_chunks, " chunks differs from single-pass build"));
    }

    TempDir dir("acc_chunks");
    PipelineFixture fixture(dir);
    std::string reference_run;
    for (int n_chunks : {1, 2, 3, 7}) {
        auto cfg = base_config(dir, concat("out_", n_chunks));
        cfg["index"] = {{"chunks", n_chunks}};
        auto cfg_path = dir / concat("exp_", n_chunks, ".json");
        write_file(cfg_path, cfg.dump(2));
        auto opt = options_for(cfg_path);
        opt.workers = 2;
        run_quietly(opt);
        std::string run = read_file(dir / concat("out_", n_chunks) / "retrieve.run");
        if (reference_run.empty())
            reference_run = run;
        else
            require(run == reference_run,
                    concat("run file with ", n_chunks, " chunks differs from 1-chunk run"));
    }
}

// criterion 3: PSQ with an identity table reproduces plain scoring; the
// pruning arithmetic is exact

void criterion_psq_identity() {
    std::mt19937 rng(3333);
    for (int round = 0; round < 5; ++round) {
        auto corpus = gen::make_corpus(120 + 40 * static_cast<size_t>(round), 100, rng);
        auto pipe = plain_pipeline();
        auto idx = index::InvertedIndex::build(corpus.docs, pipe);
        retrieval::TranslationTable identity;
        for (const auto& [term, entry] : idx.dictionary()) identity.entries[term] = {{term, 1.0}};
        for (int qi = 0; qi < 12; ++qi) {
            auto weights = gen::make_query_terms(100, rng);
            retrieval::Query known;
            known.id = "q";
            for (const auto& [term, w] : weights)
                if (identity.entries.count(term)) known.weights[term] = w;
            if (known.weights.empty()) continue;

            auto sq = retrieval::psq_project(known, identity, {});
            auto psq_bm25 = retrieval::score_psq(idx, sq, 80, retrieval::ScoringModel::bm25,
                                                 {0.9, 0.4}, {1000.0});
            auto plain_bm25 = retrieval::score_bm25(idx, known, 80, {0.9, 0.4});
            require(psq_bm25.entries.size() == plain_bm25.entries.size(),
                    "psq/bm25 candidate sets differ");
            for (size_t i = 0; i < plain_bm25.entries.size(); ++i) {
                require(psq_bm25.entries[i].doc_id == plain_bm25.entries[i].doc_id,
                        concat("psq/bm25 order differs at rank ", i + 1));
                require_close(psq_bm25.entries[i].score, plain_bm25.entries[i].score, 1e-9,
                              "psq/bm25 score");
            }
            auto psq_qld = retrieval::score_psq(idx, sq, 80, retrieval::ScoringModel::qld,
                                                {0.9, 0.4}, {750.0});
            auto plain_qld = retrieval::score_qld(idx, known, 80, {750.0});
            require(psq_qld.entries.size() == plain_qld.entries.size(),
                    "psq/qld candidate sets differ");
            for (size_t i = 0; i < plain_qld.entries.size(); ++i) {
                require(psq_qld.entries[i].doc_id == plain_qld.entries[i].doc_id,
                        concat("psq/qld order differs at rank ", i + 1));
                require_close(psq_qld.entries[i].score, plain_qld.entries[i].score, 1e-9,
                              "psq/qld score");
            }
        }
    }

    // pruning arithmetic: (.6, .3, .08, .02), min .05, cum .95 -> (2/3, 1/3)
    retrieval::TranslationTable table;
    table.entries["s"] = {{"t1", 0.6}, {"t2", 0.3}, {"t3", 0.08}, {"t4", 0.02}};
    auto sq = retrieval::psq_project(query_of({{"s", 1.0}}), table, {0.05, 0.95, 32});
    require(sq.terms.size() == 1 && sq.terms[0].targets.size() == 2,
            "pruning kept the wrong translation count");
    require(sq.terms[0].targets[0].first == "t1" && sq.terms[0].targets[1].first == "t2",
            "pruning kept the wrong translations");
    require_close(sq.terms[0].targets[0].second, 0.6 / 0.9, 1e-12, "renormalized p(t1)");
    require_close(sq.terms[0].targets[1].second, 0.3 / 0.9, 1e-12, "renormalized p(t2)");
    auto top1 = retrieval::psq_project(query_of({{"s", 1.0}}), table, {0.05, 0.95, 1});
    require(top1.terms[0].targets.size() == 1 && top1.terms[0].targets[0].second == 1.0,
            "max_translations=1 must keep exactly the argmax with renormalized p=1");
}

// criterion 4: metric implementations vs the naive oracle and hand values

void criterion_metrics() {
    std::mt19937 rng(4444);
    for (int round = 0; round < 100; ++round) {
        size_t n_docs = 5 + rng() % 60;
        std::vector<std::string> ids;
        for (size_t i = 0; i < n_docs; ++i) ids.push_back("d" + std::to_string(i));
        auto grades = gen::make_grades(ids, rng);
        std::shuffle(ids.begin(), ids.end(), rng);
        std::vector<std::string> ranking(ids.begin(), ids.begin() + (1 + rng() % ids.size()));
        std::vector<retrieval::ScoredDoc> ranked;
        double score = static_cast<double>(ranking.size());
        for (const auto& id : ranking) ranked.push_back({id, score--});
        size_t depth = 1 + rng() % 30;

        auto check = [&](const char* name, double oracle_value, std::optional<double> got) {
            if (oracle_value < 0) {
                require(!got.has_value(), concat(name, " should be undefined, round ", round));
            } else {
                require(got.has_value(), concat(name, " should be defined, round ", round));
                require_close(*got, oracle_value, 1e-9, concat(name, " round ", round));
            }
        };
        check("map", oracle::naive_ap(ranking, grades, depth),
              eval::average_precision(ranked, grades, depth));
        check("ndcg", oracle::naive_ndcg(ranking, grades, depth),
              eval::ndcg(ranked, grades, depth));
        check("recall", oracle::naive_recall(ranking, grades, depth),
              eval::recall(ranked, grades, depth));
    }

    // hand-derived vectors
    std::map<std::string, int> grades{{"r1", 1}, {"r2", 1}, {"n1", 0}};
    std::vector<retrieval::ScoredDoc> ranked{{"r1", 3.0}, {"n1", 2.0}, {"r2", 1.0}};
    require_close(*eval::average_precision(ranked, grades), 0.83333, 1e-4,
                  "AP of relevant at ranks 1 and 3 with R=2");
    require_close(*eval::ndcg(ranked, grades), 0.9197, 1e-4, "nDCG of grades [1,0,1]");
}

// criterion 5: reproducibility across interruption and worker counts

void criterion_reproducibility() {
    TempDir dir("acc_repro");
    PipelineFixture fixture(dir);

    auto make = [&](const std::string& name) {
        auto cfg = base_config(dir, "out_" + name);
        cfg["index"] = {{"chunks", 3}};
        auto path = dir / ("exp_" + name + ".json");
        write_file(path, cfg.dump(2));
        return path;
    };

    auto full = options_for(make("full"));
    run_quietly(full);

    auto stepped_path = make("stepped");
    for (const char* stage : {"ingest", "index", "retrieve", "score"}) {
        auto opt = options_for(stepped_path);
        opt.stop_after = stage;
        opt.resume = true;
        run_quietly(opt);
    }

    auto w1 = options_for(make("w1"));
    w1.workers = 1;
    run_quietly(w1);
    auto w4 = options_for(make("w4"));
    w4.workers = 4;
    run_quietly(w4);

    auto run_full = read_file(dir / "out_full" / "retrieve.run");
    auto report_full = read_file(dir / "out_full" / "report.tsv");
    for (const char* name : {"stepped", "w1", "w4"}) {
        require(read_file(dir / concat("out_", name) / "retrieve.run") == run_full,
                concat("run file of '", name, "' differs from the uninterrupted run"));
        require(read_file(dir / concat("out_", name) / "report.tsv") == report_full,
                concat("report of '", name, "' differs from the uninterrupted run"));
    }
}

// criterion 6: external reranker protocol round trip and failure modes

void criterion_external_reranker() {
    TempDir dir("acc_rerank");
    PipelineFixture fixture(dir);

    auto write_script = [&](const std::string& name, const std::string& body) {
        auto path = dir / name;
        write_file(path, "#!/usr/bin/env python3\n" + body);
        ::chmod(path.c_str(), 0755);
        return path;
    };
    auto identity = write_script("identity.py", R"PY(
import json, sys
requests, docstore, output = sys.argv[1:4]
with open(requests) as f, open(output, "w") as out:
    for line in f:
        req = json.loads(line)
        n = len(req["doc_ids"])
        for i, doc in enumerate(req["doc_ids"]):
            out.write("%s Q0 %s %d %.6f x\n" % (req["topic_id"], doc, i + 1, float(n - i)))
)PY");

    auto config_with_rerank = [&](const std::string& out_name, nlohmann::json rerank) {
        auto cfg = base_config(dir, out_name);
        cfg["rerank"] = std::move(rerank);
        auto path = dir / (out_name + ".json");
        write_file(path, cfg.dump(2));
        return path;
    };

    // identity round trip: inproc and external produce byte-identical runs
    run_quietly(options_for(config_with_rerank(
        "out_inproc", {{"enabled", true}, {"mode", "inproc"}, {"name", "identity"}})));
    run_quietly(options_for(config_with_rerank(
        "out_external",
        {{"enabled", true}, {"mode", "external"}, {"command", {"python3", identity.string()}}})));
    require(read_file(dir / "out_inproc" / "rerank.run") ==
                read_file(dir / "out_external" / "rerank.run"),
            "inproc and external identity reranker runs differ");
    auto first = retrieval::parse_run(dir / "out_inproc" / "retrieve.run");
    auto reranked = retrieval::parse_run(dir / "out_inproc" / "rerank.run");
    require(first.size() == reranked.size(), "identity reranker changed the topic set");
    for (size_t t = 0; t < first.size(); ++t)
        for (size_t i = 0; i < first[t].entries.size(); ++i)
            require(first[t].entries[i].doc_id == reranked[t].entries[i].doc_id,
                    "identity reranker changed the document order");

    // toy length reranker: hand-computed order on three fixture docs
    {
        corpus::DocStoreWriter writer(dir / "toy_store", "en");
        writer.append({"long", "", "aaaaaaaaaaaa", "en"});
        writer.append({"mid", "", "aaaa", "en"});
        writer.append({"tiny", "", "a", "en"});
        writer.finalize();
        corpus::DocStore store(dir / "toy_store");
        rerank::RerankRequest req{"1", "q", {"long", "mid", "tiny"}};
        auto lists = rerank::rerank_inproc(rerank::RerankerRegistry::global().get("doclen"),
                                           {req}, store);
        require(lists[0].entries.size() == 3 && lists[0].entries[0].doc_id == "tiny" &&
                    lists[0].entries[1].doc_id == "mid" && lists[0].entries[2].doc_id == "long",
                "doclen reranker order is not ascending length");
    }

    // failure modes
    auto expect_failure = [&](const std::string& out_name, const std::string& script_body,
                              const std::string& needle) {
        auto script = write_script(out_name + ".py", script_body);
        auto path = config_with_rerank(
            out_name, {{"enabled", true},
                       {"mode", "external"},
                       {"command", {"python3", script.string()}}});
        try {
            run_quietly(options_for(path));
            throw CheckFailure(concat(out_name, ": expected a failure"));
        } catch (const Error& e) {
            require(std::string(e.what()).find(needle) != std::string::npos,
                    concat(out_name, ": error w/o '", needle, "': ", e.what()));
        }
    };
    expect_failure("out_exit1", "import sys\nsys.stderr.write('boom\\n')\nsys.exit(1)\n",
                   "status 1");
    expect_failure("out_missing", R"PY(
import json, sys
requests, docstore, output = sys.argv[1:4]
with open(requests) as f, open(output, "w") as out:
    lines = f.readlines()
    for line in lines[1:]:
        req = json.loads(line)
        for i, doc in enumerate(req["doc_ids"]):
            out.write("%s Q0 %s %d 1.000000 x\n" % (req["topic_id"], doc, i + 1))
)PY",
                   "missing topics");
    expect_failure("out_foreign", R"PY(
import json, sys
requests, docstore, output = sys.argv[1:4]
with open(requests) as f, open(output, "w") as out:
    for line in f:
        req = json.loads(line)
        out.write("%s Q0 zz-foreign 1 1.000000 x\n" % req["topic_id"])
)PY",
                   "zz-foreign");
}

// criterion 7: RM3 endpoint behavior

void criterion_rm3() {
    std::mt19937 rng(7777);
    // orig_weight = 1 preserves ranking order exactly
    for (int round = 0; round < 4; ++round) {
        auto corpus = gen::make_corpus(150, 110, rng);
        auto pipe = plain_pipeline();
        auto idx = index::InvertedIndex::build(corpus.docs, pipe);
        for (int qi = 0; qi < 10; ++qi) {
            auto q = query_of(gen::make_query_terms(110, rng));
            auto baseline = retrieval::score_bm25(idx, q, 60, {});
            auto expanded = retrieval::rm3_expand(idx, q, {10, 10, 1.0}, {});
            auto after = retrieval::score_bm25(idx, expanded, 60, {});
            require(baseline.entries.size() == after.entries.size(),
                    "rm3(1.0) changed the result count");
            for (size_t i = 0; i < baseline.entries.size(); ++i)
                require(baseline.entries[i].doc_id == after.entries[i].doc_id,
                        concat("rm3(1.0) changed rank ", i + 1));

            // expanded weights sum to 1 +- 1e-9 and stay positive
            double lambda = (rng() % 101) / 100.0;
            auto fb = retrieval::score_bm25(idx, q, 8, {});
            if (!fb.entries.empty()) {
                auto mixed = retrieval::rm3_expand(idx, q, {8, 12, lambda}, {});
                double sum = 0.0;
                for (const auto& [term, w] : mixed.weights) {
                    require(w > 0.0, "rm3 produced a non-positive weight");
                    sum += w;
                }
                require_close(sum, 1.0, 1e-9, "rm3 weight sum");
            }
        }
    }

    // 3-doc hand-computed expansion
    auto pipe = plain_pipeline();
    auto idx = index::InvertedIndex::build(
        std::vector<corpus::Document>{{"d1", "", "x x y", "xx"},
                                      {"d2", "", "y z", "xx"},
                                      {"d3", "", "z z z", "xx"}},
        pipe);
    auto expanded = retrieval::rm3_expand(idx, query_of({{"x", 1.0}}), {1, 2, 0.0}, {});
    require(expanded.weights.size() == 2, "rm3 hand example: wrong term count");
    require_close(expanded.weights.at("x"), 2.0 / 3.0, 1e-12, "rm3 hand example: weight of x");
    require_close(expanded.weights.at("y"), 1.0 / 3.0, 1e-12, "rm3 hand example: weight of y");
    auto mixed = retrieval::rm3_expand(idx, query_of({{"x", 1.0}}), {1, 2, 0.5}, {});
    require_close(mixed.weights.at("x"), 0.5 + 0.5 * (2.0 / 3.0), 1e-12,
                  "rm3 hand example: interpolated x");
    require_close(mixed.weights.at("y"), 0.5 * (1.0 / 3.0), 1e-12,
                  "rm3 hand example: interpolated y");
}

// criterion 8: desk-scale cross-language end to end under time/memory bounds

void criterion_desk_scale() {
    TempDir dir("acc_e2e");
    std::mt19937 rng(8888);

    // 1000 target-language docs over vocabulary w0..w799
    auto corpus = gen::make_corpus(1000, 800, rng, "yy");
    std::string docs;
    for (const auto& d : corpus.docs)
        docs += nlohmann::json{{"id", d.id}, {"text", d.text}}.dump() + "\n";
    write_file(dir / "docs.jsonl", docs);

    // source-language topics over q-terms plus a translation table into w-terms
    std::string topics, table;
    size_t n_topics = 25;
    for (size_t t = 0; t < n_topics; ++t) {
        topics += nlohmann::json{{"id", std::to_string(200 + t)},
                                 {"language", "xx"},
                                 {"title", concat("q", 3 * t, " q", 3 * t + 1)},
                                 {"desc", concat("q", 3 * t + 2)}}
                      .dump() +
                  "\n";
    }
    for (size_t q = 0; q < 3 * n_topics; ++q) {
        size_t w1 = (q * 7) % 800, w2 = (q * 13 + 5) % 800, w3 = (q * 29 + 11) % 800;
        table += concat("q", q, " w", w1, " 0.6\n");
        table += concat("q", q, " w", w2, " 0.3\n");
        table += concat("q", q, " w", w3, " 0.1\n");
    }
    write_file(dir / "topics.jsonl", topics);
    write_file(dir / "table.tsv", table);

    std::string qrels;
    for (size_t t = 0; t < n_topics; ++t)
        for (int j = 0; j < 20; ++j)
            qrels += concat(200 + t, " 0 ", corpus.docs[(t * 37 + j * 17) % 1000].id, " ", j % 3,
                            "\n");
    write_file(dir / "qrels.txt", qrels);

    nlohmann::json cfg{
        {"run_name", "xlir"},
        {"output_dir", (dir / "out").string()},
        {"documents", {{"input_path", (dir / "docs.jsonl").string()}, {"language", "yy"}}},
        {"index", {{"chunks", 4}}},
        {"topics",
         {{"input_path", (dir / "topics.jsonl").string()},
          {"fields", {"title", "desc"}},
          {"query_language", "xx"}}},
        {"retrieve",
         {{"model", "psq"},
          {"k", 1000},
          {"psq", {{"table_path", (dir / "table.tsv").string()}, {"min_prob", 0.01}}}}},
        {"score", {{"qrels_path", (dir / "qrels.txt").string()}}},
    };
    write_file(dir / "exp.json", cfg.dump(2));

    auto start = std::chrono::steady_clock::now();
    auto opt = options_for(dir / "exp.json");
    opt.workers = 2;
    run_quietly(opt);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    require(std::filesystem::exists(dir / "out" / "retrieve.run"), "run file missing");
    require(std::filesystem::exists(dir / "out" / "report.tsv"), "report missing");
    auto lists = retrieval::parse_run(dir / "out" / "retrieve.run");
    require(lists.size() == n_topics, concat("expected ", n_topics, " topics in the run, got ",
                                             lists.size()));

    struct rusage usage {};
    getrusage(RUSAGE_SELF, &usage);
    double peak_mb = static_cast<double>(usage.ru_maxrss) / 1024.0;
    require(secs < 120.0, concat("end-to-end runtime ", secs, "s exceeds 120s"));
    require(peak_mb < 500.0, concat("peak memory ", peak_mb, " MB exceeds 500 MB"));
    std::fprintf(stderr, "        (desk-scale run: %.1fs, peak rss %.0f MB)\n", secs, peak_mb);
}

struct Criterion {
    int id;
    const char* name;
    std::function<void()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {1, "scoring-oracle equivalence (BM25/QLD vs full scan)", criterion_scoring_oracle},
        {2, "chunk-merge equivalence and chunking-independent runs", criterion_chunk_merge},
        {3, "PSQ identity invariant and pruning arithmetic", criterion_psq_identity},
        {4, "metric correctness vs naive oracle and hand values", criterion_metrics},
        {5, "reproducibility across resume and worker counts", criterion_reproducibility},
        {6, "external reranker protocol and failure modes", criterion_external_reranker},
        {7, "RM3 endpoints and weight normalization", criterion_rm3},
        {8, "desk-scale cross-language end to end", criterion_desk_scale},
    };
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& criterion : criteria()) {
        if (!selected.empty() &&
            std::find(selected.begin(), selected.end(), criterion.id) == selected.end())
            continue;
        auto start = std::chrono::steady_clock::now();
        try {
            criterion.run();
            double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            std::printf("[PASS] criterion %d: %s (%.1fs)\n", criterion.id, criterion.name, secs);
        } catch (const std::exception& e) {
            ++failures;
            std::printf("[FAIL] criterion %d: %s\n        %s\n", criterion.id, criterion.name,
                        e.what());
        }
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
