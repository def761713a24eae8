#pragma once

// Stage execution: ingest -> index -> retrieve -> [rerank] -> [score], with
// a .done manifest written after every completed stage so a later invocation
// can resume where this one stopped. Worker count changes scheduling only,
// never results: chunks are merged in declared order and per-topic results
// are assembled in topic order, so run files are byte-identical for any
// worker count.

#include <atomic>
#include <chrono>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "config.hpp"
#include "corpus.hpp"
#include "eval.hpp"
#include "index.hpp"
#include "rerank.hpp"
#include "retrieval.hpp"
#include "util.hpp"

namespace clirkit::pipeline {

/// Runs independent tasks on up to `workers` threads. Results must go into
/// caller-owned slots; the first exception is rethrown after all threads
/// join. A grid scheduler could implement the same surface.
class ThreadPoolScheduler {
  public:
    explicit ThreadPoolScheduler(int workers) : workers_(workers < 1 ? 1 : workers) {}

    void run(const std::vector<std::function<void()>>& tasks) const {
        if (tasks.empty()) return;
        size_t nthreads = std::min(static_cast<size_t>(workers_), tasks.size());
        if (nthreads == 1) {
            for (const auto& task : tasks) task();
            return;
        }
        std::atomic<size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        for (size_t t = 0; t < nthreads; ++t) {
            pool.emplace_back([&]() {
                while (true) {
                    size_t i = next.fetch_add(1);
                    if (i >= tasks.size()) return;
                    try {
                        tasks[i]();
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (first_error) std::rethrow_exception(first_error);
    }

  private:
    int workers_;
};

struct RunOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::string> output_dir;  // overrides the config's output_dir
    std::optional<std::string> stop_after;
    bool resume = false;
    int workers = 1;
};

inline config::ExperimentConfig load_config(const RunOptions& options) {
    nlohmann::json doc = config::parse_config_document(read_file(options.config_path));
    for (const auto& setting : options.overrides) config::apply_override(doc, setting);
    if (options.output_dir) doc["output_dir"] = *options.output_dir;
    auto cfg = config::config_from_document(doc);
    config::validate(cfg);
    return cfg;
}

namespace detail {

inline std::vector<std::pair<size_t, size_t>> chunk_ranges(size_t n, size_t chunks) {
    size_t count = std::min(chunks, n);
    std::vector<std::pair<size_t, size_t>> ranges;
    size_t base = n / count, rem = n % count, start = 0;
    for (size_t i = 0; i < count; ++i) {
        size_t size = base + (i < rem ? 1 : 0);
        ranges.push_back({start, start + size});
        start += size;
    }
    return ranges;
}

inline std::filesystem::path final_run_path(const config::ExperimentConfig& cfg) {
    return std::filesystem::path(cfg.output_dir) /
           (cfg.rerank.enabled ? "rerank.run" : "retrieve.run");
}

inline void run_ingest(const config::ExperimentConfig& cfg) {
    corpus::JsonlDocumentReader reader(cfg.documents.input_path, cfg.documents.language);
    size_t count = 0;
    if (cfg.documents.store_raw) {
        corpus::DocStoreWriter writer(std::filesystem::path(cfg.output_dir) / "docstore",
                                      cfg.documents.language);
        while (auto doc = reader.next()) writer.append(*doc);
        writer.finalize();
        count = writer.count();
    } else {
        while (reader.next()) ++count;
    }
    log_info(concat("ingest: ", count, " documents from ", cfg.documents.input_path));
}

inline void run_index(const config::ExperimentConfig& cfg, const ThreadPoolScheduler& scheduler) {
    text::TextPipeline pipe(cfg.policy_for(cfg.documents.language));
    size_t chunk_count = static_cast<size_t>(cfg.index_chunks);
    std::vector<index::InvertedIndex> chunks;

    if (cfg.documents.store_raw) {
        corpus::DocStore store(std::filesystem::path(cfg.output_dir) / "docstore");
        if (store.count() == 0) fail("index: the ingested collection is empty");
        auto ranges = detail::chunk_ranges(store.count(), chunk_count);
        chunks.resize(ranges.size());
        std::vector<std::function<void()>> tasks;
        for (size_t i = 0; i < ranges.size(); ++i) {
            tasks.push_back([&, i]() {
                size_t pos = ranges[i].first;
                chunks[i] = index::InvertedIndex::build(
                    [&store, &ranges, i, pos]() mutable -> std::optional<corpus::Document> {
                        if (pos >= ranges[i].second) return std::nullopt;
                        return store.get_by_ordinal(pos++);
                    },
                    pipe);
            });
        }
        scheduler.run(tasks);
    } else {
        corpus::JsonlDocumentReader reader(cfg.documents.input_path, cfg.documents.language);
        std::vector<corpus::Document> docs;
        while (auto doc = reader.next()) docs.push_back(std::move(*doc));
        if (docs.empty()) fail("index: the ingested collection is empty");
        auto ranges = detail::chunk_ranges(docs.size(), chunk_count);
        chunks.resize(ranges.size());
        std::vector<std::function<void()>> tasks;
        for (size_t i = 0; i < ranges.size(); ++i) {
            tasks.push_back([&, i]() {
                std::vector<corpus::Document> slice(docs.begin() + static_cast<ptrdiff_t>(ranges[i].first),
                                                    docs.begin() + static_cast<ptrdiff_t>(ranges[i].second));
                chunks[i] = index::InvertedIndex::build(slice, pipe);
            });
        }
        scheduler.run(tasks);
    }

    auto merged = index::InvertedIndex::merge(chunks);
    merged.save(std::filesystem::path(cfg.output_dir) / "index");
    log_info(concat("index: ", merged.doc_count(), " documents, ",
                    merged.dictionary().size(), " terms, ", chunks.size(), " chunks"));
}

inline void run_retrieve(const config::ExperimentConfig& cfg,
                         const ThreadPoolScheduler& scheduler) {
    auto idx = index::InvertedIndex::load(std::filesystem::path(cfg.output_dir) / "index");
    auto topics = retrieval::load_topics(cfg.topics.input_path);
    text::TextPipeline query_pipe(cfg.policy_for(cfg.topics.query_language));
    retrieval::TranslationSelector selector{cfg.topics.query_language,
                                            cfg.topics.translation_source};

    std::optional<retrieval::TranslationTable> table;
    if (cfg.retrieve.model == config::RetrievalModel::psq)
        table = retrieval::load_translation_table(cfg.retrieve.psq.table_path);
    text::StopwordSet rm3_stopwords;
    if (cfg.retrieve.rm3.enabled)
        rm3_stopwords = text::resolve_stopwords(cfg.policy_for(cfg.documents.language));

    std::vector<retrieval::RankedList> lists(topics.size());
    std::vector<std::function<void()>> tasks;
    const size_t k = static_cast<size_t>(cfg.retrieve.k);
    for (size_t i = 0; i < topics.size(); ++i) {
        tasks.push_back([&, i]() {
            auto query = retrieval::make_query(topics[i], cfg.topics.fields, selector, query_pipe);
            switch (cfg.retrieve.model) {
                case config::RetrievalModel::bm25:
                    if (cfg.retrieve.rm3.enabled)
                        query = retrieval::rm3_expand(idx, query, cfg.retrieve.rm3.params,
                                                      cfg.retrieve.bm25, rm3_stopwords);
                    lists[i] = retrieval::score_bm25(idx, query, k, cfg.retrieve.bm25);
                    break;
                case config::RetrievalModel::qld:
                    if (cfg.retrieve.rm3.enabled)
                        query = retrieval::rm3_expand(idx, query, cfg.retrieve.rm3.params,
                                                      cfg.retrieve.bm25, rm3_stopwords);
                    lists[i] = retrieval::score_qld(idx, query, k, cfg.retrieve.qld);
                    break;
                case config::RetrievalModel::psq: {
                    auto structured =
                        retrieval::psq_project(query, *table, cfg.retrieve.psq.pruning);
                    lists[i] = retrieval::score_psq(idx, structured, k, cfg.retrieve.psq.scoring,
                                                    cfg.retrieve.bm25, cfg.retrieve.qld);
                    break;
                }
            }
        });
    }
    scheduler.run(tasks);
    retrieval::write_run(lists, std::filesystem::path(cfg.output_dir) / "retrieve.run",
                         cfg.run_name);
    log_info(concat("retrieve: ", topics.size(), " topics scored"));
}

inline void run_rerank(const config::ExperimentConfig& cfg) {
    auto run_path = std::filesystem::path(cfg.output_dir) / "retrieve.run";
    auto first_stage = retrieval::parse_run(run_path);
    auto topics = retrieval::load_topics(cfg.topics.input_path);
    retrieval::TranslationSelector selector{cfg.topics.query_language,
                                            cfg.topics.translation_source};

    std::map<std::string, const retrieval::Topic*> by_id;
    for (const auto& t : topics) by_id[t.id] = &t;

    std::vector<rerank::RerankRequest> requests;
    for (const auto& list : first_stage) {
        auto it = by_id.find(list.topic_id);
        if (it == by_id.end())
            fail("rerank: run topic '", list.topic_id, "' is not in the topic file");
        rerank::RerankRequest req;
        req.topic_id = list.topic_id;
        req.query = retrieval::query_text(*it->second, cfg.topics.fields, selector);
        for (const auto& e : list.entries) req.candidates.push_back(e.doc_id);
        requests.push_back(std::move(req));
    }

    auto docstore_path = std::filesystem::path(cfg.output_dir) / "docstore";
    std::vector<retrieval::RankedList> reranked;
    if (cfg.rerank.mode == config::RerankMode::inproc) {
        corpus::DocStore store(docstore_path);
        const auto& reranker = rerank::RerankerRegistry::global().get(cfg.rerank.name);
        reranked = rerank::rerank_inproc(reranker, requests, store);
    } else {
        reranked = rerank::rerank_external(cfg.rerank.command, requests, docstore_path,
                                           std::filesystem::path(cfg.output_dir) / "rerank_work");
    }
    retrieval::write_run(reranked, std::filesystem::path(cfg.output_dir) / "rerank.run",
                         cfg.run_name);
    log_info(concat("rerank: ", reranked.size(), " topics reranked"));
}

inline void run_score(const config::ExperimentConfig& cfg) {
    auto report = eval::evaluate(final_run_path(cfg), cfg.score.qrels_path, cfg.score.measures);
    std::string tsv = report.to_tsv();
    write_file(std::filesystem::path(cfg.output_dir) / "report.tsv", tsv);
    std::cout << tsv;
    log_info(concat("score: ", report.per_topic.size(), " topics evaluated"));
}

inline std::vector<std::string> stage_artifacts(const config::ExperimentConfig& cfg,
                                                config::Stage stage) {
    switch (stage) {
        case config::Stage::ingest:
            return cfg.documents.store_raw ? std::vector<std::string>{"docstore"}
                                           : std::vector<std::string>{};
        case config::Stage::index: return {"index"};
        case config::Stage::retrieve: return {"retrieve.run"};
        case config::Stage::rerank: return {"rerank.run"};
        case config::Stage::score: return {"report.tsv"};
    }
    return {};
}

}  // namespace detail

/// Execute the pipeline for a config file: plan, resume or start fresh,
/// run stages in order, write a manifest after each, stop early if asked.
inline void run_experiment(const RunOptions& options) {
    auto cfg = load_config(options);
    auto plan = config::plan(cfg);

    std::optional<size_t> stop_index;
    if (options.stop_after) {
        auto stage = config::stage_from_name(*options.stop_after);
        std::optional<size_t> pos = stage ? plan.position(*stage) : std::nullopt;
        if (!pos)
            throw ValidationError(concat("--stop-after stage '", *options.stop_after,
                                         "' is not part of this pipeline plan"));
        stop_index = pos;
    }

    std::filesystem::create_directories(cfg.output_dir);
    write_file(std::filesystem::path(cfg.output_dir) / "config_full.json",
               config::serialize(cfg));
    log_info(concat("run '", cfg.run_name, "': effective config written to ", cfg.output_dir,
                    "/config_full.json"));

    size_t start = options.resume ? config::find_resume_point(cfg.output_dir, plan) : 0;
    if (options.resume && start > 0)
        log_info(concat("resuming at stage ",
                        start < plan.stages.size()
                            ? config::stage_name(plan.stages[start])
                            : "(end)",
                        ": ", start, " stage(s) already complete"));
    if (start == plan.stages.size()) {
        log_info("pipeline already complete, nothing to do");
        return;
    }
    if (stop_index && *stop_index < start) {
        log_info("requested stop point is already complete, nothing to do");
        return;
    }

    ThreadPoolScheduler scheduler(options.workers);
    for (size_t i = start; i < plan.stages.size(); ++i) {
        auto stage = plan.stages[i];
        auto t0 = std::chrono::steady_clock::now();
        switch (stage) {
            case config::Stage::ingest: detail::run_ingest(cfg); break;
            case config::Stage::index: detail::run_index(cfg, scheduler); break;
            case config::Stage::retrieve: detail::run_retrieve(cfg, scheduler); break;
            case config::Stage::rerank: detail::run_rerank(cfg); break;
            case config::Stage::score: detail::run_score(cfg); break;
        }
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
        config::StageManifest manifest{plan.fingerprints[i], config::timestamp_utc_now(),
                                       detail::stage_artifacts(cfg, stage)};
        config::write_manifest(cfg.output_dir, stage, manifest);
        log_info(concat(config::stage_name(stage), ": done in ", ms, " ms"));
        if (stop_index && i == *stop_index) {
            log_info(concat("stopped after stage ", config::stage_name(stage)));
            break;
        }
    }
}

}  // namespace clirkit::pipeline
