#pragma once

// Second-stage reranking. Rerankers either run in process (registered under
// a name) or as an external command with this protocol:
//
//   command <requests.jsonl> <docstore_path> <output.run>
//
// requests.jsonl has one line per topic: {"doc_ids": [...], "query": "...",
// "topic_id": "..."}, candidates in first-stage order, query text raw and
// untokenized. The command reads whatever documents it needs from the doc
// store (format documented in corpus.hpp), writes a standard run file to
// <output.run> and exits 0. Nonzero exit, missing topics or doc ids outside
// the candidate set fail the stage; stderr is captured and reported.

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "corpus.hpp"
#include "retrieval.hpp"
#include "util.hpp"

namespace clirkit::rerank {

struct RerankRequest {
    std::string topic_id;
    std::string query;                    // raw query text, untokenized
    std::vector<std::string> candidates;  // first-stage order
};

using InprocReranker = std::function<std::vector<retrieval::ScoredDoc>(
    const RerankRequest&, const corpus::DocStore&)>;

class RerankerRegistry {
  public:
    static RerankerRegistry& global() {
        static RerankerRegistry registry = make_default();
        return registry;
    }

    void add(const std::string& name, InprocReranker fn) {
        if (rerankers_.count(name)) fail("reranker '", name, "' is already registered");
        rerankers_.emplace(name, std::move(fn));
    }

    bool contains(const std::string& name) const { return rerankers_.count(name) > 0; }

    const InprocReranker& get(const std::string& name) const {
        auto it = rerankers_.find(name);
        if (it == rerankers_.end()) fail("unknown reranker '", name, "'");
        return it->second;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& [name, fn] : rerankers_) out.push_back(name);
        return out;
    }

  private:
    static RerankerRegistry make_default() {
        RerankerRegistry r;
        // identity: keeps first-stage order, scores n..1
        r.add("identity", [](const RerankRequest& req, const corpus::DocStore&) {
            std::vector<retrieval::ScoredDoc> out;
            double n = static_cast<double>(req.candidates.size());
            for (size_t i = 0; i < req.candidates.size(); ++i)
                out.push_back({req.candidates[i], n - static_cast<double>(i)});
            return out;
        });
        // doclen: toy reranker, shortest document first
        r.add("doclen", [](const RerankRequest& req, const corpus::DocStore& store) {
            std::vector<retrieval::ScoredDoc> out;
            for (const auto& id : req.candidates)
                out.push_back({id, -static_cast<double>(store.get(id).text.size())});
            return out;
        });
        return r;
    }

    std::map<std::string, InprocReranker> rerankers_;
};

inline void register_reranker(const std::string& name, InprocReranker fn) {
    RerankerRegistry::global().add(name, std::move(fn));
}

namespace detail {

inline retrieval::RankedList validate_and_sort(const RerankRequest& req,
                                               std::vector<retrieval::ScoredDoc> scored) {
    std::set<std::string> allowed(req.candidates.begin(), req.candidates.end());
    std::set<std::string> seen;
    for (const auto& e : scored) {
        if (!allowed.count(e.doc_id))
            fail("reranker returned doc id '", e.doc_id, "' outside the candidate set for topic '",
                 req.topic_id, "'");
        if (!seen.insert(e.doc_id).second)
            fail("reranker returned doc id '", e.doc_id, "' twice for topic '", req.topic_id, "'");
    }
    retrieval::RankedList list;
    list.topic_id = req.topic_id;
    list.entries = std::move(scored);
    std::sort(list.entries.begin(), list.entries.end(), retrieval::ranked_before);
    return list;
}

}  // namespace detail

inline std::vector<retrieval::RankedList> rerank_inproc(
    const InprocReranker& reranker, const std::vector<RerankRequest>& requests,
    const corpus::DocStore& store) {
    std::vector<retrieval::RankedList> out;
    for (const auto& req : requests)
        out.push_back(detail::validate_and_sort(req, reranker(req, store)));
    return out;
}

namespace detail {

struct ProcessResult {
    int exit_code = -1;
    std::string stderr_text;
};

/// Run argv (no shell), capturing stderr.
inline ProcessResult run_process(const std::vector<std::string>& argv) {
    int err_pipe[2];
    if (pipe(err_pipe) != 0) fail("pipe() failed");
    pid_t pid = fork();
    if (pid < 0) fail("fork() failed");
    if (pid == 0) {
        close(err_pipe[0]);
        dup2(err_pipe[1], 2);
        close(err_pipe[1]);
        std::vector<char*> cargv;
        for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
        cargv.push_back(nullptr);
        execvp(cargv[0], cargv.data());
        fprintf(stderr, "cannot execute '%s'\n", cargv[0]);
        _exit(127);
    }
    close(err_pipe[1]);
    std::string stderr_text;
    char buf[4096];
    ssize_t n;
    while ((n = read(err_pipe[0], buf, sizeof(buf))) > 0) stderr_text.append(buf, static_cast<size_t>(n));
    close(err_pipe[0]);
    int status = 0;
    waitpid(pid, &status, 0);
    ProcessResult result;
    result.stderr_text = std::move(stderr_text);
    if (WIFEXITED(status))
        result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        result.exit_code = 128 + WTERMSIG(status);
    return result;
}

}  // namespace detail

inline std::vector<retrieval::RankedList> rerank_external(
    const std::vector<std::string>& command, const std::vector<RerankRequest>& requests,
    const std::filesystem::path& docstore_path, const std::filesystem::path& workdir) {
    if (command.empty()) fail("external reranker command is empty");
    std::filesystem::create_directories(workdir);

    auto requests_path = workdir / "requests.jsonl";
    auto output_path = workdir / "output.run";
    std::error_code ec;
    std::filesystem::remove(output_path, ec);
    {
        std::string lines;
        for (const auto& req : requests) {
            nlohmann::json j{{"topic_id", req.topic_id},
                             {"query", req.query},
                             {"doc_ids", req.candidates}};
            lines += j.dump() + "\n";
        }
        write_file(requests_path, lines);
    }

    std::vector<std::string> argv = command;
    argv.push_back(requests_path.string());
    argv.push_back(docstore_path.string());
    argv.push_back(output_path.string());
    auto result = detail::run_process(argv);
    if (result.exit_code != 0)
        fail("external reranker exited with status ", result.exit_code, ": ",
             result.stderr_text.empty() ? "(no stderr output)" : result.stderr_text);
    if (!std::filesystem::exists(output_path))
        fail("external reranker did not write its output run file: ", output_path.string());

    auto lists = retrieval::parse_run(output_path);
    std::map<std::string, std::vector<retrieval::ScoredDoc>> by_topic;
    for (auto& list : lists) by_topic[list.topic_id] = std::move(list.entries);

    std::vector<std::string> missing;
    std::set<std::string> known_topics;
    for (const auto& req : requests) known_topics.insert(req.topic_id);
    for (const auto& [topic, entries] : by_topic)
        if (!known_topics.count(topic))
            fail("external reranker output contains unknown topic '", topic, "'");
    std::vector<retrieval::RankedList> out;
    for (const auto& req : requests) {
        auto it = by_topic.find(req.topic_id);
        if (it == by_topic.end()) {
            missing.push_back(req.topic_id);
            continue;
        }
        out.push_back(detail::validate_and_sort(req, std::move(it->second)));
    }
    if (!missing.empty()) {
        std::string joined;
        for (const auto& t : missing) joined += (joined.empty() ? "" : ", ") + t;
        fail("external reranker output missing topics: ", joined);
    }
    return out;
}

}  // namespace clirkit::rerank
