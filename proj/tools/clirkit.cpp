// clirkit command line: run experiments from a config file (resumable,
// stoppable after any stage) and score run files against qrels.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or validation problem.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "clirkit/clirkit.hpp"

using namespace clirkit;

namespace {

int cmd_run(const pipeline::RunOptions& options) {
    try {
        pipeline::run_experiment(options);
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_eval(const std::string& run_path, const std::string& qrels_path,
             const std::vector<std::string>& measures) {
    try {
        if (!std::filesystem::exists(run_path))
            throw ValidationError(concat("run file not found: ", run_path));
        if (!std::filesystem::exists(qrels_path))
            throw ValidationError(concat("qrels file not found: ", qrels_path));
        auto report = eval::evaluate(run_path, qrels_path, measures);
        std::cout << report.to_tsv();
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clirkit: configuration-driven cross-language retrieval experiments"};
    app.require_subcommand(1);

    pipeline::RunOptions options;
    std::string output_dir;
    std::string stop_after;
    auto* run = app.add_subcommand("run", "run an experiment pipeline from a config file");
    run->add_option("-c,--config", options.config_path, "experiment config file")
        ->required();
    run->add_option("-o,--override", options.overrides,
                    "config override as dotted.path=value (repeatable)");
    auto* out_opt = run->add_option("--output-dir", output_dir, "override the output directory");
    auto* stop_opt = run->add_option("--stop-after", stop_after,
                                     "stop after this stage (ingest, index, retrieve, rerank, score)");
    run->add_flag("--resume", options.resume, "skip stages whose manifests match the plan");
    run->add_option("--workers", options.workers, "worker threads for chunked stages")
        ->check(CLI::PositiveNumber);

    std::string eval_run, eval_qrels;
    std::vector<std::string> eval_measures = {"map", "ndcg@1000", "recall@1000"};
    auto* ev = app.add_subcommand("eval", "score an existing run file against qrels");
    ev->add_option("run", eval_run, "run file in the 6-column format")->required();
    ev->add_option("qrels", eval_qrels, "4-column qrels file")->required();
    ev->add_option("-m,--measure", eval_measures,
                   "measures to report (map, ndcg, recall, optionally @depth)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (run->parsed()) {
        if (*out_opt) options.output_dir = output_dir;
        if (*stop_opt) options.stop_after = stop_after;
        return cmd_run(options);
    }
    return cmd_eval(eval_run, eval_qrels, eval_measures);
}
