#include "crabs/cli.hpp"

#include "crabs/metrics.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <atomic>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace crabs::cli {

namespace fs = std::filesystem;

std::map<std::string, GroundTruth> load_annotations(const fs::path& where, std::vector<std::string>* problems) {
    std::map<std::string, GroundTruth> out;
    std::vector<fs::path> files;
    if (fs::is_directory(where)) {
        for (const auto& entry : fs::directory_iterator(where)) {
            const std::string name = entry.path().filename().string();
            if (entry.is_regular_file() && name.ends_with(".json") && !name.ends_with(".graph.json")) {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(where);
    }
    for (const auto& f : files) {
        try {
            GroundTruth t = load_ground_truth(f);
            out[t.notebook_id] = std::move(t);
        } catch (const std::exception& e) {
            if (problems == nullptr) {
                throw;
            }
            problems->push_back(f.string() + ": " + e.what());
        }
    }
    return out;
}

namespace {

struct NotebookOutcome {
    int code = exit_code::ok;
    std::string log;
    std::string errors;
};

NotebookOutcome analyze_one(const fs::path& path, const AnalyzeArgs& args,
                            const std::map<std::string, GroundTruth>& truths) {
    NotebookOutcome r;
    std::ostringstream log;
    std::ostringstream err;
    try {
        CellSequence cells = load_notebook_file(path);
        const std::string id = cells.notebook_id;
        const GroundTruth* truth = nullptr;
        if (auto it = truths.find(id); it != truths.end()) {
            truth = &it->second;
        }
        PipelineResult result = run_pipeline(std::move(cells), args.options, truth);
        const fs::path target = args.out_dir / (id + ".graph.json");
        write_file(target, graph_json(make_document(result)));
        log << id << ": " << result.analysis.n_cells() << " cells, " << result.analysis.ambiguities.size()
            << " ambiguities, " << result.flows.flows.size() << " flows, " << result.deps.deps.size()
            << " dependencies -> " << target.string() << '\n';
    } catch (const resolve::ResolverError& e) {
        r.code = exit_code::resolver_failure;
        err << path.string() << ": resolver failure: " << e.what() << '\n';
    } catch (const NotebookError& e) {
        r.code = exit_code::analysis_failure;
        err << path.string() << ": " << e.what() << '\n';
    } catch (const std::exception& e) {
        r.code = exit_code::analysis_failure;
        err << path.string() << ": " << e.what() << '\n';
    }
    r.log = log.str();
    r.errors = err.str();
    return r;
}

} // namespace

int run_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err) {
    if (args.notebooks.empty()) {
        err << "analyze: no notebooks given\n";
        return exit_code::usage;
    }
    const bool oracle = args.options.mode == EstimateMode::resolved &&
                        args.options.resolver.resolver == resolve::ResolverKind::truth_oracle;
    std::map<std::string, GroundTruth> truths;
    if (oracle) {
        if (!args.truth) {
            err << "analyze: the truth-oracle resolver needs --truth\n";
            return exit_code::usage;
        }
        try {
            truths = load_annotations(*args.truth);
        } catch (const std::exception& e) {
            err << "analyze: " << e.what() << '\n';
            return exit_code::usage;
        }
    }

    std::vector<NotebookOutcome> outcomes(args.notebooks.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < outcomes.size(); i = next++) {
            outcomes[i] = analyze_one(args.notebooks[i], args, truths);
        }
    };
    const auto workers = std::min<std::size_t>(outcomes.size(), static_cast<std::size_t>(std::max(1, args.jobs)));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
    }

    int code = exit_code::ok;
    for (const auto& o : outcomes) {
        out << o.log;
        err << o.errors;
        code = std::max(code, o.code);
    }
    return code;
}

int run_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
    if (!fs::is_directory(args.pred_dir) || !fs::exists(args.truth_dir)) {
        err << "eval: --pred must be a directory and --truth must exist\n";
        return exit_code::usage;
    }
    std::vector<std::string> problems;
    const auto truths = load_annotations(args.truth_dir, &problems);

    std::vector<fs::path> predictions;
    for (const auto& entry : fs::directory_iterator(args.pred_dir)) {
        if (entry.is_regular_file() && entry.path().filename().string().ends_with(".graph.json")) {
            predictions.push_back(entry.path());
        }
    }
    std::sort(predictions.begin(), predictions.end());

    std::vector<eval::NotebookScores> scored;
    for (const auto& p : predictions) {
        try {
            const GraphDocument doc = parse_graph_json(read_file(p));
            auto it = truths.find(doc.notebook_id);
            if (it == truths.end()) {
                problems.push_back("no annotation for notebook '" + doc.notebook_id + "'");
                continue;
            }
            scored.push_back(eval::score_notebook(doc.flows, doc.deps, doc.resolutions, it->second));
        } catch (const std::exception& e) {
            problems.push_back(p.string() + ": " + e.what());
        }
    }
    for (const auto& pr : problems) {
        err << "eval: " << pr << '\n';
    }
    if (scored.empty()) {
        err << "eval: nothing to score\n";
        return exit_code::analysis_failure;
    }
    eval::MetricsReport report = eval::aggregate(std::move(scored));
    report.problems = problems;
    report.incomplete = !problems.empty();
    try {
        write_file(args.out_file, eval::report_json(report));
    } catch (const std::exception& e) {
        err << "eval: " << e.what() << '\n';
        return exit_code::analysis_failure;
    }
    out << eval::report_table(report);
    return report.incomplete ? exit_code::analysis_failure : exit_code::ok;
}

int run_export(const ExportArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const GraphDocument doc = parse_graph_json(read_file(args.graph));
        out << (args.format == ExportFormat::dot ? export_dot(doc, args.view) : export_json(doc, args.view));
        return exit_code::ok;
    } catch (const std::exception& e) {
        err << "export: " << e.what() << '\n';
        return exit_code::analysis_failure;
    }
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Information flow and cell dependency analysis for Python notebooks"};
    app.require_subcommand(1);

    AnalyzeArgs analyze;
    std::vector<std::string> notebooks;
    std::string mode = "resolved";
    std::string resolver = "heuristic";
    std::string on_unparseable = "fail";
    std::string endpoint;
    std::string model;
    std::string cache;
    std::string truth;
    std::string out_dir = ".";
    auto* a = app.add_subcommand("analyze", "Analyze notebooks and write <id>.graph.json files");
    a->add_option("notebooks", notebooks, "Notebook files")->required(false);
    a->add_option("--mode", mode, "lower | upper | resolved")->check(CLI::IsMember({"lower", "upper", "resolved"}));
    a->add_option("--resolver", resolver, "llm-http | heuristic | replay | truth-oracle | assume-yes | assume-no")
        ->check(CLI::IsMember({"llm-http", "heuristic", "replay", "truth-oracle", "assume-yes", "assume-no"}));
    a->add_option("--endpoint", endpoint, "Chat-completion endpoint URL");
    a->add_option("--model", model, "Model name sent to the endpoint");
    a->add_option("--temperature", analyze.options.resolver.temperature, "Sampling temperature")->check(CLI::NonNegativeNumber);
    a->add_option("--cache", cache, "JSON-lines answer cache");
    a->add_option("--on-unparseable", on_unparseable, "fail | assume-yes | assume-no")
        ->check(CLI::IsMember({"fail", "assume-yes", "assume-no"}));
    a->add_option("--concurrency", analyze.options.resolver.concurrency, "Concurrent resolver queries")
        ->check(CLI::PositiveNumber);
    a->add_flag("--track-imports", analyze.options.analysis.track_imports, "Treat imported names as data");
    a->add_option("--truth", truth, "Annotation file or directory (truth-oracle resolver)");
    a->add_option("--out", out_dir, "Output directory");
    a->add_option("--jobs", analyze.jobs, "Notebooks analyzed in parallel")->check(CLI::PositiveNumber);

    EvalArgs evaluate;
    auto* e = app.add_subcommand("eval", "Score predicted graphs against annotations");
    e->add_option("--pred", evaluate.pred_dir, "Directory of *.graph.json files")->required();
    e->add_option("--truth", evaluate.truth_dir, "Directory (or file) of annotations")->required();
    e->add_option("--out", evaluate.out_file, "Metrics JSON file")->required();

    ExportArgs exporting;
    std::string format = "dot";
    std::string view = "flows";
    auto* x = app.add_subcommand("export", "Render a graph JSON file");
    x->add_option("--graph", exporting.graph, "A *.graph.json file")->required();
    x->add_option("--format", format, "dot | json")->check(CLI::IsMember({"dot", "json"}));
    x->add_option("--view", view, "flows | deps")->check(CLI::IsMember({"flows", "deps"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex, out, err);
        return code == 0 ? exit_code::ok : exit_code::usage;
    }

    if (a->parsed()) {
        for (const auto& n : notebooks) {
            analyze.notebooks.emplace_back(n);
        }
        analyze.options.mode = *parse_estimate_mode(mode);
        analyze.options.resolver.resolver = *resolve::parse_resolver_kind(resolver);
        analyze.options.resolver.on_unparseable = *resolve::parse_on_unparseable(on_unparseable);
        if (!endpoint.empty()) {
            analyze.options.resolver.endpoint_url = endpoint;
        }
        if (!model.empty()) {
            analyze.options.resolver.model_name = model;
        }
        if (!cache.empty()) {
            analyze.options.resolver.cache_path = cache;
        }
        if (!truth.empty()) {
            analyze.truth = truth;
        }
        analyze.out_dir = out_dir;
        const auto kind = analyze.options.resolver.resolver;
        if (analyze.options.mode == EstimateMode::resolved) {
            if (kind == resolve::ResolverKind::llm_http && endpoint.empty()) {
                err << "analyze: --resolver llm-http needs --endpoint\n";
                return exit_code::usage;
            }
            if (kind == resolve::ResolverKind::replay && cache.empty()) {
                err << "analyze: --resolver replay needs --cache\n";
                return exit_code::usage;
            }
        }
        return run_analyze(analyze, out, err);
    }
    if (e->parsed()) {
        return run_eval(evaluate, out, err);
    }
    exporting.format = format == "json" ? ExportFormat::json : ExportFormat::dot;
    exporting.view = view == "deps" ? GraphView::deps : GraphView::flows;
    return run_export(exporting, out, err);
}

} // namespace crabs::cli
