// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fail.

#include "crabs/flow_graph.hpp"
#include "crabs/graph_io.hpp"
#include "crabs/metrics.hpp"
#include "crabs/pipeline.hpp"
#include "support/cells.hpp"
#include "support/random_notebook.hpp"
#include "support/run_cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace crabs;

namespace {

using Clock = std::chrono::steady_clock;

constexpr int kCorpusSize = 1000;

struct Outcome {
    bool pass = true;
    std::string detail;
    std::vector<std::string> failures;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (failures.size() < 5) {
                failures.push_back(what);
            }
        }
    }
};

int failed = 0;

void report(int number, const std::string& title, const std::function<Outcome()>& body, double limit_seconds = 0) {
    const auto start = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.failures.push_back(std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (limit_seconds > 0 && seconds >= limit_seconds) {
        o.pass = false;
        o.failures.push_back("took " + std::to_string(seconds) + " s, limit " + std::to_string(limit_seconds) + " s");
    }
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.3f s", seconds);
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << number << "] " << title << " (" << timing << ")";
    if (!o.detail.empty()) {
        std::cout << " - " << o.detail;
    }
    std::cout << '\n';
    for (const auto& f : o.failures) {
        std::cout << "       " << f << '\n';
    }
    std::cout.flush();
    failed += o.pass ? 0 : 1;
}

PipelineResult run(const CellSequence& cells, EstimateMode mode, resolve::ResolverKind kind,
                   const GroundTruth* truth = nullptr, resolve::Backend* backend = nullptr) {
    PipelineOptions o;
    o.mode = mode;
    o.resolver.resolver = kind;
    o.resolver.concurrency = 1;
    return run_pipeline(cells, o, truth, backend);
}

InformationFlow data(int s, int t, const std::string& n) { return {s, t, n, FlowKind::data}; }

template <class T>
bool subset(const std::set<T>& a, const std::set<T>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::set<std::string> keys(const std::map<std::string, bool>& m) {
    std::set<std::string> out;
    for (const auto& [k, v] : m) {
        out.insert(k);
    }
    return out;
}

// Ground truth for a generated notebook: the flows found under random verdicts.
GroundTruth random_truth(const CellSequence& cells, std::uint64_t seed) {
    testing::RandomBackend backend(seed);
    const auto r = run(cells, EstimateMode::resolved, resolve::ResolverKind::assume_no, nullptr, &backend);
    return GroundTruth{cells.notebook_id, cells.size(), r.flows.flows};
}

// -- 1 ----------------------------------------------------------------------

Outcome fixture_exact_match() {
    Outcome o;
    const std::vector<std::string> exact = {"dropna_truncate", "shared_reference", "conditional_flow",
                                            "conditional_in_loop", "survey"};
    std::map<std::string, PipelineResult> results;
    std::map<std::string, eval::NotebookScores> scores;
    for (const std::string id : {"dropna_truncate", "shared_reference", "conditional_flow", "name_reuse",
                                 "global_in_function", "cell_magic", "conditional_in_loop", "survey"}) {
        const auto truth = load_ground_truth(testing::fixture(id + ".truth.json"));
        auto r = run(load_notebook_file(testing::fixture(id + ".ipynb")), EstimateMode::resolved,
                     resolve::ResolverKind::truth_oracle, &truth);
        scores[id] = eval::score_notebook(r.flows, r.deps, r.records, truth);
        results.emplace(id, std::move(r));
    }
    for (const auto& id : exact) {
        o.require(scores[id].em_flow, id + ": flow graph is not an exact match");
        o.require(scores[id].em_dep, id + ": dependency graph is not an exact match");
    }
    const auto has = [&](const std::string& id, const InformationFlow& f) { return results.at(id).flows.flows.count(f) == 1; };
    const auto dep = [&](const std::string& id, int t, int s) { return results.at(id).deps.deps.count({t, s}) == 1; };

    o.require(has("name_reuse", {2, 3, "add_one", FlowKind::code}), "name_reuse: code flow (2, 3, add_one) missing");
    o.require(!has("name_reuse", data(1, 2, "add_one")), "name_reuse: data flow (1, 2, add_one) should be missed");
    o.require(dep("name_reuse", 3, 2), "name_reuse: dependency (3, 2) missing");
    o.require(!dep("name_reuse", 2, 1), "name_reuse: dependency (2, 1) should be missed");

    o.require(!has("global_in_function", data(1, 2, "data_file_path")),
              "global_in_function: flow (1, 2, data_file_path) should be missed");
    o.require(!dep("global_in_function", 2, 1), "global_in_function: dependency (2, 1) should be missed");
    o.require(has("global_in_function", data(2, 3, "data")), "global_in_function: flow (2, 3, data) missing");

    const auto& magic = results.at("cell_magic");
    o.require(magic.analysis.cells.cell(1).skipped && magic.analysis.cells.cell(1).skip_reason == SkipReason::cell_magic,
              "cell_magic: cell 1 is not skipped as a cell magic");
    o.require(!has("cell_magic", data(1, 2, "captured_stdout")), "cell_magic: flow (1, 2, captured_stdout) should be missed");
    o.require(!dep("cell_magic", 2, 1), "cell_magic: dependency (2, 1) should be missed");

    o.detail = std::to_string(exact.size()) + " exact-match fixtures, 3 limitation fixtures";
    return o;
}

// -- 2 and 3 ----------------------------------------------------------------

Outcome bound_properties() {
    Outcome o;
    std::size_t cells = 0;
    std::size_t ambiguities = 0;
    for (int i = 0; i < kCorpusSize; ++i) {
        const auto nb = testing::random_notebook(static_cast<std::uint64_t>(i));
        const auto lower = run(nb, EstimateMode::resolved, resolve::ResolverKind::assume_no);
        const auto upper = run(nb, EstimateMode::resolved, resolve::ResolverKind::assume_yes);
        const GroundTruth truth = random_truth(nb, static_cast<std::uint64_t>(i) * 7919 + 1);
        const auto oracle = run(nb, EstimateMode::resolved, resolve::ResolverKind::truth_oracle, &truth);
        const std::string where = nb.notebook_id;

        for (const auto& p : lower.analysis.pairs) {
            ++cells;
            o.require(subset(p.lower.inputs, p.upper.inputs), where + ": lower inputs not within upper, cell " +
                                                                  std::to_string(p.cell_index));
            o.require(subset(keys(p.lower.output_candidates), keys(p.upper.output_candidates)),
                      where + ": lower outputs not within upper, cell " + std::to_string(p.cell_index));
        }
        for (const auto& c : lower.analysis.cells.cells) {
            o.require(c.skip_reason != SkipReason::syntax_error, where + ": generated cell does not parse\n" +
                                                                     testing::describe(nb));
        }
        ambiguities += lower.analysis.ambiguities.size();
        o.require(oracle.flows.flows == truth.flows, where + ": oracle does not reproduce its annotation");
        o.require(subset(lower.flows.flows, oracle.flows.flows), where + ": lower flows not within oracle flows");
        o.require(subset(oracle.flows.flows, upper.flows.flows), where + ": oracle flows not within upper flows");
        o.require(subset(lower.deps.deps, oracle.deps.deps), where + ": deps(assume-no) not within deps(oracle)");
        o.require(subset(oracle.deps.deps, upper.deps.deps), where + ": deps(oracle) not within deps(assume-yes)");

        const GroundTruth t{nb.notebook_id, nb.size(), oracle.flows.flows};
        const auto lo = eval::score_notebook(lower.flows, lower.deps, {}, t);
        const auto up = eval::score_notebook(upper.flows, upper.deps, {}, t);
        // Subgraph and supergraph: no false positives below, no false negatives above.
        o.require(lo.flow.fp == 0 && lo.dep.fp == 0, where + ": lower bound has a false positive");
        o.require(up.flow.fn == 0 && up.dep.fn == 0, where + ": upper bound misses a true flow");
    }
    o.detail = std::to_string(kCorpusSize) + " notebooks, " + std::to_string(cells) + " cells, " +
               std::to_string(ambiguities) + " ambiguities";
    return o;
}

bool within_upper(const ResolvedIOSet& r, const analysis::EstimatePair& p) {
    if (!subset(r.inputs, p.upper.inputs) || !subset(keys(r.outputs), keys(p.upper.output_candidates))) {
        return false;
    }
    return r.code_declarations == p.upper.code_declarations && r.code_references == p.upper.code_references;
}

Outcome no_hallucination() {
    Outcome o;
    const auto cache = testing::fresh_dir("acceptance-replay") / "answers.jsonl";
    std::size_t checked = 0;
    for (int i = 0; i < kCorpusSize; ++i) {
        const auto nb = testing::random_notebook(static_cast<std::uint64_t>(i));
        const GroundTruth truth = random_truth(nb, static_cast<std::uint64_t>(i) + 17);
        std::vector<std::pair<std::string, PipelineResult>> runs;
        for (auto kind : {resolve::ResolverKind::assume_yes, resolve::ResolverKind::assume_no,
                          resolve::ResolverKind::heuristic, resolve::ResolverKind::truth_oracle}) {
            runs.emplace_back(std::string(to_string(kind)), run(nb, EstimateMode::resolved, kind, &truth));
        }
        for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
            testing::RandomBackend random(seed * 1000003 + static_cast<std::uint64_t>(i));
            runs.emplace_back("random", run(nb, EstimateMode::resolved, resolve::ResolverKind::assume_no, nullptr, &random));
        }
        if (i < 100) {
            PipelineOptions rec;
            rec.resolver.resolver = resolve::ResolverKind::heuristic;
            rec.resolver.cache_path = cache;
            (void)run_pipeline(nb, rec);
            PipelineOptions replay;
            replay.resolver.resolver = resolve::ResolverKind::replay;
            replay.resolver.cache_path = cache;
            runs.emplace_back("replay", run_pipeline(nb, replay));
        }
        for (const auto& [name, r] : runs) {
            for (const auto& set : r.resolved) {
                ++checked;
                o.require(within_upper(set, r.analysis.pair(set.cell_index)),
                          nb.notebook_id + ": resolver " + name + " leaves the upper estimate in cell " +
                              std::to_string(set.cell_index));
            }
        }
    }
    o.detail = std::to_string(checked) + " resolved cell sets checked, 7 resolvers";
    return o;
}

// -- 4 ----------------------------------------------------------------------

Outcome metric_identities() {
    Outcome o;
    std::mt19937_64 rng(2024);
    double worst = 0;
    for (int i = 0; i < kCorpusSize; ++i) {
        const auto nb = testing::random_notebook(static_cast<std::uint64_t>(i));
        const GroundTruth truth = random_truth(nb, static_cast<std::uint64_t>(i) + 99);
        testing::RandomBackend guess(static_cast<std::uint64_t>(i) + 5);
        const auto r = run(nb, EstimateMode::resolved, resolve::ResolverKind::assume_no, nullptr, &guess);
        const auto s = eval::score_notebook(r.flows, r.deps, {}, truth);
        for (const auto* x : {&s.flow, &s.dep}) {
            const double gap = std::abs(x->accuracy - x->f1 / (2 - x->f1));
            worst = std::max(worst, gap);
            o.require(gap <= 1e-12, nb.notebook_id + ": accuracy differs from f1/(2-f1)");
        }
    }

    for (int trial = 0; trial < 1000; ++trial) {
        std::set<int> p;
        std::set<int> t;
        const int universe = 1 + static_cast<int>(rng() % 30);
        for (int v = 0; v < universe; ++v) {
            if (rng() % 3 == 0) {
                p.insert(v);
            }
            if (rng() % 3 == 0) {
                t.insert(v);
            }
        }
        std::size_t tp = 0, fp = 0, fn = 0;
        for (int v = 0; v < universe; ++v) {
            const bool inp = p.count(v) != 0;
            const bool int_ = t.count(v) != 0;
            tp += inp && int_;
            fp += inp && !int_;
            fn += !inp && int_;
        }
        const auto s = eval::score_sets(p, t);
        o.require(s.tp == tp && s.fp == fp && s.fn == fn, "confusion counts differ in trial " + std::to_string(trial));
        if (tp + fp + fn > 0) {
            o.require(std::abs(s.accuracy - static_cast<double>(tp) / static_cast<double>(tp + fp + fn)) < 1e-12,
                      "accuracy differs in trial " + std::to_string(trial));
        }
    }

    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 10);
        FlowGraph g{"dag", n, {}};
        std::vector<std::vector<int>> earlier(static_cast<std::size_t>(n + 1));
        for (int t = 2; t <= n; ++t) {
            for (int s = 1; s < t; ++s) {
                if (rng() % 3 == 0) {
                    g.flows.insert(data(s, t, "v" + std::to_string(rng() % 3)));
                    earlier[static_cast<std::size_t>(t)].push_back(s);
                }
            }
        }
        std::set<CellPair> reach;
        for (int start = 1; start <= n; ++start) {
            std::vector<int> stack(earlier[static_cast<std::size_t>(start)]);
            std::set<int> seen;
            while (!stack.empty()) {
                const int v = stack.back();
                stack.pop_back();
                if (seen.insert(v).second) {
                    reach.insert({start, v});
                    for (int w : earlier[static_cast<std::size_t>(v)]) {
                        stack.push_back(w);
                    }
                }
            }
        }
        o.require(derive_dependency_graph(g).deps == reach, "closure differs on DAG trial " + std::to_string(trial));
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "max |acc - f1/(2-f1)| = %.1e", worst);
    o.detail = std::string(buf) + "; 1000 set pairs; 1000 DAGs";
    return o;
}

// -- 5 ----------------------------------------------------------------------

Outcome loop_discrimination() {
    Outcome o;
    const auto nb = load_notebook_file(testing::fixture("conditional_in_loop.ipynb"));
    const auto lower = run(nb, EstimateMode::lower, resolve::ResolverKind::assume_no);
    const auto upper = run(nb, EstimateMode::upper, resolve::ResolverKind::assume_no);
    o.require(!lower.flows.flows.count(data(1, 2, "count")), "lower graph has flow (1, 2, count)");
    o.require(!lower.deps.deps.count({2, 1}), "lower graph has dependency (2, 1)");
    o.require(upper.flows.flows.count(data(1, 2, "count")) == 1, "upper graph lacks flow (1, 2, count)");
    o.require(upper.deps.deps.count({2, 1}) == 1, "upper graph lacks dependency (2, 1)");
    return o;
}

// -- 6 ----------------------------------------------------------------------

Outcome replay_determinism() {
    Outcome o;
    const auto root = testing::fresh_dir("acceptance-determinism");
    std::vector<std::string> notebooks;
    for (const auto& entry : std::filesystem::directory_iterator(CRABS_FIXTURE_DIR)) {
        if (entry.path().extension() == ".ipynb") {
            notebooks.push_back(entry.path().string());
        }
    }
    std::sort(notebooks.begin(), notebooks.end());
    const auto cache = (root / "answers.jsonl").string();

    auto analyze = [&](const std::vector<std::string>& extra, const std::filesystem::path& out) {
        std::vector<std::string> args = {"analyze", "--out", out.string(), "--cache", cache};
        args.insert(args.end(), extra.begin(), extra.end());
        args.insert(args.end(), notebooks.begin(), notebooks.end());
        return testing::run_cli(args);
    };
    const auto seed = analyze({"--resolver", "heuristic"}, root / "seed");
    o.require(seed.code == 0, "recording run failed: " + seed.err);

    std::vector<std::map<std::string, std::string>> graphs;
    std::vector<std::string> metrics;
    for (const std::string run : {"a", "b"}) {
        const auto out = root / run;
        const auto r = analyze({"--resolver", "replay", "--concurrency", "3", "--jobs", "2"}, out);
        o.require(r.code == 0, "replay run " + run + " failed: " + r.err);
        const auto m = root / ("metrics-" + run + ".json");
        const auto e = testing::run_cli({"eval", "--pred", out.string(), "--truth", CRABS_FIXTURE_DIR, "--out", m.string()});
        o.require(e.code == 0, "eval of run " + run + " failed: " + e.err);
        std::map<std::string, std::string> files;
        for (const auto& entry : std::filesystem::directory_iterator(out)) {
            files[entry.path().filename().string()] = read_file(entry.path());
        }
        graphs.push_back(std::move(files));
        metrics.push_back(read_file(m));
    }
    o.require(graphs[0].size() == notebooks.size(), "expected one graph per fixture");
    o.require(graphs[0] == graphs[1], "graph JSON differs between replay runs");
    o.require(metrics[0] == metrics[1], "metrics JSON differs between replay runs");
    o.detail = std::to_string(graphs[0].size()) + " graph files and metrics byte-identical";
    return o;
}

// -- 7 ----------------------------------------------------------------------

Outcome degenerate_scoring() {
    Outcome o;
    const auto truth = load_ground_truth(testing::fixture("survey.truth.json"));
    for (int n : {truth.n_cells - 1, truth.n_cells + 1}) {
        FlowGraph g{truth.notebook_id, n, truth.flows};
        const auto s = eval::score_notebook(g, derive_dependency_graph(g), {}, truth);
        for (const auto* x : {&s.flow, &s.dep}) {
            o.require(x->precision == 0 && x->recall == 0 && x->f1 == 0 && x->accuracy == 0,
                      "nonzero metric with n_cells " + std::to_string(n));
        }
        o.require(!s.em_flow && !s.em_dep, "EM true with n_cells " + std::to_string(n));
    }
    return o;
}

// -- 8 ----------------------------------------------------------------------

CellSequence large_notebook(int& lines) {
    CellSequence big = testing::random_notebook(4242, 76, 76);
    big.notebook_id = "large";
    lines = 0;
    int k = 0;
    for (auto& c : big.cells) {
        c.source.push_back("stats_" + std::to_string(k) + " = df.groupby('label')['value'].agg(['mean', 'std'])");
        while (c.source.size() < static_cast<std::size_t>(13 + c.index % 2)) {
            const std::string v = "feature_" + std::to_string(k++);
            c.source.push_back(v + " = (df['a'] * " + std::to_string(k) + " + df['b']).clip(0, 1)  # derived");
        }
        c.source.push_back("model.fit(X, y)");
        lines += static_cast<int>(c.source.size());
    }
    return big;
}

Outcome syntactic_performance() {
    Outcome o;
    int lines = 0;
    const CellSequence big = large_notebook(lines);
    const auto start = Clock::now();
    const auto a = analyze_notebook(big);
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    o.require(a.n_cells() == 76, "expected 76 cells");
    o.require(lines >= 1050 && lines <= 1200, "expected about 1100 lines, got " + std::to_string(lines));
    o.require(seconds < 1.0, "syntactic phase took " + std::to_string(seconds) + " s");
    char buf[96];
    std::snprintf(buf, sizeof buf, "76 cells, %d lines, %zu ambiguities, analyzed in %.3f s", lines,
                  a.ambiguities.size(), seconds);
    o.detail = buf;
    return o;
}

} // namespace

int main() {
    report(1, "fixture exact match with the truth oracle", fixture_exact_match, 5.0);
    report(2, "lower/upper bound properties on generated notebooks", bound_properties, 60.0);
    report(3, "resolved sets stay within the upper estimate", no_hallucination);
    report(4, "metric identities", metric_identities);
    report(5, "conditional-in-loop lower/upper discrimination", loop_discrimination);
    report(6, "replay determinism", replay_determinism);
    report(7, "wrong cell count scores zero", degenerate_scoring);
    report(8, "syntactic phase on a 76-cell notebook", syntactic_performance, 1.0);
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
    return failed == 0 ? 0 : 1;
}
