#include "crabs/metrics.hpp"

#include "crabs/flow_graph.hpp"

#include "json.hpp"

#include <cstdio>
#include <sstream>

namespace crabs::eval {

using json = nlohmann::ordered_json;

SetScores scores_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
    SetScores s;
    s.tp = tp;
    s.fp = fp;
    s.fn = fn;
    if (tp + fp + fn == 0) {
        s.precision = s.recall = s.f1 = s.accuracy = 1.0;
        return s;
    }
    const auto d = [](std::size_t x) { return static_cast<double>(x); };
    s.precision = tp + fp == 0 ? 0.0 : d(tp) / d(tp + fp);
    s.recall = tp + fn == 0 ? 0.0 : d(tp) / d(tp + fn);
    s.f1 = tp == 0 ? 0.0 : 2.0 * d(tp) / d(2 * tp + fp + fn);
    s.accuracy = d(tp) / d(tp + fp + fn);
    return s;
}

SetScores zero_scores(std::size_t tp, std::size_t fp, std::size_t fn) {
    SetScores s;
    s.tp = tp;
    s.fp = fp;
    s.fn = fn;
    return s;
}

bool exact_match(const FlowGraph& predicted, const FlowGraph& truth) {
    return predicted.n_cells == truth.n_cells && predicted.flows == truth.flows;
}

bool exact_match(const DependencyGraph& predicted, const DependencyGraph& truth) {
    return predicted.n_cells == truth.n_cells && predicted.deps == truth.deps;
}

DependencyGraph truth_dependencies(const GroundTruth& truth) {
    FlowGraph g;
    g.notebook_id = truth.notebook_id;
    g.n_cells = truth.n_cells;
    g.flows = truth.flows;
    return derive_dependency_graph(g);
}

Fraction resolution_accuracy(const std::vector<resolve::ResolutionRecord>& records, const GroundTruth& truth) {
    Fraction f;
    for (const auto& r : records) {
        if (r.ambiguity.cell_index < 1 || r.ambiguity.cell_index > truth.n_cells) {
            throw AnnotationMismatch("resolution for cell " + std::to_string(r.ambiguity.cell_index) +
                                     " but the annotation of " + truth.notebook_id + " has " +
                                     std::to_string(truth.n_cells) + " cells");
        }
        ++f.total;
        if (r.verdict == resolve::truth_verdict(truth, r.ambiguity)) {
            ++f.correct;
        }
    }
    return f;
}

NotebookScores score_notebook(const FlowGraph& predicted_flows, const DependencyGraph& predicted_deps,
                              const std::vector<resolve::ResolutionRecord>& records, const GroundTruth& truth) {
    NotebookScores s;
    s.notebook_id = truth.notebook_id;
    const DependencyGraph truth_deps = truth_dependencies(truth);
    if (predicted_flows.n_cells != truth.n_cells) {
        s.structural_mismatch = true;
        const SetScores f = score_sets(predicted_flows.flows, truth.flows);
        const SetScores d = score_sets(predicted_deps.deps, truth_deps.deps);
        s.flow = zero_scores(f.tp, f.fp, f.fn);
        s.dep = zero_scores(d.tp, d.fp, d.fn);
        return s;
    }
    s.flow = score_sets(predicted_flows.flows, truth.flows);
    s.dep = score_sets(predicted_deps.deps, truth_deps.deps);
    s.em_flow = exact_match(predicted_flows, FlowGraph{truth.notebook_id, truth.n_cells, truth.flows});
    s.em_dep = exact_match(predicted_deps, truth_deps);
    s.resolution = resolution_accuracy(records, truth);
    return s;
}

MetricsReport aggregate(std::vector<NotebookScores> per_notebook) {
    if (per_notebook.empty()) {
        throw EmptyReport("no notebooks were scored");
    }
    MetricsReport r;
    const double n = static_cast<double>(per_notebook.size());
    auto add = [&](Averages& a, const SetScores& s) {
        a.precision += s.precision / n;
        a.recall += s.recall / n;
        a.f1 += s.f1 / n;
        a.accuracy += s.accuracy / n;
    };
    for (const auto& nb : per_notebook) {
        add(r.flow, nb.flow);
        add(r.dep, nb.dep);
        r.em_rate_flow += nb.em_flow ? 1.0 / n : 0.0;
        r.em_rate_dep += nb.em_dep ? 1.0 / n : 0.0;
        r.resolution.correct += nb.resolution.correct;
        r.resolution.total += nb.resolution.total;
    }
    r.per_notebook = std::move(per_notebook);
    return r;
}

namespace {

json scores_json(const SetScores& s) {
    return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"accuracy", s.accuracy},
            {"tp", s.tp},               {"fp", s.fp},         {"fn", s.fn}};
}

json averages_json(const Averages& a) {
    return {{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}, {"accuracy", a.accuracy}};
}

json fraction_json(const Fraction& f) {
    json j{{"correct", f.correct}, {"total", f.total}};
    j["value"] = f.value() ? json(*f.value()) : json("n/a");
    return j;
}

} // namespace

std::string report_json(const MetricsReport& report) {
    json root;
    root["per_notebook"] = json::object();
    for (const auto& nb : report.per_notebook) {
        root["per_notebook"][nb.notebook_id] = {{"flow", scores_json(nb.flow)},
                                                {"dep", scores_json(nb.dep)},
                                                {"em_flow", nb.em_flow},
                                                {"em_dep", nb.em_dep},
                                                {"structural_mismatch", nb.structural_mismatch},
                                                {"resolution_accuracy", fraction_json(nb.resolution)}};
    }
    root["aggregate"] = {{"flow", averages_json(report.flow)}, {"dep", averages_json(report.dep)}};
    root["em_rate_flow"] = report.em_rate_flow;
    root["em_rate_dep"] = report.em_rate_dep;
    root["resolution_accuracy"] = fraction_json(report.resolution);
    root["incomplete"] = report.incomplete;
    root["problems"] = report.problems;
    return root.dump(2) + "\n";
}

std::string report_table(const MetricsReport& report) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-32s %8s %8s %6s %6s %10s\n", "notebook", "flow-F1", "dep-F1", "EM-F", "EM-D",
                  "resolved");
    out << line;
    auto res = [](const Fraction& f) {
        return f.total == 0 ? std::string("n/a") : std::to_string(f.correct) + "/" + std::to_string(f.total);
    };
    for (const auto& nb : report.per_notebook) {
        std::snprintf(line, sizeof line, "%-32s %8.2f %8.2f %6s %6s %10s\n", nb.notebook_id.c_str(), 100 * nb.flow.f1,
                      100 * nb.dep.f1, nb.em_flow ? "yes" : "no", nb.em_dep ? "yes" : "no", res(nb.resolution).c_str());
        out << line;
    }
    std::snprintf(line, sizeof line, "%-32s %8.2f %8.2f %5.0f%% %5.0f%% %10s\n", "average", 100 * report.flow.f1,
                  100 * report.dep.f1, 100 * report.em_rate_flow, 100 * report.em_rate_dep,
                  res(report.resolution).c_str());
    out << line;
    return out.str();
}

} // namespace crabs::eval
