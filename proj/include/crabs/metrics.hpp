#pragma once

#include "crabs/graph.hpp"
#include "crabs/resolver.hpp"

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace crabs::eval {

struct SetScores {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    double accuracy = 0; // Jaccard: tp / (tp + fp + fn)
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

[[nodiscard]] SetScores scores_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);

template <class T>
[[nodiscard]] SetScores score_sets(const std::set<T>& predicted, const std::set<T>& truth) {
    std::size_t tp = 0;
    for (const auto& p : predicted) {
        tp += truth.count(p);
    }
    return scores_from_counts(tp, predicted.size() - tp, truth.size() - tp);
}

// Every metric zero; used for structurally mismatched predictions.
[[nodiscard]] SetScores zero_scores(std::size_t tp, std::size_t fp, std::size_t fn);

[[nodiscard]] bool exact_match(const FlowGraph& predicted, const FlowGraph& truth);
[[nodiscard]] bool exact_match(const DependencyGraph& predicted, const DependencyGraph& truth);

[[nodiscard]] DependencyGraph truth_dependencies(const GroundTruth& truth);

struct Fraction {
    std::size_t correct = 0;
    std::size_t total = 0;
    // nullopt when there is nothing to score.
    [[nodiscard]] std::optional<double> value() const {
        return total == 0 ? std::nullopt : std::optional<double>(static_cast<double>(correct) / total);
    }
};

class AnnotationMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] Fraction resolution_accuracy(const std::vector<resolve::ResolutionRecord>& records,
                                           const GroundTruth& truth);

struct NotebookScores {
    std::string notebook_id;
    SetScores flow;
    SetScores dep;
    bool em_flow = false;
    bool em_dep = false;
    bool structural_mismatch = false;
    Fraction resolution;
};

[[nodiscard]] NotebookScores score_notebook(const FlowGraph& predicted_flows, const DependencyGraph& predicted_deps,
                                            const std::vector<resolve::ResolutionRecord>& records,
                                            const GroundTruth& truth);

struct Averages {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    double accuracy = 0;
};

struct MetricsReport {
    std::vector<NotebookScores> per_notebook;
    Averages flow;
    Averages dep;
    double em_rate_flow = 0; // fraction of notebooks
    double em_rate_dep = 0;
    Fraction resolution; // pooled over notebooks
    bool incomplete = false;
    std::vector<std::string> problems;
};

class EmptyReport : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] MetricsReport aggregate(std::vector<NotebookScores> per_notebook);

[[nodiscard]] std::string report_json(const MetricsReport& report);
// Human-readable per-notebook table with an aggregate row.
[[nodiscard]] std::string report_table(const MetricsReport& report);

} // namespace crabs::eval
