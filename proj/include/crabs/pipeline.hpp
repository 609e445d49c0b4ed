#pragma once

#include "crabs/analyzer.hpp"
#include "crabs/flow_graph.hpp"
#include "crabs/resolver.hpp"

#include <optional>
#include <string_view>

namespace crabs {

enum class EstimateMode { lower, upper, resolved };

[[nodiscard]] std::string_view to_string(EstimateMode mode) noexcept;
[[nodiscard]] std::optional<EstimateMode> parse_estimate_mode(std::string_view text) noexcept;

struct PipelineOptions {
    EstimateMode mode = EstimateMode::resolved;
    AnalysisOptions analysis;
    resolve::ResolverConfig resolver;
};

struct PipelineResult {
    NotebookAnalysis analysis;
    std::vector<resolve::ResolutionRecord> records;
    std::vector<ResolvedIOSet> resolved;
    FlowGraph flows;
    DependencyGraph deps;
    Diagnostics diagnostics; // cell findings, substituted answers, unresolved sources
};

// lower and upper modes answer every ambiguity with assume-no / assume-yes.
// `backend` overrides the configured resolver when given.
[[nodiscard]] PipelineResult run_pipeline(CellSequence cells, const PipelineOptions& options,
                                          const GroundTruth* truth = nullptr, resolve::Backend* backend = nullptr);

} // namespace crabs
