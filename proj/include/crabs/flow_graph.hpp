#pragma once

#include "crabs/analyzer.hpp"
#include "crabs/diagnostics.hpp"
#include "crabs/estimates.hpp"
#include "crabs/graph.hpp"
#include "crabs/resolver.hpp"

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace crabs {

struct ResolvedIOSet {
    int cell_index = 0;
    bool skipped = false;
    std::set<std::string> inputs;
    std::map<std::string, bool> outputs; // name -> definitive
    std::set<std::string> code_declarations;
    std::set<std::string> code_references;
    std::set<std::string> deleted;

    friend bool operator==(const ResolvedIOSet&, const ResolvedIOSet&) = default;
};

class IncompleteResolution : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Lower estimate plus every ambiguity resolved yes. `records` may cover other
// cells too; only this cell's are used.
[[nodiscard]] ResolvedIOSet apply_verdicts(const analysis::EstimatePair& pair,
                                           const std::vector<resolve::ResolutionRecord>& records);
[[nodiscard]] std::vector<ResolvedIOSet> apply_verdicts(const NotebookAnalysis& analysis,
                                                        const std::vector<resolve::ResolutionRecord>& records);

// Resolved sets taken directly from one bound, without a resolver.
[[nodiscard]] ResolvedIOSet from_estimate(int cell_index, const analysis::CellIOEstimate& estimate);

// Matches inputs to earlier outputs. A definitive output ends the backward
// scan, and so does a `del`. Inputs without any source are reported to `log`.
[[nodiscard]] FlowGraph build_flow_graph(const std::vector<ResolvedIOSet>& resolved, std::string notebook_id,
                                         Diagnostics* log = nullptr);

[[nodiscard]] DependencyGraph derive_dependency_graph(const FlowGraph& graph);

} // namespace crabs
