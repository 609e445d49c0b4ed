#pragma once

#include "crabs/flow_graph.hpp"
#include "crabs/graph.hpp"
#include "crabs/pipeline.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace crabs {

inline constexpr int kGraphSchemaVersion = 1;

// Everything written per analyzed notebook.
struct GraphDocument {
    int schema_version = kGraphSchemaVersion;
    std::string notebook_id;
    int n_cells = 0;
    std::vector<ResolvedIOSet> cells;
    FlowGraph flows;
    DependencyGraph deps;
    Diagnostics diagnostics;
    std::vector<resolve::ResolutionRecord> resolutions;
};

[[nodiscard]] GraphDocument make_document(const PipelineResult& result);

[[nodiscard]] std::string graph_json(const GraphDocument& doc);
// Throws SchemaError on malformed input.
[[nodiscard]] GraphDocument parse_graph_json(std::string_view text);

enum class GraphView { flows, deps };

[[nodiscard]] std::string export_dot(const GraphDocument& doc, GraphView view);
[[nodiscard]] std::string export_json(const GraphDocument& doc, GraphView view);

} // namespace crabs
