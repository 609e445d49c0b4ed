#include "crabs/analyzer.hpp"

#include "crabs/syntax_tree.hpp"

#include <optional>

namespace crabs {

NotebookAnalysis analyze_notebook(CellSequence cells, const AnalysisOptions& options) {
    NotebookAnalysis out;
    out.notebook_id = cells.notebook_id;

    std::vector<std::optional<SyntaxTree>> trees;
    analysis::AnalysisScope scope;
    scope.track_imports = options.track_imports;
    for (auto& cell : cells.cells) {
        cell = screen_cell(std::move(cell));
        trees.push_back(parse_cell(cell));
        if (trees.back()) {
            analysis::collect_code_names(trees.back()->module, scope.code_names);
        }
    }

    for (std::size_t i = 0; i < cells.cells.size(); ++i) {
        CodeCell& cell = cells.cells[i];
        std::vector<analysis::NameEvent> events;
        if (trees[i]) {
            auto collected = analysis::collect_name_events(*trees[i], scope);
            events = std::move(collected.events);
            cell.diagnostics.insert(cell.diagnostics.end(), collected.diagnostics.begin(),
                                    collected.diagnostics.end());
            analysis::update_alias_store(*trees[i], out.aliases, cell.index, scope);
        }
        auto pair = analysis::estimate_pair(cell.index, events, out.aliases);
        auto found = analysis::compute_ambiguities(pair, out.aliases);
        out.ambiguities.insert(out.ambiguities.end(), found.begin(), found.end());
        out.diagnostics.insert(out.diagnostics.end(), cell.diagnostics.begin(), cell.diagnostics.end());
        out.pairs.push_back(std::move(pair));
        out.events.push_back(std::move(events));
    }
    out.cells = std::move(cells);
    return out;
}

} // namespace crabs
