#pragma once

#include "crabs/alias_store.hpp"
#include "crabs/ambiguity.hpp"
#include "crabs/estimates.hpp"
#include "crabs/notebook.hpp"

#include <string>
#include <vector>

namespace crabs {

struct AnalysisOptions {
    bool track_imports = false;
};

// Syntactic phase output for one notebook.
struct NotebookAnalysis {
    std::string notebook_id;
    CellSequence cells;                             // screened; skip flags final
    std::vector<analysis::EstimatePair> pairs;      // one per cell, index order
    std::vector<std::vector<analysis::NameEvent>> events;
    std::vector<Ambiguity> ambiguities;             // cell order, then source order
    analysis::AliasStore aliases;                   // state after the last cell
    Diagnostics diagnostics;

    [[nodiscard]] int n_cells() const noexcept { return cells.size(); }
    [[nodiscard]] const analysis::EstimatePair& pair(int cell_index) const {
        return pairs.at(static_cast<std::size_t>(cell_index - 1));
    }
};

// Screens, parses and estimates every cell in index order.
[[nodiscard]] NotebookAnalysis analyze_notebook(CellSequence cells, const AnalysisOptions& options = {});

} // namespace crabs
