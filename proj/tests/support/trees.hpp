#pragma once

#include "crabs/name_events.hpp"
#include "crabs/syntax_tree.hpp"
#include "support/cells.hpp"

#include <stdexcept>

namespace crabs::testing {

inline SyntaxTree tree_of(const std::string& source, int index = 1) {
    auto seq = cells({source});
    CodeCell cell = screen_cell(seq.cells[0]);
    cell.index = index;
    auto tree = parse_cell(cell);
    if (!tree) {
        throw std::runtime_error("fixture source does not parse: " + source);
    }
    tree->cell_index = index;
    return std::move(*tree);
}

inline std::vector<analysis::NameEvent> events_of(const std::string& source) {
    const SyntaxTree tree = tree_of(source);
    analysis::AnalysisScope scope;
    analysis::collect_code_names(tree.module, scope.code_names);
    return analysis::collect_name_events(tree, scope).events;
}

} // namespace crabs::testing
