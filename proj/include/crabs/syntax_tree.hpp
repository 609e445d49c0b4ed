#pragma once

#include "crabs/notebook.hpp"
#include "crabs/python/ast.hpp"

#include <optional>
#include <string>
#include <vector>

namespace crabs {

// A parsed cell together with what is needed to map positions back to the
// notebook and to quote statements verbatim.
struct SyntaxTree {
    int cell_index = 0;
    python::Module module;
    std::vector<std::string> lines; // screened source lines
    std::vector<int> line_map;      // screened line -> original line

    [[nodiscard]] python::Position original(python::Position p) const noexcept;
    // Verbatim source text covered by `range`.
    [[nodiscard]] std::string text(const python::SourceRange& range) const;
};

// Parses a screened, non-skipped cell. On a syntax error the cell is marked
// skipped and a diagnostic is attached to it; nullopt is returned.
[[nodiscard]] std::optional<SyntaxTree> parse_cell(CodeCell& cell);

} // namespace crabs
