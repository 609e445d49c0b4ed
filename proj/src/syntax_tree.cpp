#include "crabs/syntax_tree.hpp"

#include "crabs/python/parser.hpp"

#include <algorithm>

namespace crabs {

python::Position SyntaxTree::original(python::Position p) const noexcept {
    if (p.line >= 1 && static_cast<std::size_t>(p.line) <= line_map.size()) {
        p.line = line_map[static_cast<std::size_t>(p.line - 1)];
    }
    return p;
}

std::string SyntaxTree::text(const python::SourceRange& range) const {
    std::string out;
    for (int line = range.begin.line; line <= range.end.line; ++line) {
        if (line < 1 || static_cast<std::size_t>(line) > lines.size()) {
            continue;
        }
        const std::string& src = lines[static_cast<std::size_t>(line - 1)];
        const std::size_t from = line == range.begin.line ? static_cast<std::size_t>(range.begin.column) : 0;
        const std::size_t to =
            line == range.end.line ? std::min(src.size(), static_cast<std::size_t>(range.end.column)) : src.size();
        if (line != range.begin.line) {
            out.push_back('\n');
        }
        if (from < to) {
            out += src.substr(from, to - from);
        }
    }
    return out;
}

std::optional<SyntaxTree> parse_cell(CodeCell& cell) {
    if (cell.skipped) {
        return std::nullopt;
    }
    try {
        SyntaxTree tree;
        tree.cell_index = cell.index;
        tree.module = python::parse_module(cell.screened_text());
        tree.lines = cell.screened_source;
        tree.line_map = cell.line_map;
        return tree;
    } catch (const python::SyntaxError& e) {
        python::Position where = e.where();
        where.line = cell.original_line(where.line);
        cell.skipped = true;
        cell.skip_reason = SkipReason::syntax_error;
        cell.diagnostics.push_back(Diagnostic{cell.index, where, diag::kSyntaxError, e.message()});
        return std::nullopt;
    }
}

} // namespace crabs
