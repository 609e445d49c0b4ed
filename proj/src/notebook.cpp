#include "crabs/notebook.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace crabs {

using nlohmann::json;

std::string_view to_string(SkipReason reason) noexcept {
    switch (reason) {
    case SkipReason::cell_magic:
        return "cell-magic";
    case SkipReason::empty_after_screening:
        return "empty-after-screening";
    case SkipReason::syntax_error:
        return "syntax-error";
    }
    return "unknown";
}

NotebookError::NotebookError(Kind kind, const std::string& message, std::optional<std::size_t> byte_offset,
                             std::string field)
    : std::runtime_error(message), kind_(kind), byte_offset_(byte_offset), field_(std::move(field)) {}

std::string CodeCell::screened_text() const {
    std::string text;
    for (std::size_t i = 0; i < screened_source.size(); ++i) {
        if (i > 0) {
            text.push_back('\n');
        }
        text += screened_source[i];
    }
    return text;
}

int CodeCell::original_line(int screened_line) const noexcept {
    if (screened_line >= 1 && static_cast<std::size_t>(screened_line) <= line_map.size()) {
        return line_map[static_cast<std::size_t>(screened_line - 1)];
    }
    return screened_line;
}

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    lines.push_back(std::move(current));
    return lines;
}

std::string join_source(const json& source, std::size_t cell_position) {
    const std::string field = "cells[" + std::to_string(cell_position) + "].source";
    if (source.is_string()) {
        return source.get<std::string>();
    }
    if (!source.is_array()) {
        throw NotebookError(NotebookError::Kind::schema, "field '" + field + "' must be a string or list of strings",
                            std::nullopt, field);
    }
    std::string joined;
    for (const auto& piece : source) {
        if (!piece.is_string()) {
            throw NotebookError(NotebookError::Kind::schema, "field '" + field + "' must contain only strings",
                                std::nullopt, field);
        }
        joined += piece.get<std::string>();
    }
    return joined;
}

std::size_t first_non_space(const std::string& line) {
    return line.find_first_not_of(" \t\r\f");
}

} // namespace

CellSequence load_notebook(std::string_view document, std::string notebook_id) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw NotebookError(NotebookError::Kind::parse, std::string("malformed notebook JSON: ") + e.what(), e.byte);
    }
    if (!doc.is_object()) {
        throw NotebookError(NotebookError::Kind::schema, "notebook must be a JSON object", std::nullopt, "cells");
    }
    if (auto it = doc.find("nbformat"); it != doc.end()) {
        if (!it->is_number_integer() || it->get<int>() != 4) {
            throw NotebookError(NotebookError::Kind::schema, "unsupported notebook format: only nbformat 4 is supported",
                                std::nullopt, "nbformat");
        }
    }
    const auto cells = doc.find("cells");
    if (cells == doc.end()) {
        throw NotebookError(NotebookError::Kind::schema, "missing required field 'cells'", std::nullopt, "cells");
    }
    if (!cells->is_array()) {
        throw NotebookError(NotebookError::Kind::schema, "field 'cells' must be an array", std::nullopt, "cells");
    }

    CellSequence sequence;
    sequence.notebook_id = std::move(notebook_id);
    std::size_t position = 0;
    for (const auto& raw : *cells) {
        const std::string prefix = "cells[" + std::to_string(position) + "]";
        if (!raw.is_object()) {
            throw NotebookError(NotebookError::Kind::schema, prefix + " must be an object", std::nullopt, prefix);
        }
        const auto type = raw.find("cell_type");
        if (type == raw.end() || !type->is_string()) {
            throw NotebookError(NotebookError::Kind::schema, "missing required field '" + prefix + ".cell_type'",
                                std::nullopt, prefix + ".cell_type");
        }
        if (type->get<std::string>() == "code") {
            const auto source = raw.find("source");
            if (source == raw.end()) {
                throw NotebookError(NotebookError::Kind::schema, "missing required field '" + prefix + ".source'",
                                    std::nullopt, prefix + ".source");
            }
            CodeCell cell;
            cell.index = static_cast<int>(sequence.cells.size()) + 1;
            cell.source = split_lines(join_source(*source, position));
            sequence.cells.push_back(std::move(cell));
        }
        ++position;
    }
    if (sequence.cells.empty()) {
        throw NotebookError(NotebookError::Kind::empty, "notebook '" + sequence.notebook_id + "' has no code cells");
    }
    return sequence;
}

CellSequence load_notebook_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw NotebookError(NotebookError::Kind::io, "cannot read notebook '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_notebook(buffer.str(), path.stem().string());
}

CodeCell screen_cell(CodeCell cell) {
    cell.screened_source.clear();
    cell.line_map.clear();
    cell.skipped = false;
    cell.skip_reason.reset();
    cell.diagnostics.clear();

    if (!cell.source.empty()) {
        const std::string& first = cell.source.front();
        const std::size_t at = first_non_space(first);
        if (at != std::string::npos && first.compare(at, 2, "%%") == 0) {
            cell.skipped = true;
            cell.skip_reason = SkipReason::cell_magic;
            cell.diagnostics.push_back(Diagnostic{cell.index, {1, static_cast<int>(at)}, diag::kCellMagic,
                                                  "cell magic '" + first.substr(at) + "' skips the whole cell"});
            return cell;
        }
    }

    bool has_code = false;
    for (std::size_t i = 0; i < cell.source.size(); ++i) {
        const std::string& line = cell.source[i];
        const std::size_t at = first_non_space(line);
        const int line_no = static_cast<int>(i) + 1;
        if (at != std::string::npos && (line[at] == '%' || line[at] == '!')) {
            cell.diagnostics.push_back(Diagnostic{cell.index, {line_no, static_cast<int>(at)}, diag::kLineScreened,
                                                  "non-Python line ignored: " + line.substr(at)});
            continue;
        }
        has_code = has_code || at != std::string::npos;
        cell.screened_source.push_back(line);
        cell.line_map.push_back(line_no);
    }
    if (!has_code) {
        cell.skipped = true;
        cell.skip_reason = SkipReason::empty_after_screening;
    }
    return cell;
}

} // namespace crabs
