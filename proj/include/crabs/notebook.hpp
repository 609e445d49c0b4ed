#pragma once

#include "crabs/diagnostics.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crabs {

enum class SkipReason { cell_magic, empty_after_screening, syntax_error };

[[nodiscard]] std::string_view to_string(SkipReason reason) noexcept;

struct CodeCell {
    int index = 0; // 1-based among code cells
    std::vector<std::string> source;
    std::vector<std::string> screened_source;
    std::vector<int> line_map; // original line number of each screened line
    bool skipped = false;
    std::optional<SkipReason> skip_reason;
    Diagnostics diagnostics; // screening and parse findings for this cell

    // Screened source joined with '\n', ready for parsing.
    [[nodiscard]] std::string screened_text() const;
    // Maps a line of screened_text() back to the notebook's line numbering.
    [[nodiscard]] int original_line(int screened_line) const noexcept;
};

struct CellSequence {
    std::vector<CodeCell> cells;
    std::string notebook_id;

    [[nodiscard]] const CodeCell& cell(int index) const { return cells.at(static_cast<std::size_t>(index - 1)); }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(cells.size()); }
};

class NotebookError : public std::runtime_error {
public:
    enum class Kind { parse, schema, empty, io };

    NotebookError(Kind kind, const std::string& message, std::optional<std::size_t> byte_offset = std::nullopt,
                  std::string field = {});

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] std::optional<std::size_t> byte_offset() const noexcept { return byte_offset_; }
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    Kind kind_;
    std::optional<std::size_t> byte_offset_;
    std::string field_;
};

// Extracts the code cells of an nbformat v4 document in document order.
// Markdown and raw cells are dropped. Cells are not screened.
[[nodiscard]] CellSequence load_notebook(std::string_view document, std::string notebook_id);

// Reads a notebook file; the notebook id is the file name without extension.
[[nodiscard]] CellSequence load_notebook_file(const std::filesystem::path& path);

// Removes shell (`!`) and line-magic (`%`) lines. A `%%` cell magic on the
// first line skips the whole cell. Screening always starts from `source`, so
// it is idempotent.
[[nodiscard]] CodeCell screen_cell(CodeCell cell);

} // namespace crabs
