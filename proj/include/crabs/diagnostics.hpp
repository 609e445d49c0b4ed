#pragma once

#include "crabs/python/ast.hpp"

#include <string>
#include <vector>

namespace crabs {

// A non-fatal finding attached to a cell. `position` refers to the original
// notebook line numbering of that cell (1-based lines, 0-based columns).
struct Diagnostic {
    int cell_index = 0;
    python::Position position;
    std::string code;
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

using Diagnostics = std::vector<Diagnostic>;

namespace diag {
inline constexpr const char* kCellMagic = "cell-magic";
inline constexpr const char* kLineScreened = "line-screened";
inline constexpr const char* kEmptyCell = "empty-after-screening";
inline constexpr const char* kSyntaxError = "syntax-error";
inline constexpr const char* kGlobalInFunction = "global-in-function";
inline constexpr const char* kNameReuse = "name-reuse";
inline constexpr const char* kUnresolvedSource = "unresolved-source";
inline constexpr const char* kUnparseableResponse = "unparseable-response";
} // namespace diag

} // namespace crabs
