#pragma once

#include "crabs/python/ast.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crabs {

enum class AmbiguityKind { input, output_candidate };

[[nodiscard]] constexpr std::string_view to_string(AmbiguityKind kind) noexcept {
    return kind == AmbiguityKind::input ? "input" : "output-candidate";
}

// A name present in the upper estimate of a cell but not in its lower one.
struct Ambiguity {
    int cell_index = 0;
    std::string name;
    AmbiguityKind kind = AmbiguityKind::input;
    // Verbatim statements from earlier cells that alias the name; present
    // only when the name is alias-connected.
    std::optional<std::vector<std::string>> alias_context;
    python::Position position; // first occurrence in the cell, for ordering

    friend bool operator==(const Ambiguity&, const Ambiguity&) = default;
};

} // namespace crabs
