#pragma once

#include "crabs/name_events.hpp"
#include "crabs/syntax_tree.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace crabs::analysis {

enum class AliasKind { assignment, containment };

[[nodiscard]] std::string_view to_string(AliasKind kind) noexcept;

struct AliasEdge {
    std::string a;
    std::string b;
    AliasKind kind = AliasKind::assignment;
    int cell_index = 0;
    std::string statement; // verbatim source of the creating statement
};

// Undirected links between names that may refer to one object. Queries see
// the connected component, so aliasing is symmetric and transitive.
class AliasStore {
public:
    void link(AliasEdge edge);
    // Drops every edge touching `name` (the name was rebound).
    void sever(const std::string& name);

    // The component containing `name`, `name` included.
    [[nodiscard]] std::set<std::string> component(const std::string& name) const;
    [[nodiscard]] bool connected(const std::string& a, const std::string& b) const;
    // Statements behind the component of `name` that were written before `cell_index`.
    [[nodiscard]] std::vector<std::string> statements(const std::string& name, int before_cell) const;

    [[nodiscard]] const std::vector<AliasEdge>& edges() const noexcept { return edges_; }
    [[nodiscard]] bool empty() const noexcept { return edges_.empty(); }

private:
    std::vector<AliasEdge> edges_;
};

// Adds the cell's assignment and containment links, severing the links of
// names that are unconditionally rebound. Names outside the data namespace of
// `scope` are ignored.
void update_alias_store(const SyntaxTree& tree, AliasStore& store, int cell_index, const AnalysisScope& scope);

} // namespace crabs::analysis
