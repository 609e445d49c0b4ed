#pragma once

#include "crabs/diagnostics.hpp"
#include "crabs/syntax_tree.hpp"

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace crabs::analysis {

enum class NameAction { define, use, maybe_define };
enum class NameKind { data, code };
enum class Conditionality { unconditional, conditional, loop_conditional };

// Why a name occurs. The lower and upper estimate rules are keyed on it.
enum class NameRole {
    plain,          // bare read, or plain (re)binding
    call_argument,  // passed directly to a call: f(x), f(k=x), f(*x)
    method_base,    // root of a callee chain: x.m(...), x.a.m(...), x[k].m(...)
    iterated,       // collection iterated by a for loop or comprehension
    item_store,     // in-place store through the name: x[k] = v, x.a = v, del x[k]
    augmented,      // x op= v
    loop_target,    // bound by a for loop
    deletion,       // del x
    import_binding, // bound by an import (only when imports are tracked)
    declaration,    // def / class name
};

[[nodiscard]] std::string_view to_string(NameAction action) noexcept;
[[nodiscard]] std::string_view to_string(NameRole role) noexcept;
[[nodiscard]] std::string_view to_string(Conditionality c) noexcept;

// One level of control-flow nesting around an event. Events of one construct
// share `construct`; `branch` tells the alternatives of a conditional apart.
struct Frame {
    enum class Type { branch, loop };
    Type type = Type::branch;
    int construct = 0;
    int branch = 0;
    int branch_count = 1;

    friend bool operator==(const Frame&, const Frame&) = default;
};

struct NameEvent {
    std::string name;
    NameAction action = NameAction::use;
    NameKind kind = NameKind::data;
    Conditionality conditionality = Conditionality::unconditional;
    python::Position position; // original notebook line numbering
    NameRole role = NameRole::plain;
    std::vector<Frame> frames;
    int loop = -1; // construct id of the loop an `iterated` or `loop_target` event belongs to

    [[nodiscard]] bool is_definition() const noexcept { return action != NameAction::use; }
};

// Notebook-level naming context, threaded through the cells in order.
struct AnalysisScope {
    std::set<std::string> code_names;   // every def/class name in the notebook
    std::set<std::string> imported;     // names currently bound by imports
    std::set<std::string> data_defined; // names bound as data so far
    bool track_imports = false;

    // Builtins and (untracked) imports are not information units.
    [[nodiscard]] bool excluded(const std::string& name) const;
};

[[nodiscard]] bool is_builtin(std::string_view name) noexcept;

struct CellEvents {
    std::vector<NameEvent> events;
    Diagnostics diagnostics;
};

// Collects def/class names bound outside function bodies.
void collect_code_names(const python::Module& module, std::set<std::string>& out);

// Walks a cell in execution order and reports every name definition and use
// relevant to inter-cell I/O. Function and class bodies contribute only code
// references. Updates `scope` with the cell's bindings.
[[nodiscard]] CellEvents collect_name_events(const SyntaxTree& tree, AnalysisScope& scope);

} // namespace crabs::analysis
