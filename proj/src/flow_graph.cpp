#include "crabs/flow_graph.hpp"

#include <algorithm>

namespace crabs {

ResolvedIOSet from_estimate(int cell_index, const analysis::CellIOEstimate& estimate) {
    ResolvedIOSet r;
    r.cell_index = cell_index;
    r.inputs = estimate.inputs;
    r.outputs = estimate.output_candidates;
    r.code_declarations = estimate.code_declarations;
    r.code_references = estimate.code_references;
    r.deleted = estimate.deleted;
    return r;
}

ResolvedIOSet apply_verdicts(const analysis::EstimatePair& pair, const std::vector<resolve::ResolutionRecord>& records) {
    ResolvedIOSet r = from_estimate(pair.cell_index, pair.lower);
    auto verdict = [&](const std::string& name, AmbiguityKind kind) {
        for (const auto& rec : records) {
            if (rec.ambiguity.cell_index == pair.cell_index && rec.ambiguity.name == name &&
                rec.ambiguity.kind == kind) {
                return rec.verdict;
            }
        }
        throw IncompleteResolution("no resolution for (cell " + std::to_string(pair.cell_index) + ", " + name +
                                   ", " + std::string(to_string(kind)) + ")");
    };
    for (const auto& name : pair.upper.inputs) {
        if (r.inputs.count(name) == 0 && verdict(name, AmbiguityKind::input)) {
            r.inputs.insert(name);
        }
    }
    for (const auto& [name, definitive] : pair.upper.output_candidates) {
        if (r.outputs.count(name) == 0) {
            if (verdict(name, AmbiguityKind::output_candidate)) {
                r.outputs.emplace(name, definitive);
            }
        } else {
            r.outputs[name] = definitive;
        }
    }
    return r;
}

std::vector<ResolvedIOSet> apply_verdicts(const NotebookAnalysis& analysis,
                                          const std::vector<resolve::ResolutionRecord>& records) {
    std::vector<ResolvedIOSet> out;
    out.reserve(analysis.pairs.size());
    for (const auto& pair : analysis.pairs) {
        ResolvedIOSet r = apply_verdicts(pair, records);
        r.skipped = analysis.cells.cell(pair.cell_index).skipped;
        out.push_back(std::move(r));
    }
    return out;
}

FlowGraph build_flow_graph(const std::vector<ResolvedIOSet>& resolved, std::string notebook_id, Diagnostics* log) {
    FlowGraph g;
    g.notebook_id = std::move(notebook_id);
    g.n_cells = static_cast<int>(resolved.size());
    auto at = [&](int index) -> const ResolvedIOSet& { return resolved[static_cast<std::size_t>(index - 1)]; };

    for (int t = 1; t <= g.n_cells; ++t) {
        const ResolvedIOSet& target = at(t);
        if (target.skipped) {
            continue;
        }
        for (const auto& name : target.inputs) {
            bool found = false;
            for (int s = t - 1; s >= 1; --s) {
                const ResolvedIOSet& source = at(s);
                if (source.skipped) {
                    continue;
                }
                auto it = source.outputs.find(name);
                if (it != source.outputs.end()) {
                    g.flows.insert(InformationFlow{s, t, name, FlowKind::data});
                    found = true;
                    if (it->second) {
                        break;
                    }
                }
                if (source.deleted.count(name) != 0) {
                    break;
                }
            }
            if (!found && log != nullptr) {
                log->push_back(Diagnostic{t, {}, diag::kUnresolvedSource,
                                          "input '" + name + "' has no earlier defining cell"});
            }
        }
        for (const auto& name : target.code_references) {
            bool found = false;
            for (int s = t - 1; s >= 1 && !found; --s) {
                if (!at(s).skipped && at(s).code_declarations.count(name) != 0) {
                    g.flows.insert(InformationFlow{s, t, name, FlowKind::code});
                    found = true;
                }
            }
            if (!found && log != nullptr) {
                log->push_back(Diagnostic{t, {}, diag::kUnresolvedSource,
                                          "code reference '" + name + "' has no earlier declaring cell"});
            }
        }
    }
    return g;
}

DependencyGraph derive_dependency_graph(const FlowGraph& graph) {
    DependencyGraph d;
    d.notebook_id = graph.notebook_id;
    d.n_cells = graph.n_cells;
    int last = graph.n_cells;
    for (const auto& f : graph.flows) {
        d.direct.emplace(f.target, f.source);
        last = std::max({last, f.source, f.target});
    }
    // Edges point to earlier cells, so one pass in index order suffices:
    // every dependency of an earlier cell is already closed when reached.
    std::vector<std::set<int>> reach(static_cast<std::size_t>(last) + 1);
    for (const auto& [t, s] : d.direct) {
        reach[static_cast<std::size_t>(t)].insert(s);
    }
    for (int t = 1; t <= last; ++t) {
        auto& mine = reach[static_cast<std::size_t>(t)];
        const std::set<int> direct = mine;
        for (int s : direct) {
            const auto& theirs = reach[static_cast<std::size_t>(s)];
            mine.insert(theirs.begin(), theirs.end());
        }
        for (int s : mine) {
            d.deps.emplace(t, s);
        }
    }
    return d;
}

} // namespace crabs
