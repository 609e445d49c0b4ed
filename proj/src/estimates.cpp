#include "crabs/estimates.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <tuple>

namespace crabs::analysis {

std::set<std::string> CellIOEstimate::output_names() const {
    std::set<std::string> out;
    for (const auto& [name, definitive] : output_candidates) {
        out.insert(name);
    }
    return out;
}

namespace {

enum class UseStatus { local, maybe, external };

// Events regrouped by their control-flow frames.
struct Block;
struct Item {
    int event = -1; // >= 0 for a leaf
    int construct = -1;
    Frame::Type type = Frame::Type::branch;
    std::vector<Block> branches;
};
struct Block {
    std::vector<Item> items;
};

struct Defined {
    std::set<std::string> must;
    std::set<std::string> may;
};

bool is_data(const NameEvent& e) { return e.kind == NameKind::data; }

Block group(const std::vector<NameEvent>& events) {
    Block root;
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (!is_data(events[i])) {
            continue;
        }
        Block* cur = &root;
        for (const Frame& f : events[i].frames) {
            if (cur->items.empty() || cur->items.back().event >= 0 || cur->items.back().construct != f.construct) {
                Item item;
                item.construct = f.construct;
                item.type = f.type;
                item.branches.resize(static_cast<std::size_t>(std::max(1, f.branch_count)));
                cur->items.push_back(std::move(item));
            }
            Item& construct = cur->items.back();
            cur = &construct.branches.at(static_cast<std::size_t>(f.branch));
        }
        Item leaf;
        leaf.event = static_cast<int>(i);
        cur->items.push_back(std::move(leaf));
    }
    return root;
}

class UseClassifier {
public:
    explicit UseClassifier(const std::vector<NameEvent>& events)
        : events_(events), status_(events.size(), UseStatus::local) {}

    std::vector<UseStatus> run() {
        const Block root = group(events_);
        walk(root, Defined{});
        loop_reorderings();
        return std::move(status_);
    }

private:
    Defined walk(const Block& block, Defined d) {
        for (const auto& item : block.items) {
            if (item.event >= 0) {
                apply(static_cast<std::size_t>(item.event), d);
            } else if (item.type == Frame::Type::loop) {
                Defined inner = walk(item.branches.front(), d);
                d.may.insert(inner.may.begin(), inner.may.end());
            } else {
                std::optional<Defined> merged;
                for (const auto& branch : item.branches) {
                    Defined r = walk(branch, d);
                    if (!merged) {
                        merged = std::move(r);
                        continue;
                    }
                    std::erase_if(merged->must, [&](const std::string& n) { return r.must.count(n) == 0; });
                    merged->may.insert(r.may.begin(), r.may.end());
                }
                d = std::move(*merged);
            }
        }
        return d;
    }

    void apply(std::size_t i, Defined& d) {
        const NameEvent& e = events_[i];
        if (e.action == NameAction::use) {
            if (d.must.count(e.name) != 0) {
                status_[i] = UseStatus::local;
            } else if (d.may.count(e.name) != 0) {
                status_[i] = UseStatus::maybe;
            } else {
                status_[i] = UseStatus::external;
            }
            if (e.role == NameRole::deletion) {
                d.must.erase(e.name);
            }
        } else {
            d.must.insert(e.name);
            d.may.insert(e.name);
        }
    }

    static bool is_prefix(const std::vector<Frame>& a, const std::vector<Frame>& b) {
        return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
    }

    // Inside a loop, a read that does not dominate a same-loop definition of
    // its name may observe that definition from an earlier iteration under
    // some branch order.
    void loop_reorderings() {
        for (std::size_t u = 0; u < events_.size(); ++u) {
            const NameEvent& use = events_[u];
            if (!is_data(use) || use.action != NameAction::use || status_[u] != UseStatus::external) {
                continue;
            }
            for (const Frame& loop : use.frames) {
                if (loop.type != Frame::Type::loop) {
                    continue;
                }
                for (std::size_t d = 0; d < events_.size(); ++d) {
                    const NameEvent& def = events_[d];
                    if (!is_data(def) || !def.is_definition() || def.name != use.name) {
                        continue;
                    }
                    const bool in_loop = std::find(def.frames.begin(), def.frames.end(), loop) != def.frames.end();
                    const bool dominated = u < d && is_prefix(use.frames, def.frames);
                    if (in_loop && !dominated) {
                        status_[u] = UseStatus::maybe;
                    }
                }
            }
        }
    }

    const std::vector<NameEvent>& events_;
    std::vector<UseStatus> status_;
};

bool in_loop(const NameEvent& e, int loop) {
    return std::any_of(e.frames.begin(), e.frames.end(),
                       [&](const Frame& f) { return f.type == Frame::Type::loop && f.construct == loop; });
}

// The loop body rebinds or updates the iterated collection in place.
bool modified_in_loop(const std::vector<NameEvent>& events, const NameEvent& iterated) {
    std::set<std::string> targets;
    for (const auto& e : events) {
        if (e.role == NameRole::loop_target && e.loop == iterated.loop) {
            targets.insert(e.name);
        }
    }
    for (const auto& e : events) {
        if (!is_data(e) || !in_loop(e, iterated.loop)) {
            continue;
        }
        if (e.name == iterated.name &&
            (e.is_definition() || e.role == NameRole::item_store || e.role == NameRole::augmented)) {
            return true;
        }
        if (e.role == NameRole::item_store && targets.count(e.name) != 0) {
            return true;
        }
    }
    return false;
}

bool mutating(NameRole role) {
    switch (role) {
    case NameRole::item_store:
    case NameRole::augmented:
    case NameRole::call_argument:
    case NameRole::method_base:
    case NameRole::iterated: return true;
    default: return false;
    }
}

enum class Bound { lower, upper };

CellIOEstimate estimate(const std::vector<NameEvent>& events, Bound bound, const AliasStore* aliases) {
    CellIOEstimate est;
    const auto status = UseClassifier(events).run();
    std::set<std::string> mutated;

    auto add_output = [&](const std::string& name, bool definitive) {
        auto [it, fresh] = est.output_candidates.emplace(name, definitive);
        if (!fresh) {
            it->second = it->second || definitive;
        }
    };

    for (std::size_t i = 0; i < events.size(); ++i) {
        const NameEvent& e = events[i];
        if (e.kind == NameKind::code) {
            if (e.action == NameAction::use) {
                est.code_references.insert(e.name);
            } else {
                est.code_declarations.insert(e.name);
            }
            continue;
        }
        if (e.action == NameAction::use) {
            if (status[i] == UseStatus::external || (status[i] == UseStatus::maybe && bound == Bound::upper)) {
                est.inputs.insert(e.name);
            }
        }
        const bool top = e.frames.empty();
        switch (e.role) {
        case NameRole::plain:
        case NameRole::augmented:
        case NameRole::import_binding:
            if (e.is_definition()) {
                add_output(e.name, top && e.action == NameAction::define);
            }
            break;
        case NameRole::loop_target: add_output(e.name, false); break;
        case NameRole::item_store: add_output(e.name, false); break;
        case NameRole::call_argument:
        case NameRole::method_base:
            if (bound == Bound::upper) {
                add_output(e.name, false);
            }
            break;
        case NameRole::iterated:
            if (bound == Bound::upper || modified_in_loop(events, e)) {
                add_output(e.name, false);
            }
            break;
        case NameRole::deletion:
            if (top) {
                est.output_candidates.erase(e.name);
                est.deleted.insert(e.name);
            }
            break;
        case NameRole::declaration: break;
        }
        if (mutating(e.role) && est.outputs(e.name)) {
            mutated.insert(e.name);
        }
    }

    if (bound == Bound::upper && aliases != nullptr) {
        for (const auto& name : mutated) {
            for (const auto& other : aliases->component(name)) {
                if (other != name) {
                    add_output(other, false);
                }
            }
        }
    }
    return est;
}

} // namespace

CellIOEstimate lower_estimate(const std::vector<NameEvent>& events) {
    return estimate(events, Bound::lower, nullptr);
}

CellIOEstimate upper_estimate(const std::vector<NameEvent>& events, const AliasStore& aliases) {
    return estimate(events, Bound::upper, &aliases);
}

EstimatePair estimate_pair(int cell_index, const std::vector<NameEvent>& events, const AliasStore& aliases) {
    EstimatePair pair;
    pair.cell_index = cell_index;
    pair.lower = lower_estimate(events);
    pair.upper = upper_estimate(events, aliases);
    for (const auto& e : events) {
        pair.first_seen.emplace(e.name, e.position);
    }
    return pair;
}

std::vector<Ambiguity> compute_ambiguities(const EstimatePair& pair, const AliasStore& aliases) {
    std::vector<Ambiguity> out;
    auto make = [&](const std::string& name, AmbiguityKind kind) {
        Ambiguity a;
        a.cell_index = pair.cell_index;
        a.name = name;
        a.kind = kind;
        if (auto it = pair.first_seen.find(name); it != pair.first_seen.end()) {
            a.position = it->second;
        } else {
            // Hidden modifications never occur in the cell text; list them last.
            a.position = python::Position{std::numeric_limits<int>::max(), 0};
        }
        auto context = aliases.statements(name, pair.cell_index);
        if (!context.empty()) {
            a.alias_context = std::move(context);
        }
        out.push_back(std::move(a));
    };
    for (const auto& name : pair.upper.inputs) {
        if (pair.lower.inputs.count(name) == 0) {
            make(name, AmbiguityKind::input);
        }
    }
    for (const auto& [name, definitive] : pair.upper.output_candidates) {
        if (!pair.lower.outputs(name)) {
            make(name, AmbiguityKind::output_candidate);
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Ambiguity& x, const Ambiguity& y) {
        return std::tie(x.position, x.kind, x.name) < std::tie(y.position, y.kind, y.name);
    });
    return out;
}

} // namespace crabs::analysis
