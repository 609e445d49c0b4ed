#include "crabs/alias_store.hpp"

#include "crabs/python/visit.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace crabs::analysis {

using namespace crabs::python;

std::string_view to_string(AliasKind kind) noexcept {
    return kind == AliasKind::assignment ? "assignment" : "collection-containment";
}

void AliasStore::link(AliasEdge edge) {
    if (edge.a == edge.b) {
        return;
    }
    edges_.push_back(std::move(edge));
}

void AliasStore::sever(const std::string& name) {
    std::erase_if(edges_, [&](const AliasEdge& e) { return e.a == name || e.b == name; });
}

std::set<std::string> AliasStore::component(const std::string& name) const {
    std::set<std::string> seen{name};
    std::deque<std::string> todo{name};
    while (!todo.empty()) {
        const std::string cur = todo.front();
        todo.pop_front();
        for (const auto& e : edges_) {
            const std::string* other = nullptr;
            if (e.a == cur) {
                other = &e.b;
            } else if (e.b == cur) {
                other = &e.a;
            }
            if (other != nullptr && seen.insert(*other).second) {
                todo.push_back(*other);
            }
        }
    }
    return seen;
}

bool AliasStore::connected(const std::string& a, const std::string& b) const {
    return a == b || component(a).count(b) != 0;
}

std::vector<std::string> AliasStore::statements(const std::string& name, int before_cell) const {
    const auto members = component(name);
    std::vector<const AliasEdge*> picked;
    for (const auto& e : edges_) {
        if (e.cell_index < before_cell && members.count(e.a) != 0) {
            picked.push_back(&e);
        }
    }
    std::stable_sort(picked.begin(), picked.end(),
                     [](const AliasEdge* x, const AliasEdge* y) { return x->cell_index < y->cell_index; });
    std::vector<std::string> out;
    for (const auto* e : picked) {
        if (std::find(out.begin(), out.end(), e->statement) == out.end()) {
            out.push_back(e->statement);
        }
    }
    return out;
}

namespace {

class AliasWalker {
public:
    AliasWalker(const SyntaxTree& tree, AliasStore& store, int cell, const AnalysisScope& scope)
        : tree_(tree), store_(store), cell_(cell), scope_(scope) {}

    void block(const StmtList& body, bool conditional) {
        for (const auto& s : body) {
            statement(*s, conditional);
        }
    }

private:
    bool tracked(const std::string& name) const {
        return scope_.code_names.count(name) == 0 && !scope_.excluded(name);
    }

    void rebind(const std::string& name, bool conditional) {
        if (!conditional) {
            store_.sever(name);
        }
    }

    void rebind_target(const Expr& target, bool conditional) {
        std::vector<std::string> names;
        bound_names(target, names);
        for (const auto& n : names) {
            rebind(n, conditional);
        }
    }

    static void bound_names(const Expr& target, std::vector<std::string>& out) {
        if (const auto* n = target.as<Name>()) {
            out.push_back(n->id);
        } else if (const auto* st = target.as<Starred>()) {
            bound_names(*st->value, out);
        } else if (const auto* t = target.as<Tuple>()) {
            for (const auto& e : t->elts) {
                bound_names(*e, out);
            }
        } else if (const auto* l = target.as<List>()) {
            for (const auto& e : l->elts) {
                bound_names(*e, out);
            }
        }
    }

    // Bare names held by a collection literal, nested literals included.
    static void contained_names(const Expr& e, std::vector<std::string>& out) {
        auto visit_all = [&](const ExprList& list) {
            for (const auto& x : list) {
                if (!x) {
                    continue;
                }
                if (const auto* n = x->as<Name>()) {
                    out.push_back(n->id);
                } else {
                    contained_names(*x, out);
                }
            }
        };
        if (const auto* l = e.as<List>()) {
            visit_all(l->elts);
        } else if (const auto* t = e.as<Tuple>()) {
            visit_all(t->elts);
        } else if (const auto* s = e.as<Set>()) {
            visit_all(s->elts);
        } else if (const auto* d = e.as<Dict>()) {
            visit_all(d->keys);
            visit_all(d->values);
        }
    }

    static const ExprList* elements(const Expr& e) {
        if (const auto* l = e.as<List>()) {
            return &l->elts;
        }
        if (const auto* t = e.as<Tuple>()) {
            return &t->elts;
        }
        return nullptr;
    }

    void link(const std::string& a, const std::string& b, AliasKind kind, const std::string& statement) {
        if (tracked(a) && tracked(b)) {
            store_.link(AliasEdge{a, b, kind, cell_, statement});
        }
    }

    void pair(const Expr& target, const Expr& value, const std::string& statement) {
        if (const auto* t = target.as<Name>()) {
            if (const auto* v = value.as<Name>()) {
                link(t->id, v->id, AliasKind::assignment, statement);
            } else if (const auto* ie = value.as<IfExp>()) {
                pair(target, *ie->body, statement);
                pair(target, *ie->orelse, statement);
            } else {
                std::vector<std::string> held;
                contained_names(value, held);
                for (const auto& h : held) {
                    link(t->id, h, AliasKind::containment, statement);
                }
            }
            return;
        }
        const ExprList* lhs = elements(target);
        if (lhs == nullptr) {
            return;
        }
        const ExprList* rhs = elements(value);
        const bool starred = std::any_of(lhs->begin(), lhs->end(), [](const ExprPtr& x) { return x->as<Starred>(); });
        if (rhs != nullptr && rhs->size() == lhs->size() && !starred) {
            for (std::size_t i = 0; i < lhs->size(); ++i) {
                pair(*(*lhs)[i], *(*rhs)[i], statement);
            }
        } else if (const auto* v = value.as<Name>()) {
            std::vector<std::string> names;
            bound_names(target, names);
            for (const auto& n : names) {
                link(v->id, n, AliasKind::containment, statement);
            }
        }
    }

    std::string text(const Stmt& s, bool header_only) const {
        SourceRange r = s.range;
        if (header_only) {
            r.end = Position{r.begin.line, std::numeric_limits<int>::max()};
        }
        return tree_.text(r);
    }

    void walrus_and_friends(const Stmt& s, bool conditional) {
        // Names bound by assignment expressions anywhere in the statement.
        for_each_child(
            s,
            [&](const Expr& e) {
                walk(e, [&](const Expr& x) {
                    if (const auto* w = x.as<NamedExpr>()) {
                        rebind_target(*w->target, conditional);
                    }
                });
            },
            [](const Stmt&) {});
    }

    void statement(const Stmt& s, bool conditional) {
        walrus_and_friends(s, conditional);
        if (const auto* a = s.as<Assign>()) {
            const std::string stmt = text(s, false);
            for (const auto& t : a->targets) {
                rebind_target(*t, conditional);
            }
            for (const auto& t : a->targets) {
                pair(*t, *a->value, stmt);
            }
        } else if (const auto* an = s.as<AnnAssign>()) {
            if (an->value) {
                rebind_target(*an->target, conditional);
                pair(*an->target, *an->value, text(s, false));
            }
        } else if (const auto* aug = s.as<AugAssign>()) {
            if (const auto* t = aug->target.get()->as<Name>()) {
                std::vector<std::string> held;
                contained_names(*aug->value, held);
                for (const auto& h : held) {
                    link(t->id, h, AliasKind::containment, text(s, false));
                }
            }
        } else if (const auto* d = s.as<Delete>()) {
            for (const auto& t : d->targets) {
                rebind_target(*t, conditional);
            }
        } else if (const auto* imp = s.as<Import>()) {
            for (const auto& al : imp->names) {
                rebind(al.asname ? *al.asname : al.name.substr(0, al.name.find('.')), conditional);
            }
        } else if (const auto* from = s.as<ImportFrom>()) {
            for (const auto& al : from->names) {
                rebind(al.asname ? *al.asname : al.name, conditional);
            }
        } else if (const auto* f = s.as<For>()) {
            rebind_target(*f->target, conditional);
            const std::string header = text(s, true);
            std::vector<std::string> targets;
            bound_names(*f->target, targets);
            std::vector<std::string> sources;
            if (const auto* n = f->iter->as<Name>()) {
                sources.push_back(n->id);
            } else {
                contained_names(*f->iter, sources);
            }
            for (const auto& src : sources) {
                for (const auto& t : targets) {
                    link(src, t, AliasKind::containment, header);
                }
            }
            block(f->body, true);
            block(f->orelse, true);
        } else if (const auto* w = s.as<While>()) {
            block(w->body, true);
            block(w->orelse, true);
        } else if (const auto* i = s.as<If>()) {
            block(i->body, true);
            block(i->orelse, true);
        } else if (const auto* t = s.as<Try>()) {
            block(t->body, conditional);
            for (const auto& h : t->handlers) {
                if (h.name) {
                    rebind(*h.name, true);
                }
                block(h.body, true);
            }
            block(t->orelse, conditional);
            block(t->finalbody, conditional);
        } else if (const auto* wi = s.as<With>()) {
            for (const auto& item : wi->items) {
                if (item.target) {
                    rebind_target(*item.target, conditional);
                }
            }
            block(wi->body, conditional);
        } else if (const auto* m = s.as<Match>()) {
            for (const auto& c : m->cases) {
                block(c.body, true);
            }
        }
    }

    const SyntaxTree& tree_;
    AliasStore& store_;
    int cell_;
    const AnalysisScope& scope_;
};

} // namespace

void update_alias_store(const SyntaxTree& tree, AliasStore& store, int cell_index, const AnalysisScope& scope) {
    AliasWalker(tree, store, cell_index, scope).block(tree.module.body, false);
}

} // namespace crabs::analysis
