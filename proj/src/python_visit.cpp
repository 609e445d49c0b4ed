#include "crabs/python/visit.hpp"

#include <type_traits>

namespace crabs::python {

namespace {

void call_if(const ExprPtr& e, const ExprVisitor& f) {
    if (e) {
        f(*e);
    }
}

void each(const ExprList& list, const ExprVisitor& f) {
    for (const auto& e : list) {
        call_if(e, f);
    }
}

void each_stmt(const StmtList& list, const StmtVisitor& f) {
    for (const auto& s : list) {
        f(*s);
    }
}

void arguments(const Arguments& args, const ExprVisitor& f) {
    for (const auto& p : args.params) {
        call_if(p.annotation, f);
        call_if(p.default_value, f);
    }
}

} // namespace

void for_each_child(const Expr& e, const ExprVisitor& f) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, JoinedStr>) {
                each(n.values, f);
            } else if constexpr (std::is_same_v<T, Attribute> || std::is_same_v<T, Starred> ||
                                 std::is_same_v<T, Await>) {
                call_if(n.value, f);
            } else if constexpr (std::is_same_v<T, Yield>) {
                call_if(n.value, f);
            } else if constexpr (std::is_same_v<T, Subscript>) {
                call_if(n.value, f);
                call_if(n.slice, f);
            } else if constexpr (std::is_same_v<T, Slice>) {
                call_if(n.lower, f);
                call_if(n.upper, f);
                call_if(n.step, f);
            } else if constexpr (std::is_same_v<T, Call>) {
                call_if(n.func, f);
                each(n.args, f);
                for (const auto& kw : n.keywords) {
                    call_if(kw.value, f);
                }
            } else if constexpr (std::is_same_v<T, BinOp>) {
                call_if(n.left, f);
                call_if(n.right, f);
            } else if constexpr (std::is_same_v<T, UnaryOp>) {
                call_if(n.operand, f);
            } else if constexpr (std::is_same_v<T, BoolOp>) {
                each(n.values, f);
            } else if constexpr (std::is_same_v<T, Compare>) {
                call_if(n.left, f);
                each(n.comparators, f);
            } else if constexpr (std::is_same_v<T, IfExp>) {
                call_if(n.test, f);
                call_if(n.body, f);
                call_if(n.orelse, f);
            } else if constexpr (std::is_same_v<T, Lambda>) {
                arguments(n.args, f);
                call_if(n.body, f);
            } else if constexpr (std::is_same_v<T, NamedExpr>) {
                call_if(n.target, f);
                call_if(n.value, f);
            } else if constexpr (std::is_same_v<T, Tuple> || std::is_same_v<T, List> || std::is_same_v<T, Set>) {
                each(n.elts, f);
            } else if constexpr (std::is_same_v<T, Dict>) {
                for (std::size_t i = 0; i < n.values.size(); ++i) {
                    call_if(n.keys[i], f);
                    call_if(n.values[i], f);
                }
            } else if constexpr (std::is_same_v<T, Comp>) {
                for (const auto& g : n.generators) {
                    call_if(g.iter, f);
                    call_if(g.target, f);
                    each(g.ifs, f);
                }
                call_if(n.elt, f);
                call_if(n.value, f);
            }
        },
        e.node);
}

void for_each_child(const Pattern& p, const ExprVisitor& on_expr,
                    const std::function<void(const Pattern&)>& on_pattern) {
    call_if(p.value, on_expr);
    each(p.keys, on_expr);
    for (const auto& sub : p.patterns) {
        on_pattern(*sub);
    }
}

void for_each_child(const Stmt& s, const ExprVisitor& f, const StmtVisitor& g) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, ExprStmt> || std::is_same_v<T, Return>) {
                call_if(n.value, f);
            } else if constexpr (std::is_same_v<T, Assign>) {
                call_if(n.value, f);
                each(n.targets, f);
            } else if constexpr (std::is_same_v<T, AugAssign>) {
                call_if(n.target, f);
                call_if(n.value, f);
            } else if constexpr (std::is_same_v<T, AnnAssign>) {
                call_if(n.value, f);
                call_if(n.target, f);
                call_if(n.annotation, f);
            } else if constexpr (std::is_same_v<T, Delete>) {
                each(n.targets, f);
            } else if constexpr (std::is_same_v<T, Raise>) {
                call_if(n.exc, f);
                call_if(n.cause, f);
            } else if constexpr (std::is_same_v<T, Assert>) {
                call_if(n.test, f);
                call_if(n.msg, f);
            } else if constexpr (std::is_same_v<T, If> || std::is_same_v<T, While>) {
                call_if(n.test, f);
                each_stmt(n.body, g);
                each_stmt(n.orelse, g);
            } else if constexpr (std::is_same_v<T, For>) {
                call_if(n.iter, f);
                call_if(n.target, f);
                each_stmt(n.body, g);
                each_stmt(n.orelse, g);
            } else if constexpr (std::is_same_v<T, Try>) {
                each_stmt(n.body, g);
                for (const auto& h : n.handlers) {
                    call_if(h.type, f);
                    each_stmt(h.body, g);
                }
                each_stmt(n.orelse, g);
                each_stmt(n.finalbody, g);
            } else if constexpr (std::is_same_v<T, With>) {
                for (const auto& item : n.items) {
                    call_if(item.context, f);
                    call_if(item.target, f);
                }
                each_stmt(n.body, g);
            } else if constexpr (std::is_same_v<T, FunctionDef>) {
                each(n.decorators, f);
                arguments(n.args, f);
                call_if(n.returns, f);
                each_stmt(n.body, g);
            } else if constexpr (std::is_same_v<T, ClassDef>) {
                each(n.decorators, f);
                each(n.bases, f);
                for (const auto& kw : n.keywords) {
                    call_if(kw.value, f);
                }
                each_stmt(n.body, g);
            } else if constexpr (std::is_same_v<T, Match>) {
                call_if(n.subject, f);
                for (const auto& c : n.cases) {
                    std::function<void(const Pattern&)> pattern_exprs = [&](const Pattern& p) {
                        for_each_child(p, f, pattern_exprs);
                    };
                    pattern_exprs(*c.pattern);
                    call_if(c.guard, f);
                    each_stmt(c.body, g);
                }
            }
        },
        s.node);
}

void walk(const Expr& e, const ExprVisitor& on_expr) {
    on_expr(e);
    for_each_child(e, [&](const Expr& child) { walk(child, on_expr); });
}

void walk(const Stmt& s, const ExprVisitor& on_expr, const StmtVisitor& on_stmt) {
    if (on_stmt) {
        on_stmt(s);
    }
    for_each_child(
        s, [&](const Expr& e) { walk(e, on_expr); }, [&](const Stmt& child) { walk(child, on_expr, on_stmt); });
}

void pattern_captures(const Pattern& p, std::vector<std::string>& out) {
    if (p.name) {
        out.push_back(*p.name);
    }
    for (const auto& sub : p.patterns) {
        pattern_captures(*sub, out);
    }
}

} // namespace crabs::python
