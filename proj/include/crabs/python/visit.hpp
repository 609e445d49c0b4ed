#pragma once

#include "crabs/python/ast.hpp"

#include <functional>

namespace crabs::python {

using ExprVisitor = std::function<void(const Expr&)>;
using StmtVisitor = std::function<void(const Stmt&)>;

// Direct children only.
void for_each_child(const Expr& e, const ExprVisitor& on_expr);
void for_each_child(const Pattern& p, const ExprVisitor& on_expr, const std::function<void(const Pattern&)>& on_pattern);
void for_each_child(const Stmt& s, const ExprVisitor& on_expr, const StmtVisitor& on_stmt);

// Pre-order traversal of every expression below (and including) `e`.
void walk(const Expr& e, const ExprVisitor& on_expr);

// Pre-order traversal of a statement subtree, including nested blocks,
// function and class bodies.
void walk(const Stmt& s, const ExprVisitor& on_expr, const StmtVisitor& on_stmt = {});

// Names bound by a match pattern (captures, star and mapping rest).
void pattern_captures(const Pattern& p, std::vector<std::string>& out);

} // namespace crabs::python
