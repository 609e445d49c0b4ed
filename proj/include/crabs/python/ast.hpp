#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace crabs::python {

// line is 1-based, column is 0-based (byte offset within the line).
struct Position {
    int line = 0;
    int column = 0;

    friend auto operator<=>(const Position&, const Position&) = default;
};

struct SourceRange {
    Position begin;
    Position end;
};

struct Expr;
struct Stmt;
struct Pattern;
using ExprPtr = std::unique_ptr<Expr>;
using StmtPtr = std::unique_ptr<Stmt>;
using PatternPtr = std::unique_ptr<Pattern>;
using ExprList = std::vector<ExprPtr>;
using StmtList = std::vector<StmtPtr>;

enum class ExprContext { load, store, del };

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

struct Name {
    std::string id;
    ExprContext ctx = ExprContext::load;
};

struct Constant {
    enum class Kind { number, string, bytes, boolean, none, ellipsis };
    Kind kind = Kind::none;
    std::string text;
};

// An f-string. Only the interpolated expressions are kept; literal text is
// not needed by any consumer.
struct JoinedStr {
    ExprList values;
};

struct Attribute {
    ExprPtr value;
    std::string attr;
    ExprContext ctx = ExprContext::load;
};

struct Subscript {
    ExprPtr value;
    ExprPtr slice;
    ExprContext ctx = ExprContext::load;
};

struct Slice {
    ExprPtr lower;
    ExprPtr upper;
    ExprPtr step;
};

struct Starred {
    ExprPtr value;
    ExprContext ctx = ExprContext::load;
};

// `arg` is empty for `**mapping` unpacking.
struct Keyword {
    std::optional<std::string> arg;
    ExprPtr value;
    SourceRange range;
};

struct Call {
    ExprPtr func;
    ExprList args;
    std::vector<Keyword> keywords;
};

struct BinOp {
    ExprPtr left;
    std::string op;
    ExprPtr right;
};

struct UnaryOp {
    std::string op;
    ExprPtr operand;
};

struct BoolOp {
    std::string op;
    ExprList values;
};

struct Compare {
    ExprPtr left;
    std::vector<std::string> ops;
    ExprList comparators;
};

struct IfExp {
    ExprPtr test;
    ExprPtr body;
    ExprPtr orelse;
};

struct Parameter {
    enum class Kind { positional_only, positional, var_positional, keyword_only, var_keyword };
    std::string name;
    Kind kind = Kind::positional;
    ExprPtr annotation;
    ExprPtr default_value;
};

struct Arguments {
    std::vector<Parameter> params;
};

struct Lambda {
    Arguments args;
    ExprPtr body;
};

struct NamedExpr {
    ExprPtr target;
    ExprPtr value;
};

struct Tuple {
    ExprList elts;
    ExprContext ctx = ExprContext::load;
};

struct List {
    ExprList elts;
    ExprContext ctx = ExprContext::load;
};

struct Set {
    ExprList elts;
};

// A null key marks `**mapping` unpacking.
struct Dict {
    ExprList keys;
    ExprList values;
};

struct Comprehension {
    ExprPtr target;
    ExprPtr iter;
    ExprList ifs;
    bool is_async = false;
};

struct Comp {
    enum class Kind { list, set, dict, generator };
    Kind kind = Kind::list;
    ExprPtr elt;   // key for dict comprehensions
    ExprPtr value; // dict comprehensions only
    std::vector<Comprehension> generators;
};

struct Await {
    ExprPtr value;
};

struct Yield {
    ExprPtr value;
    bool from = false;
};

struct Expr {
    using Node = std::variant<Name, Constant, JoinedStr, Attribute, Subscript, Slice, Starred, Call,
                              BinOp, UnaryOp, BoolOp, Compare, IfExp, Lambda, NamedExpr, Tuple,
                              List, Set, Dict, Comp, Await, Yield>;
    SourceRange range;
    Node node;

    template <class T>
    [[nodiscard]] const T* as() const noexcept {
        return std::get_if<T>(&node);
    }
    template <class T>
    [[nodiscard]] T* as() noexcept {
        return std::get_if<T>(&node);
    }
};

// ---------------------------------------------------------------------------
// Match patterns
// ---------------------------------------------------------------------------

struct Pattern {
    enum class Kind { value, singleton, sequence, mapping, class_pattern, star, as, alternatives, wildcard };
    Kind kind = Kind::wildcard;
    SourceRange range;
    ExprPtr value;                      // value/singleton literal, class name for class patterns
    std::vector<PatternPtr> patterns;   // sub-patterns (sequence items, mapping values, class args)
    ExprList keys;                      // mapping keys
    std::vector<std::string> kwd_attrs; // class pattern keyword names, parallel to trailing patterns
    std::optional<std::string> name;    // capture target (as / star / mapping rest)
};

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

struct ExprStmt {
    ExprPtr value;
};

struct Assign {
    ExprList targets;
    ExprPtr value;
};

struct AugAssign {
    ExprPtr target;
    std::string op;
    ExprPtr value;
};

struct AnnAssign {
    ExprPtr target;
    ExprPtr annotation;
    ExprPtr value;
};

struct Delete {
    ExprList targets;
};

struct Pass {};
struct Break {};
struct Continue {};

struct Return {
    ExprPtr value;
};

struct Raise {
    ExprPtr exc;
    ExprPtr cause;
};

struct Global {
    std::vector<std::string> names;
    bool nonlocal = false;
};

struct ImportAlias {
    std::string name;
    std::optional<std::string> asname;
};

struct Import {
    std::vector<ImportAlias> names;
};

struct ImportFrom {
    std::string module;
    int level = 0;
    std::vector<ImportAlias> names;
};

struct Assert {
    ExprPtr test;
    ExprPtr msg;
};

// `elif` chains are nested If statements in `orelse`.
struct If {
    ExprPtr test;
    StmtList body;
    StmtList orelse;
};

struct For {
    ExprPtr target;
    ExprPtr iter;
    StmtList body;
    StmtList orelse;
    bool is_async = false;
};

struct While {
    ExprPtr test;
    StmtList body;
    StmtList orelse;
};

struct ExceptHandler {
    ExprPtr type;
    std::optional<std::string> name;
    StmtList body;
    SourceRange range;
};

struct Try {
    StmtList body;
    std::vector<ExceptHandler> handlers;
    StmtList orelse;
    StmtList finalbody;
    bool star = false;
};

struct WithItem {
    ExprPtr context;
    ExprPtr target;
};

struct With {
    std::vector<WithItem> items;
    StmtList body;
    bool is_async = false;
};

struct FunctionDef {
    std::string name;
    Arguments args;
    ExprPtr returns;
    ExprList decorators;
    StmtList body;
    bool is_async = false;
};

struct ClassDef {
    std::string name;
    ExprList bases;
    std::vector<Keyword> keywords;
    ExprList decorators;
    StmtList body;
};

struct MatchCase {
    PatternPtr pattern;
    ExprPtr guard;
    StmtList body;
};

struct Match {
    ExprPtr subject;
    std::vector<MatchCase> cases;
};

struct Stmt {
    using Node = std::variant<ExprStmt, Assign, AugAssign, AnnAssign, Delete, Pass, Break, Continue,
                              Return, Raise, Global, Import, ImportFrom, Assert, If, For, While, Try,
                              With, FunctionDef, ClassDef, Match>;
    SourceRange range;
    Node node;

    template <class T>
    [[nodiscard]] const T* as() const noexcept {
        return std::get_if<T>(&node);
    }
};

struct Module {
    StmtList body;
};

} // namespace crabs::python
