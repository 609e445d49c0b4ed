#include "crabs/python/parser.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <utility>

namespace crabs::python {

namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False",  "None",   "True",    "and",      "as",     "assert", "async", "await",  "break",
    "class",  "continue", "def",   "del",      "elif",   "else",   "except", "finally", "for",
    "from",   "global", "if",      "import",   "in",     "is",     "lambda", "nonlocal", "not",
    "or",     "pass",   "raise",   "return",   "try",    "while",  "with",  "yield",
};

bool is_keyword(std::string_view word) {
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

constexpr std::array<std::string_view, 13> kAugOps = {"+=", "-=", "*=", "/=", "//=", "%=", "@=",
                                                      "&=", "|=", "^=", ">>=", "<<=", "**="};

template <class Node>
ExprPtr make(SourceRange range, Node node) {
    auto e = std::make_unique<Expr>();
    e->range = range;
    e->node = std::move(node);
    return e;
}

template <class Node>
StmtPtr make_stmt(SourceRange range, Node node) {
    auto s = std::make_unique<Stmt>();
    s->range = range;
    s->node = std::move(node);
    return s;
}

// Byte offset -> position within a token that may span lines.
Position offset_position(const Token& tok, std::size_t offset) {
    Position p = tok.begin;
    for (std::size_t k = 0; k < offset && k < tok.text.size(); ++k) {
        if (tok.text[k] == '\n') {
            ++p.line;
            p.column = 0;
        } else {
            ++p.column;
        }
    }
    return p;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    Module module() {
        Module m;
        while (cur().kind != TokenKind::end_marker) {
            if (cur().kind == TokenKind::newline) {
                ++i_;
                continue;
            }
            statement(m.body);
        }
        return m;
    }

    ExprPtr lone_expression() {
        ExprPtr e = at_kw("yield") ? yield_expr() : star_expressions();
        while (cur().kind == TokenKind::newline) {
            ++i_;
        }
        if (cur().kind != TokenKind::end_marker) {
            fail("invalid syntax");
        }
        return e;
    }

private:
    // -- token helpers ------------------------------------------------------

    [[nodiscard]] const Token& cur() const { return toks_[i_]; }
    [[nodiscard]] const Token& peek(std::size_t n = 1) const {
        return toks_[std::min(i_ + n, toks_.size() - 1)];
    }
    [[nodiscard]] Position start() const { return cur().begin; }
    [[nodiscard]] Position prev_end() const { return i_ > 0 ? toks_[i_ - 1].end : cur().begin; }
    [[nodiscard]] SourceRange since(Position begin) const { return SourceRange{begin, prev_end()}; }

    [[nodiscard]] bool at_op(std::string_view op) const {
        return cur().kind == TokenKind::op && cur().text == op;
    }
    [[nodiscard]] bool at_kw(std::string_view kw) const {
        return cur().kind == TokenKind::name && cur().text == kw;
    }
    [[nodiscard]] bool at_name() const { return cur().kind == TokenKind::name && !is_keyword(cur().text); }

    bool accept_op(std::string_view op) {
        if (at_op(op)) {
            ++i_;
            return true;
        }
        return false;
    }
    bool accept_kw(std::string_view kw) {
        if (at_kw(kw)) {
            ++i_;
            return true;
        }
        return false;
    }
    void expect_op(std::string_view op) {
        if (!accept_op(op)) {
            fail("expected '" + std::string(op) + "'");
        }
    }
    void expect_kw(std::string_view kw) {
        if (!accept_kw(kw)) {
            fail("expected '" + std::string(kw) + "'");
        }
    }
    std::string expect_name() {
        if (!at_name()) {
            fail("expected name");
        }
        return toks_[i_++].text;
    }
    void expect_newline() {
        if (cur().kind != TokenKind::newline) {
            fail("invalid syntax");
        }
        ++i_;
    }

    [[noreturn]] void fail(const std::string& message) const {
        const Token& t = cur();
        std::string near;
        if (t.kind == TokenKind::end_marker) {
            near = " (unexpected end of input)";
        } else if (t.kind == TokenKind::indent) {
            throw SyntaxError(t.begin, "unexpected indent");
        } else if (t.kind == TokenKind::newline) {
            near = " (unexpected end of line)";
        } else if (t.kind != TokenKind::dedent) {
            near = " near '" + t.text + "'";
        }
        throw SyntaxError(t.begin, message + near);
    }

    // -- statements ---------------------------------------------------------

    void statement(StmtList& out) {
        if (cur().kind == TokenKind::indent) {
            fail("unexpected indent");
        }
        if (at_kw("if")) {
            out.push_back(if_stmt());
        } else if (at_kw("while")) {
            out.push_back(while_stmt());
        } else if (at_kw("for")) {
            out.push_back(for_stmt(start(), false));
        } else if (at_kw("try")) {
            out.push_back(try_stmt());
        } else if (at_kw("with")) {
            out.push_back(with_stmt(start(), false));
        } else if (at_kw("def")) {
            out.push_back(funcdef(start(), {}, false));
        } else if (at_kw("class")) {
            out.push_back(classdef(start(), {}));
        } else if (at_op("@")) {
            out.push_back(decorated());
        } else if (at_kw("async")) {
            out.push_back(async_stmt());
        } else if (at_kw("match") && looks_like_match()) {
            out.push_back(match_stmt());
        } else {
            simple_statements(out);
        }
    }

    void simple_statements(StmtList& out) {
        out.push_back(small_statement());
        while (accept_op(";")) {
            if (cur().kind == TokenKind::newline) {
                break;
            }
            out.push_back(small_statement());
        }
        expect_newline();
    }

    StmtPtr small_statement() {
        const Position begin = start();
        if (accept_kw("pass")) {
            return make_stmt(since(begin), Pass{});
        }
        if (accept_kw("break")) {
            return make_stmt(since(begin), Break{});
        }
        if (accept_kw("continue")) {
            return make_stmt(since(begin), Continue{});
        }
        if (accept_kw("return")) {
            Return r;
            if (!at_statement_end()) {
                r.value = star_expressions();
            }
            return make_stmt(since(begin), std::move(r));
        }
        if (accept_kw("raise")) {
            Raise r;
            if (!at_statement_end()) {
                r.exc = test();
                if (accept_kw("from")) {
                    r.cause = test();
                }
            }
            return make_stmt(since(begin), std::move(r));
        }
        if (at_kw("global") || at_kw("nonlocal")) {
            Global g;
            g.nonlocal = cur().text == "nonlocal";
            ++i_;
            g.names.push_back(expect_name());
            while (accept_op(",")) {
                g.names.push_back(expect_name());
            }
            return make_stmt(since(begin), std::move(g));
        }
        if (accept_kw("del")) {
            Delete d;
            ExprPtr targets = exprlist();
            if (auto* tuple = targets->as<Tuple>()) {
                for (auto& t : tuple->elts) {
                    set_context(*t, ExprContext::del);
                    d.targets.push_back(std::move(t));
                }
            } else {
                set_context(*targets, ExprContext::del);
                d.targets.push_back(std::move(targets));
            }
            return make_stmt(since(begin), std::move(d));
        }
        if (accept_kw("assert")) {
            Assert a;
            a.test = test();
            if (accept_op(",")) {
                a.msg = test();
            }
            return make_stmt(since(begin), std::move(a));
        }
        if (accept_kw("import")) {
            Import imp;
            do {
                ImportAlias alias;
                alias.name = dotted_name();
                if (accept_kw("as")) {
                    alias.asname = expect_name();
                }
                imp.names.push_back(std::move(alias));
            } while (accept_op(","));
            return make_stmt(since(begin), std::move(imp));
        }
        if (accept_kw("from")) {
            return import_from(begin);
        }
        return expression_statement();
    }

    [[nodiscard]] bool at_statement_end() const {
        return cur().kind == TokenKind::newline || at_op(";") || cur().kind == TokenKind::end_marker;
    }

    std::string dotted_name() {
        std::string name = expect_name();
        while (accept_op(".")) {
            name += "." + expect_name();
        }
        return name;
    }

    StmtPtr import_from(Position begin) {
        ImportFrom imp;
        while (at_op(".") || at_op("...")) {
            imp.level += static_cast<int>(cur().text.size());
            ++i_;
        }
        if (!at_kw("import")) {
            imp.module = dotted_name();
        } else if (imp.level == 0) {
            fail("invalid syntax");
        }
        expect_kw("import");
        if (accept_op("*")) {
            imp.names.push_back(ImportAlias{"*", std::nullopt});
            return make_stmt(since(begin), std::move(imp));
        }
        const bool parens = accept_op("(");
        do {
            if (parens && at_op(")")) {
                break;
            }
            ImportAlias alias;
            alias.name = expect_name();
            if (accept_kw("as")) {
                alias.asname = expect_name();
            }
            imp.names.push_back(std::move(alias));
        } while (accept_op(","));
        if (parens) {
            expect_op(")");
        }
        return make_stmt(since(begin), std::move(imp));
    }

    StmtPtr expression_statement() {
        const Position begin = start();
        ExprPtr first = at_kw("yield") ? yield_expr() : star_expressions();
        if (at_op(":")) {
            ++i_;
            AnnAssign ann;
            check_single_target(*first);
            set_context(*first, ExprContext::store);
            ann.target = std::move(first);
            ann.annotation = test();
            if (accept_op("=")) {
                ann.value = at_kw("yield") ? yield_expr() : star_expressions();
            }
            return make_stmt(since(begin), std::move(ann));
        }
        if (cur().kind == TokenKind::op &&
            std::find(kAugOps.begin(), kAugOps.end(), cur().text) != kAugOps.end()) {
            AugAssign aug;
            aug.op = cur().text.substr(0, cur().text.size() - 1);
            ++i_;
            check_single_target(*first);
            set_context(*first, ExprContext::store);
            aug.target = std::move(first);
            aug.value = at_kw("yield") ? yield_expr() : star_expressions();
            return make_stmt(since(begin), std::move(aug));
        }
        if (at_op("=")) {
            Assign assign;
            assign.targets.push_back(std::move(first));
            while (accept_op("=")) {
                assign.targets.push_back(at_kw("yield") ? yield_expr() : star_expressions());
            }
            assign.value = std::move(assign.targets.back());
            assign.targets.pop_back();
            for (auto& t : assign.targets) {
                set_context(*t, ExprContext::store);
            }
            return make_stmt(since(begin), std::move(assign));
        }
        return make_stmt(since(begin), ExprStmt{std::move(first)});
    }

    void check_single_target(const Expr& e) const {
        if (e.as<Name>() == nullptr && e.as<Attribute>() == nullptr && e.as<Subscript>() == nullptr) {
            throw SyntaxError(e.range.begin, "illegal target for augmented or annotated assignment");
        }
    }

    void set_context(Expr& e, ExprContext ctx) const {
        if (auto* n = e.as<Name>()) {
            if (n->id == "__debug__" || is_keyword(n->id)) {
                throw SyntaxError(e.range.begin, "cannot assign to " + n->id);
            }
            n->ctx = ctx;
        } else if (auto* a = e.as<Attribute>()) {
            a->ctx = ctx;
        } else if (auto* s = e.as<Subscript>()) {
            s->ctx = ctx;
        } else if (auto* st = e.as<Starred>()) {
            st->ctx = ctx;
            set_context(*st->value, ctx);
        } else if (auto* t = e.as<Tuple>()) {
            t->ctx = ctx;
            for (auto& elt : t->elts) {
                set_context(*elt, ctx);
            }
        } else if (auto* l = e.as<List>()) {
            l->ctx = ctx;
            for (auto& elt : l->elts) {
                set_context(*elt, ctx);
            }
        } else {
            throw SyntaxError(e.range.begin, ctx == ExprContext::del ? "cannot delete expression"
                                                                     : "cannot assign to expression");
        }
    }

    // Parses ':' followed by an indented block or a simple statement list.
    StmtList block() {
        expect_op(":");
        StmtList body;
        if (cur().kind != TokenKind::newline) {
            simple_statements(body);
            return body;
        }
        ++i_;
        if (cur().kind != TokenKind::indent) {
            fail("expected an indented block");
        }
        ++i_;
        while (cur().kind != TokenKind::dedent && cur().kind != TokenKind::end_marker) {
            if (cur().kind == TokenKind::newline) {
                ++i_;
                continue;
            }
            statement(body);
        }
        if (cur().kind == TokenKind::dedent) {
            ++i_;
        }
        return body;
    }

    StmtPtr if_stmt() {
        const Position begin = start();
        ++i_; // 'if' or 'elif'
        If node;
        node.test = named_expression();
        node.body = block();
        if (at_kw("elif")) {
            node.orelse.push_back(if_stmt());
        } else if (accept_kw("else")) {
            node.orelse = block();
        }
        return make_stmt(since(begin), std::move(node));
    }

    StmtPtr while_stmt() {
        const Position begin = start();
        expect_kw("while");
        While node;
        node.test = named_expression();
        node.body = block();
        if (accept_kw("else")) {
            node.orelse = block();
        }
        return make_stmt(since(begin), std::move(node));
    }

    StmtPtr for_stmt(Position begin, bool is_async) {
        expect_kw("for");
        For node;
        node.is_async = is_async;
        node.target = exprlist();
        set_context(*node.target, ExprContext::store);
        expect_kw("in");
        node.iter = star_expressions();
        node.body = block();
        if (accept_kw("else")) {
            node.orelse = block();
        }
        return make_stmt(since(begin), std::move(node));
    }

    StmtPtr try_stmt() {
        const Position begin = start();
        expect_kw("try");
        Try node;
        node.body = block();
        while (at_kw("except")) {
            const Position hbegin = start();
            ++i_;
            ExceptHandler handler;
            if (accept_op("*")) {
                node.star = true;
            }
            if (!at_op(":")) {
                handler.type = test();
                if (accept_op(",")) {
                    // `except A, B:` is a Python 2 form.
                    fail("multiple exception types must be parenthesized");
                }
                if (accept_kw("as")) {
                    handler.name = expect_name();
                }
            }
            handler.body = block();
            handler.range = since(hbegin);
            node.handlers.push_back(std::move(handler));
        }
        if (accept_kw("else")) {
            if (node.handlers.empty()) {
                fail("expected 'except' or 'finally' block");
            }
            node.orelse = block();
        }
        if (accept_kw("finally")) {
            node.finalbody = block();
        }
        if (node.handlers.empty() && node.finalbody.empty()) {
            fail("expected 'except' or 'finally' block");
        }
        return make_stmt(since(begin), std::move(node));
    }

    StmtPtr with_stmt(Position begin, bool is_async) {
        expect_kw("with");
        With node;
        node.is_async = is_async;
        bool parsed = false;
        if (at_op("(")) {
            const std::size_t save = i_;
            try {
                ++i_;
                std::vector<WithItem> items;
                do {
                    if (at_op(")")) {
                        break;
                    }
                    items.push_back(with_item());
                } while (accept_op(","));
                expect_op(")");
                if (!at_op(":")) {
                    fail("invalid syntax");
                }
                node.items = std::move(items);
                parsed = true;
            } catch (const SyntaxError&) {
                i_ = save;
            }
        }
        if (!parsed) {
            do {
                node.items.push_back(with_item());
            } while (accept_op(","));
        }
        node.body = block();
        return make_stmt(since(begin), std::move(node));
    }

    WithItem with_item() {
        WithItem item;
        item.context = test();
        if (accept_kw("as")) {
            item.target = star_target();
            set_context(*item.target, ExprContext::store);
        }
        return item;
    }

    ExprPtr star_target() {
        if (at_op("(") || at_op("[")) {
            return primary();
        }
        return expr();
    }

    StmtPtr decorated() {
        const Position begin = start();
        ExprList decorators;
        while (accept_op("@")) {
            decorators.push_back(named_expression());
            expect_newline();
        }
        if (at_kw("def")) {
            return funcdef(begin, std::move(decorators), false);
        }
        if (at_kw("class")) {
            return classdef(begin, std::move(decorators));
        }
        if (accept_kw("async")) {
            if (!at_kw("def")) {
                fail("invalid syntax");
            }
            return funcdef(begin, std::move(decorators), true);
        }
        fail("invalid syntax");
    }

    StmtPtr async_stmt() {
        const Position begin = start();
        expect_kw("async");
        if (at_kw("def")) {
            return funcdef(begin, {}, true);
        }
        if (at_kw("for")) {
            return for_stmt(begin, true);
        }
        if (at_kw("with")) {
            return with_stmt(begin, true);
        }
        fail("invalid syntax");
    }

    StmtPtr funcdef(Position begin, ExprList decorators, bool is_async) {
        expect_kw("def");
        FunctionDef node;
        node.is_async = is_async;
        node.decorators = std::move(decorators);
        node.name = expect_name();
        expect_op("(");
        node.args = parameters(")", true);
        expect_op(")");
        if (accept_op("->")) {
            node.returns = test();
        }
        node.body = block();
        return make_stmt(since(begin), std::move(node));
    }

    StmtPtr classdef(Position begin, ExprList decorators) {
        expect_kw("class");
        ClassDef node;
        node.decorators = std::move(decorators);
        node.name = expect_name();
        if (accept_op("(")) {
            call_arguments(node.bases, node.keywords);
            expect_op(")");
        }
        node.body = block();
        return make_stmt(since(begin), std::move(node));
    }

    Arguments parameters(std::string_view terminator, bool annotations) {
        Arguments args;
        bool keyword_only = false;
        bool seen_default = false;
        while (!at_op(terminator)) {
            Parameter p;
            if (accept_op("/")) {
                for (auto& q : args.params) {
                    q.kind = Parameter::Kind::positional_only;
                }
            } else if (accept_op("**")) {
                p.kind = Parameter::Kind::var_keyword;
                p.name = expect_name();
                if (annotations && accept_op(":")) {
                    p.annotation = test();
                }
                args.params.push_back(std::move(p));
            } else if (accept_op("*")) {
                keyword_only = true;
                if (at_name()) {
                    p.kind = Parameter::Kind::var_positional;
                    p.name = expect_name();
                    if (annotations && accept_op(":")) {
                        p.annotation = at_op("*") ? star_expression() : test();
                    }
                    args.params.push_back(std::move(p));
                }
            } else {
                p.kind = keyword_only ? Parameter::Kind::keyword_only : Parameter::Kind::positional;
                p.name = expect_name();
                if (annotations && accept_op(":")) {
                    p.annotation = test();
                }
                if (accept_op("=")) {
                    p.default_value = test();
                    seen_default = true;
                } else if (seen_default && !keyword_only) {
                    fail("non-default argument follows default argument");
                }
                args.params.push_back(std::move(p));
            }
            if (!accept_op(",")) {
                break;
            }
        }
        return args;
    }

    // -- match statement ----------------------------------------------------

    // `match` is a soft keyword: commit only when the line has the shape
    // `match <subject>: NEWLINE INDENT case`.
    bool looks_like_match() {
        const std::size_t save = i_;
        bool ok = false;
        try {
            ++i_;
            if (cur().kind != TokenKind::newline && !at_op("=") && !at_op(".") && !at_op(":")) {
                (void)subject_expression();
                ok = at_op(":") && peek().kind == TokenKind::newline && peek(2).kind == TokenKind::indent &&
                     peek(3).kind == TokenKind::name && peek(3).text == "case";
            }
        } catch (const SyntaxError&) {
            ok = false;
        }
        i_ = save;
        return ok;
    }

    ExprPtr subject_expression() {
        const Position begin = start();
        ExprPtr first = at_op("*") ? star_expression() : named_expression();
        if (!at_op(",")) {
            return first;
        }
        Tuple t;
        t.elts.push_back(std::move(first));
        while (accept_op(",")) {
            if (at_op(":")) {
                break;
            }
            t.elts.push_back(at_op("*") ? star_expression() : named_expression());
        }
        return make(since(begin), std::move(t));
    }

    StmtPtr match_stmt() {
        const Position begin = start();
        ++i_; // 'match'
        Match node;
        node.subject = subject_expression();
        expect_op(":");
        expect_newline();
        if (cur().kind != TokenKind::indent) {
            fail("expected an indented block");
        }
        ++i_;
        while (cur().kind != TokenKind::dedent && cur().kind != TokenKind::end_marker) {
            if (cur().kind == TokenKind::newline) {
                ++i_;
                continue;
            }
            if (!at_kw("case")) {
                fail("expected 'case'");
            }
            ++i_;
            MatchCase mc;
            mc.pattern = open_patterns();
            if (accept_kw("if")) {
                mc.guard = named_expression();
            }
            mc.body = block();
            node.cases.push_back(std::move(mc));
        }
        if (cur().kind == TokenKind::dedent) {
            ++i_;
        }
        return make_stmt(since(begin), std::move(node));
    }

    static PatternPtr make_pattern(Pattern::Kind kind, SourceRange range) {
        auto p = std::make_unique<Pattern>();
        p->kind = kind;
        p->range = range;
        return p;
    }

    PatternPtr open_patterns() {
        const Position begin = start();
        PatternPtr first = maybe_star_pattern();
        if (!at_op(",")) {
            return first;
        }
        auto seq = make_pattern(Pattern::Kind::sequence, {});
        seq->patterns.push_back(std::move(first));
        while (accept_op(",")) {
            if (at_op(":") || at_kw("if")) {
                break;
            }
            seq->patterns.push_back(maybe_star_pattern());
        }
        seq->range = since(begin);
        return seq;
    }

    PatternPtr maybe_star_pattern() {
        const Position begin = start();
        if (accept_op("*")) {
            auto p = make_pattern(Pattern::Kind::star, {});
            std::string name = expect_name();
            if (name != "_") {
                p->name = std::move(name);
            }
            p->range = since(begin);
            return p;
        }
        return pattern();
    }

    PatternPtr pattern() {
        const Position begin = start();
        PatternPtr p = or_pattern();
        if (accept_kw("as")) {
            auto as = make_pattern(Pattern::Kind::as, {});
            as->patterns.push_back(std::move(p));
            as->name = expect_name();
            as->range = since(begin);
            return as;
        }
        return p;
    }

    PatternPtr or_pattern() {
        const Position begin = start();
        PatternPtr first = closed_pattern();
        if (!at_op("|")) {
            return first;
        }
        auto alt = make_pattern(Pattern::Kind::alternatives, {});
        alt->patterns.push_back(std::move(first));
        while (accept_op("|")) {
            alt->patterns.push_back(closed_pattern());
        }
        alt->range = since(begin);
        return alt;
    }

    PatternPtr closed_pattern() {
        const Position begin = start();
        if (cur().kind == TokenKind::number || at_op("-") || cur().kind == TokenKind::string) {
            auto p = make_pattern(Pattern::Kind::value, {});
            p->value = arith_expr();
            p->range = since(begin);
            return p;
        }
        if (at_kw("None") || at_kw("True") || at_kw("False")) {
            auto p = make_pattern(Pattern::Kind::singleton, {});
            p->value = atom();
            p->range = since(begin);
            return p;
        }
        if (at_name()) {
            if (cur().text == "_" && !(peek().kind == TokenKind::op && (peek().text == "." || peek().text == "("))) {
                ++i_;
                return make_pattern(Pattern::Kind::wildcard, since(begin));
            }
            ExprPtr name = make(cur_range(), Name{cur().text, ExprContext::load});
            ++i_;
            bool dotted = false;
            while (accept_op(".")) {
                dotted = true;
                const Position attr_begin = name->range.begin;
                std::string attr = expect_name();
                name = make(since(attr_begin), Attribute{std::move(name), std::move(attr), ExprContext::load});
            }
            if (at_op("(")) {
                return class_pattern(begin, std::move(name));
            }
            if (dotted) {
                auto p = make_pattern(Pattern::Kind::value, since(begin));
                p->value = std::move(name);
                return p;
            }
            auto p = make_pattern(Pattern::Kind::as, since(begin));
            p->name = name->as<Name>()->id;
            return p;
        }
        if (at_op("(") || at_op("[")) {
            const bool paren = at_op("(");
            const std::string close = paren ? ")" : "]";
            ++i_;
            auto seq = make_pattern(Pattern::Kind::sequence, {});
            bool comma = false;
            while (!at_op(close)) {
                seq->patterns.push_back(maybe_star_pattern());
                if (!accept_op(",")) {
                    break;
                }
                comma = true;
            }
            expect_op(close);
            if (paren && !comma && seq->patterns.size() == 1 && seq->patterns[0]->kind != Pattern::Kind::star) {
                return std::move(seq->patterns[0]);
            }
            seq->range = since(begin);
            return seq;
        }
        if (accept_op("{")) {
            auto map = make_pattern(Pattern::Kind::mapping, {});
            while (!at_op("}")) {
                if (accept_op("**")) {
                    map->name = expect_name();
                } else {
                    PatternPtr key = closed_pattern();
                    if (!key->value) {
                        fail("mapping pattern keys may only match literals and attribute lookups");
                    }
                    map->keys.push_back(std::move(key->value));
                    expect_op(":");
                    map->patterns.push_back(pattern());
                }
                if (!accept_op(",")) {
                    break;
                }
            }
            expect_op("}");
            map->range = since(begin);
            return map;
        }
        fail("invalid pattern");
    }

    PatternPtr class_pattern(Position begin, ExprPtr cls) {
        expect_op("(");
        auto p = make_pattern(Pattern::Kind::class_pattern, {});
        p->value = std::move(cls);
        std::vector<PatternPtr> keyword_patterns;
        while (!at_op(")")) {
            if (at_name() && peek().kind == TokenKind::op && peek().text == "=") {
                p->kwd_attrs.push_back(expect_name());
                expect_op("=");
                keyword_patterns.push_back(pattern());
            } else {
                if (!keyword_patterns.empty()) {
                    fail("positional patterns follow keyword patterns");
                }
                p->patterns.push_back(pattern());
            }
            if (!accept_op(",")) {
                break;
            }
        }
        expect_op(")");
        for (auto& kp : keyword_patterns) {
            p->patterns.push_back(std::move(kp));
        }
        p->range = since(begin);
        return p;
    }

    [[nodiscard]] SourceRange cur_range() const { return SourceRange{cur().begin, cur().end}; }

    // -- expressions --------------------------------------------------------

    // star_expressions: an expression list that becomes a tuple when it
    // contains a comma; starred items are allowed.
    ExprPtr star_expressions() {
        const Position begin = start();
        ExprPtr first = at_op("*") ? star_expression() : named_expression();
        if (!at_op(",")) {
            return first;
        }
        Tuple t;
        t.elts.push_back(std::move(first));
        while (accept_op(",")) {
            if (!starts_expression()) {
                break;
            }
            t.elts.push_back(at_op("*") ? star_expression() : named_expression());
        }
        return make(since(begin), std::move(t));
    }

    [[nodiscard]] bool starts_expression() const {
        const Token& t = cur();
        switch (t.kind) {
        case TokenKind::name:
            return !is_keyword(t.text) || t.text == "None" || t.text == "True" || t.text == "False" ||
                   t.text == "not" || t.text == "lambda" || t.text == "await" || t.text == "yield";
        case TokenKind::number:
        case TokenKind::string:
            return true;
        case TokenKind::op:
            return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" || t.text == "+" ||
                   t.text == "~" || t.text == "*" || t.text == "..." || t.text == "**";
        default:
            return false;
        }
    }

    ExprPtr star_expression() {
        const Position begin = start();
        expect_op("*");
        ExprPtr value = expr();
        return make(since(begin), Starred{std::move(value), ExprContext::load});
    }

    // Target list for `for` and `del`: bitwise-or level expressions.
    ExprPtr exprlist() {
        const Position begin = start();
        ExprPtr first = at_op("*") ? star_expression() : expr();
        if (!at_op(",")) {
            return first;
        }
        Tuple t;
        t.elts.push_back(std::move(first));
        while (accept_op(",")) {
            if (at_kw("in") || at_statement_end() || at_op("=")) {
                break;
            }
            t.elts.push_back(at_op("*") ? star_expression() : expr());
        }
        return make(since(begin), std::move(t));
    }

    ExprPtr named_expression() {
        if (at_name() && peek().kind == TokenKind::op && peek().text == ":=") {
            const Position begin = start();
            ExprPtr target = make(cur_range(), Name{cur().text, ExprContext::store});
            i_ += 2;
            ExprPtr value = test();
            return make(since(begin), NamedExpr{std::move(target), std::move(value)});
        }
        return test();
    }

    ExprPtr test() {
        if (at_kw("lambda")) {
            return lambda(true);
        }
        const Position begin = start();
        ExprPtr body = or_test();
        if (at_kw("if")) {
            // Comprehension conditions are handled by the caller via or_test,
            // so an `if` here is always a conditional expression.
            ++i_;
            ExprPtr cond = or_test();
            expect_kw("else");
            ExprPtr orelse = test();
            return make(since(begin), IfExp{std::move(cond), std::move(body), std::move(orelse)});
        }
        return body;
    }

    ExprPtr test_nocond() {
        if (at_kw("lambda")) {
            return lambda(false);
        }
        return or_test();
    }

    ExprPtr lambda(bool allow_conditional) {
        const Position begin = start();
        expect_kw("lambda");
        Lambda node;
        node.args = parameters(":", false);
        expect_op(":");
        node.body = allow_conditional ? test() : test_nocond();
        return make(since(begin), std::move(node));
    }

    ExprPtr or_test() {
        const Position begin = start();
        ExprPtr first = and_test();
        if (!at_kw("or")) {
            return first;
        }
        BoolOp node{"or", {}};
        node.values.push_back(std::move(first));
        while (accept_kw("or")) {
            node.values.push_back(and_test());
        }
        return make(since(begin), std::move(node));
    }

    ExprPtr and_test() {
        const Position begin = start();
        ExprPtr first = not_test();
        if (!at_kw("and")) {
            return first;
        }
        BoolOp node{"and", {}};
        node.values.push_back(std::move(first));
        while (accept_kw("and")) {
            node.values.push_back(not_test());
        }
        return make(since(begin), std::move(node));
    }

    ExprPtr not_test() {
        const Position begin = start();
        if (accept_kw("not")) {
            ExprPtr operand = not_test();
            return make(since(begin), UnaryOp{"not", std::move(operand)});
        }
        return comparison();
    }

    std::optional<std::string> comparison_operator() {
        if (cur().kind == TokenKind::op) {
            static constexpr std::array<std::string_view, 6> ops = {"<", ">", "==", ">=", "<=", "!="};
            if (std::find(ops.begin(), ops.end(), cur().text) != ops.end()) {
                return toks_[i_++].text;
            }
            return std::nullopt;
        }
        if (at_kw("in")) {
            ++i_;
            return "in";
        }
        if (at_kw("not") && peek().kind == TokenKind::name && peek().text == "in") {
            i_ += 2;
            return "not in";
        }
        if (at_kw("is")) {
            ++i_;
            return accept_kw("not") ? "is not" : "is";
        }
        return std::nullopt;
    }

    ExprPtr comparison() {
        const Position begin = start();
        ExprPtr left = expr();
        Compare node;
        while (auto op = comparison_operator()) {
            node.ops.push_back(*op);
            node.comparators.push_back(expr());
        }
        if (node.ops.empty()) {
            return left;
        }
        node.left = std::move(left);
        return make(since(begin), std::move(node));
    }

    template <class Next>
    ExprPtr binary_level(std::initializer_list<std::string_view> ops, Next next) {
        const Position begin = start();
        ExprPtr left = (this->*next)();
        while (cur().kind == TokenKind::op && std::find(ops.begin(), ops.end(), cur().text) != ops.end()) {
            std::string op = toks_[i_++].text;
            ExprPtr right = (this->*next)();
            left = make(since(begin), BinOp{std::move(left), std::move(op), std::move(right)});
        }
        return left;
    }

    ExprPtr expr() { return binary_level({"|"}, &Parser::xor_expr); }
    ExprPtr xor_expr() { return binary_level({"^"}, &Parser::and_expr); }
    ExprPtr and_expr() { return binary_level({"&"}, &Parser::shift_expr); }
    ExprPtr shift_expr() { return binary_level({"<<", ">>"}, &Parser::arith_expr); }
    ExprPtr arith_expr() { return binary_level({"+", "-"}, &Parser::term); }
    ExprPtr term() { return binary_level({"*", "/", "%", "//", "@"}, &Parser::factor); }

    ExprPtr factor() {
        const Position begin = start();
        if (at_op("+") || at_op("-") || at_op("~")) {
            std::string op = toks_[i_++].text;
            ExprPtr operand = factor();
            return make(since(begin), UnaryOp{std::move(op), std::move(operand)});
        }
        return power();
    }

    ExprPtr power() {
        const Position begin = start();
        ExprPtr base;
        if (at_kw("await")) {
            ++i_;
            ExprPtr value = primary();
            base = make(since(begin), Await{std::move(value)});
        } else {
            base = primary();
        }
        if (accept_op("**")) {
            ExprPtr exponent = factor();
            return make(since(begin), BinOp{std::move(base), "**", std::move(exponent)});
        }
        return base;
    }

    ExprPtr primary() {
        const Position begin = start();
        ExprPtr e = atom();
        while (true) {
            if (accept_op("(")) {
                Call call;
                call.func = std::move(e);
                call_arguments(call.args, call.keywords);
                expect_op(")");
                e = make(since(begin), std::move(call));
            } else if (accept_op("[")) {
                ExprPtr slice = subscript_list();
                expect_op("]");
                e = make(since(begin), Subscript{std::move(e), std::move(slice), ExprContext::load});
            } else if (accept_op(".")) {
                std::string attr = expect_name();
                e = make(since(begin), Attribute{std::move(e), std::move(attr), ExprContext::load});
            } else {
                return e;
            }
        }
    }

    void call_arguments(ExprList& args, std::vector<Keyword>& keywords) {
        while (!at_op(")")) {
            const Position begin = start();
            if (accept_op("**")) {
                Keyword kw;
                kw.value = test();
                kw.range = since(begin);
                keywords.push_back(std::move(kw));
            } else if (at_op("*")) {
                args.push_back(star_expression());
            } else if (at_name() && peek().kind == TokenKind::op && peek().text == "=") {
                Keyword kw;
                kw.arg = expect_name();
                expect_op("=");
                kw.value = test();
                kw.range = since(begin);
                keywords.push_back(std::move(kw));
            } else {
                ExprPtr value = named_expression();
                if (at_kw("for") || at_kw("async")) {
                    value = comprehension(begin, Comp::Kind::generator, std::move(value), nullptr);
                }
                args.push_back(std::move(value));
            }
            if (!accept_op(",")) {
                break;
            }
        }
    }

    ExprPtr subscript_list() {
        const Position begin = start();
        ExprPtr first = subscript_item();
        if (!at_op(",")) {
            return first;
        }
        Tuple t;
        t.elts.push_back(std::move(first));
        while (accept_op(",")) {
            if (at_op("]")) {
                break;
            }
            t.elts.push_back(subscript_item());
        }
        return make(since(begin), std::move(t));
    }

    ExprPtr subscript_item() {
        const Position begin = start();
        if (at_op("*")) {
            return star_expression();
        }
        ExprPtr lower;
        if (!at_op(":")) {
            lower = named_expression();
            if (!at_op(":")) {
                return lower;
            }
        }
        expect_op(":");
        Slice s;
        s.lower = std::move(lower);
        if (!at_op(":") && !at_op("]") && !at_op(",")) {
            s.upper = test();
        }
        if (accept_op(":")) {
            if (!at_op("]") && !at_op(",")) {
                s.step = test();
            }
        }
        return make(since(begin), std::move(s));
    }

    ExprPtr comprehension(Position begin, Comp::Kind kind, ExprPtr elt, ExprPtr value) {
        Comp comp;
        comp.kind = kind;
        comp.elt = std::move(elt);
        comp.value = std::move(value);
        while (at_kw("for") || (at_kw("async") && peek().text == "for")) {
            Comprehension gen;
            if (accept_kw("async")) {
                gen.is_async = true;
            }
            expect_kw("for");
            gen.target = exprlist();
            set_context(*gen.target, ExprContext::store);
            expect_kw("in");
            gen.iter = or_test();
            while (accept_kw("if")) {
                gen.ifs.push_back(test_nocond());
            }
            comp.generators.push_back(std::move(gen));
        }
        return make(since(begin), std::move(comp));
    }

    ExprPtr yield_expr() {
        const Position begin = start();
        expect_kw("yield");
        Yield y;
        if (accept_kw("from")) {
            y.from = true;
            y.value = test();
        } else if (starts_expression()) {
            y.value = star_expressions();
        }
        return make(since(begin), std::move(y));
    }

    ExprPtr atom() {
        const Position begin = start();
        const Token& t = cur();
        switch (t.kind) {
        case TokenKind::name: {
            if (t.text == "None" || t.text == "True" || t.text == "False") {
                ++i_;
                return make(since(begin), Constant{t.text == "None" ? Constant::Kind::none : Constant::Kind::boolean,
                                                   t.text});
            }
            if (is_keyword(t.text)) {
                fail("invalid syntax");
            }
            ++i_;
            return make(since(begin), Name{t.text, ExprContext::load});
        }
        case TokenKind::number:
            ++i_;
            return make(since(begin), Constant{Constant::Kind::number, t.text});
        case TokenKind::string:
            return strings();
        case TokenKind::op:
            if (accept_op("...")) {
                return make(since(begin), Constant{Constant::Kind::ellipsis, "..."});
            }
            if (accept_op("(")) {
                return parenthesized(begin);
            }
            if (accept_op("[")) {
                return list_display(begin);
            }
            if (accept_op("{")) {
                return brace_display(begin);
            }
            fail("invalid syntax");
        default:
            fail("invalid syntax");
        }
    }

    ExprPtr parenthesized(Position begin) {
        if (accept_op(")")) {
            return make(since(begin), Tuple{});
        }
        if (at_kw("yield")) {
            ExprPtr y = yield_expr();
            expect_op(")");
            return y;
        }
        ExprPtr first = at_op("*") ? star_expression() : named_expression();
        if (at_kw("for") || at_kw("async")) {
            ExprPtr gen = comprehension(begin, Comp::Kind::generator, std::move(first), nullptr);
            expect_op(")");
            gen->range = since(begin);
            return gen;
        }
        if (!at_op(",")) {
            expect_op(")");
            return first;
        }
        Tuple t;
        t.elts.push_back(std::move(first));
        while (accept_op(",")) {
            if (at_op(")")) {
                break;
            }
            t.elts.push_back(at_op("*") ? star_expression() : named_expression());
        }
        expect_op(")");
        return make(since(begin), std::move(t));
    }

    ExprPtr list_display(Position begin) {
        List l;
        if (accept_op("]")) {
            return make(since(begin), std::move(l));
        }
        ExprPtr first = at_op("*") ? star_expression() : named_expression();
        if (at_kw("for") || at_kw("async")) {
            ExprPtr comp = comprehension(begin, Comp::Kind::list, std::move(first), nullptr);
            expect_op("]");
            comp->range = since(begin);
            return comp;
        }
        l.elts.push_back(std::move(first));
        while (accept_op(",")) {
            if (at_op("]")) {
                break;
            }
            l.elts.push_back(at_op("*") ? star_expression() : named_expression());
        }
        expect_op("]");
        return make(since(begin), std::move(l));
    }

    ExprPtr brace_display(Position begin) {
        if (accept_op("}")) {
            return make(since(begin), Dict{});
        }
        if (at_op("**")) {
            return dict_display(begin, nullptr, nullptr);
        }
        if (at_op("*")) {
            return set_display(begin, star_expression());
        }
        ExprPtr first = named_expression();
        if (accept_op(":")) {
            ExprPtr value = test();
            if (at_kw("for") || at_kw("async")) {
                ExprPtr comp = comprehension(begin, Comp::Kind::dict, std::move(first), std::move(value));
                expect_op("}");
                comp->range = since(begin);
                return comp;
            }
            return dict_display(begin, std::move(first), std::move(value));
        }
        if (at_kw("for") || at_kw("async")) {
            ExprPtr comp = comprehension(begin, Comp::Kind::set, std::move(first), nullptr);
            expect_op("}");
            comp->range = since(begin);
            return comp;
        }
        return set_display(begin, std::move(first));
    }

    ExprPtr dict_display(Position begin, ExprPtr first_key, ExprPtr first_value) {
        Dict d;
        bool need_item = true;
        if (first_value) {
            d.keys.push_back(std::move(first_key));
            d.values.push_back(std::move(first_value));
            need_item = accept_op(",");
        }
        while (need_item && !at_op("}")) {
            if (accept_op("**")) {
                d.keys.push_back(nullptr);
                d.values.push_back(expr());
            } else {
                d.keys.push_back(test());
                expect_op(":");
                d.values.push_back(test());
            }
            need_item = accept_op(",");
        }
        expect_op("}");
        return make(since(begin), std::move(d));
    }

    ExprPtr set_display(Position begin, ExprPtr first) {
        Set s;
        s.elts.push_back(std::move(first));
        while (accept_op(",")) {
            if (at_op("}")) {
                break;
            }
            s.elts.push_back(at_op("*") ? star_expression() : named_expression());
        }
        expect_op("}");
        return make(since(begin), std::move(s));
    }

    // Adjacent string literals concatenate. f-string replacement fields are
    // parsed into expressions; the literal text is discarded.
    ExprPtr strings() {
        const Position begin = start();
        bool formatted = false;
        bool bytes = false;
        JoinedStr joined;
        std::string text;
        while (cur().kind == TokenKind::string) {
            const Token& tok = cur();
            std::size_t prefix_len = 0;
            bool is_f = false;
            while (prefix_len < tok.text.size() && tok.text[prefix_len] != '\'' && tok.text[prefix_len] != '"') {
                const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(tok.text[prefix_len])));
                is_f = is_f || c == 'f';
                bytes = bytes || c == 'b';
                ++prefix_len;
            }
            const char q = tok.text[prefix_len];
            const bool triple = tok.text.size() >= prefix_len + 6 && tok.text[prefix_len + 1] == q &&
                                tok.text[prefix_len + 2] == q;
            const std::size_t quote_len = triple ? 3 : 1;
            const std::size_t body_begin = prefix_len + quote_len;
            const std::size_t body_len = tok.text.size() - body_begin - quote_len;
            if (is_f) {
                formatted = true;
                fstring_fields(tok, body_begin, body_len, joined.values);
            }
            text += tok.text.substr(body_begin, body_len);
            ++i_;
        }
        if (formatted) {
            return make(since(begin), std::move(joined));
        }
        return make(since(begin), Constant{bytes ? Constant::Kind::bytes : Constant::Kind::string, std::move(text)});
    }

    static void fstring_fields(const Token& tok, std::size_t body_begin, std::size_t body_len, ExprList& out) {
        const std::string_view text(tok.text);
        const std::size_t body_end = body_begin + body_len;
        std::size_t k = body_begin;
        while (k < body_end) {
            const char c = text[k];
            if (c == '{') {
                if (k + 1 < body_end && text[k + 1] == '{') {
                    k += 2;
                    continue;
                }
                k = replacement_field(tok, k + 1, body_end, out);
                continue;
            }
            ++k;
        }
    }

    // Parses one `{expr[=][!c][:spec]}` starting just after '{'. Returns the
    // offset after the closing '}'.
    static std::size_t replacement_field(const Token& tok, std::size_t begin, std::size_t end, ExprList& out) {
        const std::string_view text(tok.text);
        int depth = 0;
        std::size_t k = begin;
        char in_string = 0;
        for (; k < end; ++k) {
            const char c = text[k];
            if (in_string != 0) {
                if (c == in_string) {
                    in_string = 0;
                }
                continue;
            }
            if (c == '\'' || c == '"') {
                in_string = c;
            } else if (c == '(' || c == '[' || c == '{') {
                ++depth;
            } else if ((c == ')' || c == ']' || c == '}') && depth > 0) {
                --depth;
            } else if (depth == 0) {
                if (c == '}' || c == ':') {
                    break;
                }
                if (c == '!' && k + 1 < end && text[k + 1] != '=') {
                    break;
                }
                if (c == '=' && k + 1 < end && (text[k + 1] == '}' || text[k + 1] == '!' || text[k + 1] == ':') &&
                    k > begin && text[k - 1] != '=' && text[k - 1] != '!' && text[k - 1] != '<' &&
                    text[k - 1] != '>') {
                    break;
                }
            }
        }
        if (k >= end) {
            throw SyntaxError(offset_position(tok, begin), "f-string: expecting '}'");
        }
        const std::string_view expr_text = text.substr(begin, k - begin);
        const Position where = offset_position(tok, begin);
        out.push_back(parse_expression(expr_text, where.line, where.column));
        if (text[k] == '=') {
            ++k;
        }
        if (text[k] == '!') {
            k += 2;
        }
        if (k < end && text[k] == ':') {
            ++k;
            int spec_depth = 0;
            while (k < end) {
                if (text[k] == '{') {
                    k = replacement_field(tok, k + 1, end, out);
                    continue;
                }
                if (text[k] == '}') {
                    if (spec_depth == 0) {
                        break;
                    }
                    --spec_depth;
                }
                ++k;
            }
        }
        if (k >= end || text[k] != '}') {
            throw SyntaxError(offset_position(tok, k < end ? k : end), "f-string: expecting '}'");
        }
        return k + 1;
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
};

} // namespace

Module parse_module(std::string_view source) {
    return Parser(tokenize(source)).module();
}

ExprPtr parse_expression(std::string_view source, int line, int column) {
    // Wrapping in parentheses permits leading whitespace and line breaks, as
    // inside an f-string replacement field.
    std::string wrapped;
    wrapped.reserve(source.size() + 2);
    wrapped.push_back('(');
    wrapped.append(source);
    wrapped.push_back(')');
    if (source.find_first_not_of(" \t\r\n") == std::string_view::npos) {
        throw SyntaxError(Position{line, column}, "f-string: empty expression not allowed");
    }
    return Parser(tokenize(wrapped, line, column - 1)).lone_expression();
}

} // namespace crabs::python
