#include "crabs/name_events.hpp"

#include "crabs/python/visit.hpp"

#include <unordered_set>

namespace crabs::analysis {

using namespace crabs::python;

std::string_view to_string(NameAction action) noexcept {
    switch (action) {
    case NameAction::define: return "define";
    case NameAction::use: return "use";
    case NameAction::maybe_define: return "maybe-define";
    }
    return "?";
}

std::string_view to_string(NameRole role) noexcept {
    switch (role) {
    case NameRole::plain: return "plain";
    case NameRole::call_argument: return "call-argument";
    case NameRole::method_base: return "method-base";
    case NameRole::iterated: return "iterated";
    case NameRole::item_store: return "item-store";
    case NameRole::augmented: return "augmented";
    case NameRole::loop_target: return "loop-target";
    case NameRole::deletion: return "deletion";
    case NameRole::import_binding: return "import";
    case NameRole::declaration: return "declaration";
    }
    return "?";
}

std::string_view to_string(Conditionality c) noexcept {
    switch (c) {
    case Conditionality::unconditional: return "unconditional";
    case Conditionality::conditional: return "conditional";
    case Conditionality::loop_conditional: return "loop-conditional";
    }
    return "?";
}

bool is_builtin(std::string_view name) noexcept {
    static const std::unordered_set<std::string_view> table = {
        // functions and types
        "abs", "aiter", "all", "anext", "any", "ascii", "bin", "bool", "breakpoint", "bytearray",
        "bytes", "callable", "chr", "classmethod", "compile", "complex", "copyright", "credits",
        "delattr", "dict", "dir", "divmod", "enumerate", "eval", "exec", "exit", "filter", "float",
        "format", "frozenset", "getattr", "globals", "hasattr", "hash", "help", "hex", "id", "input",
        "int", "isinstance", "issubclass", "iter", "len", "license", "list", "locals", "map", "max",
        "memoryview", "min", "next", "object", "oct", "open", "ord", "pow", "print", "property",
        "quit", "range", "repr", "reversed", "round", "set", "setattr", "slice", "sorted",
        "staticmethod", "str", "sum", "super", "tuple", "type", "vars", "zip", "__import__",
        "__name__", "__file__", "__doc__", "__builtins__", "True", "False", "None", "Ellipsis",
        "NotImplemented",
        // exceptions and warnings
        "BaseException", "Exception", "ArithmeticError", "AssertionError", "AttributeError",
        "BlockingIOError", "BufferError", "ConnectionError", "EOFError", "EnvironmentError",
        "FileExistsError", "FileNotFoundError", "FloatingPointError", "GeneratorExit", "IOError",
        "ImportError", "IndentationError", "IndexError", "InterruptedError", "KeyError",
        "KeyboardInterrupt", "LookupError", "MemoryError", "ModuleNotFoundError", "NameError",
        "NotImplementedError", "OSError", "OverflowError", "PermissionError", "RecursionError",
        "ReferenceError", "RuntimeError", "StopAsyncIteration", "StopIteration", "SyntaxError",
        "SystemError", "SystemExit", "TimeoutError", "TypeError", "UnicodeDecodeError",
        "UnicodeEncodeError", "UnicodeError", "ValueError", "ZeroDivisionError", "Warning",
        "UserWarning", "DeprecationWarning", "FutureWarning", "RuntimeWarning", "BytesWarning",
        // notebook kernel globals
        "display", "get_ipython",
    };
    return table.count(name) != 0;
}

bool AnalysisScope::excluded(const std::string& name) const {
    if (!track_imports && imported.count(name) != 0) {
        return true;
    }
    return is_builtin(name) && data_defined.count(name) == 0;
}

namespace {

void code_names_in(const Stmt& s, std::set<std::string>& out) {
    if (const auto* f = s.as<FunctionDef>()) {
        out.insert(f->name);
        return;
    }
    if (const auto* c = s.as<ClassDef>()) {
        out.insert(c->name);
        return;
    }
    for_each_child(s, [](const Expr&) {}, [&](const Stmt& child) { code_names_in(child, out); });
}

// Names a function (or class) body binds locally.
std::set<std::string> local_bindings(const Arguments* args, const StmtList& body) {
    std::set<std::string> locals;
    std::set<std::string> declared_global;
    if (args != nullptr) {
        for (const auto& p : args->params) {
            locals.insert(p.name);
        }
    }
    auto on_expr = [&](const Expr& e) {
        if (const auto* n = e.as<Name>(); n != nullptr && n->ctx != ExprContext::load) {
            locals.insert(n->id);
        }
    };
    auto on_stmt = [&](const Stmt& s) {
        if (const auto* f = s.as<FunctionDef>()) {
            locals.insert(f->name);
        } else if (const auto* c = s.as<ClassDef>()) {
            locals.insert(c->name);
        } else if (const auto* imp = s.as<Import>()) {
            for (const auto& a : imp->names) {
                locals.insert(a.asname ? *a.asname : a.name.substr(0, a.name.find('.')));
            }
        } else if (const auto* from = s.as<ImportFrom>()) {
            for (const auto& a : from->names) {
                if (a.name != "*") {
                    locals.insert(a.asname ? *a.asname : a.name);
                }
            }
        } else if (const auto* t = s.as<Try>()) {
            for (const auto& h : t->handlers) {
                if (h.name) {
                    locals.insert(*h.name);
                }
            }
        } else if (const auto* m = s.as<Match>()) {
            for (const auto& c : m->cases) {
                std::vector<std::string> captured;
                pattern_captures(*c.pattern, captured);
                locals.insert(captured.begin(), captured.end());
            }
        } else if (const auto* g = s.as<Global>()) {
            declared_global.insert(g->names.begin(), g->names.end());
        }
    };
    for (const auto& s : body) {
        walk(*s, on_expr, on_stmt);
    }
    for (const auto& name : declared_global) {
        locals.erase(name);
    }
    return locals;
}

bool irrefutable(const Pattern& p) {
    switch (p.kind) {
    case Pattern::Kind::wildcard: return true;
    case Pattern::Kind::as: return p.patterns.empty() || irrefutable(*p.patterns.front());
    case Pattern::Kind::alternatives:
        for (const auto& alt : p.patterns) {
            if (irrefutable(*alt)) {
                return true;
            }
        }
        return false;
    default: return false;
    }
}

class Collector {
public:
    Collector(const SyntaxTree& tree, AnalysisScope& scope) : tree_(tree), scope_(scope) {}

    CellEvents run() {
        block(tree_.module.body);
        return std::move(out_);
    }

private:
    struct Push {
        Push(std::vector<Frame>& frames, Frame f) : frames_(frames) { frames_.push_back(f); }
        ~Push() { frames_.pop_back(); }
        Push(const Push&) = delete;
        Push& operator=(const Push&) = delete;
        std::vector<Frame>& frames_;
    };

    Frame branch(int construct, int index, int count) const {
        return Frame{Frame::Type::branch, construct, index, count};
    }
    Frame loop_frame(int construct) const { return Frame{Frame::Type::loop, construct, 0, 1}; }

    Conditionality conditionality() const {
        Conditionality c = Conditionality::unconditional;
        for (const auto& f : frames_) {
            if (f.type == Frame::Type::loop) {
                return Conditionality::loop_conditional;
            }
            c = Conditionality::conditional;
        }
        return c;
    }

    bool is_local(const std::string& name) const {
        for (const auto& scope : locals_) {
            if (scope.count(name) != 0) {
                return true;
            }
        }
        return false;
    }

    void note(Position where, const char* code, std::string message) {
        out_.diagnostics.push_back(Diagnostic{tree_.cell_index, tree_.original(where), code, std::move(message)});
    }

    void push_event(std::string name, NameAction action, NameKind kind, NameRole role, Position where, int loop) {
        NameEvent ev;
        ev.name = std::move(name);
        ev.action = action;
        ev.kind = kind;
        ev.conditionality = conditionality();
        ev.position = tree_.original(where);
        ev.role = role;
        ev.frames = frames_;
        ev.loop = loop;
        out_.events.push_back(std::move(ev));
    }

    void use(const std::string& name, NameRole role, Position where, int loop = -1) {
        if (is_local(name)) {
            return;
        }
        if (scope_.code_names.count(name) != 0) {
            if (declared_.count(name) == 0) {
                push_event(name, NameAction::use, NameKind::code, NameRole::plain, where, -1);
            }
            return;
        }
        if (scope_.excluded(name)) {
            return;
        }
        push_event(name, NameAction::use, NameKind::data, role, where, loop);
    }

    void define(const std::string& name, NameAction action, NameRole role, Position where, int loop = -1) {
        if (is_local(name)) {
            return;
        }
        if (scope_.code_names.count(name) != 0) {
            note(where, diag::kNameReuse,
                 "'" + name + "' is bound as data but also defined as a function or class; the data binding is ignored");
            return;
        }
        scope_.data_defined.insert(name);
        scope_.imported.erase(name);
        push_event(name, action, NameKind::data, role, where, loop);
    }

    void declare(const std::string& name, Position where) {
        declared_.insert(name);
        push_event(name, NameAction::define, NameKind::code, NameRole::declaration, where, -1);
    }

    // ---- statements -------------------------------------------------------

    void block(const StmtList& body) {
        for (const auto& s : body) {
            statement(*s);
        }
    }

    void statement(const Stmt& s) {
        std::visit([&](const auto& n) { on(n, s); }, s.node);
    }

    void on(const ExprStmt& n, const Stmt&) { expression(*n.value); }
    void on(const Pass&, const Stmt&) {}
    void on(const Break&, const Stmt&) {}
    void on(const Continue&, const Stmt&) {}

    void on(const Return& n, const Stmt&) {
        if (n.value) {
            expression(*n.value);
        }
    }

    void on(const Raise& n, const Stmt&) {
        if (n.exc) {
            expression(*n.exc);
        }
        if (n.cause) {
            expression(*n.cause);
        }
    }

    void on(const Assert& n, const Stmt&) {
        expression(*n.test);
        if (n.msg) {
            expression(*n.msg);
        }
    }

    void on(const Global&, const Stmt&) {}

    void on(const Assign& n, const Stmt&) {
        expression(*n.value);
        for (const auto& t : n.targets) {
            store(*t, NameAction::define, NameRole::plain);
        }
    }

    void on(const AnnAssign& n, const Stmt&) {
        if (n.value) {
            expression(*n.value);
        }
        expression(*n.annotation);
        if (n.value) {
            store(*n.target, NameAction::define, NameRole::plain);
        } else if (!n.target->as<Name>()) {
            store_through(*n.target);
        }
    }

    void on(const AugAssign& n, const Stmt&) {
        if (const auto* name = n.target->as<Name>()) {
            use(name->id, NameRole::augmented, n.target->range.begin);
            define(name->id, NameAction::define, NameRole::augmented, n.target->range.begin);
        } else {
            store_through(*n.target);
        }
        expression(*n.value);
    }

    void on(const Delete& n, const Stmt&) {
        for (const auto& t : n.targets) {
            del_target(*t);
        }
    }

    void on(const Import& n, const Stmt& s) {
        for (const auto& a : n.names) {
            bind_import(a.asname ? *a.asname : a.name.substr(0, a.name.find('.')), s.range.begin);
        }
    }

    void on(const ImportFrom& n, const Stmt& s) {
        for (const auto& a : n.names) {
            if (a.name != "*") {
                bind_import(a.asname ? *a.asname : a.name, s.range.begin);
            }
        }
    }

    void on(const If& n, const Stmt&) {
        expression(*n.test);
        const int c = next_construct_++;
        {
            Push p(frames_, branch(c, 0, 2));
            block(n.body);
        }
        if (!n.orelse.empty()) {
            Push p(frames_, branch(c, 1, 2));
            block(n.orelse);
        }
    }

    void on(const For& n, const Stmt&) {
        const int loop = next_construct_++;
        iterated(*n.iter, loop);
        {
            Push p(frames_, loop_frame(loop));
            store(*n.target, NameAction::maybe_define, NameRole::loop_target, loop);
            block(n.body);
        }
        loop_else(n.orelse);
    }

    void on(const While& n, const Stmt&) {
        expression(*n.test);
        const int loop = next_construct_++;
        {
            Push p(frames_, loop_frame(loop));
            block(n.body);
        }
        loop_else(n.orelse);
    }

    void loop_else(const StmtList& orelse) {
        if (orelse.empty()) {
            return;
        }
        Push p(frames_, branch(next_construct_++, 0, 2));
        block(orelse);
    }

    void on(const Try& n, const Stmt&) {
        block(n.body);
        if (!n.handlers.empty()) {
            const int c = next_construct_++;
            const int count = static_cast<int>(n.handlers.size()) + 1;
            for (std::size_t i = 0; i < n.handlers.size(); ++i) {
                const auto& h = n.handlers[i];
                Push p(frames_, branch(c, static_cast<int>(i), count));
                if (h.type) {
                    expression(*h.type);
                }
                if (h.name) {
                    define(*h.name, NameAction::define, NameRole::plain, h.range.begin);
                }
                block(h.body);
            }
        }
        block(n.orelse);
        block(n.finalbody);
    }

    void on(const With& n, const Stmt&) {
        for (const auto& item : n.items) {
            expression(*item.context);
            if (item.target) {
                store(*item.target, NameAction::define, NameRole::plain);
            }
        }
        block(n.body);
    }

    void on(const Match& n, const Stmt&) {
        expression(*n.subject);
        if (n.cases.empty()) {
            return;
        }
        const auto& last = n.cases.back();
        const bool exhaustive = !last.guard && irrefutable(*last.pattern);
        const int c = next_construct_++;
        const int count = static_cast<int>(n.cases.size()) + (exhaustive ? 0 : 1);
        for (std::size_t i = 0; i < n.cases.size(); ++i) {
            const auto& mc = n.cases[i];
            Push p(frames_, branch(c, static_cast<int>(i), count));
            pattern(*mc.pattern);
            if (mc.guard) {
                expression(*mc.guard);
            }
            block(mc.body);
        }
    }

    void pattern(const Pattern& p) {
        for_each_child(
            p, [&](const Expr& e) { expression(e); }, [&](const Pattern& sub) { pattern(sub); });
        if (p.name) {
            define(*p.name, NameAction::define, NameRole::plain, p.range.begin);
        }
    }

    void on(const FunctionDef& n, const Stmt& s) {
        for (const auto& d : n.decorators) {
            expression(*d);
        }
        signature(n.args);
        if (n.returns) {
            expression(*n.returns);
        }
        declare(n.name, s.range.begin);
        opaque_body(n.name, &n.args, n.body);
    }

    void on(const ClassDef& n, const Stmt& s) {
        for (const auto& d : n.decorators) {
            expression(*d);
        }
        for (const auto& b : n.bases) {
            expression(*b);
        }
        for (const auto& kw : n.keywords) {
            expression(*kw.value);
        }
        declare(n.name, s.range.begin);
        opaque_body(n.name, nullptr, n.body);
    }

    void signature(const Arguments& args) {
        for (const auto& p : args.params) {
            if (p.default_value) {
                expression(*p.default_value);
            }
            if (p.annotation) {
                expression(*p.annotation);
            }
        }
    }

    // Function and class bodies only contribute references to code names.
    void opaque_body(const std::string& owner, const Arguments* args, const StmtList& body) {
        const auto locals = local_bindings(args, body);
        auto on_expr = [&](const Expr& e) {
            const auto* n = e.as<Name>();
            if (n != nullptr && n->ctx == ExprContext::load && locals.count(n->id) == 0 &&
                scope_.code_names.count(n->id) != 0 && declared_.count(n->id) == 0) {
                push_event(n->id, NameAction::use, NameKind::code, NameRole::plain, e.range.begin, -1);
            }
        };
        auto on_stmt = [&](const Stmt& s) {
            if (const auto* g = s.as<Global>()) {
                std::string names;
                for (const auto& name : g->names) {
                    names += names.empty() ? name : ", " + name;
                }
                note(s.range.begin, diag::kGlobalInFunction,
                     std::string(g->nonlocal ? "nonlocal" : "global") + " " + names + " inside '" + owner +
                         "'; flows through it are not recognized");
            }
        };
        for (const auto& s : body) {
            walk(*s, on_expr, on_stmt);
        }
    }

    void bind_import(const std::string& name, Position where) {
        if (scope_.track_imports) {
            define(name, NameAction::define, NameRole::import_binding, where);
            return;
        }
        scope_.imported.insert(name);
        scope_.data_defined.erase(name);
    }

    // ---- targets ----------------------------------------------------------

    void store(const Expr& target, NameAction action, NameRole role, int loop = -1) {
        if (const auto* n = target.as<Name>()) {
            define(n->id, action, role, target.range.begin, loop);
        } else if (const auto* t = target.as<Tuple>()) {
            for (const auto& e : t->elts) {
                store(*e, action, role, loop);
            }
        } else if (const auto* l = target.as<List>()) {
            for (const auto& e : l->elts) {
                store(*e, action, role, loop);
            }
        } else if (const auto* st = target.as<Starred>()) {
            store(*st->value, action, role, loop);
        } else {
            store_through(target);
        }
    }

    // x.a = v, x[k] = v and friends: an in-place update of the root name.
    void store_through(const Expr& target) {
        if (const auto* a = target.as<Attribute>()) {
            root_store(*a->value);
        } else if (const auto* s = target.as<Subscript>()) {
            root_store(*s->value);
            expression(*s->slice);
        } else {
            expression(target);
        }
    }

    void root_store(const Expr& e) {
        if (const auto* n = e.as<Name>()) {
            use(n->id, NameRole::item_store, e.range.begin);
        } else if (e.as<Attribute>() || e.as<Subscript>()) {
            store_through(e);
        } else {
            expression(e);
        }
    }

    void del_target(const Expr& t) {
        if (const auto* n = t.as<Name>()) {
            use(n->id, NameRole::deletion, t.range.begin);
        } else if (const auto* tu = t.as<Tuple>()) {
            for (const auto& e : tu->elts) {
                del_target(*e);
            }
        } else if (const auto* l = t.as<List>()) {
            for (const auto& e : l->elts) {
                del_target(*e);
            }
        } else {
            store_through(t);
        }
    }

    // ---- expressions ------------------------------------------------------

    void iterated(const Expr& iter, int loop) {
        if (const auto* n = iter.as<Name>()) {
            use(n->id, NameRole::iterated, iter.range.begin, loop);
        } else {
            expression(iter);
        }
    }

    void argument(const Expr& arg) {
        const Expr* e = &arg;
        if (const auto* st = e->as<Starred>()) {
            e = st->value.get();
        }
        if (const auto* n = e->as<Name>()) {
            use(n->id, NameRole::call_argument, e->range.begin);
        } else {
            expression(*e);
        }
    }

    // Root of a callee chain such as x.a[k].m
    void callee_chain(const Expr& e) {
        if (const auto* n = e.as<Name>()) {
            use(n->id, NameRole::method_base, e.range.begin);
        } else if (const auto* a = e.as<Attribute>()) {
            callee_chain(*a->value);
        } else if (const auto* s = e.as<Subscript>()) {
            callee_chain(*s->value);
            expression(*s->slice);
        } else {
            expression(e);
        }
    }

    void expression(const Expr& e) {
        if (const auto* n = e.as<Name>()) {
            if (n->ctx == ExprContext::load) {
                use(n->id, NameRole::plain, e.range.begin);
            }
        } else if (const auto* c = e.as<Call>()) {
            if (const auto* a = c->func->as<Attribute>()) {
                callee_chain(*a->value);
            } else {
                expression(*c->func);
            }
            for (const auto& arg : c->args) {
                argument(*arg);
            }
            for (const auto& kw : c->keywords) {
                argument(*kw.value);
            }
        } else if (const auto* w = e.as<NamedExpr>()) {
            expression(*w->value);
            store(*w->target, NameAction::define, NameRole::plain);
        } else if (const auto* b = e.as<BoolOp>()) {
            std::size_t pushed = 0;
            for (std::size_t i = 0; i < b->values.size(); ++i) {
                if (i > 0) {
                    frames_.push_back(branch(next_construct_++, 0, 2));
                    ++pushed;
                }
                expression(*b->values[i]);
            }
            frames_.resize(frames_.size() - pushed);
        } else if (const auto* ie = e.as<IfExp>()) {
            expression(*ie->test);
            const int construct = next_construct_++;
            {
                Push p(frames_, branch(construct, 0, 2));
                expression(*ie->body);
            }
            Push p(frames_, branch(construct, 1, 2));
            expression(*ie->orelse);
        } else if (const auto* l = e.as<Lambda>()) {
            signature(l->args);
            std::set<std::string> params;
            for (const auto& p : l->args.params) {
                params.insert(p.name);
            }
            locals_.push_back(std::move(params));
            expression(*l->body);
            locals_.pop_back();
        } else if (const auto* comp = e.as<Comp>()) {
            comprehension(*comp);
        } else {
            for_each_child(e, [&](const Expr& child) { expression(child); });
        }
    }

    void bind_local(const Expr& target) {
        if (const auto* n = target.as<Name>()) {
            locals_.back().insert(n->id);
        } else if (const auto* st = target.as<Starred>()) {
            bind_local(*st->value);
        } else if (const auto* t = target.as<Tuple>()) {
            for (const auto& x : t->elts) {
                bind_local(*x);
            }
        } else if (const auto* l = target.as<List>()) {
            for (const auto& x : l->elts) {
                bind_local(*x);
            }
        } else {
            expression(target);
        }
    }

    void comprehension(const Comp& c) {
        const std::size_t depth = frames_.size();
        bool first = true;
        for (const auto& g : c.generators) {
            const int loop = next_construct_++;
            iterated(*g.iter, loop);
            if (first) {
                locals_.emplace_back();
                first = false;
            }
            frames_.push_back(loop_frame(loop));
            bind_local(*g.target);
            for (const auto& cond : g.ifs) {
                expression(*cond);
                frames_.push_back(branch(next_construct_++, 0, 2));
            }
        }
        if (c.elt) {
            expression(*c.elt);
        }
        if (c.value) {
            expression(*c.value);
        }
        frames_.resize(depth);
        if (!first) {
            locals_.pop_back();
        }
    }

    const SyntaxTree& tree_;
    AnalysisScope& scope_;
    CellEvents out_;
    std::vector<Frame> frames_;
    std::vector<std::set<std::string>> locals_;
    std::set<std::string> declared_;
    int next_construct_ = 0;
};

} // namespace

void collect_code_names(const Module& module, std::set<std::string>& out) {
    for (const auto& s : module.body) {
        code_names_in(*s, out);
    }
}

CellEvents collect_name_events(const SyntaxTree& tree, AnalysisScope& scope) {
    return Collector(tree, scope).run();
}

} // namespace crabs::analysis
