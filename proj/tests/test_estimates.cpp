#include "doctest.h"

#include "crabs/alias_store.hpp"
#include "crabs/analyzer.hpp"
#include "crabs/estimates.hpp"
#include "support/cells.hpp"
#include "support/trees.hpp"

using namespace crabs;
using namespace crabs::analysis;

namespace {

using Names = std::set<std::string>;

NotebookAnalysis run(std::initializer_list<std::string> sources) {
    return analyze_notebook(testing::cells(sources));
}

std::map<std::string, bool> outs(const CellIOEstimate& e) { return e.output_candidates; }

std::vector<std::string> ambiguity_summary(const NotebookAnalysis& a, int cell) {
    std::vector<std::string> out;
    for (const auto& amb : a.ambiguities) {
        if (amb.cell_index == cell) {
            out.push_back(amb.name + "/" + std::string(to_string(amb.kind)));
        }
    }
    return out;
}

} // namespace

TEST_CASE("lower estimate rules") {
    SUBCASE("call arguments and method bases are inputs only") {
        const auto a = run({"model.fit(X, y)"});
        CHECK(a.pair(1).lower.inputs == Names{"X", "model", "y"});
        CHECK(a.pair(1).lower.output_candidates.empty());
    }
    SUBCASE("empty cell") {
        const auto a = run({"# nothing here"});
        CHECK(a.pair(1).lower == CellIOEstimate{});
        CHECK(a.pair(1).upper == CellIOEstimate{});
    }
    SUBCASE("top-level definition is definitive, a conditional one is not") {
        const auto a = run({"x = 1\nif x:\n    y = 2"});
        CHECK(outs(a.pair(1).lower) == std::map<std::string, bool>{{"x", true}, {"y", false}});
    }
    SUBCASE("a name read after its own definition is not an input") {
        const auto a = run({"x = 1\nprint(x)"});
        CHECK(a.pair(1).lower.inputs.empty());
    }
    SUBCASE("iterated collection is an input, and an output once the loop modifies it") {
        const auto plain = run({"for i in items:\n    s += i"});
        CHECK(plain.pair(1).lower.inputs == Names{"items", "s"});
        CHECK(plain.pair(1).lower.output_names() == Names{"i", "s"});
        CHECK(plain.pair(1).upper.output_names() == Names{"i", "items", "s"});

        const auto rebound = run({"for i in items:\n    items = items[1:]"});
        CHECK(rebound.pair(1).lower.outputs("items"));
    }
    SUBCASE("in-place stores are certain non-definitive outputs") {
        const auto a = run({"x[k] = v\nz.attr = 3\nw += 1"});
        for (const auto* e : {&a.pair(1).lower, &a.pair(1).upper}) {
            CHECK(e->inputs == Names{"k", "v", "w", "x", "z"});
            CHECK(e->output_candidates.at("x") == false);
            CHECK(e->output_candidates.at("z") == false);
            CHECK(e->outputs("w"));
        }
    }
}

TEST_CASE("conditional inside a loop") {
    const auto a = run({"count = 0", "for n in range(3):\n    if n == 0:\n        count = 0\n    else:\n        count += 1",
                        "print(count)"});
    const auto& p = a.pair(2);
    CHECK_FALSE(p.lower.inputs.count("count"));
    CHECK(p.lower.outputs("count"));
    CHECK(p.upper.inputs.count("count"));
    CHECK(ambiguity_summary(a, 2) == std::vector<std::string>{"count/input"});
}

TEST_CASE("upper estimate rules") {
    SUBCASE("truncate leaves an ambiguous output candidate") {
        const auto a = run({"phone_data.truncate(before=1, after=3)"});
        CHECK(a.pair(1).upper.inputs == Names{"phone_data"});
        CHECK(outs(a.pair(1).upper) == std::map<std::string, bool>{{"phone_data", false}});
        CHECK(a.pair(1).lower.output_candidates.empty());
        CHECK(ambiguity_summary(a, 1) == std::vector<std::string>{"phone_data/output-candidate"});
    }
    SUBCASE("hidden modification through a shared reference") {
        const auto a = run({"import pandas as pd\ntrain = pd.read_csv('train.csv')\ntest = pd.read_csv('test.csv')\n"
                            "datasets = [train, test]",
                            "train.drop(['PassengerId'], axis=1, inplace=True)"});
        CHECK(a.pair(2).upper.output_names() == Names{"datasets", "test", "train"});
        CHECK(a.pair(2).upper.output_candidates.at("datasets") == false);
        REQUIRE(a.ambiguities.size() == 3);
        for (const auto& amb : a.ambiguities) {
            REQUIRE(amb.alias_context.has_value());
            CHECK(*amb.alias_context == std::vector<std::string>{"datasets = [train, test]"});
        }
        CHECK(a.ambiguities[0].name == "train");
    }
    SUBCASE("lower is contained in upper") {
        const auto a = run({"a = [1]\nb = a", "if b:\n    b.append(c)\nfor q in a:\n    f(q)"});
        for (const auto& p : a.pairs) {
            for (const auto& x : p.lower.inputs) {
                CHECK(p.upper.inputs.count(x));
            }
            for (const auto& [x, d] : p.lower.output_candidates) {
                CHECK(p.upper.outputs(x));
            }
        }
    }
}

TEST_CASE("ambiguities") {
    SUBCASE("identical bounds give none") {
        const auto a = run({"x = 1", "y = x + 1"});
        CHECK(a.ambiguities.empty());
    }
    SUBCASE("set difference") {
        EstimatePair p;
        p.cell_index = 1;
        p.lower.inputs = {"x"};
        p.upper.inputs = {"x"};
        p.upper.output_candidates = {{"x", false}};
        const auto amb = compute_ambiguities(p, AliasStore{});
        REQUIRE(amb.size() == 1);
        CHECK(amb[0].name == "x");
        CHECK(amb[0].kind == AmbiguityKind::output_candidate);
        CHECK_FALSE(amb[0].alias_context.has_value());
    }
}

TEST_CASE("estimates are deterministic") {
    const auto first = run({"a = b\nb.append(1)", "for i in a:\n    if i:\n        c = i"});
    const auto second = run({"a = b\nb.append(1)", "for i in a:\n    if i:\n        c = i"});
    REQUIRE(first.pairs.size() == second.pairs.size());
    for (std::size_t i = 0; i < first.pairs.size(); ++i) {
        CHECK(first.pairs[i].lower == second.pairs[i].lower);
        CHECK(first.pairs[i].upper == second.pairs[i].upper);
    }
    CHECK(first.ambiguities == second.ambiguities);
}

TEST_CASE("alias store") {
    AnalysisScope scope;
    AliasStore store;
    SUBCASE("collection containment") {
        update_alias_store(testing::tree_of("datasets = [train, test]"), store, 1, scope);
        CHECK(store.connected("datasets", "train"));
        CHECK(store.connected("datasets", "test"));
        CHECK(store.connected("train", "test"));
        CHECK(store.component("train") == Names{"datasets", "test", "train"});
        CHECK(store.statements("test", 2) == std::vector<std::string>{"datasets = [train, test]"});
        CHECK(store.statements("test", 1).empty());
    }
    SUBCASE("rebinding severs") {
        update_alias_store(testing::tree_of("a = b"), store, 1, scope);
        CHECK(store.connected("a", "b"));
        CHECK(store.connected("b", "a"));
        update_alias_store(testing::tree_of("a = 3", 2), store, 2, scope);
        CHECK_FALSE(store.connected("a", "b"));
    }
    SUBCASE("a conditional rebinding keeps the link") {
        update_alias_store(testing::tree_of("a = b"), store, 1, scope);
        update_alias_store(testing::tree_of("if c:\n    a = 3", 2), store, 2, scope);
        CHECK(store.connected("a", "b"));
    }
    SUBCASE("no assignments leaves the store unchanged") {
        update_alias_store(testing::tree_of("a = b"), store, 1, scope);
        const auto before = store.edges().size();
        update_alias_store(testing::tree_of("print(a)\nf(b)", 2), store, 2, scope);
        CHECK(store.edges().size() == before);
    }
    SUBCASE("symmetric and transitive") {
        update_alias_store(testing::tree_of("a = b\nc = a\nd = {'k': c}"), store, 1, scope);
        for (const auto* x : {"a", "b", "c", "d"}) {
            for (const auto* y : {"a", "b", "c", "d"}) {
                CHECK(store.connected(x, y) == store.connected(y, x));
                CHECK(store.connected(x, y));
            }
        }
    }
}
