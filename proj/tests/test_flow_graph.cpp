#include "doctest.h"

#include "crabs/flow_graph.hpp"
#include "crabs/pipeline.hpp"
#include "support/cells.hpp"

#include <random>

using namespace crabs;

namespace {

InformationFlow data(int s, int t, const std::string& n) { return {s, t, n, FlowKind::data}; }
InformationFlow code(int s, int t, const std::string& n) { return {s, t, n, FlowKind::code}; }

PipelineResult run(const CellSequence& cells, EstimateMode mode,
                   resolve::ResolverKind kind = resolve::ResolverKind::assume_no, const GroundTruth* truth = nullptr) {
    PipelineOptions o;
    o.mode = mode;
    o.resolver.resolver = kind;
    return run_pipeline(cells, o, truth);
}

const char* kLoopCell = "for n in range(3):\n    if n == 0:\n        count = 0\n    else:\n        count += 1";

} // namespace

TEST_CASE("resolved sets") {
    SUBCASE("no ambiguities: resolved equals both bounds") {
        const auto r = run(testing::cells({"x = 1", "y = x"}), EstimateMode::resolved);
        for (int i = 1; i <= 2; ++i) {
            CHECK(r.resolved[static_cast<std::size_t>(i - 1)] == from_estimate(i, r.analysis.pair(i).lower));
            CHECK(r.resolved[static_cast<std::size_t>(i - 1)] == from_estimate(i, r.analysis.pair(i).upper));
        }
    }
    SUBCASE("truncate resolved no, dropna resolved yes") {
        const auto r = run(testing::cells({"phone_data = load()", "phone_data.dropna(inplace=True)",
                                           "phone_data.truncate(before=1, after=3)"}),
                           EstimateMode::resolved, resolve::ResolverKind::heuristic);
        CHECK(r.resolved[1].outputs == std::map<std::string, bool>{{"phone_data", false}});
        CHECK(r.resolved[2].outputs.empty());
    }
    SUBCASE("a missing record is an error naming the ambiguity") {
        const auto a = analyze_notebook(testing::cells({"x.append(1)"}));
        REQUIRE_FALSE(a.ambiguities.empty());
        CHECK_THROWS_AS((void)apply_verdicts(a, {}), IncompleteResolution);
    }
}

TEST_CASE("flow construction") {
    SUBCASE("through-flow stops at a definitive redefinition") {
        const auto r = run(testing::cells({"a = 1", "a = a + 1", "print(a)"}), EstimateMode::lower);
        CHECK(r.flows.flows == std::set<InformationFlow>{data(1, 2, "a"), data(2, 3, "a")});
    }
    SUBCASE("a conditional redefinition lets earlier values through") {
        const auto r = run(testing::cells({"phone_data = load()", "if len(phone_data) > 100:\n    phone_data = "
                                                                  "phone_data.sample(100)",
                                           "phone_data.head()"}),
                           EstimateMode::lower);
        CHECK(r.flows.flows ==
              std::set<InformationFlow>{data(1, 2, "phone_data"), data(2, 3, "phone_data"), data(1, 3, "phone_data")});
    }
    SUBCASE("code flows come from the declaring cell") {
        const auto r = run(testing::cells({"add_one = 1", "total = 10 + add_one\ndef add_one(x):\n    return x + 1",
                                           "print(add_one(total))"}),
                           EstimateMode::upper);
        CHECK(r.flows.flows.count(code(2, 3, "add_one")));
        CHECK(r.flows.flows.count(data(2, 3, "total")));
        CHECK_FALSE(r.flows.flows.count(data(1, 2, "add_one")));
    }
    SUBCASE("del ends the scan") {
        const auto r = run(testing::cells({"a = 1", "if c:\n    a = 2", "del a", "print(a)"}), EstimateMode::upper);
        CHECK_FALSE(r.flows.flows.count(data(1, 4, "a")));
        CHECK_FALSE(r.flows.flows.count(data(2, 4, "a")));
    }
    SUBCASE("inputs with no source are reported") {
        const auto r = run(testing::cells({"print(ghost)"}), EstimateMode::lower);
        CHECK(r.flows.flows.empty());
        bool reported = false;
        for (const auto& d : r.diagnostics) {
            reported = reported || (d.code == std::string(diag::kUnresolvedSource) &&
                                    d.message.find("ghost") != std::string::npos);
        }
        CHECK(reported);
    }
    SUBCASE("skipped cells contribute nothing") {
        const auto r = run(testing::cells({"%%capture captured_stdout\nx = 1", "print(captured_stdout, x)"}),
                           EstimateMode::upper);
        CHECK(r.flows.flows.empty());
    }
}

TEST_CASE("conditional inside a loop separates the bounds") {
    const auto cells = testing::cells({"count = 0", kLoopCell, "print(count)"});
    const auto lower = run(cells, EstimateMode::lower);
    const auto upper = run(cells, EstimateMode::upper);
    CHECK_FALSE(lower.flows.flows.count(data(1, 2, "count")));
    CHECK_FALSE(lower.deps.deps.count({2, 1}));
    CHECK(upper.flows.flows.count(data(1, 2, "count")));
    CHECK(upper.deps.deps.count({2, 1}));

    SUBCASE("assume-no and assume-yes reproduce the bounds") {
        const auto no = run(cells, EstimateMode::resolved, resolve::ResolverKind::assume_no);
        const auto yes = run(cells, EstimateMode::resolved, resolve::ResolverKind::assume_yes);
        CHECK(no.flows.flows == lower.flows.flows);
        CHECK(yes.flows.flows == upper.flows.flows);
        for (int i = 1; i <= 3; ++i) {
            CHECK(no.resolved[static_cast<std::size_t>(i - 1)] == from_estimate(i, no.analysis.pair(i).lower));
        }
    }
}

TEST_CASE("dependency closure") {
    SUBCASE("chain") {
        FlowGraph g{"g", 3, {data(1, 2, "a"), data(2, 3, "b")}};
        const auto d = derive_dependency_graph(g);
        CHECK(d.deps == std::set<CellPair>{{2, 1}, {3, 2}, {3, 1}});
        CHECK(d.direct == std::set<CellPair>{{2, 1}, {3, 2}});
    }
    SUBCASE("empty") {
        const auto d = derive_dependency_graph(FlowGraph{"g", 4, {}});
        CHECK(d.deps.empty());
        CHECK(d.n_cells == 4);
    }
    SUBCASE("flows past the declared cell count") {
        FlowGraph g{"g", 2, {data(1, 2, "a"), data(2, 3, "a")}};
        CHECK(derive_dependency_graph(g).deps == std::set<CellPair>{{2, 1}, {3, 2}, {3, 1}});
    }
    SUBCASE("six-cell survey notebook") {
        const auto truth = load_ground_truth(testing::fixture("survey.truth.json"));
        const auto r = run(load_notebook_file(testing::fixture("survey.ipynb")), EstimateMode::resolved,
                           resolve::ResolverKind::truth_oracle, &truth);
        CHECK(r.flows.flows.count(data(1, 5, "survey")));
        CHECK(r.flows.flows.count(data(5, 6, "survey")));
        CHECK_FALSE(r.flows.flows.count(data(1, 6, "survey")));
        CHECK(r.deps.deps.count({6, 5}));
    }
    SUBCASE("matches brute-force reachability") {
        std::mt19937 rng(5);
        for (int trial = 0; trial < 200; ++trial) {
            const int n = 1 + static_cast<int>(rng() % 10);
            FlowGraph g{"r", n, {}};
            bool adj[11][11] = {};
            for (int t = 1; t <= n; ++t) {
                for (int s = 1; s < t; ++s) {
                    if (rng() % 4 == 0) {
                        g.flows.insert(data(s, t, "v"));
                        adj[t][s] = true;
                    }
                }
            }
            // Floyd-Warshall over the "depends on" relation.
            for (int k = 1; k <= n; ++k) {
                for (int i = 1; i <= n; ++i) {
                    for (int j = 1; j <= n; ++j) {
                        adj[i][j] = adj[i][j] || (adj[i][k] && adj[k][j]);
                    }
                }
            }
            std::set<CellPair> want;
            for (int i = 1; i <= n; ++i) {
                for (int j = 1; j <= n; ++j) {
                    if (adj[i][j]) {
                        want.insert({i, j});
                    }
                }
            }
            CHECK(derive_dependency_graph(g).deps == want);
        }
    }
}
