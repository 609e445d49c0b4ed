#include "doctest.h"

#include "crabs/flow_graph.hpp"
#include "crabs/metrics.hpp"

#include <random>

using namespace crabs;
using namespace crabs::eval;

namespace {

InformationFlow f(int s, int t, const std::string& n) { return {s, t, n, FlowKind::data}; }

GroundTruth truth_of(int n, std::set<InformationFlow> flows) { return GroundTruth{"t", n, std::move(flows)}; }

NotebookScores score(const GroundTruth& t, int n, std::set<InformationFlow> flows,
                     const std::vector<resolve::ResolutionRecord>& records = {}) {
    FlowGraph g{t.notebook_id, n, std::move(flows)};
    return score_notebook(g, derive_dependency_graph(g), records, t);
}

resolve::ResolutionRecord record(int cell, const std::string& name, AmbiguityKind kind, bool verdict) {
    resolve::ResolutionRecord r;
    r.ambiguity.cell_index = cell;
    r.ambiguity.name = name;
    r.ambiguity.kind = kind;
    r.verdict = verdict;
    return r;
}

} // namespace

TEST_CASE("set scores") {
    SUBCASE("partial overlap") {
        const auto s = score_sets(std::set<std::string>{"a", "b", "c"}, std::set<std::string>{"b", "c", "d"});
        CHECK(s.tp == 2);
        CHECK(s.fp == 1);
        CHECK(s.fn == 1);
        CHECK(s.precision == doctest::Approx(2.0 / 3).epsilon(1e-12));
        CHECK(s.recall == doctest::Approx(2.0 / 3).epsilon(1e-12));
        CHECK(s.f1 == doctest::Approx(2.0 / 3).epsilon(1e-12));
        CHECK(s.accuracy == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("identical") {
        const auto s = score_sets(std::set<int>{1, 2}, std::set<int>{1, 2});
        CHECK(s.precision == 1.0);
        CHECK(s.recall == 1.0);
        CHECK(s.f1 == 1.0);
        CHECK(s.accuracy == 1.0);
    }
    SUBCASE("empty prediction") {
        const auto s = score_sets(std::set<int>{}, std::set<int>{1});
        CHECK(s.precision == 0.0);
        CHECK(s.recall == 0.0);
        CHECK(s.f1 == 0.0);
        CHECK(s.accuracy == 0.0);
    }
    SUBCASE("accuracy and f1 identity") {
        std::mt19937 rng(1);
        for (int i = 0; i < 500; ++i) {
            const auto s = scores_from_counts(rng() % 20, rng() % 20, rng() % 20);
            CHECK(std::abs(s.accuracy - s.f1 / (2 - s.f1)) < 1e-12);
        }
    }
}

TEST_CASE("exact match") {
    const FlowGraph g{"g", 3, {f(1, 2, "a")}};
    CHECK(exact_match(g, g));
    FlowGraph extra = g;
    extra.flows.insert(f(2, 3, "b"));
    CHECK_FALSE(exact_match(extra, g));
    FlowGraph cells = g;
    cells.n_cells = 4;
    CHECK_FALSE(exact_match(cells, g));
}

TEST_CASE("wrong cell count scores zero") {
    const auto t = truth_of(3, {f(1, 2, "a"), f(2, 3, "a")});
    const auto s = score(t, 4, t.flows);
    CHECK(s.structural_mismatch);
    for (const auto* x : {&s.flow, &s.dep}) {
        CHECK(x->precision == 0.0);
        CHECK(x->recall == 0.0);
        CHECK(x->f1 == 0.0);
        CHECK(x->accuracy == 0.0);
    }
    CHECK_FALSE(s.em_flow);
    CHECK_FALSE(s.em_dep);
}

TEST_CASE("resolution accuracy") {
    const auto t = truth_of(3, {f(1, 2, "a")});
    CHECK_FALSE(resolution_accuracy({}, t).value().has_value());
    const auto all = resolution_accuracy({record(2, "a", AmbiguityKind::input, true)}, t);
    CHECK(all.value() == std::optional<double>(1.0));
    const auto half = resolution_accuracy(
        {record(2, "a", AmbiguityKind::input, true), record(1, "a", AmbiguityKind::output_candidate, false)}, t);
    CHECK(half.value() == std::optional<double>(0.5));
    CHECK_THROWS_AS((void)resolution_accuracy({record(9, "a", AmbiguityKind::input, true)}, t), AnnotationMismatch);
}

TEST_CASE("aggregation") {
    const auto t1 = truth_of(2, {f(1, 2, "a")});
    const auto t2 = truth_of(3, {f(1, 2, "a"), f(1, 3, "b")});
    auto s1 = score(t1, 2, t1.flows);
    auto s2 = score(t2, 3, {f(1, 2, "a")});
    CHECK(s1.flow.f1 == 1.0);
    CHECK(s2.flow.f1 == doctest::Approx(2.0 / 3).epsilon(1e-12));
    SUBCASE("macro means") {
        NotebookScores a = s1;
        NotebookScores b = s1;
        b.flow = scores_from_counts(1, 1, 1);
        b.flow.f1 = 0.5;
        b.em_flow = false;
        const auto r = aggregate({a, b});
        CHECK(r.flow.f1 == doctest::Approx(0.75).epsilon(1e-12));
        CHECK(r.em_rate_flow == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("pooled resolution") {
        s1.resolution = Fraction{3, 4};
        s2.resolution = Fraction{1, 1};
        const auto r = aggregate({s1, s2});
        CHECK(r.resolution.correct == 4);
        CHECK(r.resolution.total == 5);
        CHECK(r.resolution.value() == doctest::Approx(0.8).epsilon(1e-12));
    }
    CHECK_THROWS_AS((void)aggregate({}), EmptyReport);
}
