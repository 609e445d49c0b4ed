#include "doctest.h"

#include "crabs/notebook.hpp"
#include "support/cells.hpp"

using namespace crabs;

namespace {

std::string code(const std::string& src) {
    return R"({"cell_type":"code","metadata":{},"outputs":[],"source":)" + src + "}";
}

std::string markdown(const std::string& src) { return R"({"cell_type":"markdown","metadata":{},"source":)" + src + "}"; }

std::string document(const std::string& cells) {
    return R"({"nbformat":4,"nbformat_minor":5,"metadata":{},"cells":[)" + cells + "]}";
}

} // namespace

TEST_CASE("code cells are indexed from 1, markdown dropped") {
    auto seq = load_notebook(document(markdown(R"(["# title"])") + "," + code(R"(["a=1"])") + "," + code(R"j("print(a)")j")),
                             "x");
    REQUIRE(seq.size() == 2);
    CHECK(seq.cell(1).index == 1);
    CHECK(seq.cell(2).index == 2);
    CHECK(seq.cell(1).source == std::vector<std::string>{"a=1"});
    CHECK(seq.cell(2).source == std::vector<std::string>{"print(a)"});
}

TEST_CASE("the six-cell survey fixture has six code cells") {
    const auto seq = load_notebook_file(testing::fixture("survey.ipynb"));
    CHECK(seq.size() == 6);
    CHECK(seq.notebook_id == "survey");
}

TEST_CASE("notebook errors") {
    SUBCASE("markdown only") {
        try {
            (void)load_notebook(document(markdown(R"(["text"])")), "m");
            FAIL("expected an error");
        } catch (const NotebookError& e) {
            CHECK(e.kind() == NotebookError::Kind::empty);
        }
    }
    SUBCASE("malformed JSON carries a byte offset") {
        try {
            (void)load_notebook(R"({"cells": [)", "m");
            FAIL("expected an error");
        } catch (const NotebookError& e) {
            CHECK(e.kind() == NotebookError::Kind::parse);
            CHECK(e.byte_offset().has_value());
        }
    }
    SUBCASE("missing field is named") {
        try {
            (void)load_notebook(R"({"nbformat":4})", "m");
            FAIL("expected an error");
        } catch (const NotebookError& e) {
            CHECK(e.kind() == NotebookError::Kind::schema);
            CHECK(e.field() == "cells");
        }
    }
}

TEST_CASE("screening") {
    auto seq = testing::cells({"%%capture captured_stdout\nprint(1)", "!pip install x\nimport x", "%matplotlib inline",
                               "a = 1\n%time b = 2\nprint(a)"});
    const CodeCell magic = screen_cell(seq.cells[0]);
    CHECK(magic.skipped);
    CHECK(magic.skip_reason == SkipReason::cell_magic);

    const CodeCell shell = screen_cell(seq.cells[1]);
    CHECK_FALSE(shell.skipped);
    CHECK(shell.screened_text() == "import x");
    CHECK(shell.original_line(1) == 2);

    const CodeCell line_magic = screen_cell(seq.cells[2]);
    CHECK(line_magic.skipped);
    CHECK(line_magic.skip_reason == SkipReason::empty_after_screening);

    const CodeCell mixed = screen_cell(seq.cells[3]);
    CHECK(mixed.screened_text() == "a = 1\nprint(a)");
    CHECK(mixed.original_line(2) == 3);

    SUBCASE("idempotent") {
        for (const auto& c : seq.cells) {
            const CodeCell once = screen_cell(c);
            const CodeCell twice = screen_cell(once);
            CHECK(twice.screened_source == once.screened_source);
            CHECK(twice.skipped == once.skipped);
            CHECK(twice.line_map == once.line_map);
        }
    }
}
