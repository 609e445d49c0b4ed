#pragma once

#include "crabs/notebook.hpp"
#include "crabs/resolver.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace crabs::testing {

// Small synthetic notebooks: assignments, calls, loops, conditionals and
// aliases over a handful of names. Deterministic for a given seed.
[[nodiscard]] CellSequence random_notebook(std::uint64_t seed, int min_cells = 2, int max_cells = 10);

// Source of one generated notebook, cells separated by a "# ----" line.
[[nodiscard]] std::string describe(const CellSequence& cells);

// Answers every ambiguity with a coin flip keyed on the prompt hash.
class RandomBackend : public resolve::Backend {
public:
    explicit RandomBackend(std::uint64_t seed) : seed_(seed) {}
    [[nodiscard]] std::string id() const override { return "random"; }
    [[nodiscard]] resolve::Answer answer(const CodeCell&, const Ambiguity&, const std::string&,
                                         const std::string& hash) override;

private:
    std::uint64_t seed_;
};

} // namespace crabs::testing
