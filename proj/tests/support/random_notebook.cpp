#include "random_notebook.hpp"

#include <functional>
#include <sstream>
#include <vector>

namespace crabs::testing {

namespace {

const std::vector<std::string> kData = {"a", "b", "c", "df", "items", "model", "total"};

class Generator {
public:
    explicit Generator(std::uint64_t seed) : rng_(seed) {}

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
    bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
    const std::string& name() { return kData[static_cast<std::size_t>(pick(static_cast<int>(kData.size())))]; }

    std::string expr() {
        switch (pick(9)) {
        case 0: return std::to_string(pick(100));
        case 1: return name();
        case 2: return name() + " + " + std::to_string(pick(10));
        case 3: return "np.mean(" + name() + ")";
        case 4: return "[" + name() + ", " + name() + "]";
        case 5: return name() + ".copy()";
        case 6: return "helper(" + name() + ")";
        case 7: return name() + " if " + name() + " else " + name();
        default: return "[v * 2 for v in " + name() + "]";
        }
    }

    void simple(std::vector<std::string>& out, const std::string& indent) {
        switch (pick(12)) {
        case 0:
        case 1:
        case 2: out.push_back(indent + name() + " = " + expr()); break;
        case 3: out.push_back(indent + name() + " += " + expr()); break;
        case 4: out.push_back(indent + name() + ".append(" + name() + ")"); break;
        case 5: out.push_back(indent + name() + ".head()"); break;
        case 6: out.push_back(indent + name() + "[0] = " + expr()); break;
        case 7: out.push_back(indent + "print(" + name() + ")"); break;
        case 8: out.push_back(indent + name() + ".fit(" + name() + ", " + name() + ")"); break;
        case 9: out.push_back(indent + name() + ", " + name() + " = " + name() + ", " + name()); break;
        case 10: out.push_back(indent + name() + ".dropna(inplace=True)"); break;
        default: out.push_back(indent + "helper(" + name() + ")"); break;
        }
    }

    void statement(std::vector<std::string>& out, const std::string& indent, int depth) {
        const int kind = depth >= 2 ? 0 : pick(10);
        switch (kind) {
        case 6:
            out.push_back(indent + "for " + (chance(0.5) ? "i" : "a") + " in " + name() + ":");
            body(out, indent + "    ", depth + 1);
            break;
        case 7:
            out.push_back(indent + "if " + name() + " > " + std::to_string(pick(5)) + ":");
            body(out, indent + "    ", depth + 1);
            if (chance(0.6)) {
                out.push_back(indent + "else:");
                body(out, indent + "    ", depth + 1);
            }
            break;
        case 8:
            out.push_back(indent + "while " + name() + " < 3:");
            body(out, indent + "    ", depth + 1);
            out.push_back(indent + "    break");
            break;
        case 9:
            if (chance(0.3)) {
                out.push_back(indent + "del " + name());
            } else {
                out.push_back(indent + "try:");
                body(out, indent + "    ", depth + 1);
                out.push_back(indent + "except ValueError:");
                body(out, indent + "    ", depth + 1);
            }
            break;
        default: simple(out, indent); break;
        }
    }

    void body(std::vector<std::string>& out, const std::string& indent, int depth) {
        const int n = 1 + pick(2);
        for (int i = 0; i < n; ++i) {
            statement(out, indent, depth);
        }
    }

    std::mt19937_64 rng_;
};

} // namespace

CellSequence random_notebook(std::uint64_t seed, int min_cells, int max_cells) {
    Generator g(seed);
    CellSequence seq;
    seq.notebook_id = "random-" + std::to_string(seed);
    const int n = min_cells + g.pick(max_cells - min_cells + 1);
    for (int i = 1; i <= n; ++i) {
        std::vector<std::string> lines;
        if (i == 1) {
            lines.push_back("import numpy as np");
            for (const auto& v : kData) {
                if (g.chance(0.6)) {
                    lines.push_back(v + " = " + g.expr());
                }
            }
        }
        if (g.chance(0.15)) {
            lines.push_back("def helper(x):");
            lines.push_back("    return x + 1");
        }
        if (g.chance(0.05)) {
            lines.push_back("%time " + g.name() + " = 1");
        }
        const int statements = 1 + g.pick(4);
        for (int s = 0; s < statements; ++s) {
            g.statement(lines, "", 0);
        }
        CodeCell cell;
        cell.index = i;
        cell.source = std::move(lines);
        seq.cells.push_back(std::move(cell));
    }
    return seq;
}

std::string describe(const CellSequence& cells) {
    std::ostringstream out;
    for (const auto& c : cells.cells) {
        out << "# ---- cell " << c.index << '\n';
        for (const auto& l : c.source) {
            out << l << '\n';
        }
    }
    return out.str();
}

resolve::Answer RandomBackend::answer(const CodeCell&, const Ambiguity&, const std::string&, const std::string& hash) {
    const std::size_t h = std::hash<std::string>{}(hash + "/" + std::to_string(seed_));
    return resolve::Answer{(h >> 7) % 2 == 1, std::nullopt};
}

} // namespace crabs::testing
