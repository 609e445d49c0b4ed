#pragma once

#include "crabs/notebook.hpp"

#include <filesystem>
#include <initializer_list>
#include <string>

namespace crabs::testing {

// Code cells from plain source strings, indexed from 1.
inline CellSequence cells(std::initializer_list<std::string> sources, std::string id = "nb") {
    CellSequence seq;
    seq.notebook_id = std::move(id);
    int index = 0;
    for (const auto& s : sources) {
        CodeCell c;
        c.index = ++index;
        std::size_t start = 0;
        for (auto nl = s.find('\n'); nl != std::string::npos; nl = s.find('\n', start)) {
            c.source.push_back(s.substr(start, nl - start));
            start = nl + 1;
        }
        c.source.push_back(s.substr(start));
        seq.cells.push_back(std::move(c));
    }
    return seq;
}

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(CRABS_FIXTURE_DIR) / name;
}

} // namespace crabs::testing
