#pragma once

#include "crabs/alias_store.hpp"
#include "crabs/ambiguity.hpp"
#include "crabs/name_events.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace crabs::analysis {

struct CellIOEstimate {
    std::set<std::string> inputs;
    std::map<std::string, bool> output_candidates; // name -> definitive
    std::set<std::string> code_declarations;
    std::set<std::string> code_references;
    // Names removed by a top-level `del`; earlier definitions do not reach past this cell.
    std::set<std::string> deleted;

    [[nodiscard]] bool outputs(const std::string& name) const { return output_candidates.count(name) != 0; }
    [[nodiscard]] std::set<std::string> output_names() const;

    friend bool operator==(const CellIOEstimate&, const CellIOEstimate&) = default;
};

struct EstimatePair {
    int cell_index = 0;
    CellIOEstimate lower;
    CellIOEstimate upper;
    std::map<std::string, python::Position> first_seen; // first event position of each name
};

[[nodiscard]] CellIOEstimate lower_estimate(const std::vector<NameEvent>& events);
[[nodiscard]] CellIOEstimate upper_estimate(const std::vector<NameEvent>& events, const AliasStore& aliases);

[[nodiscard]] EstimatePair estimate_pair(int cell_index, const std::vector<NameEvent>& events,
                                         const AliasStore& aliases);

// Items of the upper estimate missing from the lower one, in source order.
// Alias context comes from statements of earlier cells.
[[nodiscard]] std::vector<Ambiguity> compute_ambiguities(const EstimatePair& pair, const AliasStore& aliases);

} // namespace crabs::analysis
