#pragma once

#include <compare>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace crabs {

enum class FlowKind { data, code };

[[nodiscard]] constexpr std::string_view to_string(FlowKind kind) noexcept {
    return kind == FlowKind::data ? "data" : "code";
}

// `name` flows from cell `source` to the later cell `target`.
struct InformationFlow {
    int source = 0;
    int target = 0;
    std::string name;
    FlowKind kind = FlowKind::data;

    friend auto operator<=>(const InformationFlow&, const InformationFlow&) = default;
};

struct FlowGraph {
    std::string notebook_id;
    int n_cells = 0;
    std::set<InformationFlow> flows;
};

using CellPair = std::pair<int, int>; // (later, earlier)

struct DependencyGraph {
    std::string notebook_id;
    int n_cells = 0;
    std::set<CellPair> deps;   // transitively closed
    std::set<CellPair> direct; // pairs carrying at least one flow
};

// Hand annotation of a notebook.
struct GroundTruth {
    std::string notebook_id;
    int n_cells = 0;
    std::set<InformationFlow> flows;
};

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] GroundTruth parse_ground_truth(std::string_view json_text);
[[nodiscard]] GroundTruth load_ground_truth(const std::filesystem::path& path);
[[nodiscard]] std::string ground_truth_json(const GroundTruth& truth);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

} // namespace crabs
