#pragma once

#include "crabs/graph_io.hpp"
#include "crabs/pipeline.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

namespace crabs::cli {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int analysis_failure = 2;
inline constexpr int resolver_failure = 3;
} // namespace exit_code

struct AnalyzeArgs {
    std::vector<std::filesystem::path> notebooks;
    PipelineOptions options;
    std::filesystem::path out_dir = ".";
    int jobs = 1;
    // Annotation file or directory of annotations, for the truth-oracle resolver.
    std::optional<std::filesystem::path> truth;
};

struct EvalArgs {
    std::filesystem::path pred_dir;
    std::filesystem::path truth_dir;
    std::filesystem::path out_file;
};

enum class ExportFormat { dot, json };

struct ExportArgs {
    std::filesystem::path graph;
    ExportFormat format = ExportFormat::dot;
    GraphView view = GraphView::flows;
};

// Each writes progress and results to `out`, problems to `err`, and returns
// an exit code.
int run_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err);
int run_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int run_export(const ExportArgs& args, std::ostream& out, std::ostream& err);

// Annotations keyed by notebook id, from one file or every *.json in a directory.
[[nodiscard]] std::map<std::string, GroundTruth> load_annotations(const std::filesystem::path& where,
                                                                  std::vector<std::string>* problems = nullptr);

// Parses argv and dispatches; what the `crabs` binary runs.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace crabs::cli
