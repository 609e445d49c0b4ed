#include "crabs/pipeline.hpp"

namespace crabs {

std::string_view to_string(EstimateMode mode) noexcept {
    switch (mode) {
    case EstimateMode::lower: return "lower";
    case EstimateMode::upper: return "upper";
    case EstimateMode::resolved: return "resolved";
    }
    return "?";
}

std::optional<EstimateMode> parse_estimate_mode(std::string_view text) noexcept {
    for (auto m : {EstimateMode::lower, EstimateMode::upper, EstimateMode::resolved}) {
        if (to_string(m) == text) {
            return m;
        }
    }
    return std::nullopt;
}

PipelineResult run_pipeline(CellSequence cells, const PipelineOptions& options, const GroundTruth* truth,
                            resolve::Backend* backend) {
    PipelineResult out;
    out.analysis = analyze_notebook(std::move(cells), options.analysis);
    out.diagnostics = out.analysis.diagnostics;

    resolve::ResolverConfig config = options.resolver;
    if (options.mode != EstimateMode::resolved) {
        config.resolver =
            options.mode == EstimateMode::lower ? resolve::ResolverKind::assume_no : resolve::ResolverKind::assume_yes;
        config.cache_path.reset();
        backend = nullptr;
    }
    if (backend != nullptr) {
        out.records = resolve::resolve_all(out.analysis.ambiguities, out.analysis.cells, config, *backend,
                                           &out.diagnostics);
    } else {
        out.records =
            resolve::resolve_all(out.analysis.ambiguities, out.analysis.cells, config, truth, &out.diagnostics);
    }
    out.resolved = apply_verdicts(out.analysis, out.records);
    out.flows = build_flow_graph(out.resolved, out.analysis.notebook_id, &out.diagnostics);
    out.deps = derive_dependency_graph(out.flows);
    return out;
}

} // namespace crabs
