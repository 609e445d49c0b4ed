#include "crabs/graph_io.hpp"

#include "json.hpp"

#include <sstream>

namespace crabs {

using json = nlohmann::ordered_json;

GraphDocument make_document(const PipelineResult& result) {
    GraphDocument doc;
    doc.notebook_id = result.analysis.notebook_id;
    doc.n_cells = result.analysis.n_cells();
    doc.cells = result.resolved;
    doc.flows = result.flows;
    doc.deps = result.deps;
    doc.diagnostics = result.diagnostics;
    doc.resolutions = result.records;
    return doc;
}

namespace {

json names(const std::set<std::string>& s) {
    json a = json::array();
    for (const auto& n : s) {
        a.push_back(n);
    }
    return a;
}

json flow_json(const InformationFlow& f) {
    return {{"source", f.source}, {"target", f.target}, {"name", f.name}, {"kind", std::string(to_string(f.kind))}};
}

json pairs_json(const std::set<CellPair>& pairs) {
    json a = json::array();
    for (const auto& [t, s] : pairs) {
        a.push_back(json::array({t, s}));
    }
    return a;
}

const json& need(const json& obj, const char* key) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw SchemaError(std::string("graph JSON: missing field '") + key + "'");
    }
    return obj.at(key);
}

std::set<std::string> name_set(const json& a) {
    std::set<std::string> out;
    for (const auto& n : a) {
        out.insert(n.get<std::string>());
    }
    return out;
}

InformationFlow parse_flow(const json& f, int n_cells) {
    InformationFlow flow;
    flow.source = need(f, "source").get<int>();
    flow.target = need(f, "target").get<int>();
    flow.name = need(f, "name").get<std::string>();
    const auto kind = need(f, "kind").get<std::string>();
    if (kind != "data" && kind != "code") {
        throw SchemaError("graph JSON: unknown flow kind '" + kind + "'");
    }
    flow.kind = kind == "code" ? FlowKind::code : FlowKind::data;
    if (flow.source < 1 || flow.source >= flow.target || flow.target > n_cells) {
        throw SchemaError("graph JSON: flow is not forward between existing cells");
    }
    return flow;
}

std::set<CellPair> parse_pairs(const json& a, int n_cells) {
    std::set<CellPair> out;
    for (const auto& p : a) {
        if (!p.is_array() || p.size() != 2) {
            throw SchemaError("graph JSON: dependency entries must be [t, s] pairs");
        }
        const int t = p[0].get<int>();
        const int s = p[1].get<int>();
        if (s < 1 || s >= t || t > n_cells) {
            throw SchemaError("graph JSON: dependency must point from a later to an earlier cell");
        }
        out.emplace(t, s);
    }
    return out;
}

std::string dot_string(std::string_view text) {
    std::string out = "\"";
    for (char c : text) {
        if (c == '"' || c == '\\') {
            out.push_back('\\');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace

std::string graph_json(const GraphDocument& doc) {
    json root;
    root["schema_version"] = doc.schema_version;
    root["notebook_id"] = doc.notebook_id;
    root["n_cells"] = doc.n_cells;
    root["cells"] = json::array();
    for (const auto& c : doc.cells) {
        json outputs = json::array();
        for (const auto& [name, definitive] : c.outputs) {
            outputs.push_back({{"name", name}, {"definitive", definitive}});
        }
        root["cells"].push_back({{"index", c.cell_index},
                                 {"skipped", c.skipped},
                                 {"inputs", names(c.inputs)},
                                 {"outputs", outputs},
                                 {"code_declarations", names(c.code_declarations)},
                                 {"code_references", names(c.code_references)}});
    }
    root["flows"] = json::array();
    for (const auto& f : doc.flows.flows) {
        root["flows"].push_back(flow_json(f));
    }
    root["deps"] = pairs_json(doc.deps.deps);
    root["diagnostics"] = json::array();
    for (const auto& d : doc.diagnostics) {
        root["diagnostics"].push_back({{"cell", d.cell_index},
                                       {"line", d.position.line},
                                       {"column", d.position.column},
                                       {"code", d.code},
                                       {"message", d.message}});
    }
    root["resolutions"] = json::array();
    for (const auto& r : doc.resolutions) {
        json rec{{"cell", r.ambiguity.cell_index},
                 {"name", r.ambiguity.name},
                 {"kind", std::string(to_string(r.ambiguity.kind))},
                 {"verdict", r.verdict},
                 {"resolver_id", r.resolver_id},
                 {"prompt_hash", r.prompt_hash},
                 {"raw_response", r.raw_response ? json(*r.raw_response) : json(nullptr)}};
        if (r.ambiguity.alias_context) {
            rec["alias_context"] = *r.ambiguity.alias_context;
        }
        root["resolutions"].push_back(std::move(rec));
    }
    return root.dump(2) + "\n";
}

GraphDocument parse_graph_json(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("graph JSON: ") + e.what());
    }
    GraphDocument doc;
    try {
        doc.schema_version = need(root, "schema_version").get<int>();
        if (doc.schema_version != kGraphSchemaVersion) {
            throw SchemaError("graph JSON: unsupported schema_version " + std::to_string(doc.schema_version));
        }
        doc.notebook_id = need(root, "notebook_id").get<std::string>();
        doc.n_cells = need(root, "n_cells").get<int>();
        for (const auto& c : need(root, "cells")) {
            ResolvedIOSet cell;
            cell.cell_index = need(c, "index").get<int>();
            cell.skipped = need(c, "skipped").get<bool>();
            cell.inputs = name_set(need(c, "inputs"));
            for (const auto& o : need(c, "outputs")) {
                cell.outputs[need(o, "name").get<std::string>()] = need(o, "definitive").get<bool>();
            }
            cell.code_declarations = name_set(need(c, "code_declarations"));
            cell.code_references = name_set(need(c, "code_references"));
            doc.cells.push_back(std::move(cell));
        }
        doc.flows.notebook_id = doc.notebook_id;
        doc.flows.n_cells = doc.n_cells;
        for (const auto& f : need(root, "flows")) {
            doc.flows.flows.insert(parse_flow(f, doc.n_cells));
        }
        doc.deps = derive_dependency_graph(doc.flows);
        doc.deps.deps = parse_pairs(need(root, "deps"), doc.n_cells);
        if (root.contains("diagnostics")) {
            for (const auto& d : root["diagnostics"]) {
                doc.diagnostics.push_back(Diagnostic{need(d, "cell").get<int>(),
                                                     {d.value("line", 0), d.value("column", 0)},
                                                     need(d, "code").get<std::string>(),
                                                     d.value("message", "")});
            }
        }
        if (root.contains("resolutions")) {
            for (const auto& r : root["resolutions"]) {
                resolve::ResolutionRecord rec;
                rec.ambiguity.cell_index = need(r, "cell").get<int>();
                rec.ambiguity.name = need(r, "name").get<std::string>();
                const auto kind = need(r, "kind").get<std::string>();
                if (kind != "input" && kind != "output-candidate") {
                    throw SchemaError("graph JSON: unknown ambiguity kind '" + kind + "'");
                }
                rec.ambiguity.kind = kind == "input" ? AmbiguityKind::input : AmbiguityKind::output_candidate;
                if (r.contains("alias_context")) {
                    rec.ambiguity.alias_context = r["alias_context"].get<std::vector<std::string>>();
                }
                rec.verdict = need(r, "verdict").get<bool>();
                rec.resolver_id = r.value("resolver_id", "");
                rec.prompt_hash = r.value("prompt_hash", "");
                if (r.contains("raw_response") && !r["raw_response"].is_null()) {
                    rec.raw_response = r["raw_response"].get<std::string>();
                }
                doc.resolutions.push_back(std::move(rec));
            }
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string("graph JSON: ") + e.what());
    }
    return doc;
}

std::string export_dot(const GraphDocument& doc, GraphView view) {
    std::ostringstream out;
    out << "digraph " << dot_string(doc.notebook_id) << " {\n";
    out << "  rankdir=TB;\n";
    out << "  node [shape=box];\n";
    for (int i = 1; i <= doc.n_cells; ++i) {
        out << "  c" << i << " [label=\"cell " << i << "\"];\n";
    }
    if (view == GraphView::flows) {
        for (const auto& f : doc.flows.flows) {
            out << "  c" << f.source << " -> c" << f.target << " [label=" << dot_string(f.name);
            if (f.kind == FlowKind::code) {
                out << ", style=dashed";
            }
            out << "];\n";
        }
    } else {
        for (const auto& [t, s] : doc.deps.deps) {
            out << "  c" << t << " -> c" << s;
            if (doc.deps.direct.count({t, s}) == 0) {
                out << " [style=dotted]";
            }
            out << ";\n";
        }
    }
    out << "}\n";
    return out.str();
}

std::string export_json(const GraphDocument& doc, GraphView view) {
    json root;
    root["notebook_id"] = doc.notebook_id;
    root["n_cells"] = doc.n_cells;
    if (view == GraphView::flows) {
        root["flows"] = json::array();
        for (const auto& f : doc.flows.flows) {
            root["flows"].push_back(flow_json(f));
        }
    } else {
        root["deps"] = pairs_json(doc.deps.deps);
        root["direct"] = pairs_json(doc.deps.direct);
    }
    return root.dump(2) + "\n";
}

} // namespace crabs
