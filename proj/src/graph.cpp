#include "crabs/graph.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace crabs {

using json = nlohmann::ordered_json;

namespace {

const json& field(const json& obj, const char* key) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw SchemaError(std::string("missing field '") + key + "'");
    }
    return obj.at(key);
}

} // namespace

GroundTruth parse_ground_truth(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("malformed annotation JSON: ") + e.what());
    }
    GroundTruth truth;
    try {
        truth.notebook_id = field(doc, "notebook_id").get<std::string>();
        truth.n_cells = field(doc, "n_cells").get<int>();
        for (const auto& f : field(doc, "flows")) {
            InformationFlow flow;
            flow.source = field(f, "source").get<int>();
            flow.target = field(f, "target").get<int>();
            flow.name = field(f, "name").get<std::string>();
            const std::string kind = f.value("kind", "data");
            if (kind != "data" && kind != "code") {
                throw SchemaError("flow kind must be 'data' or 'code', got '" + kind + "'");
            }
            flow.kind = kind == "code" ? FlowKind::code : FlowKind::data;
            if (flow.source < 1 || flow.source >= flow.target || flow.target > truth.n_cells) {
                throw SchemaError("flow (" + std::to_string(flow.source) + ", " + std::to_string(flow.target) +
                                  ", " + flow.name + ") is not a forward flow between annotated cells");
            }
            truth.flows.insert(std::move(flow));
        }
    } catch (const json::type_error& e) {
        throw SchemaError(std::string("annotation field has the wrong type: ") + e.what());
    }
    return truth;
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
    return parse_ground_truth(read_file(path));
}

std::string ground_truth_json(const GroundTruth& truth) {
    json doc;
    doc["notebook_id"] = truth.notebook_id;
    doc["n_cells"] = truth.n_cells;
    doc["flows"] = json::array();
    for (const auto& f : truth.flows) {
        doc["flows"].push_back(
            {{"source", f.source}, {"target", f.target}, {"name", f.name}, {"kind", std::string(to_string(f.kind))}});
    }
    return doc.dump(2) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

} // namespace crabs
