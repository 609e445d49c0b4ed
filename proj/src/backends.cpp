#include "crabs/python/parser.hpp"
#include "crabs/python/visit.hpp"
#include "crabs/resolver.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"

#include <cstdlib>
#include <set>

namespace crabs::resolve {

namespace {

using namespace crabs::python;

class ConstantBackend final : public Backend {
public:
    explicit ConstantBackend(bool verdict) : verdict_(verdict) {}
    std::string id() const override { return verdict_ ? "assume-yes" : "assume-no"; }
    Answer answer(const CodeCell&, const Ambiguity&, const std::string&, const std::string&) override {
        return Answer{verdict_, std::nullopt};
    }

private:
    bool verdict_;
};

class TruthBackend final : public Backend {
public:
    explicit TruthBackend(GroundTruth truth) : truth_(std::move(truth)) {}
    std::string id() const override { return "truth-oracle"; }
    Answer answer(const CodeCell&, const Ambiguity& a, const std::string&, const std::string&) override {
        return Answer{truth_verdict(truth_, a), std::nullopt};
    }

private:
    GroundTruth truth_;
};

class ReplayBackend final : public Backend {
public:
    explicit ReplayBackend(const std::filesystem::path& path) : cache_(path) {}
    std::string id() const override { return "replay"; }
    Answer answer(const CodeCell&, const Ambiguity& a, const std::string&, const std::string& hash) override {
        auto hit = cache_.find(hash);
        if (!hit) {
            throw ResolverError(ResolverError::Kind::cache_miss,
                                "replay cache has no entry for prompt_hash " + hash + " (cell " +
                                    std::to_string(a.cell_index) + ", " + a.name + ")");
        }
        return Answer{hit->verdict, hit->raw_response};
    }

private:
    ReplayCache cache_;
};

// ---------------------------------------------------------------------------

const std::set<std::string, std::less<>> kMutatingMethods = {
    "append", "extend", "insert", "remove", "pop", "clear", "update", "sort", "reverse", "add", "discard",
    "setdefault", "popitem", "fit", "partial_fit", "fit_transform", "set_params", "compile", "train",
    "load_state_dict", "zero_grad", "step", "resize", "fill", "itemset", "put", "shuffle", "__setitem__",
    "__delitem__", "set_axis", "insert_column",
};

const std::set<std::string, std::less<>> kPureMethods = {
    "head", "tail", "describe", "info", "copy", "truncate", "groupby", "mean", "sum", "count", "min", "max",
    "median", "std", "var", "agg", "aggregate", "apply", "map", "value_counts", "unique", "nunique", "isnull",
    "isna", "notnull", "notna", "dropna", "fillna", "drop", "rename", "replace", "astype", "merge", "join",
    "sort_values", "sort_index", "reset_index", "set_index", "query", "filter", "get", "keys", "values", "items",
    "predict", "predict_proba", "transform", "score", "split", "strip", "lower", "upper", "format", "startswith",
    "endswith", "to_csv", "to_json", "plot", "hist", "corr", "reshape", "tolist", "to_numpy", "round", "abs",
    "cumsum", "pivot", "pivot_table", "melt", "sample", "nlargest", "nsmallest", "duplicated", "drop_duplicates",
    "where", "any", "all", "idxmax", "idxmin", "select_dtypes", "memory_usage", "equals", "index", "find",
    "join", "encode", "decode", "dot", "flatten", "ravel", "argmax", "argmin", "transpose", "iterrows", "itertuples",
};

const std::set<std::string, std::less<>> kMutatingFunctions = {
    "shuffle", "heappush", "heappop", "heapify", "heappushpop", "heapreplace", "setattr", "delattr",
};

const std::set<std::string, std::less<>> kPureFunctions = {
    "print", "len", "display", "type", "str", "repr", "int", "float", "bool", "list", "tuple", "set", "dict",
    "sorted", "reversed", "enumerate", "zip", "range", "isinstance", "sum", "min", "max", "abs", "round", "any",
    "all", "id", "hash", "iter", "format", "mean", "median", "std", "array", "asarray", "DataFrame", "Series",
    "concat", "deepcopy", "copy", "train_test_split", "cross_val_score", "accuracy_score", "mean_squared_error",
    "confusion_matrix", "classification_report", "f1_score", "precision_score", "recall_score", "r2_score",
    "heatmap", "countplot", "barplot", "boxplot", "histplot", "distplot", "scatterplot", "lineplot", "pairplot",
    "scatter", "hist", "bar", "imshow", "title", "xlabel", "ylabel", "unique", "log", "exp", "sqrt",
};

bool is_true_constant(const Expr& e) {
    const auto* c = e.as<Constant>();
    return c != nullptr && c->kind == Constant::Kind::boolean && c->text == "True";
}

const Name* chain_root(const Expr& e) {
    if (const auto* n = e.as<Name>()) {
        return n;
    }
    if (const auto* a = e.as<Attribute>()) {
        return chain_root(*a->value);
    }
    if (const auto* s = e.as<Subscript>()) {
        return chain_root(*s->value);
    }
    return nullptr;
}

std::string callee_name(const Expr& func) {
    if (const auto* n = func.as<Name>()) {
        return n->id;
    }
    if (const auto* a = func.as<Attribute>()) {
        return a->attr;
    }
    return {};
}

enum class Evidence { none, pure, unknown, mutating };

Evidence combine(Evidence a, Evidence b) { return static_cast<int>(a) >= static_cast<int>(b) ? a : b; }

// Table-driven offline resolver.
class HeuristicBackend final : public Backend {
public:
    explicit HeuristicBackend(bool unknown_default) : unknown_default_(unknown_default) {}
    std::string id() const override { return "heuristic"; }

    Answer answer(const CodeCell& cell, const Ambiguity& a, const std::string&, const std::string&) override {
        if (a.kind == AmbiguityKind::input) {
            return Answer{true, std::nullopt};
        }
        Module module;
        try {
            module = parse_module(cell.screened_text());
        } catch (const SyntaxError&) {
            return Answer{unknown_default_, std::nullopt};
        }
        Evidence about_name = Evidence::none;
        Evidence any_mutation = Evidence::none;
        bool mentioned = false;
        auto on_expr = [&](const Expr& e) {
            if (const auto* n = e.as<Name>(); n != nullptr && n->id == a.name) {
                mentioned = true;
            }
            const auto* call = e.as<Call>();
            if (call == nullptr) {
                return;
            }
            bool inplace = false;
            for (const auto& kw : call->keywords) {
                if (kw.arg && *kw.arg == "inplace" && is_true_constant(*kw.value)) {
                    inplace = true;
                }
            }
            if (const auto* attr = call->func->as<Attribute>()) {
                Evidence ev = Evidence::unknown;
                if (inplace || kMutatingMethods.count(attr->attr) != 0) {
                    ev = Evidence::mutating;
                } else if (kPureMethods.count(attr->attr) != 0) {
                    ev = Evidence::pure;
                }
                const Name* root = chain_root(*attr->value);
                if (root != nullptr && root->id == a.name) {
                    about_name = combine(about_name, ev);
                }
                if (ev == Evidence::mutating) {
                    any_mutation = Evidence::mutating;
                }
            }
            const std::string fname = callee_name(*call->func);
            Evidence ev = Evidence::unknown;
            if (kMutatingFunctions.count(fname) != 0) {
                ev = Evidence::mutating;
            } else if (kPureFunctions.count(fname) != 0) {
                ev = Evidence::pure;
            }
            auto passes_name = [&](const Expr& arg) {
                const Expr* x = &arg;
                if (const auto* st = x->as<Starred>()) {
                    x = st->value.get();
                }
                const auto* n = x->as<Name>();
                return n != nullptr && n->id == a.name;
            };
            bool passed = false;
            for (const auto& arg : call->args) {
                passed = passed || passes_name(*arg);
            }
            for (const auto& kw : call->keywords) {
                passed = passed || passes_name(*kw.value);
            }
            if (passed) {
                about_name = combine(about_name, ev);
            }
            if (ev == Evidence::mutating) {
                any_mutation = Evidence::mutating;
            }
        };
        auto on_stmt = [&](const Stmt& s) {
            // Stores through a subscript or attribute change some object in place.
            auto through = [](const Expr& t) { return t.as<Subscript>() != nullptr || t.as<Attribute>() != nullptr; };
            if (const auto* as = s.as<Assign>()) {
                for (const auto& t : as->targets) {
                    if (through(*t)) {
                        any_mutation = Evidence::mutating;
                    }
                }
            } else if (const auto* aug = s.as<AugAssign>()) {
                any_mutation = Evidence::mutating;
                (void)aug;
            } else if (const auto* f = s.as<For>()) {
                if (const auto* n = f->iter->as<Name>(); n != nullptr && n->id == a.name) {
                    about_name = combine(about_name, Evidence::unknown);
                }
            }
        };
        for (const auto& s : module.body) {
            walk(*s, on_expr, on_stmt);
        }
        Evidence ev = mentioned ? about_name : any_mutation;
        if (a.alias_context && any_mutation == Evidence::mutating) {
            ev = Evidence::mutating;
        }
        switch (ev) {
        case Evidence::mutating: return Answer{true, std::nullopt};
        case Evidence::pure:
        case Evidence::none: return Answer{false, std::nullopt};
        case Evidence::unknown: break;
        }
        return Answer{unknown_default_, std::nullopt};
    }

private:
    bool unknown_default_;
};

// ---------------------------------------------------------------------------

struct Endpoint {
    std::string base; // scheme://host[:port]
    std::string path;
};

Endpoint split_url(const std::string& url) {
    const auto scheme = url.find("://");
    const auto host_from = scheme == std::string::npos ? 0 : scheme + 3;
    const auto slash = url.find('/', host_from);
    if (slash == std::string::npos) {
        return Endpoint{url, "/"};
    }
    return Endpoint{url.substr(0, slash), url.substr(slash)};
}

class LlmHttpBackend final : public Backend {
public:
    explicit LlmHttpBackend(const ResolverConfig& config)
        : endpoint_(split_url(*config.endpoint_url)), model_(config.model_name.value_or("")),
          temperature_(config.temperature) {
        if (const char* key = std::getenv("CRABS_API_KEY")) {
            api_key_ = key;
        }
    }

    std::string id() const override { return "llm-http:" + model_; }

    Answer answer(const CodeCell&, const Ambiguity& a, const std::string& prompt, const std::string&) override {
        nlohmann::ordered_json body;
        body["model"] = model_;
        body["temperature"] = temperature_;
        body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", prompt}}});
        const std::string payload = body.dump();

        std::string failure;
        for (int attempt = 0; attempt < 2; ++attempt) {
            httplib::Client client(endpoint_.base);
            client.set_connection_timeout(10);
            client.set_read_timeout(120);
            httplib::Headers headers;
            if (!api_key_.empty()) {
                headers.emplace("Authorization", "Bearer " + api_key_);
            }
            auto res = client.Post(endpoint_.path, headers, payload, "application/json");
            if (!res) {
                failure = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status != 200) {
                failure = "HTTP " + std::to_string(res->status);
                continue;
            }
            try {
                const auto reply = nlohmann::json::parse(res->body);
                return Answer{std::nullopt, reply.at("choices").at(0).at("message").at("content").get<std::string>()};
            } catch (const nlohmann::json::exception& e) {
                failure = std::string("malformed completion body: ") + e.what();
            }
        }
        throw ResolverError(ResolverError::Kind::transport, "LLM request failed for (cell " +
                                                                std::to_string(a.cell_index) + ", " + a.name + ", " +
                                                                std::string(to_string(a.kind)) + "): " + failure);
    }

private:
    Endpoint endpoint_;
    std::string model_;
    double temperature_;
    std::string api_key_;
};

} // namespace

std::unique_ptr<Backend> make_backend(const ResolverConfig& config, const GroundTruth* truth) {
    switch (config.resolver) {
    case ResolverKind::assume_yes: return std::make_unique<ConstantBackend>(true);
    case ResolverKind::assume_no: return std::make_unique<ConstantBackend>(false);
    case ResolverKind::heuristic: return std::make_unique<HeuristicBackend>(config.heuristic_default);
    case ResolverKind::truth_oracle:
        if (truth == nullptr) {
            throw ResolverError(ResolverError::Kind::config, "truth-oracle resolver needs a ground-truth annotation");
        }
        return std::make_unique<TruthBackend>(*truth);
    case ResolverKind::replay:
        if (!config.cache_path) {
            throw ResolverError(ResolverError::Kind::config, "replay resolver needs a cache path");
        }
        return std::make_unique<ReplayBackend>(*config.cache_path);
    case ResolverKind::llm_http:
        if (!config.endpoint_url) {
            throw ResolverError(ResolverError::Kind::config, "llm-http resolver needs an endpoint URL");
        }
        return std::make_unique<LlmHttpBackend>(config);
    }
    throw ResolverError(ResolverError::Kind::config, "unknown resolver");
}

} // namespace crabs::resolve
