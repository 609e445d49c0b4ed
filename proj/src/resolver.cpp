#include "crabs/resolver.hpp"

#include "json.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <sstream>
#include <thread>

namespace crabs::resolve {

using json = nlohmann::ordered_json;

std::string_view to_string(ResolverKind kind) noexcept {
    switch (kind) {
    case ResolverKind::llm_http: return "llm-http";
    case ResolverKind::heuristic: return "heuristic";
    case ResolverKind::replay: return "replay";
    case ResolverKind::truth_oracle: return "truth-oracle";
    case ResolverKind::assume_yes: return "assume-yes";
    case ResolverKind::assume_no: return "assume-no";
    }
    return "?";
}

std::string_view to_string(OnUnparseable mode) noexcept {
    switch (mode) {
    case OnUnparseable::fail: return "fail";
    case OnUnparseable::assume_yes: return "assume-yes";
    case OnUnparseable::assume_no: return "assume-no";
    }
    return "?";
}

std::optional<ResolverKind> parse_resolver_kind(std::string_view text) noexcept {
    for (auto k : {ResolverKind::llm_http, ResolverKind::heuristic, ResolverKind::replay, ResolverKind::truth_oracle,
                   ResolverKind::assume_yes, ResolverKind::assume_no}) {
        if (to_string(k) == text) {
            return k;
        }
    }
    return std::nullopt;
}

std::optional<OnUnparseable> parse_on_unparseable(std::string_view text) noexcept {
    for (auto m : {OnUnparseable::fail, OnUnparseable::assume_yes, OnUnparseable::assume_no}) {
        if (to_string(m) == text) {
            return m;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Prompts

std::string build_prompt(const CodeCell& cell, const Ambiguity& ambiguity) {
    std::ostringstream p;
    p << "You are given one code cell of a Python notebook. Cells run from top to bottom. "
         "You see only this cell, not the cells after it.\n\n";
    p << "Cell:\n```python\n";
    for (const auto& line : cell.screened_source) {
        p << line << '\n';
    }
    p << "```\n\n";
    if (ambiguity.alias_context && !ambiguity.alias_context->empty()) {
        p << "Statements from earlier cells that make `" << ambiguity.name
          << "` share an object with other names:\n```python\n";
        for (const auto& s : *ambiguity.alias_context) {
            p << s << '\n';
        }
        p << "```\n\n";
    }
    if (ambiguity.kind == AmbiguityKind::input) {
        p << "Question: Is `" << ambiguity.name
          << "` used as an input by this cell? That is, does the cell read a value of `" << ambiguity.name
          << "` that existed before the cell ran?\n";
    } else {
        p << "Question: Could this cell define or modify `" << ambiguity.name
          << "`, making it available to later cells? Count in-place changes made through any name that refers "
             "to the same object.\n";
    }
    p << "Answer with exactly one word: yes or no.\n";
    return p.str();
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0x0f]);
    }
    return out;
}

std::string prompt_hash(std::string_view prompt) {
    std::string keyed(kTemplateVersion);
    keyed.push_back('\n');
    keyed.append(prompt);
    return sha256_hex(keyed);
}

std::optional<bool> parse_verdict(std::string_view response) {
    std::size_t i = 0;
    auto skippable = [](unsigned char c) {
        return std::isspace(c) || c == '"' || c == '\'' || c == '`' || c == '*' || c == '_' || c == '(' ||
               c == '[' || c == '>' || c == '#';
    };
    while (i < response.size() && skippable(static_cast<unsigned char>(response[i]))) {
        ++i;
    }
    std::string word;
    while (i < response.size() && std::isalpha(static_cast<unsigned char>(response[i]))) {
        word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(response[i]))));
        ++i;
    }
    if (word == "yes") {
        return true;
    }
    if (word == "no") {
        return false;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Cache

ReplayCache::ReplayCache(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const json rec = json::parse(line);
            Entry e;
            e.verdict = rec.at("verdict").get<bool>();
            if (rec.contains("raw_response") && !rec["raw_response"].is_null()) {
                e.raw_response = rec["raw_response"].get<std::string>();
            }
            e.resolver_id = rec.value("resolver_id", "");
            e.template_version = rec.value("template_version", "");
            entries_[rec.at("prompt_hash").get<std::string>()] = std::move(e);
        } catch (const json::exception& ex) {
            throw ResolverError(ResolverError::Kind::config,
                                path_.string() + ":" + std::to_string(number) + ": bad cache record: " + ex.what());
        }
    }
}

std::optional<ReplayCache::Entry> ReplayCache::find(const std::string& hash) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(hash);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void ReplayCache::append(const std::string& hash, const Entry& entry) {
    json rec;
    rec["prompt_hash"] = hash;
    rec["verdict"] = entry.verdict;
    rec["raw_response"] = entry.raw_response ? json(*entry.raw_response) : json(nullptr);
    rec["resolver_id"] = entry.resolver_id;
    rec["template_version"] = entry.template_version;
    std::lock_guard lock(mutex_);
    if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    std::ofstream out(path_, std::ios::app);
    if (!out) {
        throw ResolverError(ResolverError::Kind::config, "cannot append to cache " + path_.string());
    }
    out << rec.dump() << '\n';
    entries_[hash] = entry;
}

bool truth_verdict(const GroundTruth& truth, const Ambiguity& ambiguity) {
    return std::any_of(truth.flows.begin(), truth.flows.end(), [&](const InformationFlow& f) {
        if (f.name != ambiguity.name) {
            return false;
        }
        return ambiguity.kind == AmbiguityKind::input ? f.target == ambiguity.cell_index
                                                      : f.source == ambiguity.cell_index;
    });
}

// ---------------------------------------------------------------------------
// Driver

namespace {

std::string describe(const Ambiguity& a) {
    return "(cell " + std::to_string(a.cell_index) + ", " + a.name + ", " + std::string(to_string(a.kind)) + ")";
}

ResolutionRecord resolve_one(const Ambiguity& ambiguity, const CodeCell& cell, const ResolverConfig& config,
                             Backend& backend, ReplayCache* sink, Diagnostics& log) {
    ResolutionRecord rec;
    rec.ambiguity = ambiguity;
    rec.resolver_id = backend.id();
    const std::string prompt = build_prompt(cell, ambiguity);
    rec.prompt_hash = prompt_hash(prompt);
    Answer answer = backend.answer(cell, ambiguity, prompt, rec.prompt_hash);
    rec.raw_response = answer.text;
    if (answer.verdict) {
        rec.verdict = *answer.verdict;
    } else {
        const std::string raw = answer.text.value_or("");
        if (auto v = parse_verdict(raw)) {
            rec.verdict = *v;
        } else if (config.on_unparseable == OnUnparseable::fail) {
            throw ResolverError(ResolverError::Kind::unparseable,
                                "unparseable response for " + describe(ambiguity) + ": " + raw, raw);
        } else {
            rec.verdict = config.on_unparseable == OnUnparseable::assume_yes;
            log.push_back(Diagnostic{ambiguity.cell_index, ambiguity.position, diag::kUnparseableResponse,
                                     "no yes/no in response for " + describe(ambiguity) + "; substituted " +
                                         (rec.verdict ? "yes" : "no")});
        }
    }
    if (sink != nullptr) {
        sink->append(rec.prompt_hash,
                     ReplayCache::Entry{rec.verdict, rec.raw_response, rec.resolver_id, std::string(kTemplateVersion)});
    }
    return rec;
}

} // namespace

std::vector<ResolutionRecord> resolve_all(const std::vector<Ambiguity>& ambiguities, const CellSequence& cells,
                                          const ResolverConfig& config, Backend& backend, Diagnostics* log) {
    const std::size_t n = ambiguities.size();
    if (n == 0) {
        return {};
    }
    for (const auto& a : ambiguities) {
        if (a.cell_index < 1 || a.cell_index > cells.size() || cells.cell(a.cell_index).skipped) {
            throw std::invalid_argument("ambiguity " + describe(a) + " does not name an analyzable cell");
        }
    }
    std::unique_ptr<ReplayCache> sink;
    if (config.cache_path && config.resolver != ResolverKind::replay) {
        sink = std::make_unique<ReplayCache>(*config.cache_path);
    }

    std::vector<ResolutionRecord> out(n);
    std::vector<std::exception_ptr> errors(n);
    std::vector<Diagnostics> logs(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                const Ambiguity& a = ambiguities[i];
                out[i] = resolve_one(a, cells.cell(a.cell_index), config, backend, sink.get(), logs[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, config.concurrency)));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    if (log != nullptr) {
        for (auto& l : logs) {
            log->insert(log->end(), l.begin(), l.end());
        }
    }
    return out;
}

std::vector<ResolutionRecord> resolve_all(const std::vector<Ambiguity>& ambiguities, const CellSequence& cells,
                                          const ResolverConfig& config, const GroundTruth* truth, Diagnostics* log) {
    if (ambiguities.empty()) {
        return {};
    }
    auto backend = make_backend(config, truth);
    return resolve_all(ambiguities, cells, config, *backend, log);
}

} // namespace crabs::resolve
