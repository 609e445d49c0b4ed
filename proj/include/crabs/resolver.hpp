#pragma once

#include "crabs/ambiguity.hpp"
#include "crabs/diagnostics.hpp"
#include "crabs/graph.hpp"
#include "crabs/notebook.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crabs::resolve {

inline constexpr std::string_view kTemplateVersion = "crabs-prompt-v1";

enum class ResolverKind { llm_http, heuristic, replay, truth_oracle, assume_yes, assume_no };
enum class OnUnparseable { fail, assume_yes, assume_no };

[[nodiscard]] std::string_view to_string(ResolverKind kind) noexcept;
[[nodiscard]] std::string_view to_string(OnUnparseable mode) noexcept;
[[nodiscard]] std::optional<ResolverKind> parse_resolver_kind(std::string_view text) noexcept;
[[nodiscard]] std::optional<OnUnparseable> parse_on_unparseable(std::string_view text) noexcept;

struct ResolverConfig {
    ResolverKind resolver = ResolverKind::assume_no;
    std::optional<std::string> endpoint_url;
    std::optional<std::string> model_name;
    double temperature = 0.0;
    OnUnparseable on_unparseable = OnUnparseable::fail;
    std::optional<std::filesystem::path> cache_path;
    int concurrency = 4;
    // Heuristic verdict when a call is in neither table.
    bool heuristic_default = true;
};

struct ResolutionRecord {
    Ambiguity ambiguity;
    bool verdict = false;
    std::string resolver_id;
    std::string prompt_hash;
    std::optional<std::string> raw_response;

    friend bool operator==(const ResolutionRecord&, const ResolutionRecord&) = default;
};

class ResolverError : public std::runtime_error {
public:
    enum class Kind { transport, cache_miss, unparseable, config };

    ResolverError(Kind kind, const std::string& message, std::optional<std::string> raw = std::nullopt)
        : std::runtime_error(message), kind_(kind), raw_(std::move(raw)) {}

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::optional<std::string>& raw_response() const noexcept { return raw_; }

private:
    Kind kind_;
    std::optional<std::string> raw_;
};

[[nodiscard]] std::string build_prompt(const CodeCell& cell, const Ambiguity& ambiguity);
// SHA-256 over the template version and the prompt, hex encoded.
[[nodiscard]] std::string prompt_hash(std::string_view prompt);
[[nodiscard]] std::string sha256_hex(std::string_view data);
// nullopt when the response carries no recognizable yes/no.
[[nodiscard]] std::optional<bool> parse_verdict(std::string_view response);

struct Answer {
    std::optional<bool> verdict;     // set by offline backends
    std::optional<std::string> text; // set by text backends; parsed with parse_verdict
};

// One source of verdicts. Implementations must be safe to call concurrently.
class Backend {
public:
    virtual ~Backend() = default;
    [[nodiscard]] virtual std::string id() const = 0;
    [[nodiscard]] virtual Answer answer(const CodeCell& cell, const Ambiguity& ambiguity, const std::string& prompt,
                                        const std::string& hash) = 0;
};

// Append-only JSON-lines store of answered prompts.
class ReplayCache {
public:
    explicit ReplayCache(std::filesystem::path path);

    struct Entry {
        bool verdict = false;
        std::optional<std::string> raw_response;
        std::string resolver_id;
        std::string template_version;
    };

    [[nodiscard]] std::optional<Entry> find(const std::string& hash) const;
    void append(const std::string& hash, const Entry& entry);

private:
    std::filesystem::path path_;
    std::map<std::string, Entry> entries_;
    mutable std::mutex mutex_;
};

// Verdicts read off a ground-truth annotation.
[[nodiscard]] bool truth_verdict(const GroundTruth& truth, const Ambiguity& ambiguity);

// Builds the backend for `config`. truth-oracle needs `truth`.
[[nodiscard]] std::unique_ptr<Backend> make_backend(const ResolverConfig& config, const GroundTruth* truth = nullptr);

// One record per ambiguity, in input order. Queries run concurrently up to
// config.concurrency. Substituted unparseable answers are logged to `log`.
[[nodiscard]] std::vector<ResolutionRecord> resolve_all(const std::vector<Ambiguity>& ambiguities,
                                                        const CellSequence& cells, const ResolverConfig& config,
                                                        Backend& backend, Diagnostics* log = nullptr);
[[nodiscard]] std::vector<ResolutionRecord> resolve_all(const std::vector<Ambiguity>& ambiguities,
                                                        const CellSequence& cells, const ResolverConfig& config,
                                                        const GroundTruth* truth = nullptr, Diagnostics* log = nullptr);

} // namespace crabs::resolve
