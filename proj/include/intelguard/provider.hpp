#pragma once

/**
 * @file provider.hpp
 * @brief Language-model provider abstraction.
 *
 * Three implementations ship:
 *  - MockProvider: pure, rule-based, used by tests and offline runs.
 *  - ScriptedProvider: replays responses keyed by (task kind, prompt hash)
 *    from a JSON file, optionally falling back to another provider.
 *  - HttpProvider: POST {task_kind, prompt, schema_id} -> {text}.
 *
 * Every implementation must be safe to call from several threads.
 */

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace intelguard {

enum class TaskKind { Relevance, Extraction, CrossCheck, Summarize, Classify, Embed };

std::string_view to_string(TaskKind kind);
std::optional<TaskKind> parse_task_kind(std::string_view text);
std::string_view schema_id(TaskKind kind);

class LlmProvider {
public:
    virtual ~LlmProvider() = default;
    virtual std::string name() const = 0;
    /// Throws RetriableError when the backend fails.
    virtual std::string complete(TaskKind kind, std::string_view prompt) const = 0;
};

/// Deterministic stand-in. Rules per task kind:
///  relevance   relevant iff the document has a ``` fence and mentions one of
///              exfiltrat / backdoor / execut / payload (case-insensitive)
///  extraction  one candidate per fence, fields mined from the prose after it
///  crosscheck  consistent iff some behavior word (>= 4 chars) occurs in the
///              document
///  summarize   fixed template over trigger, sink and category set
///  classify    malicious iff top-1 sim_total >= threshold and the slice has
///              both network and process categories
///  embed       fallback_embed of the text at the requested dimension
class MockProvider final : public LlmProvider {
public:
    static constexpr double kDefaultThreshold = 0.75;

    explicit MockProvider(double classify_threshold = kDefaultThreshold);

    std::string name() const override { return "mock"; }
    std::string complete(TaskKind kind, std::string_view prompt) const override;

    double threshold() const { return threshold_; }

private:
    double threshold_;
};

/// Key format: "<task_kind>:<fnv1a64 hex of prompt>".
std::string scripted_key(TaskKind kind, std::string_view prompt);

class ScriptedProvider final : public LlmProvider {
public:
    explicit ScriptedProvider(std::map<std::string, std::string> responses,
                              std::shared_ptr<const LlmProvider> fallback = nullptr);

    /// File layout: {"responses": [{"task_kind", "prompt_hash", "text"}]}.
    static ScriptedProvider from_file(const std::string& path, std::shared_ptr<const LlmProvider> fallback = nullptr);

    std::string name() const override { return "scripted"; }
    std::string complete(TaskKind kind, std::string_view prompt) const override;

private:
    std::map<std::string, std::string> responses_;
    std::shared_ptr<const LlmProvider> fallback_;
};

struct HttpProviderConfig {
    std::string base_url;                          // http(s)://host[:port][/path]
    std::string model = "default";
    std::string token_env = "INTELGUARD_API_TOKEN";  // name of the env var holding the token
    int timeout_seconds = 120;
};

class HttpProvider final : public LlmProvider {
public:
    explicit HttpProvider(HttpProviderConfig config);

    std::string name() const override { return "http:" + config_.model; }
    std::string complete(TaskKind kind, std::string_view prompt) const override;

    const HttpProviderConfig& config() const { return config_; }

private:
    HttpProviderConfig config_;
    std::string origin_;
    std::string path_;
};

}  // namespace intelguard
