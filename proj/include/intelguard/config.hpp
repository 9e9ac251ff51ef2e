#pragma once

// Runtime configuration shared by the CLI commands.
//
// Each setting is resolved as: command-line flag, then environment
// variable, then config file (JSON object with the same keys as
// RuntimeConfig), then the built-in default.

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "intelguard/embedding.hpp"
#include "intelguard/knowledge_store.hpp"
#include "intelguard/provider.hpp"

namespace intelguard {

struct RuntimeConfig {
    std::string provider = "mock";  // mock | http | scripted
    std::string provider_url;
    std::string model = "default";
    std::string token_var = "INTELGUARD_API_TOKEN";
    std::string scripted_responses;  // JSON file for the scripted provider
    int timeout_seconds = 120;
    std::string embedder = "fallback";  // fallback | remote
    std::size_t code_dim = 256;
    std::size_t behavior_dim = 256;
    std::size_t k = kDefaultTopK;
    double alpha = 0.5;
    double beta = 0.5;
    std::string catalogue;  // empty: the shipped catalogue
    std::size_t max_statements = 400;
    std::size_t threads = 1;
};

/// Same keys as RuntimeConfig; unset means "not given at this layer".
struct ConfigLayer {
    std::optional<std::string> provider;
    std::optional<std::string> provider_url;
    std::optional<std::string> model;
    std::optional<std::string> token_var;
    std::optional<std::string> scripted_responses;
    std::optional<int> timeout_seconds;
    std::optional<std::string> embedder;
    std::optional<std::size_t> code_dim;
    std::optional<std::size_t> behavior_dim;
    std::optional<std::size_t> k;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<std::string> catalogue;
    std::optional<std::size_t> max_statements;
    std::optional<std::size_t> threads;
};

/// Throws ConfigError on unknown keys or wrongly typed values.
ConfigLayer config_layer_from_file(const std::string& path);

/// Reads INTELGUARD_PROVIDER, INTELGUARD_PROVIDER_URL, INTELGUARD_MODEL,
/// INTELGUARD_TOKEN_VAR, INTELGUARD_K, INTELGUARD_ALPHA and INTELGUARD_BETA
/// from the given map. Throws ConfigError on unparsable numbers.
ConfigLayer config_layer_from_env(const std::map<std::string, std::string>& env);

/// The process environment restricted to the variables above.
std::map<std::string, std::string> process_environment();

/// A provider URL given at any layer selects the http provider unless a
/// provider is named explicitly. Throws ConfigError for invalid values.
RuntimeConfig resolve_config(const ConfigLayer& flags, const ConfigLayer& env, const ConfigLayer& file);

std::shared_ptr<const LlmProvider> make_provider(const RuntimeConfig& config);
std::unique_ptr<Embedder> make_embedder(const RuntimeConfig& config, std::shared_ptr<const LlmProvider> provider);

}  // namespace intelguard
