#include "intelguard/config.hpp"

#include <cstdlib>
#include <set>

#include "intelguard/error.hpp"
#include "intelguard/serialization.hpp"
#include "intelguard/text_util.hpp"

namespace intelguard {

namespace {

constexpr const char* kEnvNames[] = {"INTELGUARD_PROVIDER", "INTELGUARD_PROVIDER_URL", "INTELGUARD_MODEL",
                                     "INTELGUARD_TOKEN_VAR", "INTELGUARD_K",            "INTELGUARD_ALPHA",
                                     "INTELGUARD_BETA"};

template <typename T>
std::optional<T> json_field(const Json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) return std::nullopt;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw ConfigError(path + ": wrong type for '" + key + "'");
    }
}

std::size_t parse_count(const std::string& name, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long n = std::stoll(value, &used);
        if (used != value.size() || n <= 0) throw std::invalid_argument(value);
        return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
        throw ConfigError(name + " must be a positive integer, got '" + value + "'");
    }
}

double parse_weight(const std::string& name, const std::string& value) {
    try {
        std::size_t used = 0;
        const double x = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(name + " must be a number, got '" + value + "'");
    }
}

template <typename T>
void pick(T& out, const std::optional<T>& flag, const std::optional<T>& env, const std::optional<T>& file) {
    if (flag) {
        out = *flag;
    } else if (env) {
        out = *env;
    } else if (file) {
        out = *file;
    }
}

}  // namespace

ConfigLayer config_layer_from_file(const std::string& path) {
    const Json j = Json::parse(text::read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ConfigError(path + ": config must be a JSON object");
    static const std::set<std::string> known{"provider", "provider_url",  "model",     "token_var",
                                             "scripted_responses", "timeout_seconds", "embedder", "code_dim",
                                             "behavior_dim", "k", "alpha", "beta", "catalogue",
                                             "max_statements", "threads"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ConfigError(path + ": unknown key '" + key + "'");
    }
    ConfigLayer c;
    c.provider = json_field<std::string>(j, "provider", path);
    c.provider_url = json_field<std::string>(j, "provider_url", path);
    c.model = json_field<std::string>(j, "model", path);
    c.token_var = json_field<std::string>(j, "token_var", path);
    c.scripted_responses = json_field<std::string>(j, "scripted_responses", path);
    c.timeout_seconds = json_field<int>(j, "timeout_seconds", path);
    c.embedder = json_field<std::string>(j, "embedder", path);
    c.code_dim = json_field<std::size_t>(j, "code_dim", path);
    c.behavior_dim = json_field<std::size_t>(j, "behavior_dim", path);
    c.k = json_field<std::size_t>(j, "k", path);
    c.alpha = json_field<double>(j, "alpha", path);
    c.beta = json_field<double>(j, "beta", path);
    c.catalogue = json_field<std::string>(j, "catalogue", path);
    c.max_statements = json_field<std::size_t>(j, "max_statements", path);
    c.threads = json_field<std::size_t>(j, "threads", path);
    return c;
}

ConfigLayer config_layer_from_env(const std::map<std::string, std::string>& env) {
    auto get = [&](const char* name) -> std::optional<std::string> {
        auto it = env.find(name);
        if (it == env.end() || it->second.empty()) return std::nullopt;
        return it->second;
    };
    ConfigLayer c;
    c.provider = get("INTELGUARD_PROVIDER");
    c.provider_url = get("INTELGUARD_PROVIDER_URL");
    c.model = get("INTELGUARD_MODEL");
    c.token_var = get("INTELGUARD_TOKEN_VAR");
    if (auto v = get("INTELGUARD_K")) c.k = parse_count("INTELGUARD_K", *v);
    if (auto v = get("INTELGUARD_ALPHA")) c.alpha = parse_weight("INTELGUARD_ALPHA", *v);
    if (auto v = get("INTELGUARD_BETA")) c.beta = parse_weight("INTELGUARD_BETA", *v);
    return c;
}

std::map<std::string, std::string> process_environment() {
    std::map<std::string, std::string> out;
    for (const char* name : kEnvNames) {
        if (const char* v = std::getenv(name)) out[name] = v;
    }
    return out;
}

RuntimeConfig resolve_config(const ConfigLayer& flags, const ConfigLayer& env, const ConfigLayer& file) {
    RuntimeConfig c;
    pick(c.provider_url, flags.provider_url, env.provider_url, file.provider_url);
    if (!c.provider_url.empty()) c.provider = "http";
    pick(c.provider, flags.provider, env.provider, file.provider);
    pick(c.model, flags.model, env.model, file.model);
    pick(c.token_var, flags.token_var, env.token_var, file.token_var);
    pick(c.scripted_responses, flags.scripted_responses, env.scripted_responses, file.scripted_responses);
    pick(c.timeout_seconds, flags.timeout_seconds, env.timeout_seconds, file.timeout_seconds);
    pick(c.embedder, flags.embedder, env.embedder, file.embedder);
    pick(c.code_dim, flags.code_dim, env.code_dim, file.code_dim);
    pick(c.behavior_dim, flags.behavior_dim, env.behavior_dim, file.behavior_dim);
    pick(c.k, flags.k, env.k, file.k);
    pick(c.alpha, flags.alpha, env.alpha, file.alpha);
    pick(c.beta, flags.beta, env.beta, file.beta);
    pick(c.catalogue, flags.catalogue, env.catalogue, file.catalogue);
    pick(c.max_statements, flags.max_statements, env.max_statements, file.max_statements);
    pick(c.threads, flags.threads, env.threads, file.threads);

    if (c.provider != "mock" && c.provider != "http" && c.provider != "scripted") {
        throw ConfigError("unknown provider '" + c.provider + "' (expected mock, http or scripted)");
    }
    if (c.provider == "http" && c.provider_url.empty()) throw ConfigError("the http provider needs a provider URL");
    if (c.provider == "scripted" && c.scripted_responses.empty()) {
        throw ConfigError("the scripted provider needs a responses file");
    }
    if (c.embedder != "fallback" && c.embedder != "remote") {
        throw ConfigError("unknown embedder '" + c.embedder + "' (expected fallback or remote)");
    }
    if (c.k == 0) throw ConfigError("k must be positive");
    if (c.code_dim == 0 || c.behavior_dim == 0) throw ConfigError("embedding dimensions must be positive");
    if (c.max_statements == 0) throw ConfigError("max_statements must be positive");
    if (c.threads == 0) c.threads = 1;
    RetrievalWeights::normalized_from(c.alpha, c.beta);
    return c;
}

std::shared_ptr<const LlmProvider> make_provider(const RuntimeConfig& config) {
    if (config.provider == "http") {
        HttpProviderConfig http;
        http.base_url = config.provider_url;
        http.model = config.model;
        http.token_env = config.token_var;
        http.timeout_seconds = config.timeout_seconds;
        return std::make_shared<HttpProvider>(http);
    }
    auto mock = std::make_shared<MockProvider>();
    if (config.provider == "scripted") {
        return std::make_shared<ScriptedProvider>(ScriptedProvider::from_file(config.scripted_responses, mock));
    }
    return mock;
}

std::unique_ptr<Embedder> make_embedder(const RuntimeConfig& config, std::shared_ptr<const LlmProvider> provider) {
    if (config.embedder == "remote") {
        return std::make_unique<RemoteEmbedder>(std::move(provider), config.model, config.code_dim,
                                                config.behavior_dim);
    }
    return std::make_unique<FallbackEmbedder>(config.code_dim, config.behavior_dim);
}

}  // namespace intelguard
