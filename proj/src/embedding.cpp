#include "intelguard/embedding.hpp"

#include <cmath>
#include <cstdint>

#include "intelguard/error.hpp"
#include "intelguard/hashing.hpp"
#include "intelguard/prompts.hpp"
#include "intelguard/provider.hpp"
#include "json.hpp"

namespace intelguard {

namespace {

bool is_alnum_ascii(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

char lower_ascii(unsigned char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c); }

}  // namespace

std::vector<std::string> tokenize_for_embedding(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (is_alnum_ascii(c)) {
            current.push_back(lower_ascii(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Embedding fallback_embed(std::string_view text, std::size_t dim) {
    if (dim < 2) throw InputError("fallback_embed: dimension must be >= 2");
    const auto tokens = tokenize_for_embedding(text);
    if (tokens.empty()) throw InputError("fallback_embed: text has no tokens");

    std::vector<std::int64_t> counts(dim, 0);
    for (const auto& t : tokens) {
        const std::uint64_t h = fnv1a64(t);
        const std::size_t index = static_cast<std::size_t>(h % dim);
        counts[index] += (h >> 63) ? -1 : 1;
    }

    // Exact integer sum of squares in index order, then one sqrt.
    std::int64_t sum_sq = 0;
    for (std::int64_t c : counts) sum_sq += c * c;
    if (sum_sq == 0) {
        // Every bucket cancelled out; fall back to the unsigned histogram.
        for (const auto& t : tokens) counts[static_cast<std::size_t>(fnv1a64(t) % dim)] = 0;
        for (const auto& t : tokens) counts[static_cast<std::size_t>(fnv1a64(t) % dim)] += 1;
        for (std::int64_t c : counts) sum_sq += c * c;
    }
    const double norm = std::sqrt(static_cast<double>(sum_sq));

    Embedding out(dim);
    for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(static_cast<double>(counts[i]) / norm);
    return out;
}

double cosine(const Embedding& u, const Embedding& v) {
    if (u.size() != v.size()) throw InputError("cosine: dimension mismatch");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = u[i], b = v[i];
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if (nu == 0.0 || nv == 0.0) throw InputError("cosine: zero-norm input");
    double c = dot / (std::sqrt(nu) * std::sqrt(nv));
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    return c;
}

Embedding normalized(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x * x;
    if (sum == 0.0) throw InputError("normalized: zero vector");
    const double norm = std::sqrt(sum);
    Embedding out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] / norm);
    return out;
}

FallbackEmbedder::FallbackEmbedder(std::size_t code_dim, std::size_t behavior_dim)
    : code_dim_(code_dim), behavior_dim_(behavior_dim) {
    if (code_dim < 2 || behavior_dim < 2) throw ConfigError("FallbackEmbedder: dimensions must be >= 2");
}

EmbedderIdentity FallbackEmbedder::identity() const {
    return {"fallback-fnv1a64", "1", code_dim_, behavior_dim_};
}

Embedding FallbackEmbedder::embed_code(std::string_view snippet) const { return fallback_embed(snippet, code_dim_); }

Embedding FallbackEmbedder::embed_behavior(std::string_view behavior) const {
    return fallback_embed(behavior, behavior_dim_);
}

RemoteEmbedder::RemoteEmbedder(std::shared_ptr<const LlmProvider> provider, std::string model, std::size_t code_dim,
                               std::size_t behavior_dim)
    : provider_(std::move(provider)), model_(std::move(model)), code_dim_(code_dim), behavior_dim_(behavior_dim) {
    if (!provider_) throw ConfigError("RemoteEmbedder: provider required");
}

EmbedderIdentity RemoteEmbedder::identity() const {
    return {"remote:" + model_, provider_->name(), code_dim_, behavior_dim_};
}

Embedding RemoteEmbedder::request(std::string_view kind, std::string_view text, std::size_t dim) const {
    if (text.empty()) throw InputError("embed: empty input");
    const std::string response = provider_->complete(TaskKind::Embed, prompts::embed(model_, dim, kind, text));
    nlohmann::json parsed = nlohmann::json::parse(response, nullptr, false);
    if (parsed.is_object() && parsed.contains("embedding")) parsed = parsed["embedding"];
    if (!parsed.is_array()) throw RetriableError("embed: response is not a JSON array");
    if (parsed.size() != dim) {
        throw RetriableError("embed: expected " + std::to_string(dim) + " components, got " +
                             std::to_string(parsed.size()));
    }
    std::vector<double> raw;
    raw.reserve(dim);
    for (const auto& x : parsed) {
        if (!x.is_number()) throw RetriableError("embed: non-numeric component");
        raw.push_back(x.get<double>());
    }
    try {
        return normalized(raw);
    } catch (const InputError&) {
        throw RetriableError("embed: provider returned the zero vector");
    }
}

Embedding RemoteEmbedder::embed_code(std::string_view snippet) const { return request("code", snippet, code_dim_); }

Embedding RemoteEmbedder::embed_behavior(std::string_view behavior) const {
    return request("behavior", behavior, behavior_dim_);
}

DualEmbedding embed_dual(std::string_view snippet, std::string_view behavior, const Embedder& embedder) {
    if (snippet.empty()) throw InputError("embed_dual: empty snippet");
    if (behavior.empty()) throw InputError("embed_dual: empty behavior");
    return {embedder.embed_code(snippet), embedder.embed_behavior(behavior)};
}

}  // namespace intelguard
