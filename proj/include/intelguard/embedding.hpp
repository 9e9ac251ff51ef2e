#pragma once

/**
 * @file embedding.hpp
 * @brief Dual (code + behavior) embeddings and the cosine primitive.
 *
 * The fallback embedder is a signed feature-hashing bag of tokens:
 * lowercase the text, split on every non-alphanumeric byte, hash each token
 * with FNV-1a 64, add +1 (bit 63 clear) or -1 (bit 63 set) at index
 * h mod D, then L2-normalize. Counts are integers and the norm is summed in
 * index order, so the output is bit-identical on every platform.
 */

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "intelguard/core_model.hpp"

namespace intelguard {

class LlmProvider;

/// Lowercased alphanumeric runs, in input order.
std::vector<std::string> tokenize_for_embedding(std::string_view text);

/// Throws InputError when dim < 2 or the text has no tokens.
Embedding fallback_embed(std::string_view text, std::size_t dim);

/// u.v / (|u||v|). Throws InputError on dimension mismatch or zero norm.
double cosine(const Embedding& u, const Embedding& v);

struct EmbedderIdentity {
    std::string name;
    std::string version;
    std::size_t code_dim = 0;
    std::size_t behavior_dim = 0;

    bool operator==(const EmbedderIdentity&) const = default;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual EmbedderIdentity identity() const = 0;
    virtual Embedding embed_code(std::string_view snippet) const = 0;
    virtual Embedding embed_behavior(std::string_view behavior) const = 0;
};

class FallbackEmbedder final : public Embedder {
public:
    explicit FallbackEmbedder(std::size_t code_dim = 256, std::size_t behavior_dim = 256);

    EmbedderIdentity identity() const override;
    Embedding embed_code(std::string_view snippet) const override;
    Embedding embed_behavior(std::string_view behavior) const override;

private:
    std::size_t code_dim_;
    std::size_t behavior_dim_;
};

/// Delegates to a provider with task kind "embed"; the response text must be
/// a JSON array of numbers. The result is re-normalized and its length
/// checked against the declared dimension.
class RemoteEmbedder final : public Embedder {
public:
    RemoteEmbedder(std::shared_ptr<const LlmProvider> provider, std::string model, std::size_t code_dim,
                   std::size_t behavior_dim);

    EmbedderIdentity identity() const override;
    Embedding embed_code(std::string_view snippet) const override;
    Embedding embed_behavior(std::string_view behavior) const override;

private:
    Embedding request(std::string_view prefix, std::string_view text, std::size_t dim) const;

    std::shared_ptr<const LlmProvider> provider_;
    std::string model_;
    std::size_t code_dim_;
    std::size_t behavior_dim_;
};

struct DualEmbedding {
    Embedding code;
    Embedding behavior;
};

/// Throws InputError on empty snippet or behavior.
DualEmbedding embed_dual(std::string_view snippet, std::string_view behavior, const Embedder& embedder);

/// Normalized copy; throws InputError for the zero vector.
Embedding normalized(const std::vector<double>& v);

}  // namespace intelguard
