#pragma once

// Canonical JSON encoding for every core_model type. Decoding is strict:
// missing fields and out-of-vocabulary enumeration values raise SchemaError.

#include "json.hpp"

#include "intelguard/core_model.hpp"
#include "intelguard/error.hpp"

namespace intelguard {

using Json = nlohmann::json;

void to_json(Json& j, const ExecutionContext& v);
void from_json(const Json& j, ExecutionContext& v);
void to_json(Json& j, const ViolatedExpectation& v);
void from_json(const Json& j, ViolatedExpectation& v);
void to_json(Json& j, const ReasoningChain& v);
void from_json(const Json& j, ReasoningChain& v);
void to_json(Json& j, const KnowledgeEntry& v);
void from_json(const Json& j, KnowledgeEntry& v);
void to_json(Json& j, const SensitiveApi& v);
void from_json(const Json& j, SensitiveApi& v);
void to_json(Json& j, const SensitiveApiCatalogue& v);
void from_json(const Json& j, SensitiveApiCatalogue& v);
void to_json(Json& j, const SourceLocation& v);
void from_json(const Json& j, SourceLocation& v);
void to_json(Json& j, const SensitiveCall& v);
void from_json(const Json& j, SensitiveCall& v);
void to_json(Json& j, const SliceStatement& v);
void from_json(const Json& j, SliceStatement& v);
void to_json(Json& j, const CodeSlice& v);
void from_json(const Json& j, CodeSlice& v);
void to_json(Json& j, const BehaviorCluster& v);
void from_json(const Json& j, BehaviorCluster& v);
void to_json(Json& j, const SimilarityScore& v);
void from_json(const Json& j, SimilarityScore& v);
void to_json(Json& j, const SliceVerdict& v);
void from_json(const Json& j, SliceVerdict& v);
void to_json(Json& j, const DetectionReport& v);
void from_json(const Json& j, DetectionReport& v);

/// Entry JSON without the two embedding arrays (used by the KB entry file,
/// where the matrices are authoritative).
Json entry_to_json_without_embeddings(const KnowledgeEntry& entry);

/// Decodes an enumeration value, naming `field` in the error.
template <typename E>
E enum_from_json(const Json& j, const char* field) {
    if (!j.is_string()) throw SchemaError(std::string(field) + ": expected string");
    auto parsed = parse_enum<E>(j.get<std::string>());
    if (!parsed) throw SchemaError(std::string(field) + ": unknown value '" + j.get<std::string>() + "'");
    return *parsed;
}

}  // namespace intelguard
