#include "intelguard/serialization.hpp"

namespace intelguard {

namespace {

const Json& field(const Json& j, const char* name) {
    if (!j.is_object()) throw SchemaError(std::string("expected object while reading '") + name + "'");
    auto it = j.find(name);
    if (it == j.end()) throw SchemaError(std::string(name) + ": missing");
    return *it;
}

template <typename T>
T get_as(const Json& j, const char* name) {
    try {
        return field(j, name).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string(name) + ": " + e.what());
    }
}

template <typename T>
T get_or(const Json& j, const char* name, T fallback) {
    auto it = j.find(name);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string(name) + ": " + e.what());
    }
}

Json embedding_json(const Embedding& v) {
    Json arr = Json::array();
    for (float x : v) arr.push_back(static_cast<double>(x));
    return arr;
}

Embedding embedding_from(const Json& j, const char* name) {
    if (!j.is_array()) throw SchemaError(std::string(name) + ": expected array");
    Embedding out;
    out.reserve(j.size());
    for (const auto& x : j) {
        if (!x.is_number()) throw SchemaError(std::string(name) + ": non-numeric component");
        out.push_back(static_cast<float>(x.get<double>()));
    }
    return out;
}

template <typename E>
std::vector<E> enum_list(const Json& j, const char* name) {
    std::vector<E> out;
    for (const auto& x : j) out.push_back(enum_from_json<E>(x, name));
    return out;
}

template <typename E>
Json enum_list_json(const std::vector<E>& values) {
    Json arr = Json::array();
    for (E v : values) arr.push_back(std::string(to_string(v)));
    return arr;
}

}  // namespace

void to_json(Json& j, const ExecutionContext& v) {
    j = Json{{"trigger", to_string(v.trigger)}, {"file_location", v.file_location}, {"permissions", v.permissions}};
}

void from_json(const Json& j, ExecutionContext& v) {
    v.trigger = enum_from_json<Trigger>(field(j, "trigger"), "context.trigger");
    v.file_location = get_as<std::string>(j, "file_location");
    v.permissions = get_as<std::string>(j, "permissions");
}

void to_json(Json& j, const ViolatedExpectation& v) {
    j = Json{{"violation_type", to_string(v.violation_type)}, {"statement", v.statement}};
}

void from_json(const Json& j, ViolatedExpectation& v) {
    v.violation_type = enum_from_json<ViolationType>(field(j, "violation_type"), "violation_type");
    v.statement = get_as<std::string>(j, "statement");
}

void to_json(Json& j, const ReasoningChain& v) {
    j = Json{{"why_suspicious", v.why_suspicious},
             {"violated_expectations", v.violated_expectations},
             {"boundary_distinction", v.boundary_distinction},
             {"strategy", to_string(v.strategy)}};
}

void from_json(const Json& j, ReasoningChain& v) {
    v.why_suspicious = get_as<std::string>(j, "why_suspicious");
    v.violated_expectations = get_as<std::vector<ViolatedExpectation>>(j, "violated_expectations");
    v.boundary_distinction = get_as<std::string>(j, "boundary_distinction");
    v.strategy = enum_from_json<Strategy>(field(j, "strategy"), "reasoning.strategy");
}

Json entry_to_json_without_embeddings(const KnowledgeEntry& v) {
    return Json{{"id", v.id},
                {"snippet", v.snippet},
                {"language", to_string(v.language)},
                {"context", v.context},
                {"behavior", v.behavior},
                {"reasoning", v.reasoning},
                {"indicators", v.indicators},
                {"source_report", v.source_report},
                {"audit", to_string(v.audit)}};
}

void to_json(Json& j, const KnowledgeEntry& v) {
    j = entry_to_json_without_embeddings(v);
    j["code_embedding"] = embedding_json(v.code_embedding);
    j["behavior_embedding"] = embedding_json(v.behavior_embedding);
}

void from_json(const Json& j, KnowledgeEntry& v) {
    v.id = get_as<std::string>(j, "id");
    v.snippet = get_as<std::string>(j, "snippet");
    v.language = enum_from_json<Language>(field(j, "language"), "language");
    v.context = get_as<ExecutionContext>(j, "context");
    v.behavior = get_as<std::string>(j, "behavior");
    v.reasoning = get_as<ReasoningChain>(j, "reasoning");
    v.indicators = get_as<std::vector<std::string>>(j, "indicators");
    v.source_report = get_or<std::string>(j, "source_report", "");
    v.audit = enum_from_json<AuditStatus>(field(j, "audit"), "audit");
    v.code_embedding.clear();
    v.behavior_embedding.clear();
    if (auto it = j.find("code_embedding"); it != j.end() && !it->is_null()) {
        v.code_embedding = embedding_from(*it, "code_embedding");
    }
    if (auto it = j.find("behavior_embedding"); it != j.end() && !it->is_null()) {
        v.behavior_embedding = embedding_from(*it, "behavior_embedding");
    }
}

void to_json(Json& j, const SensitiveApi& v) {
    j = Json{{"module_pattern", v.module_pattern},
             {"api_name", v.api_name},
             {"category", to_string(v.category)},
             {"language", to_string(v.language)}};
}

void from_json(const Json& j, SensitiveApi& v) {
    v.module_pattern = get_as<std::string>(j, "module_pattern");
    v.api_name = get_as<std::string>(j, "api_name");
    v.category = enum_from_json<ApiCategory>(field(j, "category"), "category");
    v.language = enum_from_json<Language>(field(j, "language"), "language");
}

void to_json(Json& j, const SensitiveApiCatalogue& v) { j = Json{{"entries", v.entries}}; }

void from_json(const Json& j, SensitiveApiCatalogue& v) {
    v.entries = get_as<std::vector<SensitiveApi>>(j, "entries");
}

void to_json(Json& j, const SourceLocation& v) { j = Json{{"file", v.file}, {"line", v.line}}; }

void from_json(const Json& j, SourceLocation& v) {
    v.file = get_as<std::string>(j, "file");
    v.line = get_as<int>(j, "line");
}

void to_json(Json& j, const SensitiveCall& v) {
    j = Json{{"file", v.file}, {"line", v.line}, {"api_name", v.api_name}, {"category", to_string(v.category)}};
}

void from_json(const Json& j, SensitiveCall& v) {
    v.file = get_as<std::string>(j, "file");
    v.line = get_as<int>(j, "line");
    v.api_name = get_as<std::string>(j, "api_name");
    v.category = enum_from_json<ApiCategory>(field(j, "category"), "category");
}

void to_json(Json& j, const SliceStatement& v) { j = Json{{"file", v.file}, {"line", v.line}, {"text", v.text}}; }

void from_json(const Json& j, SliceStatement& v) {
    v.file = get_as<std::string>(j, "file");
    v.line = get_as<int>(j, "line");
    v.text = get_as<std::string>(j, "text");
}

void to_json(Json& j, const CodeSlice& v) {
    j = Json{{"package_id", v.package_id},
             {"entry_point", v.entry_point},
             {"sensitive_call", v.sensitive_call},
             {"statements", v.statements},
             {"behavior_summary", v.behavior_summary},
             {"code_embedding", v.code_embedding ? embedding_json(*v.code_embedding) : Json(nullptr)},
             {"behavior_embedding", v.behavior_embedding ? embedding_json(*v.behavior_embedding) : Json(nullptr)},
             {"categories", enum_list_json(v.categories)},
             {"trigger", to_string(v.trigger)},
             {"truncated", v.truncated},
             {"low_confidence", v.low_confidence},
             {"dynamic", v.dynamic}};
}

void from_json(const Json& j, CodeSlice& v) {
    v.package_id = get_as<std::string>(j, "package_id");
    v.entry_point = get_as<SourceLocation>(j, "entry_point");
    v.sensitive_call = get_as<SensitiveCall>(j, "sensitive_call");
    v.statements = get_as<std::vector<SliceStatement>>(j, "statements");
    v.behavior_summary = get_or<std::string>(j, "behavior_summary", "");
    v.code_embedding.reset();
    v.behavior_embedding.reset();
    if (auto it = j.find("code_embedding"); it != j.end() && !it->is_null()) {
        v.code_embedding = embedding_from(*it, "code_embedding");
    }
    if (auto it = j.find("behavior_embedding"); it != j.end() && !it->is_null()) {
        v.behavior_embedding = embedding_from(*it, "behavior_embedding");
    }
    v.categories = j.contains("categories") ? enum_list<ApiCategory>(j.at("categories"), "categories")
                                            : std::vector<ApiCategory>{};
    v.trigger = j.contains("trigger") ? enum_from_json<Trigger>(j.at("trigger"), "trigger") : Trigger::Unknown;
    v.truncated = get_or<bool>(j, "truncated", false);
    v.low_confidence = get_or<bool>(j, "low_confidence", false);
    v.dynamic = get_or<bool>(j, "dynamic", false);
}

void to_json(Json& j, const BehaviorCluster& v) {
    j = Json{{"cluster_id", v.cluster_id},
             {"member_ids", v.member_ids},
             {"centroid", embedding_json(v.centroid)},
             {"representative_id", v.representative_id},
             {"voted_predicates", v.voted_predicates},
             {"unified_explanation", v.unified_explanation}};
}

void from_json(const Json& j, BehaviorCluster& v) {
    v.cluster_id = get_as<int>(j, "cluster_id");
    v.member_ids = get_as<std::vector<std::string>>(j, "member_ids");
    v.centroid = embedding_from(field(j, "centroid"), "centroid");
    v.representative_id = get_as<std::string>(j, "representative_id");
    v.voted_predicates = get_as<std::vector<std::string>>(j, "voted_predicates");
    v.unified_explanation = get_as<std::string>(j, "unified_explanation");
}

void to_json(Json& j, const SimilarityScore& v) {
    j = Json{{"entry_id", v.entry_id}, {"sim_code", v.sim_code}, {"sim_behav", v.sim_behav}, {"sim_total", v.sim_total}};
}

void from_json(const Json& j, SimilarityScore& v) {
    v.entry_id = get_as<std::string>(j, "entry_id");
    v.sim_code = get_as<double>(j, "sim_code");
    v.sim_behav = get_as<double>(j, "sim_behav");
    v.sim_total = get_as<double>(j, "sim_total");
}

void to_json(Json& j, const SliceVerdict& v) {
    j = Json{{"label", to_string(v.label)},
             {"explanation", v.explanation},
             {"matched_entry_ids", v.matched_entry_ids},
             {"scores", v.scores},
             {"site", v.site},
             {"error", v.error}};
}

void from_json(const Json& j, SliceVerdict& v) {
    v.label = enum_from_json<Label>(field(j, "label"), "label");
    v.explanation = get_as<std::string>(j, "explanation");
    v.matched_entry_ids = get_as<std::vector<std::string>>(j, "matched_entry_ids");
    v.scores = get_as<std::vector<SimilarityScore>>(j, "scores");
    v.site = j.contains("site") ? j.at("site").get<SensitiveCall>() : SensitiveCall{};
    v.error = get_or<bool>(j, "error", false);
}

void to_json(Json& j, const DetectionReport& v) {
    j = Json{{"package_id", v.package_id},
             {"package_label", to_string(v.package_label)},
             {"slice_verdicts", v.slice_verdicts},
             {"responsible_slices", v.responsible_slices},
             {"kb_version", v.kb_version},
             {"timings", v.timings},
             {"no_sensitive_behavior", v.no_sensitive_behavior},
             {"unparsed_files", v.unparsed_files},
             {"slice_errors", v.slice_errors}};
}

void from_json(const Json& j, DetectionReport& v) {
    v.package_id = get_as<std::string>(j, "package_id");
    v.package_label = enum_from_json<Label>(field(j, "package_label"), "package_label");
    v.slice_verdicts = get_as<std::vector<SliceVerdict>>(j, "slice_verdicts");
    v.responsible_slices = get_as<std::vector<std::size_t>>(j, "responsible_slices");
    v.kb_version = get_as<std::string>(j, "kb_version");
    v.timings = get_or<std::map<std::string, double>>(j, "timings", {});
    v.no_sensitive_behavior = get_or<bool>(j, "no_sensitive_behavior", false);
    v.unparsed_files = get_or<std::vector<std::string>>(j, "unparsed_files", {});
    v.slice_errors = get_or<int>(j, "slice_errors", 0);
}

}  // namespace intelguard
