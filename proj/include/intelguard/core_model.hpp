#pragma once

/**
 * @file core_model.hpp
 * @brief Shared domain types for the knowledge base and the detector.
 *
 * Everything here is a plain value type. Validation helpers return
 * human-readable violation messages instead of throwing so callers can
 * collect every problem in one pass.
 */

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace intelguard {

enum class Trigger { Install, Import, Runtime, Build, Unknown };
enum class Language { Python, JavaScript, Other };
enum class ViolationType { ExecutionContext, FunctionalBoundary, PermissionAbuse, DataFlow, Isolation };
enum class Strategy { FunctionalViolation, ContextualBoundary, PrivilegeAbuse, TemporalAnomaly };
enum class AuditStatus { AutoValidated, ExpertValidated, Unvalidated };
enum class ApiCategory { Network, Encryption, Process, File, SystemInfo };
enum class Label { Malicious, Benign };

// Wire names. Each table lists every enumerator exactly once.
template <typename E>
struct EnumNames;

template <>
struct EnumNames<Trigger> {
    static constexpr std::array<std::pair<Trigger, std::string_view>, 5> table{{
        {Trigger::Install, "install"},
        {Trigger::Import, "import"},
        {Trigger::Runtime, "runtime"},
        {Trigger::Build, "build"},
        {Trigger::Unknown, "unknown"},
    }};
};

template <>
struct EnumNames<Language> {
    static constexpr std::array<std::pair<Language, std::string_view>, 3> table{{
        {Language::Python, "python"},
        {Language::JavaScript, "javascript"},
        {Language::Other, "other"},
    }};
};

template <>
struct EnumNames<ViolationType> {
    static constexpr std::array<std::pair<ViolationType, std::string_view>, 5> table{{
        {ViolationType::ExecutionContext, "execution_context"},
        {ViolationType::FunctionalBoundary, "functional_boundary"},
        {ViolationType::PermissionAbuse, "permission_abuse"},
        {ViolationType::DataFlow, "data_flow"},
        {ViolationType::Isolation, "isolation"},
    }};
};

template <>
struct EnumNames<Strategy> {
    static constexpr std::array<std::pair<Strategy, std::string_view>, 4> table{{
        {Strategy::FunctionalViolation, "functional_violation"},
        {Strategy::ContextualBoundary, "contextual_boundary"},
        {Strategy::PrivilegeAbuse, "privilege_abuse"},
        {Strategy::TemporalAnomaly, "temporal_anomaly"},
    }};
};

template <>
struct EnumNames<AuditStatus> {
    static constexpr std::array<std::pair<AuditStatus, std::string_view>, 3> table{{
        {AuditStatus::AutoValidated, "auto_validated"},
        {AuditStatus::ExpertValidated, "expert_validated"},
        {AuditStatus::Unvalidated, "unvalidated"},
    }};
};

template <>
struct EnumNames<ApiCategory> {
    static constexpr std::array<std::pair<ApiCategory, std::string_view>, 5> table{{
        {ApiCategory::Network, "network"},
        {ApiCategory::Encryption, "encryption"},
        {ApiCategory::Process, "process"},
        {ApiCategory::File, "file"},
        {ApiCategory::SystemInfo, "system_info"},
    }};
};

template <>
struct EnumNames<Label> {
    static constexpr std::array<std::pair<Label, std::string_view>, 2> table{{
        {Label::Malicious, "malicious"},
        {Label::Benign, "benign"},
    }};
};

template <typename E>
constexpr std::string_view to_string(E value) {
    for (const auto& [v, name] : EnumNames<E>::table) {
        if (v == value) return name;
    }
    return "?";
}

template <typename E>
constexpr std::optional<E> parse_enum(std::string_view text) {
    for (const auto& [v, name] : EnumNames<E>::table) {
        if (name == text) return v;
    }
    return std::nullopt;
}

using Embedding = std::vector<float>;

struct ExecutionContext {
    Trigger trigger = Trigger::Unknown;
    std::string file_location;
    std::string permissions = "unknown";

    bool operator==(const ExecutionContext&) const = default;
};

struct ViolatedExpectation {
    ViolationType violation_type = ViolationType::ExecutionContext;
    std::string statement;

    bool operator==(const ViolatedExpectation&) const = default;
};

struct ReasoningChain {
    std::string why_suspicious;
    std::vector<ViolatedExpectation> violated_expectations;
    std::string boundary_distinction;
    Strategy strategy = Strategy::FunctionalViolation;

    bool operator==(const ReasoningChain&) const = default;
};

/// One knowledge-base tuple: snippet, context, behavior, reasoning,
/// indicators and the two embeddings.
struct KnowledgeEntry {
    std::string id;
    std::string snippet;
    Language language = Language::Other;
    ExecutionContext context;
    std::string behavior;
    ReasoningChain reasoning;
    std::vector<std::string> indicators;
    Embedding code_embedding;
    Embedding behavior_embedding;
    std::string source_report;
    AuditStatus audit = AuditStatus::Unvalidated;

    bool operator==(const KnowledgeEntry&) const = default;
};

struct SensitiveApi {
    std::string module_pattern;
    std::string api_name;  // "*" matches every member of the module
    ApiCategory category = ApiCategory::Network;
    Language language = Language::Python;

    bool operator==(const SensitiveApi&) const = default;
};

struct SensitiveApiCatalogue {
    std::vector<SensitiveApi> entries;

    bool operator==(const SensitiveApiCatalogue&) const = default;
};

struct SourceLocation {
    std::string file;
    int line = 0;

    auto operator<=>(const SourceLocation&) const = default;
};

struct SensitiveCall {
    std::string file;
    int line = 0;
    std::string api_name;
    ApiCategory category = ApiCategory::Network;

    bool operator==(const SensitiveCall&) const = default;
};

struct SliceStatement {
    std::string file;
    int line = 0;
    std::string text;

    bool operator==(const SliceStatement&) const = default;
};

struct CodeSlice {
    std::string package_id;
    SourceLocation entry_point;
    SensitiveCall sensitive_call;
    std::vector<SliceStatement> statements;
    std::string behavior_summary;
    std::optional<Embedding> code_embedding;
    std::optional<Embedding> behavior_embedding;

    // Analysis facts carried alongside the statements.
    std::vector<ApiCategory> categories;  // sorted, unique
    Trigger trigger = Trigger::Unknown;
    bool truncated = false;
    bool low_confidence = false;
    bool dynamic = false;

    bool operator==(const CodeSlice&) const = default;
};

struct BehaviorCluster {
    int cluster_id = -1;
    std::vector<std::string> member_ids;
    Embedding centroid;
    std::string representative_id;
    std::vector<std::string> voted_predicates;
    std::string unified_explanation;

    bool operator==(const BehaviorCluster&) const = default;
};

struct SimilarityScore {
    std::string entry_id;
    double sim_code = 0.0;
    double sim_behav = 0.0;
    double sim_total = 0.0;

    bool operator==(const SimilarityScore&) const = default;
};

struct SliceVerdict {
    Label label = Label::Benign;
    std::string explanation;
    std::vector<std::string> matched_entry_ids;
    std::vector<SimilarityScore> scores;

    SensitiveCall site;
    bool error = false;  // provider never produced a valid label

    bool operator==(const SliceVerdict&) const = default;
};

struct DetectionReport {
    std::string package_id;
    Label package_label = Label::Benign;
    std::vector<SliceVerdict> slice_verdicts;
    std::vector<std::size_t> responsible_slices;  // indices into slice_verdicts
    std::string kb_version;
    std::map<std::string, double> timings;

    bool no_sensitive_behavior = false;
    std::vector<std::string> unparsed_files;
    int slice_errors = 0;

    bool operator==(const DetectionReport&) const = default;
};

/// The closed vocabulary used for predicate voting.
inline constexpr std::array<std::string_view, 8> kPredicateVocabulary{
    "anti-analysis", "backdoor", "code injection", "command execution",
    "credential theft", "data exfiltration", "dropper", "persistence",
};

inline constexpr double kUnitNormTolerance = 1e-6;

double l2_norm(const Embedding& v);
bool is_unit_norm(const Embedding& v, double tolerance = kUnitNormTolerance);

enum class EmbeddingCheck { Required, Exempt };

/// Empty result iff every entry invariant holds. Messages are
/// "<field>: <what failed>".
std::vector<std::string> validate_entry_schema(const KnowledgeEntry& entry,
                                               EmbeddingCheck embeddings = EmbeddingCheck::Required);

std::vector<std::string> validate_catalogue(const SensitiveApiCatalogue& catalogue);
std::vector<std::string> validate_slice(const CodeSlice& slice);
std::vector<std::string> validate_cluster(const BehaviorCluster& cluster);
std::vector<std::string> validate_verdict(const SliceVerdict& verdict);

/// Checks label == malicious <=> responsible_slices non-empty, and that
/// every responsible index names a malicious verdict.
std::vector<std::string> validate_report(const DetectionReport& report);

}  // namespace intelguard
