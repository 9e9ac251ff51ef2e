#include "intelguard/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

namespace intelguard {

namespace {

std::string format_norm(double norm) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", norm);
    return buf;
}

void check_embedding(const char* field, const Embedding& v, std::vector<std::string>& out) {
    if (v.empty()) {
        out.push_back(std::string(field) + ": missing");
        return;
    }
    const double norm = l2_norm(v);
    if (std::abs(norm - 1.0) > kUnitNormTolerance) {
        out.push_back(std::string(field) + ": norm " + format_norm(norm) + " ≠ 1±1e-6");
    }
}

}  // namespace

double l2_norm(const Embedding& v) {
    double sum = 0.0;
    for (float x : v) sum += static_cast<double>(x) * static_cast<double>(x);
    return std::sqrt(sum);
}

bool is_unit_norm(const Embedding& v, double tolerance) {
    return !v.empty() && std::abs(l2_norm(v) - 1.0) <= tolerance;
}

std::vector<std::string> validate_entry_schema(const KnowledgeEntry& entry, EmbeddingCheck embeddings) {
    std::vector<std::string> out;
    if (entry.id.empty()) out.emplace_back("id: empty");
    if (entry.snippet.empty()) out.emplace_back("snippet: empty");
    if (entry.behavior.empty()) out.emplace_back("behavior: empty");

    if (entry.context.trigger != Trigger::Unknown && entry.context.file_location.empty()) {
        out.emplace_back("context.file_location: empty while trigger is " +
                         std::string(to_string(entry.context.trigger)));
    }

    const auto& reasoning = entry.reasoning;
    if (reasoning.violated_expectations.empty()) {
        out.emplace_back("reasoning.violated_expectations: empty");
    }
    for (std::size_t i = 0; i < reasoning.violated_expectations.size(); ++i) {
        if (reasoning.violated_expectations[i].statement.empty()) {
            out.push_back("reasoning.violated_expectations[" + std::to_string(i) + "].statement: empty");
        }
    }

    if (embeddings == EmbeddingCheck::Required) {
        check_embedding("code_embedding", entry.code_embedding, out);
        check_embedding("behavior_embedding", entry.behavior_embedding, out);
    }
    return out;
}

std::vector<std::string> validate_catalogue(const SensitiveApiCatalogue& catalogue) {
    std::vector<std::string> out;
    std::set<std::tuple<std::string, std::string, Language>> seen;
    for (std::size_t i = 0; i < catalogue.entries.size(); ++i) {
        const auto& e = catalogue.entries[i];
        const std::string where = "entries[" + std::to_string(i) + "]";
        if (e.module_pattern.empty()) out.push_back(where + ".module_pattern: empty");
        if (e.api_name.empty()) out.push_back(where + ".api_name: empty");
        if (!seen.emplace(e.module_pattern, e.api_name, e.language).second) {
            out.push_back(where + ": duplicate (" + e.module_pattern + ", " + e.api_name + ", " +
                          std::string(to_string(e.language)) + ")");
        }
    }
    return out;
}

std::vector<std::string> validate_slice(const CodeSlice& slice) {
    std::vector<std::string> out;
    if (slice.statements.empty()) {
        out.emplace_back("statements: empty");
        return out;
    }
    for (std::size_t i = 1; i < slice.statements.size(); ++i) {
        const auto& a = slice.statements[i - 1];
        const auto& b = slice.statements[i];
        if (std::tie(a.file, a.line) >= std::tie(b.file, b.line)) {
            out.push_back("statements[" + std::to_string(i) + "]: not strictly ordered by (file, line)");
        }
    }
    const bool has_site = std::any_of(slice.statements.begin(), slice.statements.end(), [&](const auto& s) {
        return s.file == slice.sensitive_call.file && s.line == slice.sensitive_call.line;
    });
    if (!has_site) out.emplace_back("sensitive_call: not among statements");
    if (slice.code_embedding && !is_unit_norm(*slice.code_embedding)) {
        out.emplace_back("code_embedding: not unit norm");
    }
    if (slice.behavior_embedding && !is_unit_norm(*slice.behavior_embedding)) {
        out.emplace_back("behavior_embedding: not unit norm");
    }
    return out;
}

std::vector<std::string> validate_cluster(const BehaviorCluster& cluster) {
    std::vector<std::string> out;
    if (cluster.member_ids.empty()) out.emplace_back("member_ids: empty");
    if (std::find(cluster.member_ids.begin(), cluster.member_ids.end(), cluster.representative_id) ==
        cluster.member_ids.end()) {
        out.emplace_back("representative_id: not a member");
    }
    if (!is_unit_norm(cluster.centroid)) out.emplace_back("centroid: not unit norm");
    return out;
}

std::vector<std::string> validate_verdict(const SliceVerdict& verdict) {
    std::vector<std::string> out;
    if (verdict.label == Label::Malicious) {
        if (verdict.explanation.empty()) out.emplace_back("explanation: empty for malicious verdict");
        if (verdict.matched_entry_ids.empty()) out.emplace_back("matched_entry_ids: empty for malicious verdict");
    }
    return out;
}

std::vector<std::string> validate_report(const DetectionReport& report) {
    std::vector<std::string> out;
    const bool malicious = report.package_label == Label::Malicious;
    if (malicious == report.responsible_slices.empty()) {
        out.emplace_back("package_label: inconsistent with responsible_slices");
    }
    for (std::size_t idx : report.responsible_slices) {
        if (idx >= report.slice_verdicts.size()) {
            out.push_back("responsible_slices: index " + std::to_string(idx) + " out of range");
        } else if (report.slice_verdicts[idx].label != Label::Malicious) {
            out.push_back("responsible_slices: index " + std::to_string(idx) + " is not malicious");
        }
    }
    for (const auto& v : report.slice_verdicts) {
        for (auto& msg : validate_verdict(v)) out.push_back("slice_verdicts: " + msg);
    }
    return out;
}

}  // namespace intelguard
