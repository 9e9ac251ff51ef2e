#include "intelguard/extraction.hpp"

#include <set>

#include "intelguard/error.hpp"
#include "intelguard/log.hpp"
#include "intelguard/prompts.hpp"
#include "intelguard/provider.hpp"
#include "intelguard/serialization.hpp"
#include "intelguard/text_util.hpp"

namespace intelguard {

namespace {

const std::string& document_text(const ReportDocument& doc) {
    if (doc.reconstructed_text.empty()) throw InputError("document " + doc.doc_id + " not reconstructed");
    return doc.reconstructed_text;
}

// Candidate built from one provider JSON object; throws SchemaError.
KnowledgeEntry candidate_from(const Json& j) {
    KnowledgeEntry e;
    e.snippet = j.value("snippet", "");
    e.language = j.contains("language") ? enum_from_json<Language>(j["language"], "language") : Language::Other;
    e.context = j.at("context").get<ExecutionContext>();
    e.behavior = j.value("behavior", "");
    e.reasoning = j.at("reasoning").get<ReasoningChain>();
    e.indicators = j.value("indicators", std::vector<std::string>{});
    return e;
}

bool reasoning_empty(const ReasoningChain& r) {
    return r.why_suspicious.empty() && r.violated_expectations.empty() && r.boundary_distinction.empty();
}

}  // namespace

ExtractionRecord extract_entries(const ReportDocument& doc, const LlmProvider& provider) {
    if (doc.relevance != Relevance::Relevant) {
        throw InputError("extract_entries: document " + doc.doc_id + " is not marked relevant");
    }
    ExtractionRecord record;
    record.doc_id = doc.doc_id;
    const std::string prompt = prompts::extraction(document_text(doc));

    Json parsed;
    for (int attempt = 0; attempt < 2; ++attempt) {
        record.raw_response = provider.complete(TaskKind::Extraction, prompt);
        parsed = Json::parse(record.raw_response, nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object() && parsed.contains("entries") && parsed["entries"].is_array()) {
            break;
        }
        parsed = Json();
        log::warn("extraction", doc.doc_id + ": unparseable response (attempt " + std::to_string(attempt + 1) + ")");
    }
    if (parsed.is_null()) {
        record.validation = ExtractionStatus::Failed;
        record.failure_reasons.push_back("provider response is not {\"entries\": [...]}");
        return record;
    }

    std::set<std::string> seen_snippets;
    for (std::size_t i = 0; i < parsed["entries"].size(); ++i) {
        const Json& item = parsed["entries"][i];
        const std::string where = "entries[" + std::to_string(i) + "]";
        KnowledgeEntry entry;
        try {
            entry = candidate_from(item);
        } catch (const std::exception& e) {
            record.dropped.push_back(where + ": " + e.what());
            continue;
        }
        if (entry.snippet.empty()) {
            record.dropped.push_back(where + ": empty snippet");
            continue;
        }
        if (reasoning_empty(entry.reasoning)) {
            record.dropped.push_back(where + ": empty reasoning");
            continue;
        }
        if (!seen_snippets.insert(entry.snippet).second) {
            record.dropped.push_back(where + ": duplicate snippet");
            continue;
        }
        entry.id = doc.doc_id + "#" + std::to_string(record.candidates.size() + 1);
        entry.source_report = doc.source_url.empty() ? doc.doc_id : doc.source_url;
        entry.audit = AuditStatus::Unvalidated;
        auto problems = validate_entry_schema(entry, EmbeddingCheck::Exempt);
        if (!problems.empty()) {
            std::string msg = where + ":";
            for (const auto& p : problems) msg += " " + p + ";";
            record.dropped.push_back(msg);
            continue;
        }
        record.candidates.push_back(std::move(entry));
    }
    for (const auto& d : record.dropped) log::info("extraction", doc.doc_id + " dropped " + d);
    return record;
}

ValidationOutcome validate_entry(const KnowledgeEntry& entry, const ReportDocument& original_doc,
                                 const LlmProvider& provider) {
    ValidationOutcome out;
    const std::string& raw_doc = document_text(original_doc);
    const std::string doc = text::normalize_whitespace(raw_doc);

    const std::string snippet = text::normalize_whitespace(entry.snippet);
    if (snippet.empty() || doc.find(snippet) == std::string::npos) out.reasons.emplace_back("snippet not grounded");
    for (const auto& indicator : entry.indicators) {
        const std::string needle = text::normalize_whitespace(indicator);
        if (needle.empty() || doc.find(needle) == std::string::npos) {
            out.reasons.push_back("indicator not grounded: " + indicator);
        }
    }
    if (!out.reasons.empty()) return out;

    try {
        const std::string response = provider.complete(
            TaskKind::CrossCheck, prompts::crosscheck(entry_to_json_without_embeddings(entry).dump(), raw_doc));
        const Json parsed = Json::parse(response, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("consistent") || !parsed["consistent"].is_boolean()) {
            out.reasons.emplace_back("cross-check response unparseable");
        } else if (!parsed["consistent"].get<bool>()) {
            out.reasons.push_back("cross-check rejected: " + parsed.value("reason", std::string()));
        }
    } catch (const RetriableError& e) {
        out.reasons.push_back(std::string("cross-check unavailable: ") + e.what());
    }
    if (out.reasons.empty()) out.status = AuditStatus::AutoValidated;
    return out;
}

}  // namespace intelguard
