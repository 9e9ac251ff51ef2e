#include "intelguard/kb_builder.hpp"

#include <algorithm>

#include "intelguard/error.hpp"
#include "intelguard/log.hpp"

namespace intelguard {

namespace {

void embed_into(KnowledgeEntry& entry, const Embedder& embedder) {
    const DualEmbedding e = embed_dual(entry.snippet, entry.behavior, embedder);
    entry.code_embedding = e.code;
    entry.behavior_embedding = e.behavior;
}

}  // namespace

KbBuildResult build_knowledge_base(std::vector<ReportDocument> documents, const LlmProvider& provider,
                                   const Embedder& embedder, const KbBuildOptions& options) {
    KbBuildResult result;
    result.kb = KnowledgeBase(embedder.identity(), options.created_at);
    KbBuildStats& stats = result.stats;
    for (auto& doc : documents) {
        ++stats.documents;
        try {
            if (doc.reconstructed_text.empty()) reconstruct(doc);
            apply_relevance(doc, provider);
            if (doc.relevance != Relevance::Relevant) {
                ++stats.irrelevant;
                continue;
            }
            ++stats.relevant;
            ExtractionRecord record = extract_entries(doc, provider);
            if (record.validation == ExtractionStatus::Failed) ++stats.extraction_failures;
            for (auto& candidate : record.candidates) {
                ++stats.candidates;
                const ValidationOutcome outcome = validate_entry(candidate, doc, provider);
                KnowledgeEntry entry = candidate;
                entry.audit = outcome.status;
                if (outcome.status == AuditStatus::AutoValidated) {
                    embed_into(entry, embedder);
                    result.kb.upsert_entry(entry, embedder.identity());
                    ++stats.auto_validated;
                } else {
                    for (const auto& r : outcome.reasons) log::info("kb", entry.id + " held for audit: " + r);
                    result.kb.pending().push_back(std::move(entry));
                    ++stats.pending;
                }
            }
            result.records.push_back(std::move(record));
        } catch (const RetriableError& e) {
            ++stats.provider_errors;
            log::warn("kb", doc.doc_id + ": " + e.what());
        }
    }
    if (options.cluster && !result.kb.empty()) result.kb.recluster();
    return result;
}

void mark_expert_validated(KnowledgeBase& kb, const std::string& entry_id, const Embedder& embedder) {
    if (const KnowledgeEntry* existing = kb.find(entry_id)) {
        KnowledgeEntry entry = *existing;
        entry.audit = AuditStatus::ExpertValidated;
        kb.upsert_entry(entry, kb.header().embedder);
        return;
    }
    auto& pending = kb.pending();
    auto it = std::find_if(pending.begin(), pending.end(), [&](const KnowledgeEntry& e) { return e.id == entry_id; });
    if (it == pending.end()) throw InputError("no entry or pending candidate with id " + entry_id);
    KnowledgeEntry entry = *it;
    entry.audit = AuditStatus::ExpertValidated;
    embed_into(entry, embedder);
    kb.upsert_entry(entry, embedder.identity());
    pending.erase(it);
}

}  // namespace intelguard
