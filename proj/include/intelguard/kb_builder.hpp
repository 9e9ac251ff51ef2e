#pragma once

// Knowledge-base construction from report documents, and expert audit.
//
// Only auto- or expert-validated entries are embedded into the searchable
// matrices. Candidates that fail the grounding gate wait in pending() until
// an expert marks them.

#include <cstddef>
#include <string>
#include <vector>

#include "intelguard/extraction.hpp"
#include "intelguard/ingestion.hpp"
#include "intelguard/knowledge_store.hpp"

namespace intelguard {

struct KbBuildStats {
    std::size_t documents = 0;
    std::size_t relevant = 0;
    std::size_t irrelevant = 0;
    std::size_t provider_errors = 0;  // documents skipped after a provider failure
    std::size_t extraction_failures = 0;
    std::size_t candidates = 0;
    std::size_t auto_validated = 0;
    std::size_t pending = 0;
};

struct KbBuildOptions {
    std::string created_at;
    bool cluster = true;
};

struct KbBuildResult {
    KnowledgeBase kb;
    KbBuildStats stats;
    std::vector<ExtractionRecord> records;
};

/// Documents need not be reconstructed yet. Provider failures on one
/// document are logged and counted; the build carries on with the rest.
KbBuildResult build_knowledge_base(std::vector<ReportDocument> documents, const LlmProvider& provider,
                                   const Embedder& embedder, const KbBuildOptions& options = {});

/// Marks an entry (or a pending candidate, which is embedded and moved into
/// the searchable set) as expert validated. Throws InputError for an
/// unknown id.
void mark_expert_validated(KnowledgeBase& kb, const std::string& entry_id, const Embedder& embedder);

}  // namespace intelguard
