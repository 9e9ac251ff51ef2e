#pragma once

// Structured knowledge extraction from relevant report documents and the
// grounding/cross-check gate that decides which entries may enter the KB.

#include <string>
#include <vector>

#include "intelguard/core_model.hpp"
#include "intelguard/ingestion.hpp"

namespace intelguard {

class LlmProvider;

enum class ExtractionStatus { Passed, Failed };

template <>
struct EnumNames<ExtractionStatus> {
    static constexpr std::array<std::pair<ExtractionStatus, std::string_view>, 2> table{{
        {ExtractionStatus::Passed, "passed"},
        {ExtractionStatus::Failed, "failed"},
    }};
};

struct ExtractionRecord {
    std::string doc_id;
    std::vector<KnowledgeEntry> candidates;  // embeddings empty, audit unvalidated
    std::string raw_response;
    ExtractionStatus validation = ExtractionStatus::Passed;
    std::vector<std::string> failure_reasons;
    std::vector<std::string> dropped;  // one reason per discarded candidate
};

/// Requires doc.relevance == Relevant. One retry on an unparseable
/// response; after that the record is Failed with raw_response kept.
/// Candidate ids are "<doc_id>#<n>"; exact-duplicate snippets within the
/// document are collapsed.
ExtractionRecord extract_entries(const ReportDocument& doc, const LlmProvider& provider);

struct ValidationOutcome {
    AuditStatus status = AuditStatus::Unvalidated;
    std::vector<std::string> reasons;
};

/// AutoValidated iff the whitespace-normalized snippet occurs in the
/// document, every indicator occurs in the document, and the provider's
/// cross-check affirms the behavior. Never returns ExpertValidated.
ValidationOutcome validate_entry(const KnowledgeEntry& entry, const ReportDocument& original_doc,
                                 const LlmProvider& provider);

}  // namespace intelguard
