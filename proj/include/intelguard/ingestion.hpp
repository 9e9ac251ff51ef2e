#pragma once

/**
 * @file ingestion.hpp
 * @brief Threat-report documents: manifest loading, reconstruction of
 * prose and recognized code into one text, and relevance filtering.
 */

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "intelguard/core_model.hpp"

namespace intelguard {

class LlmProvider;

enum class BlockKind { Prose, Code };
enum class Relevance { Unfiltered, Relevant, Irrelevant };

template <>
struct EnumNames<BlockKind> {
    static constexpr std::array<std::pair<BlockKind, std::string_view>, 2> table{{
        {BlockKind::Prose, "prose"},
        {BlockKind::Code, "code"},
    }};
};

template <>
struct EnumNames<Relevance> {
    static constexpr std::array<std::pair<Relevance, std::string_view>, 3> table{{
        {Relevance::Unfiltered, "unfiltered"},
        {Relevance::Relevant, "relevant"},
        {Relevance::Irrelevant, "irrelevant"},
    }};
};

struct DocumentBlock {
    BlockKind kind = BlockKind::Prose;
    int position = 0;
    std::string content;

    bool operator==(const DocumentBlock&) const = default;
};

struct ReportDocument {
    std::string doc_id;
    std::string source_url;
    std::vector<DocumentBlock> blocks;
    std::string reconstructed_text;
    Relevance relevance = Relevance::Unfiltered;
};

/// Blocks in position order; code blocks wrapped in bare ``` fence lines.
/// Throws InputError unless positions are strictly increasing.
std::string reconstruct_document(const std::vector<DocumentBlock>& blocks);

/// Fills doc.reconstructed_text.
void reconstruct(ReportDocument& doc);

struct RelevanceDecision {
    Relevance label = Relevance::Unfiltered;
    std::string raw_response;
};

/// Requires a reconstructed document. Provider failures surface as
/// RetriableError; the document is not modified.
RelevanceDecision filter_relevance(const ReportDocument& doc, const LlmProvider& provider);

/// filter_relevance + store the label on the document. On failure the
/// document stays Unfiltered and the error propagates.
RelevanceDecision apply_relevance(ReportDocument& doc, const LlmProvider& provider);

struct ManifestItem {
    std::string doc_id;
    std::string source_url;
    std::string path;  // resolved against the manifest's directory
};

/// JSON array of {doc_id, source_url, path}.
std::vector<ManifestItem> load_report_manifest(const std::string& manifest_path);

/// Document file: {"blocks": [{kind, position, content}]} or a bare array.
ReportDocument load_report_document(const ManifestItem& item);

// OCR adapter. Only a fixture-backed implementation ships.

struct OcrResult {
    std::string text;
    double confidence = 0.0;
};

class OcrEngine {
public:
    virtual ~OcrEngine() = default;
    virtual OcrResult recognize(std::span<const std::uint8_t> image) const = 0;
};

/// Looks results up by FNV-1a 64 hex digest of the image bytes.
class FixtureOcr final : public OcrEngine {
public:
    explicit FixtureOcr(std::map<std::string, OcrResult> by_digest) : by_digest_(std::move(by_digest)) {}
    OcrResult recognize(std::span<const std::uint8_t> image) const override;

private:
    std::map<std::string, OcrResult> by_digest_;
};

}  // namespace intelguard
