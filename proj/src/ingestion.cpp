#include "intelguard/ingestion.hpp"

#include <filesystem>

#include "intelguard/error.hpp"
#include "intelguard/hashing.hpp"
#include "intelguard/log.hpp"
#include "intelguard/prompts.hpp"
#include "intelguard/provider.hpp"
#include "intelguard/serialization.hpp"
#include "intelguard/text_util.hpp"

namespace intelguard {

namespace fs = std::filesystem;

std::string reconstruct_document(const std::vector<DocumentBlock>& blocks) {
    for (std::size_t i = 1; i < blocks.size(); ++i) {
        if (blocks[i].position <= blocks[i - 1].position) {
            throw InputError("reconstruct_document: positions not strictly increasing at block " + std::to_string(i));
        }
    }
    std::string out;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i) out += '\n';
        if (blocks[i].kind == BlockKind::Code) {
            out += "```\n";
            out += blocks[i].content;
            out += "\n```";
        } else {
            out += blocks[i].content;
        }
    }
    return out;
}

void reconstruct(ReportDocument& doc) { doc.reconstructed_text = reconstruct_document(doc.blocks); }

RelevanceDecision filter_relevance(const ReportDocument& doc, const LlmProvider& provider) {
    if (doc.reconstructed_text.empty()) throw InputError("filter_relevance: document " + doc.doc_id + " not reconstructed");
    RelevanceDecision decision;
    decision.raw_response = provider.complete(TaskKind::Relevance, prompts::relevance(doc.reconstructed_text));
    const Json parsed = Json::parse(decision.raw_response, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("relevant") || !parsed["relevant"].is_boolean()) {
        throw RetriableError("filter_relevance: unparseable provider response for " + doc.doc_id);
    }
    decision.label = parsed["relevant"].get<bool>() ? Relevance::Relevant : Relevance::Irrelevant;
    log::info("ingestion", doc.doc_id + " -> " + std::string(to_string(decision.label)) + " (" +
                               decision.raw_response + ")");
    return decision;
}

RelevanceDecision apply_relevance(ReportDocument& doc, const LlmProvider& provider) {
    auto decision = filter_relevance(doc, provider);
    doc.relevance = decision.label;
    return decision;
}

std::vector<ManifestItem> load_report_manifest(const std::string& manifest_path) {
    const Json doc = Json::parse(text::read_file(manifest_path), nullptr, false);
    if (!doc.is_array()) throw InputError("report manifest " + manifest_path + ": expected a JSON array");
    const fs::path base = fs::path(manifest_path).parent_path();
    std::vector<ManifestItem> out;
    for (const auto& item : doc) {
        if (!item.is_object() || !item.contains("doc_id") || !item.contains("path")) {
            throw InputError("report manifest " + manifest_path + ": items need doc_id and path");
        }
        ManifestItem m;
        m.doc_id = item["doc_id"].get<std::string>();
        m.source_url = item.value("source_url", "");
        fs::path p = item["path"].get<std::string>();
        m.path = (p.is_absolute() ? p : base / p).string();
        out.push_back(std::move(m));
    }
    return out;
}

ReportDocument load_report_document(const ManifestItem& item) {
    const Json doc = Json::parse(text::read_file(item.path), nullptr, false);
    if (doc.is_discarded()) throw InputError("document " + item.path + ": invalid JSON");
    const Json& blocks = doc.is_array() ? doc : doc.value("blocks", Json::array());
    ReportDocument out;
    out.doc_id = item.doc_id;
    out.source_url = item.source_url;
    for (const auto& b : blocks) {
        DocumentBlock block;
        block.kind = enum_from_json<BlockKind>(b.at("kind"), "kind");
        block.position = b.at("position").get<int>();
        block.content = b.at("content").get<std::string>();
        out.blocks.push_back(std::move(block));
    }
    return out;
}

OcrResult FixtureOcr::recognize(std::span<const std::uint8_t> image) const {
    const std::string digest =
        fnv1a64_hex(std::string_view(reinterpret_cast<const char*>(image.data()), image.size()));
    auto it = by_digest_.find(digest);
    if (it == by_digest_.end()) throw InputError("ocr fixture: no result for image " + digest);
    return it->second;
}

}  // namespace intelguard
