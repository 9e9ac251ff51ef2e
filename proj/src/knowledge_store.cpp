#include "intelguard/knowledge_store.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <sstream>

#include "intelguard/error.hpp"
#include "intelguard/hashing.hpp"
#include "intelguard/log.hpp"
#include "intelguard/serialization.hpp"
#include "intelguard/text_util.hpp"

namespace intelguard {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kFormat = "intelguard-kb/1";

void write_row(std::vector<float>& matrix, std::size_t row, const Embedding& v) {
    std::copy(v.begin(), v.end(), matrix.begin() + static_cast<std::ptrdiff_t>(row * v.size()));
}

std::string encode_f32(std::span<const float> values) {
    std::string out(values.size() * 4, '\0');
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, &values[i], 4);
        for (int b = 0; b < 4; ++b) out[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFFu);
    }
    return out;
}

std::vector<float> decode_f32(const std::string& bytes) {
    if (bytes.size() % 4 != 0) throw InputError("matrix file size is not a multiple of 4");
    std::vector<float> out(bytes.size() / 4);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + b])) << (8 * b);
        std::memcpy(&out[i], &bits, 4);
    }
    return out;
}

Json identity_json(const EmbedderIdentity& id) {
    return Json{{"name", id.name}, {"version", id.version}, {"code_dim", id.code_dim}, {"behavior_dim", id.behavior_dim}};
}

EmbedderIdentity identity_from(const Json& j) {
    return {j.at("name").get<std::string>(), j.at("version").get<std::string>(), j.at("code_dim").get<std::size_t>(),
            j.at("behavior_dim").get<std::size_t>()};
}

std::string jsonl(const std::vector<KnowledgeEntry>& entries, bool with_embeddings) {
    std::string out;
    for (const auto& e : entries) {
        out += (with_embeddings ? Json(e) : entry_to_json_without_embeddings(e)).dump();
        out += '\n';
    }
    return out;
}

std::vector<KnowledgeEntry> parse_jsonl(const std::string& content) {
    std::vector<KnowledgeEntry> out;
    for (const auto& line : text::split_lines(content)) {
        if (text::trim(line).empty()) continue;
        out.push_back(Json::parse(line).get<KnowledgeEntry>());
    }
    return out;
}

}  // namespace

KnowledgeBase::KnowledgeBase(EmbedderIdentity embedder, std::string created_at) {
    header_.embedder = std::move(embedder);
    header_.created_at = std::move(created_at);
}

const KnowledgeEntry* KnowledgeBase::find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &entries_[it->second];
}

void KnowledgeBase::upsert_entry(const KnowledgeEntry& entry, const EmbedderIdentity& embedded_by) {
    if (entry.audit != AuditStatus::AutoValidated && entry.audit != AuditStatus::ExpertValidated) {
        throw InputError("upsert_entry: entry " + entry.id + " is not validated");
    }
    if (!(embedded_by == header_.embedder)) {
        throw ConfigError("upsert_entry: embedder '" + embedded_by.name + "' does not match knowledge base embedder '" +
                          header_.embedder.name + "'");
    }
    if (entry.code_embedding.size() != header_.embedder.code_dim ||
        entry.behavior_embedding.size() != header_.embedder.behavior_dim) {
        throw ConfigError("upsert_entry: embedding dimensions of " + entry.id + " do not match the header");
    }
    if (auto problems = validate_entry_schema(entry); !problems.empty()) {
        throw InputError("upsert_entry: " + entry.id + ": " + problems.front());
    }

    std::size_t row;
    if (auto it = index_.find(entry.id); it != index_.end()) {
        row = it->second;
        entries_[row] = entry;
    } else {
        row = entries_.size();
        entries_.push_back(entry);
        index_.emplace(entry.id, row);
        code_matrix_.resize(code_matrix_.size() + header_.embedder.code_dim);
        behavior_matrix_.resize(behavior_matrix_.size() + header_.embedder.behavior_dim);
    }
    write_row(code_matrix_, row, entry.code_embedding);
    write_row(behavior_matrix_, row, entry.behavior_embedding);
}

void KnowledgeBase::recluster(const HdbscanParams& code_params, const HdbscanParams& behavior_params) {
    clusters_ = cluster_knowledge(entries_, code_params, behavior_params);
}

RetrievalWeights RetrievalWeights::normalized_from(double alpha, double beta) {
    if (alpha < 0.0 || beta < 0.0 || !(alpha + beta > 0.0)) {
        throw ConfigError("retrieval weights must be non-negative with a positive sum");
    }
    return {alpha / (alpha + beta), beta / (alpha + beta)};
}

double combined_similarity(double sim_code, double sim_behav, double alpha, double beta) {
    if (alpha < 0.0 || beta < 0.0 || std::abs(alpha + beta - 1.0) > 1e-9) {
        throw ConfigError("combined_similarity: weights must be non-negative and sum to 1");
    }
    return alpha * sim_code + beta * sim_behav;
}

RetrievalResult query_topk(const KnowledgeBase& kb, const Embedding& code_query, const Embedding& behavior_query,
                           std::size_t k, RetrievalWeights weights) {
    if (k == 0) throw InputError("query_topk: k must be >= 1");
    const auto& id = kb.header().embedder;
    if (code_query.size() != id.code_dim || behavior_query.size() != id.behavior_dim) {
        throw ConfigError("query_topk: query dimensions do not match the knowledge base");
    }
    RetrievalResult result;
    if (kb.empty()) {
        result.empty_kb = true;
        log::warn("retrieval", "knowledge base is empty");
        return result;
    }

    std::vector<SimilarityScore> all;
    all.reserve(kb.size());
    for (const auto& e : kb.entries()) {
        SimilarityScore s;
        s.entry_id = e.id;
        s.sim_code = cosine(code_query, e.code_embedding);
        s.sim_behav = cosine(behavior_query, e.behavior_embedding);
        s.sim_total = combined_similarity(s.sim_code, s.sim_behav, weights.alpha, weights.beta);
        all.push_back(std::move(s));
    }
    const std::size_t take = std::min(k, all.size());
    auto better = [](const SimilarityScore& a, const SimilarityScore& b) {
        if (a.sim_total != b.sim_total) return a.sim_total > b.sim_total;
        return a.entry_id < b.entry_id;
    };
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), better);
    all.resize(take);
    result.hits = std::move(all);
    return result;
}

std::string save_kb(KnowledgeBase& kb, const std::string& directory) {
    fs::create_directories(directory);
    const fs::path dir(directory);
    const auto& h = kb.header();

    std::map<std::string, std::string> files;
    files["header.json"] = Json{{"format", kFormat},
                                {"embedder", identity_json(h.embedder)},
                                {"created_at", h.created_at},
                                {"entry_count", kb.size()}}
                               .dump(2);
    files["entries.jsonl"] = jsonl(kb.entries(), false);
    files["code.f32"] = encode_f32(kb.code_matrix());
    files["behavior.f32"] = encode_f32(kb.behavior_matrix());
    files["matrices.json"] =
        Json{{"code", {{"file", "code.f32"}, {"rows", kb.size()}, {"dim", h.embedder.code_dim}}},
             {"behavior", {{"file", "behavior.f32"}, {"rows", kb.size()}, {"dim", h.embedder.behavior_dim}}}}
            .dump(2);
    files["clusters.json"] = Json(kb.clusters()).dump(2);
    files["labels.json"] =
        Json{{"code_labels", kb.cluster_data().code_labels}, {"behavior_labels", kb.cluster_data().behavior_labels}}
            .dump(2);
    files["pending.jsonl"] = jsonl(kb.pending(), false);

    Json listing = Json::array();
    for (const auto& [name, content] : files) {
        text::write_file((dir / name).string(), content);
        listing.push_back({{"name", name}, {"fnv1a64", fnv1a64_hex(content)}});
    }
    const std::string manifest = Json{{"format", kFormat}, {"files", listing}}.dump(2);
    text::write_file((dir / "manifest.json").string(), manifest);
    kb.header().kb_version = fnv1a64_hex(manifest);
    return kb.header().kb_version;
}

KnowledgeBase load_kb(const std::string& directory) {
    const fs::path dir(directory);
    const std::string manifest_text = text::read_file((dir / "manifest.json").string());
    const Json manifest = Json::parse(manifest_text, nullptr, false);
    if (manifest.is_discarded() || manifest.value("format", "") != kFormat) {
        throw InputError("load_kb: " + directory + " has no valid manifest");
    }
    std::map<std::string, std::string> files;
    for (const auto& f : manifest.at("files")) {
        const std::string name = f.at("name").get<std::string>();
        std::string content = text::read_file((dir / name).string());
        if (fnv1a64_hex(content) != f.at("fnv1a64").get<std::string>()) {
            throw InputError("load_kb: digest mismatch for " + name);
        }
        files[name] = std::move(content);
    }
    for (const char* required : {"header.json", "entries.jsonl", "code.f32", "behavior.f32", "matrices.json"}) {
        if (!files.count(required)) throw InputError(std::string("load_kb: manifest lacks ") + required);
    }

    const Json header = Json::parse(files["header.json"]);
    KnowledgeBase kb(identity_from(header.at("embedder")), header.value("created_at", ""));
    const auto& id = kb.header().embedder;

    const Json matrices = Json::parse(files["matrices.json"]);
    auto entries = parse_jsonl(files["entries.jsonl"]);
    const auto code = decode_f32(files[matrices.at("code").at("file").get<std::string>()]);
    const auto behav = decode_f32(files[matrices.at("behavior").at("file").get<std::string>()]);
    const std::size_t rows = entries.size();
    if (matrices.at("code").at("rows").get<std::size_t>() != rows ||
        matrices.at("behavior").at("rows").get<std::size_t>() != rows ||
        matrices.at("code").at("dim").get<std::size_t>() != id.code_dim ||
        matrices.at("behavior").at("dim").get<std::size_t>() != id.behavior_dim || code.size() != rows * id.code_dim ||
        behav.size() != rows * id.behavior_dim) {
        throw InputError("load_kb: matrix shape does not match entries/header");
    }
    for (std::size_t i = 0; i < rows; ++i) {
        auto& e = entries[i];
        e.code_embedding.assign(code.begin() + static_cast<std::ptrdiff_t>(i * id.code_dim),
                                code.begin() + static_cast<std::ptrdiff_t>((i + 1) * id.code_dim));
        e.behavior_embedding.assign(behav.begin() + static_cast<std::ptrdiff_t>(i * id.behavior_dim),
                                    behav.begin() + static_cast<std::ptrdiff_t>((i + 1) * id.behavior_dim));
        kb.upsert_entry(e);
    }

    KnowledgeClusters clusters;
    if (files.count("clusters.json")) {
        clusters.behavior_clusters = Json::parse(files["clusters.json"]).get<std::vector<BehaviorCluster>>();
    }
    if (files.count("labels.json")) {
        const Json labels = Json::parse(files["labels.json"]);
        clusters.code_labels = labels.value("code_labels", std::map<std::string, int>{});
        clusters.behavior_labels = labels.value("behavior_labels", std::map<std::string, int>{});
    }
    kb.set_clusters(std::move(clusters));
    if (files.count("pending.jsonl")) kb.pending() = parse_jsonl(files["pending.jsonl"]);
    kb.header().kb_version = fnv1a64_hex(manifest_text);
    return kb;
}

}  // namespace intelguard
