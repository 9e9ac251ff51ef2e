#pragma once

/**
 * @file knowledge_store.hpp
 * @brief The vectorized knowledge base and dual-similarity retrieval.
 *
 * Row i of the code and behavior matrices always holds the embeddings of
 * entries()[i]. Retrieval is an exhaustive scan; results are ordered by
 * sim_total descending, then entry id ascending.
 *
 * On-disk layout (one directory):
 *   header.json         embedder identity, dimensions, created_at, entry_count
 *   entries.jsonl       one entry per line (no embeddings), row order
 *   code.f32            N x D_c little-endian float32, row-major
 *   behavior.f32        N x D_b little-endian float32, row-major
 *   matrices.json       {"code": {file, rows, dim}, "behavior": {...}}
 *   clusters.json       list of BehaviorCluster
 *   labels.json         {"code_labels": {id: n}, "behavior_labels": {id: n}}
 *   pending.jsonl       candidates awaiting expert audit
 *   manifest.json       {"format", "files": [{name, fnv1a64}]}
 * kb_version is the FNV-1a 64 digest of manifest.json.
 */

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "intelguard/clustering.hpp"
#include "intelguard/core_model.hpp"
#include "intelguard/embedding.hpp"

namespace intelguard {

struct KbHeader {
    EmbedderIdentity embedder;
    std::string created_at;
    std::string kb_version;  // filled by save/load

    bool operator==(const KbHeader&) const = default;
};

class KnowledgeBase {
public:
    KnowledgeBase() = default;
    explicit KnowledgeBase(EmbedderIdentity embedder, std::string created_at = {});

    const KbHeader& header() const { return header_; }
    KbHeader& header() { return header_; }

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::vector<KnowledgeEntry>& entries() const { return entries_; }
    const KnowledgeEntry* find(const std::string& id) const;

    /// Row-major N x D views.
    std::span<const float> code_matrix() const { return code_matrix_; }
    std::span<const float> behavior_matrix() const { return behavior_matrix_; }

    /// Inserts or replaces (same id keeps its row). Throws InputError for
    /// unvalidated or schema-invalid entries and ConfigError when the
    /// producing embedder differs from the header or dimensions disagree.
    void upsert_entry(const KnowledgeEntry& entry, const EmbedderIdentity& embedded_by);

    /// Same as above, assuming the header's embedder produced the vectors.
    void upsert_entry(const KnowledgeEntry& entry) { upsert_entry(entry, header_.embedder); }

    const std::vector<BehaviorCluster>& clusters() const { return clusters_.behavior_clusters; }
    const KnowledgeClusters& cluster_data() const { return clusters_; }
    void set_clusters(KnowledgeClusters clusters) { clusters_ = std::move(clusters); }

    /// Re-runs both clustering levels over the current entries.
    void recluster(const HdbscanParams& code_params = HdbscanParams::code_level(),
                   const HdbscanParams& behavior_params = HdbscanParams::behavior_level());

    /// Candidates kept for expert audit; never used for retrieval.
    std::vector<KnowledgeEntry>& pending() { return pending_; }
    const std::vector<KnowledgeEntry>& pending() const { return pending_; }

private:
    KbHeader header_;
    std::vector<KnowledgeEntry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<float> code_matrix_;
    std::vector<float> behavior_matrix_;
    KnowledgeClusters clusters_;
    std::vector<KnowledgeEntry> pending_;
};

/// Convex weights for sim_total. Construction enforces alpha, beta >= 0 and
/// alpha + beta = 1 (within 1e-9).
struct RetrievalWeights {
    double alpha = 0.5;
    double beta = 0.5;

    /// Rescales any non-negative pair with a positive sum onto the simplex.
    static RetrievalWeights normalized_from(double alpha, double beta);
};

/// alpha * sim_code + beta * sim_behav. Throws ConfigError for weights that
/// are negative or do not sum to one.
double combined_similarity(double sim_code, double sim_behav, double alpha, double beta);

inline constexpr std::size_t kDefaultTopK = 5;

struct RetrievalResult {
    std::vector<SimilarityScore> hits;
    bool empty_kb = false;  // warning flag: nothing to retrieve from

    bool operator==(const RetrievalResult&) const = default;
};

/// Exhaustive top-k. Throws InputError for k == 0 and ConfigError when
/// query dimensions do not match the header.
RetrievalResult query_topk(const KnowledgeBase& kb, const Embedding& code_query, const Embedding& behavior_query,
                           std::size_t k = kDefaultTopK, RetrievalWeights weights = {});

/// Writes the directory layout above; returns kb_version and stores it in
/// the header.
std::string save_kb(KnowledgeBase& kb, const std::string& directory);

/// Verifies every file digest against the manifest.
KnowledgeBase load_kb(const std::string& directory);

}  // namespace intelguard
