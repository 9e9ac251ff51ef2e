#pragma once

/**
 * @file clustering.hpp
 * @brief Two-level density clustering of knowledge entries.
 *
 * cluster_level() is HDBSCAN over cosine distance (1 - cos):
 * core distances from the min_samples-th neighbour (the point itself
 * counts), mutual-reachability MST, single-linkage hierarchy condensed at
 * min_cluster_size, excess-of-mass selection, and optional epsilon merging
 * of clusters born below the epsilon distance. Noise is labelled -1.
 */

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "intelguard/core_model.hpp"

namespace intelguard {

struct HdbscanParams {
    std::size_t min_cluster_size = 8;
    std::size_t min_samples = 4;
    double epsilon = 0.0;

    static constexpr HdbscanParams code_level() { return {8, 4, 0.0}; }
    static constexpr HdbscanParams behavior_level() { return {40, 8, 0.45}; }
};

/// One label per input vector. Cluster labels are numbered 0.. in order of
/// each cluster's smallest member index. Throws InputError on empty input
/// or mixed dimensions.
std::vector<int> cluster_level(std::span<const Embedding> vectors, const HdbscanParams& params);

/// Normalized arithmetic mean. Throws DegenerateClusterError when the mean
/// is (numerically) zero and InputError on empty input.
Embedding compute_centroid(std::span<const Embedding> members);

/// Member with the highest cosine to the centroid; ties go to the
/// lexicographically smallest id.
std::string select_representative(std::span<const std::string> ids, std::span<const Embedding> embeddings,
                                  const Embedding& centroid);

/// Predicates of the closed vocabulary that a reasoning chain mentions.
std::set<std::string> predicates_for(const ReasoningChain& reasoning);

/// Labels present in strictly more than half of the sets, sorted.
std::vector<std::string> vote_predicate_sets(std::span<const std::set<std::string>> member_predicates);

std::vector<std::string> vote_predicates(std::span<const ReasoningChain> members);

struct KnowledgeClusters {
    std::map<std::string, int> code_labels;      // entry id -> code-level label
    std::map<std::string, int> behavior_labels;  // entry id -> behavior-level label
    std::vector<BehaviorCluster> behavior_clusters;
};

/// Code-level pass over code embeddings, behavior-level pass over behavior
/// embeddings, then one BehaviorCluster per behavior-level cluster.
KnowledgeClusters cluster_knowledge(std::span<const KnowledgeEntry> entries,
                                    const HdbscanParams& code_params = HdbscanParams::code_level(),
                                    const HdbscanParams& behavior_params = HdbscanParams::behavior_level());

}  // namespace intelguard
