#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "intelguard/clustering.hpp"
#include "intelguard/embedding.hpp"
#include "intelguard/error.hpp"

namespace intelguard {
namespace {

using testing::adjusted_rand_index;
using testing::planted_clusters;

void expect_partition_valid(const std::vector<int>& labels, std::size_t n, std::size_t min_cluster_size) {
    ASSERT_EQ(labels.size(), n);
    std::map<int, std::size_t> sizes;
    for (int l : labels) {
        EXPECT_GE(l, -1);
        ++sizes[l];
    }
    for (const auto& [l, s] : sizes) {
        if (l >= 0) {
            EXPECT_GE(s, min_cluster_size) << "cluster " << l;
        }
    }
    // Labels are 0.. in order of first appearance.
    int next = 0;
    for (int l : labels) {
        if (l < 0) continue;
        EXPECT_LE(l, next);
        if (l == next) ++next;
    }
}

TEST(Clustering, OracleHelpers) {
    EXPECT_DOUBLE_EQ(adjusted_rand_index({0, 0, 1, 1}, {5, 5, 3, 3}), 1.0);
    EXPECT_LT(adjusted_rand_index({0, 0, 1, 1}, {0, 1, 0, 1}), 0.0);
    const auto d = planted_clusters(1, 2, 50);
    EXPECT_LT(d.max_within, 0.05);
    EXPECT_GT(d.min_between, 0.8);
}

TEST(Clustering, TooFewVectorsAreAllNoise) {
    const auto d = planted_clusters(2, 1, 7);
    const auto labels = cluster_level(d.vectors, HdbscanParams::code_level());
    EXPECT_EQ(labels, std::vector<int>(7, -1));
}

TEST(Clustering, RecoversTwoPlantedBehaviorClusters) {
    for (unsigned seed : {11u, 12u, 13u}) {
        const auto d = planted_clusters(seed, 2, 50);
        const auto labels = cluster_level(d.vectors, HdbscanParams::behavior_level());
        expect_partition_valid(labels, 100, 40);
        EXPECT_EQ(*std::max_element(labels.begin(), labels.end()), 1);
        EXPECT_DOUBLE_EQ(adjusted_rand_index(labels, d.labels), 1.0) << "seed " << seed;
    }
}

TEST(Clustering, CodeLevelFindsSeveralGroups) {
    const auto d = planted_clusters(21, 5, 12);
    const auto labels = cluster_level(d.vectors, HdbscanParams::code_level());
    expect_partition_valid(labels, 60, 8);
    EXPECT_DOUBLE_EQ(adjusted_rand_index(labels, d.labels), 1.0);
}

TEST(Clustering, IsolatedPointsBecomeNoise) {
    auto d = planted_clusters(31, 2, 20);
    const auto far = planted_clusters(32, 3, 1, 32);  // three lone vectors
    std::vector<Embedding> all = d.vectors;
    for (const auto& v : far.vectors) all.push_back(v);
    const auto labels = cluster_level(all, HdbscanParams::code_level());
    expect_partition_valid(labels, all.size(), 8);
    int clustered_outliers = 0;
    for (std::size_t i = d.vectors.size(); i < all.size(); ++i) {
        // A lone vector may only join a cluster if it is near one.
        double best = -1;
        for (const auto& v : d.vectors) best = std::max(best, cosine(all[i], v));
        if (labels[i] >= 0 && best < 0.5) ++clustered_outliers;
    }
    EXPECT_EQ(clustered_outliers, 0);
}

TEST(Clustering, DuplicatingVectorsDoesNotSplitClusters) {
    const auto d = planted_clusters(41, 3, 15);
    const auto before = cluster_level(d.vectors, HdbscanParams::code_level());
    std::vector<Embedding> doubled = d.vectors;
    doubled.insert(doubled.end(), d.vectors.begin(), d.vectors.end());
    const auto after = cluster_level(doubled, HdbscanParams::code_level());
    const std::vector<int> originals(after.begin(), after.begin() + static_cast<long>(d.vectors.size()));
    EXPECT_DOUBLE_EQ(adjusted_rand_index(before, originals), 1.0);
    for (std::size_t i = 0; i < d.vectors.size(); ++i) EXPECT_EQ(after[i], after[i + d.vectors.size()]);
}

TEST(Clustering, PermutationEquivariance) {
    std::mt19937 rng(7);
    for (int round = 0; round < 10; ++round) {
        const auto d = planted_clusters(100 + round, 3, 14, 16, 0.3);
        const auto base = cluster_level(d.vectors, HdbscanParams::code_level());
        std::vector<std::size_t> order(d.vectors.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<Embedding> shuffled;
        for (std::size_t i : order) shuffled.push_back(d.vectors[i]);
        const auto labels = cluster_level(shuffled, HdbscanParams::code_level());
        std::vector<int> back(labels.size());
        for (std::size_t i = 0; i < order.size(); ++i) back[order[i]] = labels[i];
        EXPECT_DOUBLE_EQ(adjusted_rand_index(base, back), 1.0) << "round " << round;
        EXPECT_EQ(std::count(base.begin(), base.end(), -1), std::count(back.begin(), back.end(), -1));
    }
}

TEST(Clustering, InputErrors) {
    EXPECT_THROW(cluster_level(std::vector<Embedding>{}, HdbscanParams::code_level()), InputError);
    const std::vector<Embedding> mixed{{1, 0}, {1, 0, 0}};
    EXPECT_THROW(cluster_level(mixed, HdbscanParams::code_level()), InputError);
}

TEST(Centroid, Examples) {
    const Embedding v{0.6f, 0.8f};
    EXPECT_EQ(compute_centroid(std::vector<Embedding>{v}), v);
    const auto c = compute_centroid(std::vector<Embedding>{{1, 0}, {0, 1}});
    EXPECT_NEAR(c[0], 0.7071, 1e-4);
    EXPECT_NEAR(c[1], 0.7071, 1e-4);
    EXPECT_THROW(compute_centroid(std::vector<Embedding>{{0.6f, 0.8f}, {-0.6f, -0.8f}}), DegenerateClusterError);
    EXPECT_THROW(compute_centroid(std::vector<Embedding>{}), InputError);
}

TEST(Centroid, OrderInvariant) {
    auto d = planted_clusters(55, 1, 30);
    const auto c = compute_centroid(d.vectors);
    std::reverse(d.vectors.begin(), d.vectors.end());
    const auto r = compute_centroid(d.vectors);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], r[i], 1e-6);
    EXPECT_TRUE(is_unit_norm(c));
}

TEST(Representative, Examples) {
    const Embedding centroid{1, 0};
    EXPECT_EQ(select_representative(std::vector<std::string>{"only"}, std::vector<Embedding>{{0, 1}}, centroid), "only");
    const float s95 = std::sqrt(1 - 0.95f * 0.95f), s99 = std::sqrt(1 - 0.99f * 0.99f);
    EXPECT_EQ(select_representative(std::vector<std::string>{"a", "b"}, std::vector<Embedding>{{0.95f, s95}, {0.99f, s99}},
                                    centroid),
              "b");
    EXPECT_EQ(select_representative(std::vector<std::string>{"m", "k"}, std::vector<Embedding>{{0.6f, 0.8f}, {0.6f, -0.8f}},
                                    centroid),
              "k");
}

TEST(Voting, Examples) {
    using Sets = std::vector<std::set<std::string>>;
    EXPECT_EQ(vote_predicate_sets(Sets{{"data exfiltration"}, {"data exfiltration"}, {"data exfiltration"}}),
              std::vector<std::string>{"data exfiltration"});
    EXPECT_EQ(vote_predicate_sets(Sets{{"A"}, {"A"}, {"B"}}), std::vector<std::string>{"A"});
    EXPECT_TRUE(vote_predicate_sets(Sets{{"A"}, {"B"}}).empty());
    EXPECT_EQ(vote_predicate_sets(Sets{{"b", "a"}, {"a", "b"}}), (std::vector<std::string>{"a", "b"}));
}

TEST(Voting, PredicatesComeFromTheClosedVocabulary) {
    ReasoningChain r;
    r.why_suspicious = "Exfiltrates the npm token and opens a reverse shell";
    r.violated_expectations = {{ViolationType::DataFlow, "credentials leave the machine"}};
    r.boundary_distinction = "Legitimate code never spawns a shell";
    const auto p = predicates_for(r);
    for (const auto& label : p) {
        EXPECT_NE(std::find(kPredicateVocabulary.begin(), kPredicateVocabulary.end(), label), kPredicateVocabulary.end());
    }
    EXPECT_TRUE(p.count("data exfiltration"));
    EXPECT_TRUE(p.count("credential theft"));
    EXPECT_TRUE(p.count("backdoor"));
    EXPECT_TRUE(p.count("command execution"));
}

TEST(KnowledgeClustering, ClusterInvariantsHold) {
    const auto d = planted_clusters(77, 2, 45, 24);
    std::vector<KnowledgeEntry> entries;
    for (std::size_t i = 0; i < d.vectors.size(); ++i) {
        KnowledgeEntry e;
        e.id = "e" + std::to_string(1000 + i);
        e.code_embedding = d.vectors[i];
        e.behavior_embedding = d.vectors[i];
        e.reasoning.why_suspicious = d.labels[i] ? "Downloads a second stage" : "Adds a cron job";
        entries.push_back(e);
    }
    const auto kc = cluster_knowledge(entries);
    ASSERT_EQ(kc.behavior_clusters.size(), 2u);
    for (const auto& c : kc.behavior_clusters) {
        EXPECT_TRUE(validate_cluster(c).empty());
        std::vector<Embedding> members;
        for (const auto& id : c.member_ids) {
            members.push_back(std::find_if(entries.begin(), entries.end(), [&](auto& e) { return e.id == id; })
                                  ->behavior_embedding);
        }
        EXPECT_EQ(c.centroid, compute_centroid(members));
        EXPECT_EQ(c.representative_id, select_representative(c.member_ids, members, c.centroid));
        EXPECT_EQ(c.voted_predicates.size(), 1u);
        EXPECT_NE(c.unified_explanation.find("Voted predicates:"), std::string::npos);
    }
    EXPECT_EQ(kc.code_labels.size(), entries.size());
}

}  // namespace
}  // namespace intelguard
