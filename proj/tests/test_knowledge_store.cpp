#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>

#include "fixtures.hpp"
#include "intelguard/error.hpp"
#include "intelguard/hashing.hpp"
#include "intelguard/knowledge_store.hpp"
#include "intelguard/text_util.hpp"

namespace intelguard {
namespace {

namespace fs = std::filesystem;
using testing::synthetic_entry;

const EmbedderIdentity kTiny{"synthetic", "1", 2, 2};

Embedding unit2(double angle) { return {static_cast<float>(std::cos(angle)), static_cast<float>(std::sin(angle))}; }

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("intelguard_kb_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    return p;
}

TEST(KnowledgeStore, CombinedSimilarityExamples) {
    EXPECT_EQ(combined_similarity(1.0, 1.0, 0.5, 0.5), 1.0);
    EXPECT_EQ(combined_similarity(0.42, 0.93, 0.5, 0.5), 0.675);
    EXPECT_EQ(combined_similarity(0.0, 0.0, 0.5, 0.5), 0.0);
    EXPECT_THROW(combined_similarity(1, 1, 0.6, 0.6), ConfigError);
    EXPECT_THROW(combined_similarity(1, 1, -0.5, 1.5), ConfigError);
}

TEST(KnowledgeStore, WeightNormalization) {
    const auto w = RetrievalWeights::normalized_from(3, 1);
    EXPECT_DOUBLE_EQ(w.alpha, 0.75);
    EXPECT_DOUBLE_EQ(w.beta, 0.25);
    EXPECT_THROW(RetrievalWeights::normalized_from(0, 0), ConfigError);
    EXPECT_THROW(RetrievalWeights::normalized_from(-1, 2), ConfigError);
}

TEST(KnowledgeStore, UpsertRules) {
    KnowledgeBase kb(kTiny);
    kb.upsert_entry(synthetic_entry("a", unit2(0), unit2(0)));
    EXPECT_EQ(kb.size(), 1u);
    kb.upsert_entry(synthetic_entry("a", unit2(1), unit2(2)));
    EXPECT_EQ(kb.size(), 1u);
    EXPECT_EQ(kb.code_matrix()[0], unit2(1)[0]);
    EXPECT_EQ(kb.behavior_matrix()[1], unit2(2)[1]);

    auto pending = synthetic_entry("b", unit2(0), unit2(0));
    pending.audit = AuditStatus::Unvalidated;
    EXPECT_THROW(kb.upsert_entry(pending), InputError);

    auto expert = synthetic_entry("c", unit2(0), unit2(0));
    expert.audit = AuditStatus::ExpertValidated;
    kb.upsert_entry(expert);
    EXPECT_EQ(kb.size(), 2u);

    EXPECT_THROW(kb.upsert_entry(synthetic_entry("d", {1, 0, 0}, unit2(0))), ConfigError);
    EXPECT_THROW(kb.upsert_entry(synthetic_entry("e", unit2(0), unit2(0)), EmbedderIdentity{"other", "1", 2, 2}),
                 ConfigError);
    auto bad_norm = synthetic_entry("f", {0.5f, 0.0f}, unit2(0));
    EXPECT_THROW(kb.upsert_entry(bad_norm), InputError);
}

TEST(KnowledgeStore, RowsFollowEntries) {
    const auto kb = testing::random_kb(3, 40, 8, 6);
    ASSERT_EQ(kb.code_matrix().size(), 40u * 8);
    ASSERT_EQ(kb.behavior_matrix().size(), 40u * 6);
    for (std::size_t i = 0; i < kb.size(); ++i) {
        for (std::size_t d = 0; d < 8; ++d) EXPECT_EQ(kb.code_matrix()[i * 8 + d], kb.entries()[i].code_embedding[d]);
        for (std::size_t d = 0; d < 6; ++d) {
            EXPECT_EQ(kb.behavior_matrix()[i * 6 + d], kb.entries()[i].behavior_embedding[d]);
        }
    }
}

TEST(KnowledgeStore, SelfRetrieval) {
    KnowledgeBase kb(kTiny);
    kb.upsert_entry(synthetic_entry("only", unit2(0.3), unit2(1.1)));
    const auto r = query_topk(kb, unit2(0.3), unit2(1.1), 1);
    ASSERT_EQ(r.hits.size(), 1u);
    EXPECT_NEAR(r.hits[0].sim_total, 1.0, 1e-6);
}

TEST(KnowledgeStore, HandSetSimilaritiesAndTieRule) {
    // Query (1,0) for both; the entry angles give cosines 1, 0 and 0.6.
    KnowledgeBase kb(kTiny);
    kb.upsert_entry(synthetic_entry("entry1", unit2(0), unit2(M_PI / 2)));
    kb.upsert_entry(synthetic_entry("entry2", unit2(M_PI / 2), unit2(0)));
    kb.upsert_entry(synthetic_entry("entry3", {0.6f, 0.8f}, {0.6f, 0.8f}));
    const auto r = query_topk(kb, {1, 0}, {1, 0}, 3);
    ASSERT_EQ(r.hits.size(), 3u);
    EXPECT_EQ(r.hits[0].entry_id, "entry3");
    EXPECT_NEAR(r.hits[0].sim_total, 0.6, 1e-6);
    EXPECT_EQ(r.hits[1].entry_id, "entry1");
    EXPECT_EQ(r.hits[2].entry_id, "entry2");
    EXPECT_NEAR(r.hits[1].sim_total, 0.5, 1e-6);
    EXPECT_NEAR(r.hits[1].sim_code, 1.0, 1e-6);
    EXPECT_NEAR(r.hits[2].sim_behav, 1.0, 1e-6);
}

TEST(KnowledgeStore, KLargerThanKb) {
    const auto kb = testing::random_kb(4, 4, 4, 4);
    std::mt19937 rng(1);
    EXPECT_EQ(query_topk(kb, testing::random_query(rng, 4), testing::random_query(rng, 4), 10).hits.size(), 4u);
}

TEST(KnowledgeStore, QueryErrors) {
    const auto kb = testing::random_kb(5, 3, 4, 4);
    EXPECT_THROW(query_topk(kb, {1, 0, 0, 0}, {1, 0, 0, 0}, 0), InputError);
    EXPECT_THROW(query_topk(kb, {1, 0}, {1, 0, 0, 0}, 1), ConfigError);
    const KnowledgeBase empty(kTiny);
    const auto r = query_topk(empty, {1, 0}, {0, 1}, 5);
    EXPECT_TRUE(r.hits.empty());
    EXPECT_TRUE(r.empty_kb);
}

TEST(KnowledgeStore, MatchesBruteForce) {
    std::mt19937 rng(2024);
    for (unsigned seed = 0; seed < 20; ++seed) {
        const auto kb = testing::random_kb(seed, 1 + rng() % 300, 12, 10);
        for (int q = 0; q < 5; ++q) {
            const auto qc = testing::random_query(rng, 12);
            const auto qb = testing::random_query(rng, 10);
            const std::size_t k = 1 + rng() % 20;
            EXPECT_EQ(query_topk(kb, qc, qb, k).hits, testing::brute_force_topk(kb, qc, qb, k, 0.5, 0.5));
        }
    }
}

TEST(KnowledgeStore, RankingInvariantUnderWeightScaling) {
    std::mt19937 rng(8);
    const auto kb = testing::random_kb(99, 200, 8, 8);
    for (int i = 0; i < 50; ++i) {
        const double a = std::uniform_real_distribution<double>(0.01, 1)(rng);
        const double b = std::uniform_real_distribution<double>(0.01, 1)(rng);
        const double c = std::uniform_real_distribution<double>(0.1, 100)(rng);
        const auto qc = testing::random_query(rng, 8), qb = testing::random_query(rng, 8);
        const auto r1 = query_topk(kb, qc, qb, 10, RetrievalWeights::normalized_from(a, b));
        const auto r2 = query_topk(kb, qc, qb, 10, RetrievalWeights::normalized_from(c * a, c * b));
        ASSERT_EQ(r1.hits.size(), r2.hits.size());
        for (std::size_t j = 0; j < r1.hits.size(); ++j) {
            EXPECT_EQ(r1.hits[j].entry_id, r2.hits[j].entry_id);
            EXPECT_NEAR(r1.hits[j].sim_total, r2.hits[j].sim_total, 1e-12);
        }
    }
}

TEST(KnowledgeStore, SaveLoadRoundTrip) {
    auto kb = testing::random_kb(7, 120, 12, 10);
    kb.recluster();
    kb.pending().push_back(synthetic_entry("waiting", {1, 0}, {0, 1}));
    kb.pending().back().audit = AuditStatus::Unvalidated;
    kb.pending().back().code_embedding.clear();  // candidates are embedded only once validated
    kb.pending().back().behavior_embedding.clear();
    const auto dir = temp_dir("roundtrip");
    const std::string version = save_kb(kb, dir.string());
    EXPECT_EQ(version, kb.header().kb_version);
    EXPECT_EQ(version, fnv1a64_hex(text::read_file((dir / "manifest.json").string())));

    const auto loaded = load_kb(dir.string());
    EXPECT_EQ(loaded.header(), kb.header());
    EXPECT_EQ(loaded.entries(), kb.entries());
    EXPECT_EQ(loaded.pending(), kb.pending());
    EXPECT_EQ(loaded.clusters(), kb.clusters());
    EXPECT_EQ(loaded.cluster_data().code_labels, kb.cluster_data().code_labels);
    EXPECT_TRUE(std::equal(loaded.code_matrix().begin(), loaded.code_matrix().end(), kb.code_matrix().begin(),
                           kb.code_matrix().end()));

    std::mt19937 rng(70);
    for (int q = 0; q < 20; ++q) {
        const auto qc = testing::random_query(rng, 12), qb = testing::random_query(rng, 10);
        EXPECT_EQ(query_topk(loaded, qc, qb, 7), query_topk(kb, qc, qb, 7));
    }

    // Saving the loaded KB reproduces the same bytes.
    auto again = loaded;
    const auto dir2 = temp_dir("roundtrip2");
    EXPECT_EQ(save_kb(again, dir2.string()), version);
    for (const char* f : {"entries.jsonl", "code.f32", "behavior.f32", "clusters.json", "header.json"}) {
        EXPECT_EQ(text::read_file((dir / f).string()), text::read_file((dir2 / f).string())) << f;
    }
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST(KnowledgeStore, LoadDetectsTampering) {
    auto kb = testing::random_kb(9, 10, 4, 4);
    const auto dir = temp_dir("tamper");
    save_kb(kb, dir.string());
    {
        std::fstream f(dir / "code.f32", std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(3);
        f.put('\x7f');
    }
    EXPECT_ANY_THROW(load_kb(dir.string()));
    fs::remove_all(dir);
    EXPECT_ANY_THROW(load_kb(dir.string()));
}

TEST(KnowledgeStore, LittleEndianFloatLayout) {
    KnowledgeBase kb(kTiny);
    kb.upsert_entry(synthetic_entry("a", {1, 0}, {0, 1}));
    const auto dir = temp_dir("layout");
    save_kb(kb, dir.string());
    const std::string bytes = text::read_file((dir / "code.f32").string());
    ASSERT_EQ(bytes.size(), 8u);
    // 1.0f = 0x3f800000, little-endian.
    EXPECT_EQ(bytes.substr(0, 4), std::string("\x00\x00\x80\x3f", 4));
    EXPECT_EQ(bytes.substr(4, 4), std::string(4, '\0'));
    fs::remove_all(dir);
}

}  // namespace
}  // namespace intelguard
