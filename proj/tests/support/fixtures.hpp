#pragma once

// Fixture loading and checking shared by the unit tests and the
// acceptance binary.

#include <optional>
#include <random>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "intelguard/core_model.hpp"
#include "intelguard/slicer.hpp"

namespace intelguard::testing {

std::string fixtures_dir();
std::string fixture_path(const std::string& relative);

struct ExpectedSite {
    std::string file;
    int line = 0;
    std::string api;
    ApiCategory category = ApiCategory::Network;
    bool dynamic = false;
    std::set<std::string> both;  // "file:line"
    std::set<std::string> data;
    std::set<std::string> control;
};

struct SlicingFixture {
    std::string name;
    std::string dir;
    std::string description;
    SensitiveApiCatalogue catalogue;  // fixture-specific or the shipped one
    std::vector<ExpectedSite> sites;
};

std::vector<SlicingFixture> load_slicing_fixtures();

struct FixtureCheck {
    std::size_t lines = 0;  // total source lines in the fixture package
    bool monotone = true;   // both ⊇ data ∪ control on every site
    std::vector<std::string> problems;
    bool ok() const { return problems.empty(); }
};

/// Compares detected sites and the three slices of every site against the
/// hand-computed expectations, and checks closure and monotonicity.
FixtureCheck check_slicing_fixture(const SlicingFixture& fixture);

/// Every statement's recorded data and control predecessors are in the
/// slice (mode both). Returns the offending "file:line" pairs.
std::vector<std::string> closure_violations(const ProgramGraph& graph, const std::vector<int>& nodes);

std::set<std::string> statement_keys(const CodeSlice& slice);

}  // namespace intelguard::testing

namespace intelguard::testing {
inline void PrintTo(const SlicingFixture& f, std::ostream* os) { *os << f.name; }
}  // namespace intelguard::testing

namespace intelguard::testing {

struct PlantedData {
    std::vector<Embedding> vectors;
    std::vector<int> labels;  // planted group per vector
    double max_within = 0.0;  // largest within-group cosine distance
    double min_between = 2.0;  // smallest between-group cosine distance
};

/// `groups` tight groups of `per_group` unit vectors around random,
/// mutually near-orthogonal centers, shuffled with a fixed seed.
PlantedData planted_clusters(unsigned seed, std::size_t groups, std::size_t per_group, std::size_t dim = 32,
                             double spread = 0.08);

/// Adjusted Rand index between two labelings; noise (-1) is treated as an
/// ordinary label.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace intelguard::testing

#include "intelguard/knowledge_store.hpp"

namespace intelguard::testing {

/// Random KB with coarse, integer-valued embedding components so that
/// exact score ties are common. Ids are shuffled relative to row order.
KnowledgeBase random_kb(unsigned seed, std::size_t n, std::size_t code_dim = 16, std::size_t behavior_dim = 16);

/// A unit query vector drawn the same way as the KB rows.
Embedding random_query(std::mt19937& rng, std::size_t dim);

/// Full sort of all N scores: sim_total descending, id ascending.
std::vector<SimilarityScore> brute_force_topk(const KnowledgeBase& kb, const Embedding& code_query,
                                              const Embedding& behavior_query, std::size_t k, double alpha,
                                              double beta);

/// A schema-valid, auto-validated entry with the given embeddings.
KnowledgeEntry synthetic_entry(const std::string& id, Embedding code, Embedding behavior);

}  // namespace intelguard::testing

#include "intelguard/embedding.hpp"
#include "intelguard/kb_builder.hpp"

namespace intelguard::testing {

/// Knowledge base built from tests/fixtures/reports with the mock provider
/// and the default fallback embedder. Built once per process.
const KbBuildResult& fixture_kb();

/// Package directories under tests/fixtures/e2e/<group>, sorted.
std::vector<std::string> e2e_packages(const std::string& group);

}  // namespace intelguard::testing
