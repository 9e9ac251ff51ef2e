// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "fixtures.hpp"
#include "intelguard/catalogue.hpp"
#include "intelguard/clustering.hpp"
#include "intelguard/detector.hpp"
#include "intelguard/evaluation.hpp"
#include "intelguard/log.hpp"
#include "intelguard/package_source.hpp"
#include "intelguard/provider.hpp"
#include "intelguard/serialization.hpp"

using namespace intelguard;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
};

const SensitiveApiCatalogue& shipped() {
    static const SensitiveApiCatalogue c = load_catalogue(default_catalogue_path());
    return c;
}

std::size_t kb_size(unsigned seed) { return 1 + (seed * 7919u + 13u) % 1000u; }

Outcome metrics_row() {
    Outcome o;
    const Metrics m = compute_metrics(985, 5, 15, 995);
    const std::pair<std::optional<double>, double> rows[] = {
        {m.accuracy, 99.00}, {m.precision, 99.49}, {m.recall, 98.50}, {m.f1, 98.99}};
    for (const auto& [got, want] : rows) {
        if (!got || std::abs(*got - want) > 0.01) o.fail("got " + format_percent(got) + ", want " + format_percent(want));
    }
    o.detail = format_percent(m.accuracy) + " / " + format_percent(m.precision) + " / " + format_percent(m.recall) +
               " / " + format_percent(m.f1) + (o.pass ? "" : " (" + o.detail + ")");
    return o;
}

Outcome topk_matches_brute_force() {
    Outcome o;
    std::mt19937 rng(7);
    std::size_t queries = 0, ties = 0;
    for (unsigned seed = 0; seed < 100; ++seed) {
        const std::size_t n = kb_size(seed);
        const auto kb = testing::random_kb(seed, n);
        for (int q = 0; q < 5; ++q) {
            const auto qc = testing::random_query(rng, 16);
            const auto qb = testing::random_query(rng, 16);
            const std::size_t k = 1 + rng() % (n + 5);
            const auto got = query_topk(kb, qc, qb, k, RetrievalWeights::normalized_from(0.5, 0.5)).hits;
            const auto want = testing::brute_force_topk(kb, qc, qb, k, 0.5, 0.5);
            ++queries;
            for (std::size_t i = 1; i < want.size(); ++i) ties += want[i].sim_total == want[i - 1].sim_total;
            if (got != want) o.fail("seed " + std::to_string(seed) + " query " + std::to_string(q) + " differs");
        }
    }
    if (ties == 0) o.fail("no tied scores exercised");
    if (o.pass) o.detail = std::to_string(queries) + " queries over 100 KBs, " + std::to_string(ties) + " adjacent ties";
    return o;
}

Outcome combined_similarity_and_scaling() {
    Outcome o;
    const double s = combined_similarity(0.42, 0.93, 0.5, 0.5);
    if (s != 0.675) o.fail("combined_similarity gave " + std::to_string(s));
    std::mt19937 rng(3);
    const auto kb = testing::random_kb(500, 400);
    for (int i = 0; i < 200 && o.pass; ++i) {
        const double a = std::uniform_real_distribution<double>(0.01, 1)(rng);
        const double b = std::uniform_real_distribution<double>(0.01, 1)(rng);
        const double c = std::uniform_real_distribution<double>(0.001, 1000)(rng);
        const auto qc = testing::random_query(rng, 16), qb = testing::random_query(rng, 16);
        const auto r1 = query_topk(kb, qc, qb, 25, RetrievalWeights::normalized_from(a, b));
        const auto r2 = query_topk(kb, qc, qb, 25, RetrievalWeights::normalized_from(c * a, c * b));
        for (std::size_t j = 0; j < r1.hits.size(); ++j) {
            if (r1.hits[j].entry_id != r2.hits[j].entry_id) o.fail("ranking changed under scale " + std::to_string(c));
        }
    }
    if (o.pass) o.detail = "0.675 exact; 200 rescaled rankings identical";
    return o;
}

Outcome slicing_fixtures() {
    Outcome o;
    const auto fixtures = testing::load_slicing_fixtures();
    std::size_t matched = 0;
    bool monotone = true;
    for (const auto& f : fixtures) {
        const auto check = testing::check_slicing_fixture(f);
        monotone = monotone && check.monotone;
        if (check.ok()) {
            ++matched;
        } else {
            std::cerr << "slicing fixture " << f.name << ": " << check.problems.front() << "\n";
        }
    }
    if (matched < 12) o.fail(std::to_string(matched) + " fixtures matched");
    if (!monotone) o.fail("both does not contain data and control on some site");
    if (o.pass) o.detail = std::to_string(matched) + "/" + std::to_string(fixtures.size()) + " fixtures match, monotone";
    return o;
}

Outcome planted_clusters() {
    Outcome o;
    const auto d = testing::planted_clusters(11, 2, 50);
    std::vector<KnowledgeEntry> entries;
    for (std::size_t i = 0; i < d.vectors.size(); ++i) {
        char id[32];
        std::snprintf(id, sizeof(id), "planted-%03zu", i);
        entries.push_back(testing::synthetic_entry(id, d.vectors[i], d.vectors[i]));
    }
    const auto clusters = cluster_knowledge(entries, HdbscanParams::code_level(), HdbscanParams{40, 8, 0.45});
    std::vector<int> labels;
    for (const auto& e : entries) labels.push_back(clusters.behavior_labels.at(e.id));
    const double ari = testing::adjusted_rand_index(labels, d.labels);
    if (ari != 1.0) o.fail("ARI " + std::to_string(ari));
    if (clusters.behavior_clusters.size() != 2) o.fail(std::to_string(clusters.behavior_clusters.size()) + " clusters");

    std::map<std::string, const Embedding*> by_id;
    for (const auto& e : entries) by_id[e.id] = &e.behavior_embedding;
    for (const auto& c : clusters.behavior_clusters) {
        if (auto problems = validate_cluster(c); !problems.empty()) o.fail("cluster invalid: " + problems.front());
        std::vector<double> mean(c.centroid.size(), 0.0);
        for (const auto& id : c.member_ids) {
            for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += (*by_id.at(id))[j];
        }
        double norm = 0.0;
        for (double x : mean) norm += x * x;
        norm = std::sqrt(norm);
        for (std::size_t j = 0; j < mean.size(); ++j) {
            if (std::abs(mean[j] / norm - c.centroid[j]) > 1e-6) o.fail("centroid is not the normalized mean");
        }
        std::string best;
        double best_cos = -2.0;
        for (const auto& id : c.member_ids) {
            const double cs = cosine(*by_id.at(id), c.centroid);
            if (cs > best_cos || (cs == best_cos && id < best)) best = id, best_cos = cs;
        }
        if (c.representative_id != best) o.fail("representative " + c.representative_id + " is not nearest the centroid");
    }
    if (o.pass) o.detail = "ARI 1.0, 2 clusters, centroids and representatives consistent";
    return o;
}

Outcome mock_corpus() {
    Outcome o;
    MockProvider mock;
    FallbackEmbedder fe;
    const auto& kb = testing::fixture_kb().kb;
    const auto items = load_dataset_manifest(testing::fixture_path("e2e/manifest.json"));
    if (items.size() != 20) o.fail(std::to_string(items.size()) + " packages in the manifest");
    const auto result = run_evaluation(items, kb, fe, mock, shipped());
    if (result.errors) o.fail(std::to_string(result.errors) + " evaluation errors");
    const std::string accuracy = format_percent(result.metrics.accuracy);
    if (accuracy != "100.00") o.fail("accuracy " + accuracy);
    for (const auto& item : items) {
        const auto scan = scan_package(load_package(item.path), kb, fe, mock, shipped());
        if (auto problems = validate_report(scan.report); !problems.empty()) {
            o.fail(item.path + ": " + problems.front());
        }
        if (scan.report.package_label != item.label) o.fail(item.path + ": wrong verdict");
    }
    if (o.pass) o.detail = "accuracy " + accuracy + " over 20 packages, all reports consistent";
    return o;
}

Outcome renaming_invariance() {
    Outcome o;
    MockProvider mock;
    FallbackEmbedder fe;
    const auto& kb = testing::fixture_kb().kb;
    const auto originals = testing::e2e_packages("malicious");
    const auto renamed = testing::e2e_packages("renamed");
    std::size_t pairs = 0;
    for (const auto& r : renamed) {
        const auto name = fs::path(r).filename();
        const auto orig = std::find_if(originals.begin(), originals.end(),
                                       [&](const std::string& p) { return fs::path(p).filename() == name; });
        if (orig == originals.end()) {
            o.fail("no original for " + name.string());
            continue;
        }
        const auto a = scan_package(load_package(*orig), kb, fe, mock, shipped());
        const auto b = scan_package(load_package(r), kb, fe, mock, shipped());
        ++pairs;
        if (a.report.package_label != b.report.package_label) o.fail(name.string() + ": package verdict changed");
        if (a.slices.size() != b.slices.size()) {
            o.fail(name.string() + ": slice count changed");
            continue;
        }
        for (std::size_t s = 0; s < a.slices.size(); ++s) {
            if (a.slices[s].behavior_summary != b.slices[s].behavior_summary) o.fail(name.string() + ": summary changed");
            if (a.report.slice_verdicts[s].label != b.report.slice_verdicts[s].label) {
                o.fail(name.string() + ": slice verdict changed");
            }
            for (const auto& e : kb.entries()) {
                const double da = cosine(*a.slices[s].behavior_embedding, e.behavior_embedding);
                const double db = cosine(*b.slices[s].behavior_embedding, e.behavior_embedding);
                if (std::abs(da - db) > 1e-9) o.fail(name.string() + ": sim_behav moved against " + e.id);
            }
        }
    }
    if (pairs == 0) o.fail("no renamed packages");
    if (o.pass) o.detail = std::to_string(pairs) + " renamed packages unchanged";
    return o;
}

SliceVerdict verdict(Label label, int line) {
    SliceVerdict v;
    v.label = label;
    v.explanation = label == Label::Malicious ? "matches known behavior" : "no supporting knowledge";
    if (label == Label::Malicious) v.matched_entry_ids = {"kb#1"};
    v.site = {"pkg/main.py", line, "os.system", ApiCategory::Process};
    return v;
}

Outcome aggregation_properties() {
    Outcome o;
    std::mt19937 rng(2024);
    const int lists = 10000;
    for (int i = 0; i < lists && o.pass; ++i) {
        std::vector<SliceVerdict> vs;
        for (std::size_t n = rng() % 16; n > 0; --n) {
            vs.push_back(verdict(rng() % 5 == 0 ? Label::Malicious : Label::Benign, static_cast<int>(vs.size() + 1)));
        }
        const Label before = aggregate_package_verdict(vs);
        const bool any = std::any_of(vs.begin(), vs.end(), [](const SliceVerdict& v) { return v.label == Label::Malicious; });
        if ((before == Label::Malicious) != any) o.fail("list " + std::to_string(i) + " aggregates wrongly");
        auto shuffled = vs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        if (aggregate_package_verdict(shuffled) != before) o.fail("order changed the verdict in list " + std::to_string(i));
        auto grown = vs;
        grown.insert(grown.begin() + static_cast<long>(rng() % (grown.size() + 1)),
                     verdict(rng() % 2 ? Label::Malicious : Label::Benign, 99));
        if (before == Label::Malicious && aggregate_package_verdict(grown) != Label::Malicious) {
            o.fail("adding a slice flipped malicious to benign in list " + std::to_string(i));
        }
        if (auto problems = validate_report(render_report("p", grown, "v")); !problems.empty()) {
            o.fail("inconsistent report: " + problems.front());
        }
    }
    if (o.pass) o.detail = std::to_string(lists) + " random lists";
    return o;
}

Outcome persistence_round_trip() {
    Outcome o;
    const fs::path root = fs::temp_directory_path() / ("intelguard_acceptance_" + std::to_string(::getpid()));
    std::mt19937 rng(9);
    for (unsigned seed = 0; seed < 100 && o.pass; ++seed) {
        auto kb = testing::random_kb(seed, kb_size(seed));
        const std::string dir = (root / std::to_string(seed)).string();
        save_kb(kb, dir);
        const KnowledgeBase loaded = load_kb(dir);
        for (int q = 0; q < 3; ++q) {
            const auto qc = testing::random_query(rng, 16);
            const auto qb = testing::random_query(rng, 16);
            const std::size_t k = 1 + rng() % 50;
            const std::string before = Json(query_topk(kb, qc, qb, k).hits).dump();
            const std::string after = Json(query_topk(loaded, qc, qb, k).hits).dump();
            if (before != after) o.fail("seed " + std::to_string(seed) + ": results differ after reload");
        }
    }
    fs::remove_all(root);
    if (o.pass) o.detail = "100 KBs saved, reloaded and queried identically";
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;  // 0 means no time limit
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    log::set_level(log::Level::Error);
    const Criterion criteria[] = {
        {1, "metrics row", 1.0, metrics_row},
        {2, "top-k equals brute force", 30.0, topk_matches_brute_force},
        {3, "combined similarity and weight scaling", 0.0, combined_similarity_and_scaling},
        {4, "slicing fixtures", 10.0, slicing_fixtures},
        {5, "planted behavior clusters", 20.0, planted_clusters},
        {6, "mock corpus evaluation", 60.0, mock_corpus},
        {7, "renaming invariance", 0.0, renaming_invariance},
        {8, "aggregation properties", 0.0, aggregation_properties},
        {9, "save/load/query round trip", 0.0, persistence_round_trip},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_s > 0 && secs > c.budget_s) o.fail("took " + std::to_string(secs) + " s");
        char timing[32];
        std::snprintf(timing, sizeof(timing), "%.3fs", secs);
        std::cout << "criterion " << c.id << " " << (o.pass ? "PASS" : "FAIL") << " [" << timing << "] " << c.name
                  << ": " << o.detail << "\n";
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
