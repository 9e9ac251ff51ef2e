#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <regex>

#include "fixtures.hpp"
#include "intelguard/catalogue.hpp"
#include "intelguard/error.hpp"
#include "intelguard/evaluation.hpp"
#include "intelguard/serialization.hpp"
#include "intelguard/text_util.hpp"

namespace intelguard {
namespace {

namespace fs = std::filesystem;

const SensitiveApiCatalogue& shipped() {
    static const SensitiveApiCatalogue c = load_catalogue(default_catalogue_path());
    return c;
}

TEST(Metrics, PublishedPypiRow) {
    const auto m = compute_metrics(985, 5, 15, 995);
    EXPECT_NEAR(m.accuracy, 99.00, 0.005);
    EXPECT_NEAR(*m.precision, 99.49, 0.005);
    EXPECT_NEAR(*m.recall, 98.50, 0.005);
    EXPECT_NEAR(*m.f1, 98.99, 0.005);
    EXPECT_EQ(format_percent(m.precision), "99.49");
    EXPECT_EQ(format_percent(m.f1), "98.99");
}

TEST(Metrics, BenignOnlyUsesNull) {
    const auto m = compute_metrics(0, 0, 0, 10);
    EXPECT_DOUBLE_EQ(m.accuracy, 100.0);
    EXPECT_FALSE(m.precision.has_value());
    EXPECT_FALSE(m.recall.has_value());
    EXPECT_FALSE(m.f1.has_value());
    EXPECT_FALSE(m.fnr.has_value());
    EXPECT_EQ(format_percent(m.fpr), "0.00");
    const Json j = Json::parse(metrics_json(m));
    EXPECT_TRUE(j["precision"].is_null());
    EXPECT_EQ(j["accuracy"], 100.0);
}

TEST(Metrics, PerfectClassifier) {
    const auto m = compute_metrics(1, 0, 0, 1);
    for (auto v : {std::optional<double>(m.accuracy), m.precision, m.recall, m.f1}) EXPECT_DOUBLE_EQ(*v, 100.0);
    EXPECT_DOUBLE_EQ(*m.fpr, 0.0);
}

TEST(Metrics, ZeroPrecisionAndRecallLeaveF1Null) {
    const auto m = compute_metrics(0, 3, 4, 5);
    EXPECT_DOUBLE_EQ(*m.precision, 0.0);
    EXPECT_DOUBLE_EQ(*m.recall, 0.0);
    EXPECT_FALSE(m.f1.has_value());
}

TEST(Metrics, Errors) {
    EXPECT_THROW(compute_metrics(0, 0, 0, 0), InputError);
    EXPECT_THROW(compute_metrics(-1, 0, 0, 3), InputError);
}

TEST(Metrics, MatchesSpreadsheetFormulas) {
    std::mt19937 rng(31);
    for (int i = 0; i < 5000; ++i) {
        const long tp = rng() % 50, fp = rng() % 50, fn = rng() % 50, tn = 1 + rng() % 50;
        const auto m = compute_metrics(tp, fp, fn, tn);
        const double total = double(tp + fp + fn + tn);
        EXPECT_NEAR(m.accuracy, 100.0 * (tp + tn) / total, 1e-9);
        if (tp + fp) {
            EXPECT_NEAR(*m.precision, 100.0 * tp / (tp + fp), 1e-9);
        }
        if (tp + fn) {
            EXPECT_NEAR(*m.recall, 100.0 * tp / (tp + fn), 1e-9);
        }
        if (tp > 0) {
            const double p = double(tp) / (tp + fp), r = double(tp) / (tp + fn);
            EXPECT_NEAR(*m.f1, 100.0 * 2 * p * r / (p + r), 1e-9);
        }
        EXPECT_NEAR(*m.fpr, 100.0 * fp / (fp + tn), 1e-9);
        if (tp + fn) {
            EXPECT_NEAR(*m.fnr, 100.0 * fn / (fn + tp), 1e-9);
        }
    }
}

TEST(DatasetManifest, LoadsFixtureAndRejectsBadInput) {
    const auto items = load_dataset_manifest(testing::fixture_path("e2e/manifest.json"));
    ASSERT_EQ(items.size(), 20u);
    int malicious = 0;
    for (const auto& it : items) {
        malicious += it.label == Label::Malicious;
        EXPECT_TRUE(fs::is_directory(it.path)) << it.path;
    }
    EXPECT_EQ(malicious, 10);

    const auto path = (fs::temp_directory_path() / "intelguard_manifest.json").string();
    text::write_file(path, "[]");
    EXPECT_THROW(load_dataset_manifest(path), InputError);
    text::write_file(path, R"([{"path": "x", "label": "suspicious"}])");
    EXPECT_THROW(load_dataset_manifest(path), SchemaError);
    text::write_file(path, R"([{"label": "benign"}])");
    EXPECT_THROW(load_dataset_manifest(path), SchemaError);
    fs::remove(path);
    EXPECT_ANY_THROW(load_dataset_manifest(path));
}

EvaluationResult evaluate(const std::vector<DatasetItem>& items, std::size_t workers = 1) {
    MockProvider mock;
    FallbackEmbedder fe;
    EvaluationOptions opts;
    opts.workers = workers;
    return run_evaluation(items, testing::fixture_kb().kb, fe, mock, shipped(), opts);
}

TEST(Evaluation, MockCorpusIsPerfect) {
    const auto r = evaluate(load_dataset_manifest(testing::fixture_path("e2e/manifest.json")));
    EXPECT_EQ(r.errors, 0u);
    EXPECT_EQ(r.metrics.tp, 10);
    EXPECT_EQ(r.metrics.tn, 10);
    EXPECT_EQ(format_percent(r.metrics.accuracy), "100.00");
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.verdict, row.label) << row.path;
        EXPECT_EQ(row.responsible_slices > 0, row.label == Label::Malicious) << row.path;
    }
}

TEST(Evaluation, UnreadablePathBecomesErrorRow) {
    auto items = load_dataset_manifest(testing::fixture_path("e2e/manifest.json"));
    std::vector<DatasetItem> five(items.begin(), items.begin() + 2);
    five.push_back({"/nonexistent/package", Label::Malicious});
    five.insert(five.end(), items.end() - 2, items.end());
    const auto r = evaluate(five);
    EXPECT_EQ(r.errors, 1u);
    EXPECT_EQ(r.metrics.tp + r.metrics.fp + r.metrics.fn + r.metrics.tn, 4);
    ASSERT_EQ(r.rows.size(), 5u);
    EXPECT_FALSE(r.rows[2].verdict.has_value());
    EXPECT_FALSE(r.rows[2].error.empty());
    EXPECT_NE(evaluation_csv(r).find(",error,"), std::string::npos);
}

TEST(Evaluation, EmptyOrAllFailedManifest) {
    EXPECT_THROW(evaluate({}), InputError);
    EXPECT_THROW(evaluate({{"/nonexistent/a", Label::Benign}}), InputError);
}

std::string without_timing(const std::string& csv) {
    return std::regex_replace(csv, std::regex(R"(,[0-9.]+\n)"), ",-\n");
}

TEST(Evaluation, CsvDeterministicModuloTiming) {
    const auto items = load_dataset_manifest(testing::fixture_path("e2e/manifest.json"));
    const std::string a = evaluation_csv(evaluate(items, 1));
    const std::string b = evaluation_csv(evaluate(items, 4));
    EXPECT_EQ(without_timing(a), without_timing(b));
    EXPECT_EQ(a.substr(0, a.find('\n')), "package_id,path,label,verdict,responsible_slices,wall_ms");
    EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 21);
}

}  // namespace
}  // namespace intelguard
