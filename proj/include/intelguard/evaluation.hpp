#pragma once

/**
 * @file evaluation.hpp
 * @brief Detection metrics and the dataset evaluation harness.
 *
 * Ratios whose denominator is zero are reported as null (std::nullopt)
 * rather than 0 or 100; F1 is null when precision or recall is, or when
 * both are zero.
 */

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "intelguard/detector.hpp"

namespace intelguard {

struct Metrics {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;
    double accuracy = 0.0;  // percentages
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::optional<double> fpr;
    std::optional<double> fnr;
};

/// Throws InputError for negative counts or an all-zero matrix.
Metrics compute_metrics(long tp, long fp, long fn, long tn);

/// "99.49", or "null".
std::string format_percent(std::optional<double> value);

/// Metrics as a JSON object with values rounded to two decimals.
std::string metrics_json(const Metrics& m);

struct DatasetItem {
    std::string path;  // absolute, or relative to the manifest's directory
    Label label = Label::Benign;
};

/// JSON array of {path, label}. Throws InputError when unreadable or empty
/// and SchemaError for malformed items.
std::vector<DatasetItem> load_dataset_manifest(const std::string& path);

struct EvaluationRow {
    std::string package_id;
    std::string path;
    Label label = Label::Benign;
    std::optional<Label> verdict;  // empty for evaluation errors
    std::size_t responsible_slices = 0;
    double wall_ms = 0.0;
    std::string error;
};

struct EvaluationResult {
    Metrics metrics;
    std::vector<EvaluationRow> rows;  // manifest order
    std::size_t errors = 0;
};

struct EvaluationOptions {
    DetectorOptions detector;
    std::size_t workers = 1;  // packages scanned concurrently
};

/// Packages that cannot be loaded or scanned become error rows and are left
/// out of the counts. Throws InputError for an empty manifest or when every
/// package failed.
EvaluationResult run_evaluation(const std::vector<DatasetItem>& items, const KnowledgeBase& kb,
                                const Embedder& embedder, const LlmProvider& provider,
                                const SensitiveApiCatalogue& catalogue, const EvaluationOptions& options = {});

/// Columns: package_id,path,label,verdict,responsible_slices,wall_ms.
/// Error rows carry verdict "error".
std::string evaluation_csv(const EvaluationResult& result);

}  // namespace intelguard
