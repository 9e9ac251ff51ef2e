#include "intelguard/evaluation.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <thread>

#include "intelguard/error.hpp"
#include "intelguard/log.hpp"
#include "intelguard/serialization.hpp"
#include "intelguard/text_util.hpp"

namespace intelguard {

namespace {

std::optional<double> ratio(long num, long den) {
    if (den == 0) return std::nullopt;
    return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

Json rounded(std::optional<double> v) {
    if (!v) return nullptr;
    return std::round(*v * 100.0) / 100.0;
}

}  // namespace

Metrics compute_metrics(long tp, long fp, long fn, long tn) {
    if (tp < 0 || fp < 0 || fn < 0 || tn < 0) throw InputError("confusion counts must be non-negative");
    const long total = tp + fp + fn + tn;
    if (total == 0) throw InputError("confusion counts are all zero");
    Metrics m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.tn = tn;
    m.accuracy = 100.0 * static_cast<double>(tp + tn) / static_cast<double>(total);
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    if (m.precision && m.recall && *m.precision + *m.recall > 0.0) {
        m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    }
    m.fpr = ratio(fp, fp + tn);
    m.fnr = ratio(fn, fn + tp);
    return m;
}

std::string format_percent(std::optional<double> value) {
    if (!value) return "null";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", *value);
    return buf;
}

std::string metrics_json(const Metrics& m) {
    Json j{{"tp", m.tp},
           {"fp", m.fp},
           {"fn", m.fn},
           {"tn", m.tn},
           {"accuracy", rounded(m.accuracy)},
           {"precision", rounded(m.precision)},
           {"recall", rounded(m.recall)},
           {"f1", rounded(m.f1)},
           {"fpr", rounded(m.fpr)},
           {"fnr", rounded(m.fnr)}};
    return j.dump(2);
}

std::vector<DatasetItem> load_dataset_manifest(const std::string& path) {
    const Json j = Json::parse(text::read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_array()) throw SchemaError("manifest " + path + ": expected a JSON array");
    if (j.empty()) throw InputError("manifest " + path + " lists no packages");
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    std::vector<DatasetItem> out;
    for (const auto& item : j) {
        if (!item.is_object() || !item.contains("path") || !item["path"].is_string() || !item.contains("label")) {
            throw SchemaError("manifest " + path + ": items need path and label");
        }
        DatasetItem m;
        std::filesystem::path p = item["path"].get<std::string>();
        m.path = p.is_absolute() ? p.string() : (base / p).lexically_normal().string();
        m.label = enum_from_json<Label>(item["label"], "label");
        out.push_back(std::move(m));
    }
    return out;
}

EvaluationResult run_evaluation(const std::vector<DatasetItem>& items, const KnowledgeBase& kb,
                                const Embedder& embedder, const LlmProvider& provider,
                                const SensitiveApiCatalogue& catalogue, const EvaluationOptions& options) {
    if (items.empty()) throw InputError("evaluation manifest is empty");
    EvaluationResult result;
    result.rows.resize(items.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < items.size(); i = next++) {
            EvaluationRow& row = result.rows[i];
            row.path = items[i].path;
            row.label = items[i].label;
            const auto start = std::chrono::steady_clock::now();
            try {
                const PackageSource pkg = load_package(items[i].path);
                row.package_id = pkg.package_id;
                const ScanResult scan = scan_package(pkg, kb, embedder, provider, catalogue, options.detector);
                row.verdict = scan.report.package_label;
                row.responsible_slices = scan.report.responsible_slices.size();
            } catch (const std::exception& e) {
                row.error = e.what();
                log::warn("eval", items[i].path + ": " + e.what());
            }
            row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, items.size()));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    long tp = 0, fp = 0, fn = 0, tn = 0;
    for (const auto& row : result.rows) {
        if (!row.verdict) {
            ++result.errors;
            continue;
        }
        const bool predicted = *row.verdict == Label::Malicious;
        const bool actual = row.label == Label::Malicious;
        if (predicted && actual) ++tp;
        if (predicted && !actual) ++fp;
        if (!predicted && actual) ++fn;
        if (!predicted && !actual) ++tn;
    }
    if (result.errors == result.rows.size()) throw InputError("no package in the manifest could be evaluated");
    result.metrics = compute_metrics(tp, fp, fn, tn);
    return result;
}

std::string evaluation_csv(const EvaluationResult& result) {
    std::string out = "package_id,path,label,verdict,responsible_slices,wall_ms\n";
    for (const auto& row : result.rows) {
        char ms[32];
        std::snprintf(ms, sizeof(ms), "%.1f", row.wall_ms);
        out += csv_field(row.package_id) + "," + csv_field(row.path) + "," + std::string(to_string(row.label)) + "," +
               (row.verdict ? std::string(to_string(*row.verdict)) : "error") + "," +
               std::to_string(row.responsible_slices) + "," + ms + "\n";
    }
    return out;
}

}  // namespace intelguard
