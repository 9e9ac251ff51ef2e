#pragma once

/**
 * @file detector.hpp
 * @brief Slice summaries, retrieval-backed verdicts and package reports.
 *
 * Each slice is judged on its own: the classification prompt holds the
 * target slice and its behavior, the retrieved examples, and their
 * reasoning chains, never another slice of the same package.
 */

#include <cstddef>
#include <string>
#include <vector>

#include "intelguard/core_model.hpp"
#include "intelguard/embedding.hpp"
#include "intelguard/knowledge_store.hpp"
#include "intelguard/package_source.hpp"
#include "intelguard/provider.hpp"
#include "intelguard/slicer.hpp"

namespace intelguard {

inline constexpr std::size_t kSlicePromptLines = 200;
inline constexpr std::size_t kSnippetPromptLines = 60;

/// Asks the provider for a behavior description and stores it on the slice.
/// Throws InputError for an empty slice and RetriableError when the provider
/// fails or answers with nothing usable.
std::string summarize_behavior(CodeSlice& slice, const LlmProvider& provider);

/// Builds the three-part prompt. Slices longer than kSlicePromptLines lose
/// their earliest statements (the sensitive call is always kept); snippets
/// keep their first kSnippetPromptLines lines.
std::string classification_prompt(const CodeSlice& slice, const RetrievalResult& retrieval, const KnowledgeBase& kb);

/// Labels outside {malicious, benign}, malformed JSON, a malicious answer
/// without matched ids and provider failures all count as a failed attempt.
/// After one retry the verdict is benign with error = true. Matched ids the
/// retrieval did not return are dropped.
SliceVerdict classify_slice(const CodeSlice& slice, const RetrievalResult& retrieval, const KnowledgeBase& kb,
                            const LlmProvider& provider);

/// Malicious iff some verdict is malicious.
Label aggregate_package_verdict(const std::vector<SliceVerdict>& verdicts);

DetectionReport render_report(const std::string& package_id, std::vector<SliceVerdict> verdicts,
                              const std::string& kb_version);

/// Plain-text report. Boundary distinctions of matched entries come from
/// `kb` when given.
std::string report_text(const DetectionReport& report, const KnowledgeBase* kb = nullptr);

struct DetectorOptions {
    std::size_t k = kDefaultTopK;
    RetrievalWeights weights;
    std::size_t max_statements = kDefaultMaxStatements;
    std::size_t threads = 1;  // slices classified concurrently
    bool record_timings = false;  // timings make reports run-dependent
};

struct ScanResult {
    DetectionReport report;
    std::vector<CodeSlice> slices;  // summarized and embedded, same order as the verdicts
};

/// Full pipeline for one package. Throws ConfigError when the embedder does
/// not match a non-empty knowledge base.
ScanResult scan_package(const PackageSource& pkg, const KnowledgeBase& kb, const Embedder& embedder,
                        const LlmProvider& provider, const SensitiveApiCatalogue& catalogue,
                        const DetectorOptions& options = {});

}  // namespace intelguard
