#pragma once

// Prompt layouts shared by the pipeline stages and the mock provider.
// Header lines ("KEY: value") always come before free-form bodies, and each
// body runs to the end of the prompt or to the next "=== ... ===" marker.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "intelguard/core_model.hpp"

namespace intelguard::prompts {

inline constexpr std::string_view kDocumentMarker = "DOCUMENT:";
inline constexpr std::string_view kEntryMarker = "ENTRY:";
inline constexpr std::string_view kSliceMarker = "SLICE:";
inline constexpr std::string_view kTextMarker = "TEXT:";
inline constexpr std::string_view kPartTarget = "=== PART 1: TARGET SLICE ===";
inline constexpr std::string_view kPartExamples = "=== PART 2: RETRIEVED MALICIOUS EXAMPLES ===";
inline constexpr std::string_view kPartReasoning = "=== PART 3: EXPERT REASONING ===";
inline constexpr std::string_view kPartAnswer = "=== ANSWER ===";

std::string relevance(std::string_view document);
std::string extraction(std::string_view document);
std::string crosscheck(std::string_view entry_json, std::string_view document);
std::string summarize(Trigger trigger, ApiCategory sink, const std::vector<ApiCategory>& categories,
                      std::string_view slice_text);
std::string embed(std::string_view model, std::size_t dim, std::string_view kind, std::string_view text);

struct RetrievedExample {
    std::string id;
    double sim_code = 0.0;
    double sim_behav = 0.0;
    double sim_total = 0.0;
    std::string snippet;
    std::string behavior;
    ReasoningChain reasoning;
    bool snippet_truncated = false;
};

struct ClassifyInput {
    std::string slice_text;
    std::string behavior;
    std::vector<ApiCategory> categories;
    bool slice_truncated = false;
    std::vector<RetrievedExample> examples;
};

std::string classify(const ClassifyInput& input);

// Readers used by the mock provider.

/// Value of the first "KEY: value" line, if present.
std::optional<std::string> header(std::string_view prompt, std::string_view key);

/// Everything after the first line equal to `marker`, up to the next
/// "=== ... ===" line (exclusive) or the end.
std::optional<std::string> body_after(std::string_view prompt, std::string_view marker);

/// Comma-separated category list as printed by the builders.
std::vector<ApiCategory> parse_categories(std::string_view text);
std::string join_categories(const std::vector<ApiCategory>& categories);

}  // namespace intelguard::prompts
