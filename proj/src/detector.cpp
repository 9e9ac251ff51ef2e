#include "intelguard/detector.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "intelguard/error.hpp"
#include "intelguard/log.hpp"
#include "intelguard/prompts.hpp"
#include "intelguard/serialization.hpp"
#include "intelguard/text_util.hpp"

namespace intelguard {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Keeps the latest statements, and the sensitive call wherever it sits.
std::string prompt_slice_text(const CodeSlice& slice, bool& truncated) {
    truncated = slice.statements.size() > kSlicePromptLines;
    if (!truncated) return render_slice(slice);
    CodeSlice kept = slice;
    kept.statements.clear();
    const std::size_t drop = slice.statements.size() - kSlicePromptLines;
    std::size_t dropped = 0;
    for (const auto& st : slice.statements) {
        const bool is_site = st.file == slice.sensitive_call.file && st.line == slice.sensitive_call.line;
        if (dropped < drop && !is_site) {
            ++dropped;
            continue;
        }
        kept.statements.push_back(st);
    }
    // Keeping the site may leave one statement over budget.
    if (kept.statements.size() > kSlicePromptLines) {
        for (auto it = kept.statements.begin(); it != kept.statements.end(); ++it) {
            if (!(it->file == slice.sensitive_call.file && it->line == slice.sensitive_call.line)) {
                kept.statements.erase(it);
                break;
            }
        }
    }
    return render_slice(kept);
}

std::string head_lines(const std::string& text, std::size_t n, bool& truncated) {
    const auto lines = text::split_lines(text);
    truncated = lines.size() > n;
    std::string out;
    for (std::size_t i = 0; i < std::min(n, lines.size()); ++i) out += lines[i] + "\n";
    return out;
}

struct ParsedVerdict {
    Label label = Label::Benign;
    std::string explanation;
    std::vector<std::string> matched;
};

std::optional<ParsedVerdict> parse_verdict(const std::string& response, const RetrievalResult& retrieval) {
    Json j = Json::parse(response, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    if (!j.contains("label") || !j["label"].is_string()) return std::nullopt;
    const auto label = parse_enum<Label>(j["label"].get<std::string>());
    if (!label) return std::nullopt;
    ParsedVerdict out;
    out.label = *label;
    if (j.contains("explanation") && j["explanation"].is_string()) out.explanation = j["explanation"].get<std::string>();
    if (j.contains("matched_ids") && j["matched_ids"].is_array()) {
        for (const auto& id : j["matched_ids"]) {
            if (!id.is_string()) continue;
            const std::string s = id.get<std::string>();
            const bool retrieved = std::any_of(retrieval.hits.begin(), retrieval.hits.end(),
                                               [&](const SimilarityScore& h) { return h.entry_id == s; });
            if (!retrieved) {
                log::warn("detector", "dropping matched id not among retrieved entries: " + s);
                continue;
            }
            if (std::find(out.matched.begin(), out.matched.end(), s) == out.matched.end()) out.matched.push_back(s);
        }
    }
    if (out.label == Label::Malicious && (out.matched.empty() || out.explanation.empty())) return std::nullopt;
    return out;
}

}  // namespace

std::string summarize_behavior(CodeSlice& slice, const LlmProvider& provider) {
    if (slice.statements.empty()) throw InputError("cannot summarize an empty slice");
    const std::string prompt =
        prompts::summarize(slice.trigger, slice.sensitive_call.category, slice.categories, render_slice(slice));
    const std::string response = provider.complete(TaskKind::Summarize, prompt);
    std::string summary;
    Json j = Json::parse(response, nullptr, false);
    if (!j.is_discarded() && j.is_object() && j.contains("summary") && j["summary"].is_string()) {
        summary = j["summary"].get<std::string>();
    } else if (j.is_discarded()) {
        summary = response;
    }
    summary = text::normalize_whitespace(summary);
    if (summary.empty()) throw RetriableError("provider returned an empty behavior summary");
    slice.behavior_summary = summary;
    return summary;
}

std::string classification_prompt(const CodeSlice& slice, const RetrievalResult& retrieval, const KnowledgeBase& kb) {
    prompts::ClassifyInput input;
    input.slice_text = prompt_slice_text(slice, input.slice_truncated);
    input.behavior = slice.behavior_summary;
    input.categories = slice.categories;
    for (const auto& hit : retrieval.hits) {
        const KnowledgeEntry* entry = kb.find(hit.entry_id);
        if (!entry) continue;
        prompts::RetrievedExample ex;
        ex.id = hit.entry_id;
        ex.sim_code = hit.sim_code;
        ex.sim_behav = hit.sim_behav;
        ex.sim_total = hit.sim_total;
        ex.snippet = head_lines(entry->snippet, kSnippetPromptLines, ex.snippet_truncated);
        ex.behavior = entry->behavior;
        ex.reasoning = entry->reasoning;
        input.examples.push_back(std::move(ex));
    }
    return prompts::classify(input);
}

SliceVerdict classify_slice(const CodeSlice& slice, const RetrievalResult& retrieval, const KnowledgeBase& kb,
                            const LlmProvider& provider) {
    if (slice.behavior_summary.empty()) throw InputError("slice must be summarized before classification");
    const std::string prompt = classification_prompt(slice, retrieval, kb);
    SliceVerdict verdict;
    verdict.site = slice.sensitive_call;
    verdict.scores = retrieval.hits;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string response;
        try {
            response = provider.complete(TaskKind::Classify, prompt);
        } catch (const RetriableError& e) {
            log::warn("detector", std::string("classification attempt failed: ") + e.what());
            continue;
        }
        if (auto parsed = parse_verdict(response, retrieval)) {
            verdict.label = parsed->label;
            verdict.explanation = parsed->explanation;
            verdict.matched_entry_ids = parsed->matched;
            return verdict;
        }
        log::warn("detector", "provider returned an invalid verdict for " + slice.sensitive_call.file + ":" +
                                  std::to_string(slice.sensitive_call.line));
    }
    verdict.label = Label::Benign;
    verdict.error = true;
    verdict.explanation = "provider returned no valid label";
    return verdict;
}

Label aggregate_package_verdict(const std::vector<SliceVerdict>& verdicts) {
    const bool any = std::any_of(verdicts.begin(), verdicts.end(),
                                 [](const SliceVerdict& v) { return v.label == Label::Malicious; });
    return any ? Label::Malicious : Label::Benign;
}

DetectionReport render_report(const std::string& package_id, std::vector<SliceVerdict> verdicts,
                              const std::string& kb_version) {
    DetectionReport report;
    report.package_id = package_id;
    report.kb_version = kb_version;
    report.package_label = aggregate_package_verdict(verdicts);
    report.no_sensitive_behavior = verdicts.empty();
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        if (verdicts[i].label == Label::Malicious) report.responsible_slices.push_back(i);
        if (verdicts[i].error) ++report.slice_errors;
    }
    report.slice_verdicts = std::move(verdicts);
    return report;
}

std::string report_text(const DetectionReport& report, const KnowledgeBase* kb) {
    std::ostringstream out;
    out << "Package: " << report.package_id << "\n"
        << "Verdict: " << to_string(report.package_label) << "\n"
        << "Slices analyzed: " << report.slice_verdicts.size() << "\n";
    if (!report.kb_version.empty()) out << "Knowledge base: " << report.kb_version << "\n";
    if (report.no_sensitive_behavior) out << "No sensitive API usage found.\n";
    if (report.slice_errors > 0) out << "Slices without a valid verdict: " << report.slice_errors << "\n";
    for (const auto& f : report.unparsed_files) out << "Unparsed file (suspicious): " << f << "\n";
    if (!report.responsible_slices.empty()) out << "\nResponsible slices:\n";
    for (std::size_t idx : report.responsible_slices) {
        const SliceVerdict& v = report.slice_verdicts[idx];
        out << "- " << v.site.file << ":" << v.site.line << " " << v.site.api_name << " ("
            << to_string(v.site.category) << ")\n"
            << "  Explanation: " << v.explanation << "\n";
        for (const auto& id : v.matched_entry_ids) {
            out << "  Matched example: " << id;
            for (const auto& s : v.scores) {
                if (s.entry_id != id) continue;
                char buf[64];
                std::snprintf(buf, sizeof(buf), " (sim_total %.3f)", s.sim_total);
                out << buf;
            }
            out << "\n";
            if (const KnowledgeEntry* e = kb ? kb->find(id) : nullptr) {
                out << "    Principle: " << e->reasoning.boundary_distinction << "\n";
                for (const auto& ve : e->reasoning.violated_expectations) {
                    out << "    Violation [" << to_string(ve.violation_type) << "]: " << ve.statement << "\n";
                }
            }
        }
    }
    return out.str();
}

ScanResult scan_package(const PackageSource& pkg, const KnowledgeBase& kb, const Embedder& embedder,
                        const LlmProvider& provider, const SensitiveApiCatalogue& catalogue,
                        const DetectorOptions& options) {
    if (!kb.empty() && embedder.identity() != kb.header().embedder) {
        throw ConfigError("embedder " + embedder.identity().name + " does not match the knowledge base embedder " +
                          kb.header().embedder.name);
    }
    const auto start = Clock::now();
    PackageSlices sliced = slice_package(pkg, catalogue, options.max_statements);
    const double slicing_ms = ms_since(start);

    const std::size_t n = sliced.slices.size();
    std::vector<SliceVerdict> verdicts(n);
    std::vector<std::exception_ptr> failures(n);
    std::vector<double> summarize_ms(n, 0.0), retrieval_ms(n, 0.0), classify_ms(n, 0.0);
    std::atomic<std::size_t> next{0};

    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                CodeSlice& slice = sliced.slices[i];
                auto t = Clock::now();
                summarize_behavior(slice, provider);
                summarize_ms[i] = ms_since(t);
                t = Clock::now();
                const DualEmbedding e = embed_dual(slice_source(slice), slice.behavior_summary, embedder);
                slice.code_embedding = e.code;
                slice.behavior_embedding = e.behavior;
                RetrievalResult retrieval;
                if (kb.empty()) {
                    retrieval.empty_kb = true;
                } else {
                    retrieval = query_topk(kb, e.code, e.behavior, options.k, options.weights);
                }
                retrieval_ms[i] = ms_since(t);
                t = Clock::now();
                verdicts[i] = classify_slice(slice, retrieval, kb, provider);
                classify_ms[i] = ms_since(t);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, n));
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }

    ScanResult result;
    result.report = render_report(sliced.graph.package_id, std::move(verdicts), kb.header().kb_version);
    result.report.unparsed_files = sliced.graph.unparsed_files;
    if (options.record_timings) {
        auto sum = [](const std::vector<double>& v) {
            double s = 0.0;
            for (double x : v) s += x;
            return s;
        };
        result.report.timings = {{"slicing", slicing_ms},
                                 {"summarize", sum(summarize_ms)},
                                 {"retrieval", sum(retrieval_ms)},
                                 {"classify", sum(classify_ms)},
                                 {"total", ms_since(start)}};
    }
    result.slices = std::move(sliced.slices);
    return result;
}

}  // namespace intelguard
