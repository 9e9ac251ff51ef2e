#include "intelguard/provider.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "intelguard/core_model.hpp"
#include "intelguard/embedding.hpp"
#include "intelguard/error.hpp"
#include "intelguard/hashing.hpp"
#include "intelguard/prompts.hpp"
#include "intelguard/text_util.hpp"
#include "json.hpp"

#ifdef INTELGUARD_WITH_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

namespace intelguard {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<TaskKind, std::string_view>, 6> kTaskNames{{
    {TaskKind::Relevance, "relevance"},
    {TaskKind::Extraction, "extraction"},
    {TaskKind::CrossCheck, "crosscheck"},
    {TaskKind::Summarize, "summarize"},
    {TaskKind::Classify, "classify"},
    {TaskKind::Embed, "embed"},
}};

// ---------------------------------------------------------------------------
// Mock: relevance

constexpr std::array<std::string_view, 4> kRelevanceKeywords{"exfiltrat", "backdoor", "execut", "payload"};

std::string mock_relevance(std::string_view prompt) {
    const std::string doc = prompts::body_after(prompt, prompts::kDocumentMarker).value_or("");
    const bool has_fence = text::has_fence_line(doc);
    const std::string lower = text::to_lower(doc);
    std::string hit;
    for (auto kw : kRelevanceKeywords) {
        if (lower.find(kw) != std::string::npos) {
            hit = std::string(kw);
            break;
        }
    }
    const bool relevant = has_fence && !hit.empty();
    std::string reason = relevant ? "code fence with behavioral analysis (keyword '" + hit + "')"
                         : !has_fence ? "no code samples"
                                      : "code without behavioral interpretation";
    return json{{"relevant", relevant}, {"reason", reason}}.dump();
}

// ---------------------------------------------------------------------------
// Mock: extraction

struct Segment {
    bool code = false;
    std::string content;
};

std::vector<Segment> split_fences(const std::string& doc) {
    std::vector<Segment> out;
    std::istringstream in(doc);
    std::string line;
    Segment current;
    bool in_code = false;
    auto flush = [&] {
        if (!current.content.empty() || current.code) {
            if (!current.content.empty() && current.content.back() == '\n') current.content.pop_back();
            out.push_back(current);
        }
        current = Segment{};
    };
    while (std::getline(in, line)) {
        if (line == "```") {
            flush();
            in_code = !in_code;
            current.code = in_code;
            continue;
        }
        current.content += line;
        current.content += '\n';
    }
    flush();
    return out;
}

std::vector<std::string> split_sentences(const std::string& prose) {
    std::vector<std::string> out;
    std::string cur;
    for (std::size_t i = 0; i < prose.size(); ++i) {
        const char c = prose[i];
        cur.push_back(c == '\n' ? ' ' : c);
        const bool end = (c == '.' || c == '!' || c == '?') &&
                         (i + 1 == prose.size() || prose[i + 1] == ' ' || prose[i + 1] == '\n');
        if (end || c == '\n') {
            auto t = text::trim(cur);
            if (!t.empty()) out.push_back(t);
            cur.clear();
        }
    }
    auto t = text::trim(cur);
    if (!t.empty()) out.push_back(t);
    return out;
}

std::string strip_label(const std::string& sentence, std::string_view label) {
    const std::string lower = text::to_lower(sentence);
    const auto pos = lower.find(label);
    if (pos == std::string::npos) return sentence;
    return text::trim(sentence.substr(pos + label.size()));
}

ViolationType violation_from_text(const std::string& s) {
    const std::string l = text::to_lower(s);
    if (l.find("data flow") != std::string::npos || l.find("exfiltrat") != std::string::npos) return ViolationType::DataFlow;
    if (l.find("permission") != std::string::npos || l.find("privilege") != std::string::npos) {
        return ViolationType::PermissionAbuse;
    }
    if (l.find("isolation") != std::string::npos || l.find("dependenc") != std::string::npos) {
        return ViolationType::Isolation;
    }
    if (l.find("context") != std::string::npos || l.find("install") != std::string::npos) {
        return ViolationType::ExecutionContext;
    }
    return ViolationType::FunctionalBoundary;
}

Strategy strategy_for(ViolationType v, Trigger trigger) {
    switch (v) {
        case ViolationType::ExecutionContext:
            return trigger == Trigger::Install ? Strategy::TemporalAnomaly : Strategy::ContextualBoundary;
        case ViolationType::PermissionAbuse:
            return Strategy::PrivilegeAbuse;
        case ViolationType::Isolation:
            return Strategy::ContextualBoundary;
        default:
            return Strategy::FunctionalViolation;
    }
}

Language guess_language(const std::string& snippet) {
    static const std::regex py(R"((^|\n)\s*(def |import |from \S+ import |class \w+.*:))");
    static const std::regex js(R"((function\s*\w*\s*\(|=>|\bconst |\blet |\bvar |require\s*\())");
    if (std::regex_search(snippet, py)) return Language::Python;
    if (std::regex_search(snippet, js)) return Language::JavaScript;
    return Language::Other;
}

Trigger trigger_from(const std::string& lower) {
    if (lower.find("install") != std::string::npos) return Trigger::Install;
    if (lower.find("import") != std::string::npos) return Trigger::Import;
    if (lower.find("build") != std::string::npos) return Trigger::Build;
    if (lower.find("invoked") != std::string::npos || lower.find("runtime") != std::string::npos ||
        lower.find("when called") != std::string::npos) {
        return Trigger::Runtime;
    }
    return Trigger::Unknown;
}

std::vector<std::string> find_indicators(const std::string& prose) {
    static const std::regex ip(R"(\b(?:\d{1,3}\.){3}\d{1,3}\b)");
    static const std::regex url(R"(https?://[A-Za-z0-9._~:/?#@!$&'*+,;=%-]+[A-Za-z0-9/])");
    static const std::regex domain(
        R"(\b(?:[A-Za-z0-9-]+\.)+(?:com|net|org|io|ru|xyz|top|cn|info|dev|app|co|site|online|tk)\b)");
    std::vector<std::string> out;
    std::set<std::string> seen;
    std::string without_urls = prose;
    for (auto it = std::sregex_iterator(prose.begin(), prose.end(), url); it != std::sregex_iterator(); ++it) {
        if (seen.insert(it->str()).second) out.push_back(it->str());
    }
    without_urls = std::regex_replace(prose, url, " ");
    for (const auto* re : {&ip, &domain}) {
        for (auto it = std::sregex_iterator(without_urls.begin(), without_urls.end(), *re);
             it != std::sregex_iterator(); ++it) {
            if (seen.insert(it->str()).second) out.push_back(it->str());
        }
    }
    return out;
}

std::string find_source_file(const std::string& prose, Trigger trigger, Language lang) {
    static const std::regex file(R"(\b[\w./-]+\.(?:js|cjs|mjs|py|sh|json)\b)");
    std::smatch m;
    if (std::regex_search(prose, m, file)) return m.str();
    if (trigger == Trigger::Install) return lang == Language::Python ? "setup.py" : "package.json";
    if (trigger == Trigger::Unknown) return "";
    return lang == Language::Python ? "__init__.py" : "index.js";
}

json mock_entry(const std::string& snippet, const std::string& before, const std::string& after) {
    const std::string& primary = text::trim(after).empty() ? before : after;
    auto sentences = split_sentences(primary);

    std::string behavior;
    std::string why;
    std::string boundary;
    std::vector<std::string> violation_items;

    for (const auto& s : sentences) {
        const std::string l = text::to_lower(s);
        if (l.rfind("why suspicious:", 0) == 0) {
            why = strip_label(s, "why suspicious:");
        } else if (l.rfind("violations:", 0) == 0) {
            for (auto& item : text::split(strip_label(s, "violations:"), ';')) {
                auto t = text::trim(item);
                if (!t.empty()) violation_items.push_back(t);
            }
        } else if (l.rfind("boundary distinction:", 0) == 0) {
            boundary = strip_label(s, "boundary distinction:");
        } else if (why.empty() && (l.find("should not") != std::string::npos || l.find("should never") != std::string::npos)) {
            why = s;
        } else if (l.find("never") != std::string::npos || l.find("legitimate") != std::string::npos) {
            boundary += (boundary.empty() ? "" : " ") + s;
        } else if (l.find("violat") != std::string::npos) {
            violation_items.push_back(s);
        } else if (boundary.empty() && why.empty() && violation_items.empty()) {
            behavior += (behavior.empty() ? "" : " ") + s;
        }
    }
    // Sentences after the boundary label belong to it.
    if (!boundary.empty() && boundary.back() != '.') boundary += ".";

    const Language lang = guess_language(snippet);
    const std::string context_text = text::to_lower(before + " " + behavior);
    const Trigger trigger = trigger_from(context_text);

    json violations = json::array();
    for (const auto& item : violation_items) {
        violations.push_back({{"violation_type", to_string(violation_from_text(item))}, {"statement", item}});
    }
    if (violations.empty() && !why.empty()) {
        violations.push_back({{"violation_type", to_string(violation_from_text(why))}, {"statement", why}});
    }
    const ViolationType first = violations.empty()
                                    ? ViolationType::FunctionalBoundary
                                    : *parse_enum<ViolationType>(violations[0]["violation_type"].get<std::string>());

    const std::string permissions = (context_text.find("sudo") != std::string::npos ||
                                     context_text.find("root") != std::string::npos ||
                                     context_text.find("administrator") != std::string::npos)
                                        ? "elevated"
                                        : "user";

    return json{{"snippet", snippet},
                {"language", to_string(lang)},
                {"context",
                 {{"trigger", to_string(trigger)},
                  {"file_location", find_source_file(before + " " + behavior, trigger, lang)},
                  {"permissions", permissions}}},
                {"behavior", behavior},
                {"reasoning",
                 {{"why_suspicious", why},
                  {"violated_expectations", violations},
                  {"boundary_distinction", boundary},
                  {"strategy", to_string(strategy_for(first, trigger))}}},
                {"indicators", find_indicators(after.empty() ? before : after)}};
}

std::string mock_extraction(std::string_view prompt) {
    const std::string doc = prompts::body_after(prompt, prompts::kDocumentMarker).value_or("");
    const auto segments = split_fences(doc);
    json entries = json::array();
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (!segments[i].code) continue;
        const std::string before = (i > 0 && !segments[i - 1].code) ? segments[i - 1].content : "";
        const std::string after = (i + 1 < segments.size() && !segments[i + 1].code) ? segments[i + 1].content : "";
        entries.push_back(mock_entry(segments[i].content, before, after));
    }
    return json{{"entries", entries}}.dump();
}

// ---------------------------------------------------------------------------
// Mock: crosscheck

std::string mock_crosscheck(std::string_view prompt) {
    const std::string entry_text = prompts::body_after(prompt, prompts::kEntryMarker).value_or("");
    const std::string doc = text::to_lower(prompts::body_after(prompt, prompts::kDocumentMarker).value_or(""));
    json entry = json::parse(entry_text, nullptr, false);
    std::string behavior;
    if (entry.is_object() && entry.contains("behavior") && entry["behavior"].is_string()) {
        behavior = entry["behavior"].get<std::string>();
    }
    for (const auto& token : tokenize_for_embedding(behavior)) {
        if (token.size() >= 4 && doc.find(token) != std::string::npos) {
            return json{{"consistent", true}, {"reason", "behavior term '" + token + "' is grounded in the report"}}.dump();
        }
    }
    return json{{"consistent", false}, {"reason", "behavior description shares no terms with the report"}}.dump();
}

// ---------------------------------------------------------------------------
// Mock: summarize

std::string_view trigger_phrase(Trigger t) {
    switch (t) {
        case Trigger::Install: return "During package installation";
        case Trigger::Import: return "When the package is imported";
        case Trigger::Runtime: return "When the exposed function is invoked";
        case Trigger::Build: return "During the package build";
        case Trigger::Unknown: break;
    }
    return "At an unspecified point";
}

std::string_view action_phrase(ApiCategory c) {
    switch (c) {
        case ApiCategory::Network: return "retrieves or sends data over the network";
        case ApiCategory::Process: return "executes commands or dynamically constructed code";
        case ApiCategory::File: return "reads or writes local files";
        case ApiCategory::Encryption: return "encodes, decodes or encrypts data";
        case ApiCategory::SystemInfo: return "collects host and environment information";
    }
    return "";
}

std::string_view source_phrase(ApiCategory c) {
    switch (c) {
        case ApiCategory::Network: return "the network";
        case ApiCategory::Process: return "process output";
        case ApiCategory::File: return "local files";
        case ApiCategory::Encryption: return "decoded content";
        case ApiCategory::SystemInfo: return "the host environment";
    }
    return "";
}

std::string_view sink_phrase(ApiCategory c) {
    switch (c) {
        case ApiCategory::Network: return "a network request";
        case ApiCategory::Process: return "command or code execution";
        case ApiCategory::File: return "a file operation";
        case ApiCategory::Encryption: return "an encoding routine";
        case ApiCategory::SystemInfo: return "a host information query";
    }
    return "";
}

std::string join_phrases(const std::vector<std::string_view>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += (i + 1 == items.size()) ? " and " : ", ";
        out += items[i];
    }
    return out;
}

constexpr std::array<ApiCategory, 5> kCategoryOrder{ApiCategory::Network, ApiCategory::Process, ApiCategory::File,
                                                    ApiCategory::Encryption, ApiCategory::SystemInfo};

std::string mock_summarize(std::string_view prompt) {
    const Trigger trigger = parse_enum<Trigger>(prompts::header(prompt, "TRIGGER").value_or("")).value_or(Trigger::Unknown);
    const auto sink = parse_enum<ApiCategory>(prompts::header(prompt, "SINK").value_or(""));
    const auto present = prompts::parse_categories(prompts::header(prompt, "CATEGORIES").value_or(""));
    auto has = [&](ApiCategory c) { return std::find(present.begin(), present.end(), c) != present.end(); };

    std::vector<std::string_view> actions;
    std::vector<std::string_view> sources;
    for (ApiCategory c : kCategoryOrder) {
        if (!has(c)) continue;
        actions.push_back(action_phrase(c));
        if (!sink || c != *sink) sources.push_back(source_phrase(c));
    }
    std::string out(trigger_phrase(trigger));
    out += ", the code ";
    out += actions.empty() ? "performs no sensitive operation" : join_phrases(actions);
    out += ".";
    if (sink && !sources.empty()) {
        out += " Data from " + join_phrases(sources) + " reaches " + std::string(sink_phrase(*sink)) + ".";
    }
    return json{{"summary", out}}.dump();
}

// ---------------------------------------------------------------------------
// Mock: classify

std::string mock_classify(std::string_view prompt, double threshold) {
    const auto categories = prompts::parse_categories(prompts::header(prompt, "CATEGORIES").value_or(""));
    const auto examples = prompts::body_after(prompt, prompts::kPartExamples).value_or("");
    static const std::regex top(R"(^\[1\] id=(\S+) sim_code=\S+ sim_behav=\S+ sim_total=(\S+))");
    std::smatch m;
    std::istringstream in(examples);
    std::string line;
    std::string top_id;
    double top_total = 0.0;
    while (std::getline(in, line)) {
        if (std::regex_search(line, m, top)) {
            top_id = m[1].str();
            top_total = std::stod(m[2].str());
            break;
        }
    }
    if (top_id.empty()) {
        return json{{"label", "benign"}, {"explanation", "no supporting knowledge"}, {"matched_ids", json::array()}}.dump();
    }
    auto has = [&](ApiCategory c) { return std::find(categories.begin(), categories.end(), c) != categories.end(); };
    const bool pair = has(ApiCategory::Network) && has(ApiCategory::Process);
    char score[32];
    std::snprintf(score, sizeof(score), "%.6f", top_total);
    if (top_total >= threshold && pair) {
        return json{{"label", "malicious"},
                    {"explanation", "Slice combines network access with command or code execution and matches known "
                                    "malicious example " +
                                        top_id + " (sim_total " + score + "); the same expert reasoning applies."},
                    {"matched_ids", json::array({top_id})}}
            .dump();
    }
    std::string why = pair ? "closest known example " + top_id + " is too dissimilar (sim_total " + score + ")"
                           : "slice lacks a network and execution combination (closest example " + top_id +
                                 ", sim_total " + score + ")";
    return json{{"label", "benign"}, {"explanation", why}, {"matched_ids", json::array()}}.dump();
}

// ---------------------------------------------------------------------------
// Mock: embed

std::string mock_embed(std::string_view prompt) {
    const std::size_t dim = std::stoul(prompts::header(prompt, "DIM").value_or("256"));
    const std::string body = prompts::body_after(prompt, prompts::kTextMarker).value_or("");
    json arr = json::array();
    for (float x : fallback_embed(body, dim)) arr.push_back(static_cast<double>(x));
    return arr.dump();
}

}  // namespace

std::string_view to_string(TaskKind kind) {
    for (const auto& [k, name] : kTaskNames) {
        if (k == kind) return name;
    }
    return "?";
}

std::optional<TaskKind> parse_task_kind(std::string_view text) {
    for (const auto& [k, name] : kTaskNames) {
        if (name == text) return k;
    }
    return std::nullopt;
}

std::string_view schema_id(TaskKind kind) {
    switch (kind) {
        case TaskKind::Relevance: return "relevance.v1";
        case TaskKind::Extraction: return "knowledge_entries.v1";
        case TaskKind::CrossCheck: return "crosscheck.v1";
        case TaskKind::Summarize: return "summary.v1";
        case TaskKind::Classify: return "slice_verdict.v1";
        case TaskKind::Embed: return "embedding.v1";
    }
    return "";
}

MockProvider::MockProvider(double classify_threshold) : threshold_(classify_threshold) {}

std::string MockProvider::complete(TaskKind kind, std::string_view prompt) const {
    switch (kind) {
        case TaskKind::Relevance: return mock_relevance(prompt);
        case TaskKind::Extraction: return mock_extraction(prompt);
        case TaskKind::CrossCheck: return mock_crosscheck(prompt);
        case TaskKind::Summarize: return mock_summarize(prompt);
        case TaskKind::Classify: return mock_classify(prompt, threshold_);
        case TaskKind::Embed: return mock_embed(prompt);
    }
    throw RetriableError("mock: unknown task kind");
}

std::string scripted_key(TaskKind kind, std::string_view prompt) {
    return std::string(to_string(kind)) + ":" + fnv1a64_hex(prompt);
}

ScriptedProvider::ScriptedProvider(std::map<std::string, std::string> responses,
                                   std::shared_ptr<const LlmProvider> fallback)
    : responses_(std::move(responses)), fallback_(std::move(fallback)) {}

ScriptedProvider ScriptedProvider::from_file(const std::string& path, std::shared_ptr<const LlmProvider> fallback) {
    std::ifstream in(path);
    if (!in) throw InputError("scripted provider: cannot open " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.contains("responses") || !doc["responses"].is_array()) {
        throw InputError("scripted provider: " + path + " is not {\"responses\": [...]}");
    }
    std::map<std::string, std::string> responses;
    for (const auto& r : doc["responses"]) {
        const auto kind = parse_task_kind(r.value("task_kind", ""));
        if (!kind) throw InputError("scripted provider: unknown task_kind in " + path);
        responses[std::string(to_string(*kind)) + ":" + r.value("prompt_hash", "")] = r.value("text", "");
    }
    return ScriptedProvider(std::move(responses), std::move(fallback));
}

std::string ScriptedProvider::complete(TaskKind kind, std::string_view prompt) const {
    auto it = responses_.find(scripted_key(kind, prompt));
    if (it != responses_.end()) return it->second;
    if (fallback_) return fallback_->complete(kind, prompt);
    throw RetriableError("scripted provider: no response for " + scripted_key(kind, prompt));
}

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
    static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(config_.base_url, m, url)) {
        throw ConfigError("http provider: invalid base URL '" + config_.base_url + "'");
    }
    origin_ = m[1].str();
    path_ = m[2].matched ? m[2].str() : "/";
#ifndef INTELGUARD_WITH_OPENSSL
    if (origin_.rfind("https://", 0) == 0) throw ConfigError("http provider: built without TLS support");
#endif
}

std::string HttpProvider::complete(TaskKind kind, std::string_view prompt) const {
    httplib::Client client(origin_);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    client.set_write_timeout(config_.timeout_seconds, 0);

    httplib::Headers headers;
    if (!config_.token_env.empty()) {
        if (const char* token = std::getenv(config_.token_env.c_str()); token && *token) {
            headers.emplace("Authorization", std::string("Bearer ") + token);
        }
    }
    const json body{{"task_kind", to_string(kind)},
                    {"prompt", std::string(prompt)},
                    {"schema_id", schema_id(kind)},
                    {"model", config_.model},
                    {"temperature", 0}};
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw RetriableError("http provider: " + httplib::to_string(res.error()));
    if (res->status != 200) throw RetriableError("http provider: status " + std::to_string(res->status));
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("text") || !parsed["text"].is_string()) {
        throw RetriableError("http provider: response is not {\"text\": ...}");
    }
    return parsed["text"].get<std::string>();
}

}  // namespace intelguard
