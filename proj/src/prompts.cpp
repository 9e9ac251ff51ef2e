#include "intelguard/prompts.hpp"

#include <cstdio>
#include <sstream>

namespace intelguard::prompts {

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string one_line(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) out.push_back(c == '\n' || c == '\r' ? ' ' : c);
    return out;
}

bool is_part_marker(std::string_view line) {
    return line.size() >= 6 && line.substr(0, 3) == "===" && line.substr(line.size() - 3) == "===";
}

}  // namespace

std::string relevance(std::string_view document) {
    std::ostringstream out;
    out << "TASK: relevance\n"
        << "Decide whether the document below contains malicious code samples accompanied by an\n"
        << "interpretation of their behavior (actionable threat intelligence). Pages that only carry\n"
        << "vulnerability metadata or high-level advisories are not relevant.\n"
        << "Respond with JSON: {\"relevant\": true|false, \"reason\": \"...\"}\n"
        << kDocumentMarker << "\n"
        << document;
    return out.str();
}

std::string extraction(std::string_view document) {
    std::ostringstream out;
    out << "TASK: extraction\n"
        << "Treat every fenced code block as one analytical unit. For each malicious snippet return its\n"
        << "execution context (trigger, file location, permissions), a behavioral summary, the expert\n"
        << "reasoning (why suspicious, violated expectations, boundary distinction, strategy) and the\n"
        << "indicators of compromise cited in the document. Copy snippets verbatim.\n"
        << "Respond with strict JSON: {\"entries\": [{\"snippet\", \"language\", \"context\": {\"trigger\",\n"
        << "\"file_location\", \"permissions\"}, \"behavior\", \"reasoning\": {\"why_suspicious\",\n"
        << "\"violated_expectations\": [{\"violation_type\", \"statement\"}], \"boundary_distinction\",\n"
        << "\"strategy\"}, \"indicators\": []}]}\n"
        << "trigger: install|import|runtime|build|unknown; language: python|javascript|other;\n"
        << "violation_type: execution_context|functional_boundary|permission_abuse|data_flow|isolation;\n"
        << "strategy: functional_violation|contextual_boundary|privilege_abuse|temporal_anomaly\n"
        << kDocumentMarker << "\n"
        << document;
    return out.str();
}

std::string crosscheck(std::string_view entry_json, std::string_view document) {
    std::ostringstream out;
    out << "TASK: crosscheck\n"
        << "Review the original report and the structured knowledge extracted from it. Confirm that the\n"
        << "behavior description matches what the snippet does according to the report.\n"
        << "Respond with JSON: {\"consistent\": true|false, \"reason\": \"...\"}\n"
        << kEntryMarker << "\n"
        << entry_json << "\n"
        << "=== REPORT ===\n"
        << kDocumentMarker << "\n"
        << document;
    return out.str();
}

std::string summarize(Trigger trigger, ApiCategory sink, const std::vector<ApiCategory>& categories,
                      std::string_view slice_text) {
    std::ostringstream out;
    out << "TASK: summarize\n"
        << "Describe in one to three sentences what this code slice does at the level of operations:\n"
        << "actions, data sources and sinks, and the trigger context. Never mention identifiers.\n"
        << "TRIGGER: " << to_string(trigger) << "\n"
        << "SINK: " << to_string(sink) << "\n"
        << "CATEGORIES: " << join_categories(categories) << "\n"
        << kSliceMarker << "\n"
        << slice_text;
    return out.str();
}

std::string embed(std::string_view model, std::size_t dim, std::string_view kind, std::string_view text) {
    std::ostringstream out;
    out << "TASK: embed\n"
        << "MODEL: " << model << "\n"
        << "DIM: " << dim << "\n"
        << "KIND: " << kind << "\n"
        << kTextMarker << "\n"
        << text;
    return out.str();
}

std::string classify(const ClassifyInput& input) {
    std::ostringstream out;
    out << "TASK: classify\n"
        << "Compare the target slice with the retrieved malicious examples and apply the expert reasoning\n"
        << "principles. Decide whether the target exhibits the same security violations.\n"
        << "CATEGORIES: " << join_categories(input.categories) << "\n"
        << "RETRIEVED: " << input.examples.size() << "\n"
        << kPartTarget << "\n"
        << "BEHAVIOR: " << one_line(input.behavior) << "\n"
        << "CODE:\n"
        << input.slice_text;
    if (!input.slice_text.empty() && input.slice_text.back() != '\n') out << "\n";
    if (input.slice_truncated) out << "(slice truncated: earliest statements omitted)\n";

    out << kPartExamples << "\n";
    for (std::size_t i = 0; i < input.examples.size(); ++i) {
        const auto& ex = input.examples[i];
        out << "[" << (i + 1) << "] id=" << ex.id << " sim_code=" << fixed6(ex.sim_code)
            << " sim_behav=" << fixed6(ex.sim_behav) << " sim_total=" << fixed6(ex.sim_total) << "\n"
            << "CODE:\n"
            << ex.snippet;
        if (!ex.snippet.empty() && ex.snippet.back() != '\n') out << "\n";
        if (ex.snippet_truncated) out << "(snippet truncated to 60 lines)\n";
        out << "BEHAVIOR: " << one_line(ex.behavior) << "\n";
    }

    out << kPartReasoning << "\n";
    for (std::size_t i = 0; i < input.examples.size(); ++i) {
        const auto& r = input.examples[i].reasoning;
        out << "[" << (i + 1) << "] id=" << input.examples[i].id << "\n"
            << "WHY: " << one_line(r.why_suspicious) << "\n"
            << "VIOLATIONS:";
        for (const auto& v : r.violated_expectations) {
            out << " [" << to_string(v.violation_type) << "] " << one_line(v.statement) << ";";
        }
        out << "\n"
            << "BOUNDARY: " << one_line(r.boundary_distinction) << "\n"
            << "STRATEGY: " << to_string(r.strategy) << "\n";
    }

    out << kPartAnswer << "\n"
        << "Respond with JSON: {\"label\": \"malicious\"|\"benign\", \"explanation\": \"...\",\n"
        << "\"matched_ids\": [ids of the retrieved examples that support the decision]}\n";
    return out.str();
}

std::optional<std::string> header(std::string_view prompt, std::string_view key) {
    std::istringstream in{std::string(prompt)};
    std::string line;
    const std::string prefix = std::string(key) + ": ";
    const std::string bare = std::string(key) + ":";
    while (std::getline(in, line)) {
        if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
        if (line == bare) return std::string();
    }
    return std::nullopt;
}

std::optional<std::string> body_after(std::string_view prompt, std::string_view marker) {
    std::size_t pos = 0;
    while (pos <= prompt.size()) {
        std::size_t eol = prompt.find('\n', pos);
        std::string_view line = prompt.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        if (line == marker) {
            if (eol == std::string_view::npos) return std::string();
            std::string_view rest = prompt.substr(eol + 1);
            // Cut at the next part marker.
            std::size_t p = 0;
            while (p < rest.size()) {
                std::size_t e = rest.find('\n', p);
                std::string_view l = rest.substr(p, e == std::string_view::npos ? std::string_view::npos : e - p);
                if (is_part_marker(l)) return std::string(rest.substr(0, p));
                if (e == std::string_view::npos) break;
                p = e + 1;
            }
            return std::string(rest);
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    return std::nullopt;
}

std::vector<ApiCategory> parse_categories(std::string_view text) {
    std::vector<ApiCategory> out;
    std::string token;
    auto flush = [&] {
        auto first = token.find_first_not_of(' ');
        auto last = token.find_last_not_of(' ');
        if (first != std::string::npos) {
            if (auto c = parse_enum<ApiCategory>(token.substr(first, last - first + 1))) out.push_back(*c);
        }
        token.clear();
    };
    for (char c : text) {
        if (c == ',') {
            flush();
        } else {
            token.push_back(c);
        }
    }
    flush();
    return out;
}

std::string join_categories(const std::vector<ApiCategory>& categories) {
    std::string out;
    for (std::size_t i = 0; i < categories.size(); ++i) {
        if (i) out += ", ";
        out += to_string(categories[i]);
    }
    return out;
}

}  // namespace intelguard::prompts
