// intelguard command-line tool.
//
// Exit codes: 0 benign (or success), 3 malicious, 1 usage or configuration
// error, 2 any other failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "intelguard/catalogue.hpp"
#include "intelguard/config.hpp"
#include "intelguard/detector.hpp"
#include "intelguard/error.hpp"
#include "intelguard/evaluation.hpp"
#include "intelguard/ingestion.hpp"
#include "intelguard/kb_builder.hpp"
#include "intelguard/log.hpp"
#include "intelguard/package_source.hpp"
#include "intelguard/serialization.hpp"
#include "intelguard/text_util.hpp"

using namespace intelguard;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInternal = 2;
constexpr int kExitMalicious = 3;

struct Common {
    std::string config_file;
    ConfigLayer flags;
};

void add_common(CLI::App* cmd, Common& common) {
    cmd->add_option("--config", common.config_file, "JSON config file");
    cmd->add_option("--provider", common.flags.provider, "mock, http or scripted");
    cmd->add_option("--provider-url", common.flags.provider_url, "Base URL of the http provider");
    cmd->add_option("--model", common.flags.model, "Model name sent to the provider");
    cmd->add_option("--token-var", common.flags.token_var, "Environment variable holding the API token");
    cmd->add_option("--scripted", common.flags.scripted_responses, "Responses file for the scripted provider");
    cmd->add_option("--embedder", common.flags.embedder, "fallback or remote");
    cmd->add_option("--catalogue", common.flags.catalogue, "Sensitive-API catalogue JSON");
    cmd->add_option("--threads", common.flags.threads, "Worker threads");
}

void add_retrieval(CLI::App* cmd, Common& common) {
    cmd->add_option("--k", common.flags.k, "Number of retrieved examples");
    cmd->add_option("--alpha", common.flags.alpha, "Weight of code similarity");
    cmd->add_option("--beta", common.flags.beta, "Weight of behavior similarity");
}

RuntimeConfig resolve(const Common& common) {
    std::string file = common.config_file;
    if (file.empty()) {
        if (const char* env = std::getenv("INTELGUARD_CONFIG")) file = env;
    }
    const ConfigLayer from_file = file.empty() ? ConfigLayer{} : config_layer_from_file(file);
    return resolve_config(common.flags, config_layer_from_env(process_environment()), from_file);
}

SensitiveApiCatalogue catalogue_for(const RuntimeConfig& config) {
    return load_catalogue(config.catalogue.empty() ? default_catalogue_path() : config.catalogue);
}

DetectorOptions detector_options(const RuntimeConfig& config) {
    DetectorOptions o;
    o.k = config.k;
    o.weights = RetrievalWeights::normalized_from(config.alpha, config.beta);
    o.max_statements = config.max_statements;
    o.threads = config.threads;
    o.record_timings = true;
    return o;
}

std::string text_or_file(const std::string& value) {
    if (value.size() > 1 && value[0] == '@') return text::read_file(value.substr(1));
    return value;
}

int kb_build(const Common& common, const std::string& manifest, const std::string& out, const std::string& created) {
    const RuntimeConfig config = resolve(common);
    auto provider = make_provider(config);
    auto embedder = make_embedder(config, provider);
    std::vector<ReportDocument> docs;
    for (const auto& item : load_report_manifest(manifest)) docs.push_back(load_report_document(item));
    KbBuildOptions options;
    options.created_at = created;
    KbBuildResult result = build_knowledge_base(std::move(docs), *provider, *embedder, options);
    const std::string version = save_kb(result.kb, out);
    const KbBuildStats& s = result.stats;
    std::cout << "documents " << s.documents << ", relevant " << s.relevant << ", irrelevant " << s.irrelevant
              << ", provider errors " << s.provider_errors << "\n"
              << "candidates " << s.candidates << ", auto-validated " << s.auto_validated << ", pending audit "
              << s.pending << "\n"
              << "behavior clusters " << result.kb.clusters().size() << "\n"
              << "kb_version " << version << "\n";
    return kExitOk;
}

int kb_inspect(const std::string& kb_dir, bool as_json) {
    const KnowledgeBase kb = load_kb(kb_dir);
    if (as_json) {
        Json j{{"kb_version", kb.header().kb_version},
               {"embedder", {{"name", kb.header().embedder.name},
                             {"version", kb.header().embedder.version},
                             {"code_dim", kb.header().embedder.code_dim},
                             {"behavior_dim", kb.header().embedder.behavior_dim}}},
               {"created_at", kb.header().created_at},
               {"entries", kb.entries().size()},
               {"pending", kb.pending().size()},
               {"clusters", kb.clusters()}};
        std::cout << j.dump(2) << "\n";
        return kExitOk;
    }
    std::cout << "kb_version " << kb.header().kb_version << "\n"
              << "embedder " << kb.header().embedder.name << " " << kb.header().embedder.version << " ("
              << kb.header().embedder.code_dim << "/" << kb.header().embedder.behavior_dim << ")\n"
              << "entries " << kb.size() << ", pending " << kb.pending().size() << ", behavior clusters "
              << kb.clusters().size() << "\n";
    for (const auto& e : kb.entries()) {
        std::cout << "  " << e.id << " [" << to_string(e.audit) << "] " << e.behavior << "\n";
    }
    for (const auto& e : kb.pending()) std::cout << "  " << e.id << " [pending] " << e.behavior << "\n";
    for (const auto& c : kb.clusters()) {
        std::cout << "  cluster " << c.cluster_id << ": " << c.member_ids.size() << " members, representative "
                  << c.representative_id << "\n";
    }
    return kExitOk;
}

int kb_query(const Common& common, const std::string& kb_dir, const std::string& code, const std::string& behavior) {
    const RuntimeConfig config = resolve(common);
    const KnowledgeBase kb = load_kb(kb_dir);
    auto provider = make_provider(config);
    auto embedder = make_embedder(config, provider);
    if (!kb.empty() && embedder->identity() != kb.header().embedder) {
        throw ConfigError("embedder does not match the knowledge base embedder " + kb.header().embedder.name);
    }
    const DualEmbedding q = embed_dual(text_or_file(code), text_or_file(behavior), *embedder);
    const RetrievalResult r =
        query_topk(kb, q.code, q.behavior, config.k, RetrievalWeights::normalized_from(config.alpha, config.beta));
    if (r.empty_kb) std::cout << "knowledge base is empty\n";
    for (const auto& h : r.hits) {
        char line[160];
        std::snprintf(line, sizeof(line), "%.6f code %.6f behavior %.6f  ", h.sim_total, h.sim_code, h.sim_behav);
        std::cout << line << h.entry_id << "\n";
    }
    return kExitOk;
}

int scan(const Common& common, const std::string& pkg_path, const std::string& kb_dir, bool as_json) {
    const RuntimeConfig config = resolve(common);
    auto provider = make_provider(config);
    auto embedder = make_embedder(config, provider);
    const KnowledgeBase kb = kb_dir.empty() ? KnowledgeBase(embedder->identity()) : load_kb(kb_dir);
    const PackageSource pkg = load_package(pkg_path);
    const ScanResult result = scan_package(pkg, kb, *embedder, *provider, catalogue_for(config), detector_options(config));
    if (as_json) {
        std::cout << Json(result.report).dump(2) << "\n";
    } else {
        std::cout << report_text(result.report, &kb);
    }
    return result.report.package_label == Label::Malicious ? kExitMalicious : kExitOk;
}

int evaluate(const Common& common, const std::string& manifest, const std::string& kb_dir, const std::string& csv,
             std::size_t workers) {
    const RuntimeConfig config = resolve(common);
    auto provider = make_provider(config);
    auto embedder = make_embedder(config, provider);
    const KnowledgeBase kb = load_kb(kb_dir);
    EvaluationOptions options;
    options.detector = detector_options(config);
    options.detector.threads = 1;
    options.workers = workers;
    const EvaluationResult result =
        run_evaluation(load_dataset_manifest(manifest), kb, *embedder, *provider, catalogue_for(config), options);
    if (!csv.empty()) text::write_file(csv, evaluation_csv(result));
    std::cout << metrics_json(result.metrics) << "\n";
    if (result.errors > 0) std::cerr << result.errors << " package(s) could not be evaluated\n";
    return kExitOk;
}

int audit_mark(const Common& common, const std::string& kb_dir, const std::string& id, const std::string& status) {
    if (status != "expert_validated") throw ConfigError("only 'expert_validated' can be recorded, got '" + status + "'");
    const RuntimeConfig config = resolve(common);
    KnowledgeBase kb = load_kb(kb_dir);
    auto provider = make_provider(config);
    auto embedder = make_embedder(config, provider);
    mark_expert_validated(kb, id, *embedder);
    if (kb.size() > 0) kb.recluster();
    std::cout << id << " marked expert_validated; kb_version " << save_kb(kb, kb_dir) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge-guided malicious package detection"};
    app.require_subcommand(1);
    Common common;

    auto* kb = app.add_subcommand("kb", "Build and examine knowledge bases");
    kb->require_subcommand(1);

    std::string manifest, out, created_at, kb_dir, code, behavior, pkg, csv, entry_id, status;
    bool as_json = false;
    std::size_t workers = 1;

    auto* build = kb->add_subcommand("build", "Build a knowledge base from a report manifest");
    build->add_option("--manifest", manifest, "Report manifest JSON")->required();
    build->add_option("--out", out, "Output directory")->required();
    build->add_option("--created-at", created_at, "Timestamp recorded in the header");
    add_common(build, common);

    auto* inspect = kb->add_subcommand("inspect", "Summarize a knowledge base");
    inspect->add_option("--kb", kb_dir, "Knowledge base directory")->required();
    inspect->add_flag("--json", as_json, "JSON output");

    auto* query = kb->add_subcommand("query", "Ad-hoc top-k retrieval");
    query->add_option("--kb", kb_dir, "Knowledge base directory")->required();
    query->add_option("--code", code, "Code text, or @file")->required();
    query->add_option("--behavior", behavior, "Behavior text, or @file")->required();
    add_common(query, common);
    add_retrieval(query, common);

    auto* scan_cmd = app.add_subcommand("scan", "Scan one package");
    scan_cmd->add_option("package", pkg, "Package directory or archive")->required();
    scan_cmd->add_option("--kb", kb_dir, "Knowledge base directory")->required();
    scan_cmd->add_flag("--json", as_json, "Print the report as JSON");
    add_common(scan_cmd, common);
    add_retrieval(scan_cmd, common);

    auto* eval = app.add_subcommand("eval", "Evaluate on a labelled dataset manifest");
    eval->add_option("--manifest", manifest, "Dataset manifest JSON")->required();
    eval->add_option("--kb", kb_dir, "Knowledge base directory")->required();
    eval->add_option("--csv", csv, "Write per-package rows to this file");
    eval->add_option("--workers", workers, "Packages scanned concurrently");
    add_common(eval, common);
    add_retrieval(eval, common);

    auto* audit = app.add_subcommand("audit", "Record expert audit decisions");
    audit->require_subcommand(1);
    auto* mark = audit->add_subcommand("mark", "Mark an entry as expert validated");
    mark->add_option("entry_id", entry_id, "Entry or pending candidate id")->required();
    mark->add_option("status", status, "expert_validated")->required();
    mark->add_option("--kb", kb_dir, "Knowledge base directory")->required();
    add_common(mark, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (build->parsed()) return kb_build(common, manifest, out, created_at);
        if (inspect->parsed()) return kb_inspect(kb_dir, as_json);
        if (query->parsed()) return kb_query(common, kb_dir, code, behavior);
        if (scan_cmd->parsed()) return scan(common, pkg, kb_dir, as_json);
        if (eval->parsed()) return evaluate(common, manifest, kb_dir, csv, workers);
        if (mark->parsed()) return audit_mark(common, kb_dir, entry_id, status);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
