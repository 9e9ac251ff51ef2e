#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

#include "intelguard/catalogue.hpp"
#include "intelguard/ingestion.hpp"
#include "intelguard/package_source.hpp"
#include "intelguard/provider.hpp"
#include "intelguard/serialization.hpp"
#include "intelguard/text_util.hpp"

namespace fs = std::filesystem;

namespace intelguard::testing {

namespace {

std::set<std::string> key_set(const Json& j) {
    std::set<std::string> out;
    for (const auto& s : j) out.insert(s.get<std::string>());
    return out;
}

std::string key(const std::string& file, int line) { return file + ":" + std::to_string(line); }

std::string join(const std::set<std::string>& s) {
    std::string out;
    for (const auto& x : s) out += (out.empty() ? "" : " ") + x;
    return "{" + out + "}";
}

}  // namespace

std::string fixtures_dir() { return INTELGUARD_FIXTURES_DIR; }

std::string fixture_path(const std::string& relative) { return (fs::path(fixtures_dir()) / relative).string(); }

std::set<std::string> statement_keys(const CodeSlice& slice) {
    std::set<std::string> out;
    for (const auto& st : slice.statements) out.insert(key(st.file, st.line));
    return out;
}

std::vector<SlicingFixture> load_slicing_fixtures() {
    std::vector<SlicingFixture> out;
    const SensitiveApiCatalogue shipped = load_catalogue(default_catalogue_path());
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(fixture_path("slicing"))) {
        if (e.is_directory()) dirs.push_back(e.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
        const Json j = Json::parse(text::read_file((d / "expected.json").string()));
        SlicingFixture f;
        f.name = d.filename().string();
        f.dir = d.string();
        f.description = j.value("description", std::string());
        f.catalogue = shipped;
        if (j.contains("catalogue")) f.catalogue = Json{{"entries", j["catalogue"]}}.get<SensitiveApiCatalogue>();
        for (const auto& s : j["sites"]) {
            ExpectedSite e;
            const std::string at = s["at"].get<std::string>();
            const auto colon = at.rfind(':');
            e.file = at.substr(0, colon);
            e.line = std::stoi(at.substr(colon + 1));
            e.api = s["api"].get<std::string>();
            e.category = *parse_enum<ApiCategory>(s["category"].get<std::string>());
            e.dynamic = s.value("dynamic", false);
            e.both = key_set(s["both"]);
            e.data = key_set(s["data"]);
            e.control = key_set(s["control"]);
            f.sites.push_back(std::move(e));
        }
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<std::string> closure_violations(const ProgramGraph& graph, const std::vector<int>& nodes) {
    const std::set<int> in(nodes.begin(), nodes.end());
    std::vector<std::string> out;
    auto check = [&](int from, int to) {
        if (in.count(to) && !in.count(from)) {
            const auto& n = graph.nodes[static_cast<std::size_t>(from)];
            out.push_back(key(n.file, n.line));
        }
    };
    for (const auto& e : graph.data_edges) check(e.from, e.to);
    for (const auto& e : graph.control_edges) check(e.from, e.to);
    return out;
}

FixtureCheck check_slicing_fixture(const SlicingFixture& fixture) {
    FixtureCheck result;
    const PackageSource pkg = load_package(fixture.dir);
    for (const auto& f : pkg.files) {
        if (f.language != Language::Other) result.lines += text::split_lines(f.text).size();
    }
    const ProgramGraph graph = build_program_graph(pkg);
    const auto sites = locate_sensitive_calls(graph, fixture.catalogue);

    using SiteKey = std::tuple<std::string, int, std::string>;
    std::map<SiteKey, const SensitiveSite*> found;
    for (const auto& s : sites) {
        const SiteKey k{s.call.file, s.call.line, s.call.api_name};
        if (found.count(k)) result.problems.push_back("duplicate site " + key(s.call.file, s.call.line) + " " + s.call.api_name);
        found[k] = &s;
    }
    std::set<SiteKey> expected_keys;
    for (const auto& e : fixture.sites) expected_keys.insert({e.file, e.line, e.api});
    for (const auto& [k, s] : found) {
        if (!expected_keys.count(k)) {
            result.problems.push_back("unexpected site " + key(std::get<0>(k), std::get<1>(k)) + " " + std::get<2>(k));
        }
    }

    SliceOptions options;
    options.sites = sites;
    for (const auto& e : fixture.sites) {
        const std::string where = key(e.file, e.line) + " " + e.api;
        auto it = found.find({e.file, e.line, e.api});
        if (it == found.end()) {
            result.problems.push_back("missing site " + where);
            continue;
        }
        const SensitiveSite& site = *it->second;
        if (site.call.category != e.category) result.problems.push_back(where + ": wrong category");
        const CodeSlice both = backward_slice(graph, site, SliceMode::Both, options);
        const CodeSlice data = backward_slice(graph, site, SliceMode::Data, options);
        const CodeSlice control = backward_slice(graph, site, SliceMode::Control, options);
        const auto kb = statement_keys(both), kd = statement_keys(data), kc = statement_keys(control);
        if (kb != e.both) result.problems.push_back(where + " both: got " + join(kb) + " want " + join(e.both));
        if (kd != e.data) result.problems.push_back(where + " data: got " + join(kd) + " want " + join(e.data));
        if (kc != e.control) result.problems.push_back(where + " control: got " + join(kc) + " want " + join(e.control));
        if (e.dynamic && !both.dynamic) result.problems.push_back(where + ": expected a dynamic slice");
        for (const auto& k : kd) {
            if (!kb.count(k)) result.monotone = false;
        }
        for (const auto& k : kc) {
            if (!kb.count(k)) result.monotone = false;
        }
        const auto nodes = slice_nodes(graph, site, SliceMode::Both, options, nullptr);
        for (const auto& v : closure_violations(graph, nodes)) result.problems.push_back(where + ": not closed over " + v);
        const auto violations = validate_slice(both);
        for (const auto& v : violations) result.problems.push_back(where + ": " + v);
    }
    if (!result.monotone) result.problems.push_back("monotonicity violated");
    return result;
}

}  // namespace intelguard::testing

namespace intelguard::testing {

PlantedData planted_clusters(unsigned seed, std::size_t groups, std::size_t per_group, std::size_t dim,
                             double spread) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> normal;
    auto unit = [](std::vector<double> v) {
        double n = 0;
        for (double x : v) n += x * x;
        n = std::sqrt(n);
        for (double& x : v) x /= n;
        return v;
    };
    // Gram-Schmidt keeps the centers orthogonal, so between-group cosine
    // stays near zero.
    std::vector<std::vector<double>> centers;
    while (centers.size() < groups) {
        std::vector<double> c(dim);
        for (double& x : c) x = normal(rng);
        for (const auto& prev : centers) {
            double dot = 0;
            for (std::size_t i = 0; i < dim; ++i) dot += c[i] * prev[i];
            for (std::size_t i = 0; i < dim; ++i) c[i] -= dot * prev[i];
        }
        centers.push_back(unit(c));
    }
    PlantedData out;
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t m = 0; m < per_group; ++m) {
            std::vector<double> v(dim);
            for (std::size_t i = 0; i < dim; ++i) v[i] = centers[g][i] + spread / std::sqrt(double(dim)) * normal(rng);
            const auto u = unit(v);
            out.vectors.emplace_back(u.begin(), u.end());
            out.labels.push_back(static_cast<int>(g));
        }
    }
    std::vector<std::size_t> order(out.vectors.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    PlantedData shuffled;
    for (std::size_t i : order) {
        shuffled.vectors.push_back(out.vectors[i]);
        shuffled.labels.push_back(out.labels[i]);
    }
    for (std::size_t i = 0; i < shuffled.vectors.size(); ++i) {
        for (std::size_t j = i + 1; j < shuffled.vectors.size(); ++j) {
            double dot = 0;
            for (std::size_t k = 0; k < dim; ++k) dot += double(shuffled.vectors[i][k]) * shuffled.vectors[j][k];
            const double d = 1.0 - dot;
            if (shuffled.labels[i] == shuffled.labels[j]) {
                shuffled.max_within = std::max(shuffled.max_within, d);
            } else {
                shuffled.min_between = std::min(shuffled.min_between, d);
            }
        }
    }
    return shuffled;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> ca, cb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1;
        ca[a[i]] += 1;
        cb[b[i]] += 1;
    }
    auto pairs = [](double n) { return n * (n - 1) / 2; };
    double index = 0, sa = 0, sb = 0;
    for (const auto& [k, n] : joint) index += pairs(n);
    for (const auto& [k, n] : ca) sa += pairs(n);
    for (const auto& [k, n] : cb) sb += pairs(n);
    const double total = pairs(static_cast<double>(a.size()));
    const double expected = sa * sb / total;
    const double max_index = (sa + sb) / 2;
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

}  // namespace intelguard::testing

namespace intelguard::testing {

KnowledgeEntry synthetic_entry(const std::string& id, Embedding code, Embedding behavior) {
    KnowledgeEntry e;
    e.id = id;
    e.snippet = "payload_" + id + "()";
    e.language = Language::Python;
    e.context = {Trigger::Import, "__init__.py", "user"};
    e.behavior = "synthetic behavior " + id;
    e.reasoning.why_suspicious = "synthetic";
    e.reasoning.violated_expectations = {{ViolationType::DataFlow, "synthetic statement"}};
    e.reasoning.boundary_distinction = "synthetic boundary";
    e.code_embedding = std::move(code);
    e.behavior_embedding = std::move(behavior);
    e.source_report = "synthetic";
    e.audit = AuditStatus::AutoValidated;
    return e;
}

Embedding random_query(std::mt19937& rng, std::size_t dim) {
    std::uniform_int_distribution<int> coarse(-2, 2);
    std::vector<double> v(dim);
    double n = 0;
    do {
        n = 0;
        for (double& x : v) {
            x = coarse(rng);
            n += x * x;
        }
    } while (n == 0);
    Embedding out;
    for (double x : v) out.push_back(static_cast<float>(x / std::sqrt(n)));
    return out;
}

KnowledgeBase random_kb(unsigned seed, std::size_t n, std::size_t code_dim, std::size_t behavior_dim) {
    std::mt19937 rng(seed);
    KnowledgeBase kb(EmbedderIdentity{"synthetic", "1", code_dim, behavior_dim}, "2024-01-01T00:00:00Z");
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    Embedding prev_code, prev_behav;
    for (std::size_t i = 0; i < n; ++i) {
        Embedding code = random_query(rng, code_dim);
        Embedding behav = random_query(rng, behavior_dim);
        // Every fifth row repeats its predecessor, forcing exact ties.
        if (i % 5 == 4) {
            code = prev_code;
            behav = prev_behav;
        }
        prev_code = code;
        prev_behav = behav;
        char id[32];
        std::snprintf(id, sizeof(id), "kb%u-%05zu", seed, ids[i]);
        kb.upsert_entry(synthetic_entry(id, code, behav));
    }
    return kb;
}

std::vector<SimilarityScore> brute_force_topk(const KnowledgeBase& kb, const Embedding& code_query,
                                              const Embedding& behavior_query, std::size_t k, double alpha,
                                              double beta) {
    auto cos = [](const Embedding& a, const Embedding& b) {
        double dot = 0, na = 0, nb = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            dot += double(a[i]) * double(b[i]);
            na += double(a[i]) * double(a[i]);
            nb += double(b[i]) * double(b[i]);
        }
        return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
    };
    std::vector<SimilarityScore> all;
    const std::size_t dc = kb.header().embedder.code_dim, db = kb.header().embedder.behavior_dim;
    for (std::size_t row = 0; row < kb.size(); ++row) {
        // Read the matrices rather than the entries: this also checks the
        // row-alignment invariant.
        const Embedding code(kb.code_matrix().begin() + row * dc, kb.code_matrix().begin() + (row + 1) * dc);
        const Embedding behav(kb.behavior_matrix().begin() + row * db, kb.behavior_matrix().begin() + (row + 1) * db);
        SimilarityScore s{kb.entries()[row].id, cos(code_query, code), cos(behavior_query, behav), 0.0};
        s.sim_total = alpha * s.sim_code + beta * s.sim_behav;
        all.push_back(s);
    }
    std::sort(all.begin(), all.end(), [](const SimilarityScore& a, const SimilarityScore& b) {
        return std::tie(b.sim_total, a.entry_id) < std::tie(a.sim_total, b.entry_id);
    });
    if (all.size() > k) all.resize(k);
    return all;
}

}  // namespace intelguard::testing

namespace intelguard::testing {

const KbBuildResult& fixture_kb() {
    static const KbBuildResult result = [] {
        std::vector<ReportDocument> docs;
        for (const auto& item : load_report_manifest(fixture_path("reports/manifest.json"))) {
            docs.push_back(load_report_document(item));
        }
        MockProvider mock;
        FallbackEmbedder embedder;
        return build_knowledge_base(std::move(docs), mock, embedder, {"2024-01-01T00:00:00Z", true});
    }();
    return result;
}

std::vector<std::string> e2e_packages(const std::string& group) {
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(fixture_path("e2e/" + group))) {
        if (entry.is_directory()) out.push_back(entry.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace intelguard::testing
