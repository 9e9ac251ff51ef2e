#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "intelguard/catalogue.hpp"
#include "intelguard/error.hpp"
#include "intelguard/slicer.hpp"

namespace intelguard {

namespace {

struct Adjacency {
    std::vector<std::vector<int>> data_preds;
    std::vector<std::vector<int>> control_preds;
    std::vector<std::vector<int>> callers;  // by callee header

    explicit Adjacency(const ProgramGraph& g) {
        const std::size_t n = g.nodes.size();
        data_preds.resize(n);
        control_preds.resize(n);
        callers.resize(n);
        for (const auto& e : g.data_edges) data_preds[static_cast<std::size_t>(e.to)].push_back(e.from);
        for (const auto& e : g.control_edges) control_preds[static_cast<std::size_t>(e.to)].push_back(e.from);
        for (const auto& e : g.call_edges) callers[static_cast<std::size_t>(e.callee)].push_back(e.caller);
        for (auto* lists : {&data_preds, &control_preds, &callers}) {
            for (auto& v : *lists) {
                std::sort(v.begin(), v.end());
                v.erase(std::unique(v.begin(), v.end()), v.end());
            }
        }
    }
};

struct SliceRun {
    std::vector<char> included;
    std::vector<int> roots;  // at the nearest hop level
    bool truncated = false;
    SourceLocation entry;
};

class Slicer {
public:
    Slicer(const ProgramGraph& g, SliceMode mode, std::size_t max_statements)
        : g_(g), adj_(g), mode_(mode), max_(max_statements) {
        run_.included.assign(g.nodes.size(), 0);
    }

    SliceRun run(int site) {
        add(site);
        close();
        walk(site, 0);
        int best = -1;
        for (const auto& [hop, node] : roots_) {
            if (best < 0 || hop < best) best = hop;
        }
        std::set<std::pair<std::string, int>> nearest;
        for (const auto& [hop, node] : roots_) {
            if (hop != best) continue;
            run_.roots.push_back(node);
            const auto& n = g_.nodes[static_cast<std::size_t>(node)];
            nearest.insert({n.file, n.line});
        }
        if (!nearest.empty()) run_.entry = {nearest.begin()->first, nearest.begin()->second};
        all_roots_.clear();
        for (const auto& [hop, node] : roots_) all_roots_.push_back(node);
        return run_;
    }

    const std::vector<int>& all_roots() const { return all_roots_; }

private:
    const GraphNode& node(int id) const { return g_.nodes[static_cast<std::size_t>(id)]; }

    void add(int id) {
        if (run_.included[static_cast<std::size_t>(id)]) return;
        const auto key = std::make_pair(node(id).file, node(id).line);
        if (!lines_.count(key)) {
            if (lines_.size() >= max_) {
                run_.truncated = true;
                return;
            }
            lines_.insert(key);
        }
        run_.included[static_cast<std::size_t>(id)] = 1;
        queue_.push_back(id);
    }

    // Backward closure of everything queued. Enclosing function and class
    // headers always come along.
    void close() {
        while (!queue_.empty()) {
            const int id = queue_.front();
            queue_.pop_front();
            const auto i = static_cast<std::size_t>(id);
            if (mode_ != SliceMode::Control) {
                for (int p : adj_.data_preds[i]) add(p);
            }
            if (mode_ != SliceMode::Data) {
                for (int p : adj_.control_preds[i]) add(p);
            }
            if (node(id).owner >= 0) add(node(id).owner);
        }
    }

    // Follows call edges from the function enclosing `from` back to roots.
    void walk(int from, int hop) {
        const int header = node(from).function;
        if (header < 0) {
            roots_.insert({hop, from});
            return;
        }
        if (!visited_.insert(header).second) return;
        const auto& callers = adj_.callers[static_cast<std::size_t>(header)];
        if (!callers.empty()) {
            for (int c : callers) {
                add(c);
                close();
                walk(c, hop + 1);
            }
            return;
        }
        if (!node(header).function_name.empty()) {
            roots_.insert({hop, header});
            return;
        }
        // An anonymous function runs wherever its defining statement does.
        walk(header, hop);
    }

    const ProgramGraph& g_;
    Adjacency adj_;
    SliceMode mode_;
    std::size_t max_;
    SliceRun run_;
    std::deque<int> queue_;
    std::set<std::pair<std::string, int>> lines_;
    std::set<int> visited_;
    std::set<std::pair<int, int>> roots_;
    std::vector<int> all_roots_;
};

void check_site(const ProgramGraph& graph, const SensitiveSite& site) {
    if (site.node < 0 || static_cast<std::size_t>(site.node) >= graph.nodes.size() ||
        site.call_index >= graph.nodes[static_cast<std::size_t>(site.node)].calls.size()) {
        throw InputError("sensitive site " + site.call.file + ":" + std::to_string(site.call.line) +
                         " is not a call of the graph");
    }
}

void sort_unique(std::vector<ApiCategory>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

std::vector<SensitiveSite> locate_sensitive_calls(const ProgramGraph& graph, const SensitiveApiCatalogue& catalogue) {
    std::vector<SensitiveSite> sites;
    for (std::size_t n = 0; n < graph.nodes.size(); ++n) {
        const GraphNode& node = graph.nodes[n];
        for (std::size_t c = 0; c < node.calls.size(); ++c) {
            const ResolvedCall& call = node.calls[c];
            SensitiveSite site;
            site.node = static_cast<int>(n);
            site.call_index = c;
            site.call.file = node.file;
            site.call.line = node.line;
            if (!call.target.empty()) {
                if (auto m = match_call(catalogue, call.target, node.language)) {
                    site.call.api_name = call.target;
                    site.call.category = m->category;
                    site.categories = {m->category};
                    sites.push_back(std::move(site));
                    continue;
                }
            }
            // Catalogued modules or functions handed to other code.
            std::string joined;
            for (const auto& arg : call.arg_targets) {
                if (arg.empty()) continue;
                auto m = match_reference(catalogue, arg, node.language);
                if (!m) continue;
                if (site.categories.empty()) site.call.category = m->category;
                site.categories.push_back(m->category);
                joined += (joined.empty() ? "" : "+") + arg;
            }
            if (!site.categories.empty()) {
                site.call.api_name = joined;
                sort_unique(site.categories);
                sites.push_back(std::move(site));
            }
        }
    }
    return sites;
}

std::vector<int> slice_nodes(const ProgramGraph& graph, const SensitiveSite& site, SliceMode mode,
                             const SliceOptions& options, bool* truncated) {
    check_site(graph, site);
    Slicer slicer(graph, mode, options.max_statements);
    const SliceRun run = slicer.run(site.node);
    if (truncated) *truncated = run.truncated;
    std::vector<int> out;
    for (std::size_t i = 0; i < run.included.size(); ++i) {
        if (run.included[i]) out.push_back(static_cast<int>(i));
    }
    return out;
}

CodeSlice backward_slice(const ProgramGraph& graph, const SensitiveSite& site, SliceMode mode,
                         const SliceOptions& options) {
    check_site(graph, site);
    Slicer slicer(graph, mode, options.max_statements);
    const SliceRun run = slicer.run(site.node);

    CodeSlice slice;
    slice.package_id = graph.package_id;
    slice.entry_point = run.entry;
    slice.sensitive_call = site.call;
    slice.truncated = run.truncated;
    slice.categories = site.categories;

    std::map<std::pair<std::string, int>, std::string> lines;
    for (std::size_t i = 0; i < run.included.size(); ++i) {
        if (!run.included[i]) continue;
        const GraphNode& n = graph.nodes[i];
        lines.emplace(std::make_pair(n.file, n.line), n.text);
        slice.dynamic = slice.dynamic || n.dynamic;
        slice.low_confidence = slice.low_confidence || n.low_confidence;
    }
    for (const auto& [key, text] : lines) slice.statements.push_back({key.first, key.second, text});
    for (const auto& other : options.sites) {
        if (other.node >= 0 && static_cast<std::size_t>(other.node) < run.included.size() &&
            run.included[static_cast<std::size_t>(other.node)]) {
            slice.categories.insert(slice.categories.end(), other.categories.begin(), other.categories.end());
        }
    }
    sort_unique(slice.categories);

    bool install = false;
    bool import_time = false;
    for (int r : slicer.all_roots()) {
        const GraphNode& n = graph.nodes[static_cast<std::size_t>(r)];
        if (std::find(graph.install_hooks.begin(), graph.install_hooks.end(), n.file) != graph.install_hooks.end()) {
            install = true;
        }
        if (n.module_level) import_time = true;
    }
    slice.trigger = install ? Trigger::Install : import_time ? Trigger::Import : Trigger::Runtime;
    return slice;
}

PackageSlices slice_package(const PackageSource& pkg, const SensitiveApiCatalogue& catalogue,
                            std::size_t max_statements) {
    PackageSlices out;
    out.graph = build_program_graph(pkg);
    out.sites = locate_sensitive_calls(out.graph, catalogue);
    SliceOptions options;
    options.max_statements = max_statements;
    options.sites = out.sites;
    for (const auto& site : out.sites) {
        out.slices.push_back(backward_slice(out.graph, site, SliceMode::Both, options));
    }
    return out;
}

std::string slice_source(const CodeSlice& slice) {
    std::string out;
    for (const auto& st : slice.statements) out += st.text + "\n";
    return out;
}

std::string render_slice(const CodeSlice& slice) {
    std::string out;
    for (const auto& st : slice.statements) out += st.file + ":" + std::to_string(st.line) + ": " + st.text + "\n";
    return out;
}

}  // namespace intelguard
