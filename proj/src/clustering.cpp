#include "intelguard/clustering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string_view>
#include <utility>

#include "intelguard/embedding.hpp"
#include "intelguard/error.hpp"
#include "intelguard/text_util.hpp"

namespace intelguard {

namespace {

double cosine_distance(const Embedding& a, const Embedding& b) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return std::clamp(1.0 - dot, 0.0, 2.0);
}

std::vector<Embedding> unit_copies(std::span<const Embedding> vectors) {
    const std::size_t dim = vectors.front().size();
    std::vector<Embedding> out;
    out.reserve(vectors.size());
    for (const auto& v : vectors) {
        if (v.size() != dim) throw InputError("cluster_level: dimension mismatch");
        std::vector<double> d(v.begin(), v.end());
        out.push_back(normalized(d));
    }
    return out;
}

struct Merge {
    std::size_t left;
    std::size_t right;
    double distance;
    std::size_t size;
};

struct CondensedRow {
    std::size_t parent;
    std::size_t child;
    double lambda;
    std::size_t child_size;
};

double lambda_of(double distance) { return 1.0 / std::max(distance, 1e-12); }

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void link(std::size_t child, std::size_t root) { parent_[find(child)] = find(root); }

private:
    std::vector<std::size_t> parent_;
};

std::vector<double> core_distances(const std::vector<Embedding>& pts, std::size_t min_samples) {
    const std::size_t n = pts.size();
    const std::size_t k = std::clamp<std::size_t>(min_samples, 1, n);
    std::vector<double> core(n);
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) row[j] = (i == j) ? 0.0 : cosine_distance(pts[i], pts[j]);
        std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
        core[i] = row[k - 1];
    }
    return core;
}

// Prim's algorithm over the dense mutual-reachability graph.
std::vector<std::tuple<double, std::size_t, std::size_t>> mst_edges(const std::vector<Embedding>& pts,
                                                                     const std::vector<double>& core) {
    const std::size_t n = pts.size();
    std::vector<bool> in_tree(n, false);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> from(n, 0);
    std::vector<std::tuple<double, std::size_t, std::size_t>> edges;
    edges.reserve(n - 1);
    std::size_t current = 0;
    in_tree[0] = true;
    for (std::size_t step = 1; step < n; ++step) {
        std::size_t next = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (in_tree[j]) continue;
            const double mr = std::max({core[current], core[j], cosine_distance(pts[current], pts[j])});
            if (mr < best[j]) {
                best[j] = mr;
                from[j] = current;
            }
            if (next == n || best[j] < best[next]) next = j;
        }
        in_tree[next] = true;
        edges.emplace_back(best[next], std::min(from[next], next), std::max(from[next], next));
        current = next;
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

std::vector<Merge> single_linkage(std::size_t n, const std::vector<std::tuple<double, std::size_t, std::size_t>>& edges) {
    UnionFind uf(2 * n);
    std::vector<std::size_t> size(2 * n, 1);
    std::vector<Merge> merges;
    merges.reserve(n - 1);
    std::size_t next = n;
    for (const auto& [d, a, b] : edges) {
        const std::size_t ra = uf.find(a);
        const std::size_t rb = uf.find(b);
        merges.push_back({ra, rb, d, size[ra] + size[rb]});
        size[next] = size[ra] + size[rb];
        uf.link(ra, next);
        uf.link(rb, next);
        ++next;
    }
    return merges;
}

std::size_t node_size(std::size_t node, std::size_t n, const std::vector<Merge>& merges) {
    return node < n ? 1 : merges[node - n].size;
}

void collect_leaves(std::size_t node, std::size_t n, const std::vector<Merge>& merges, std::vector<std::size_t>& out) {
    std::vector<std::size_t> stack{node};
    while (!stack.empty()) {
        const std::size_t x = stack.back();
        stack.pop_back();
        if (x < n) {
            out.push_back(x);
        } else {
            stack.push_back(merges[x - n].right);
            stack.push_back(merges[x - n].left);
        }
    }
}

std::vector<CondensedRow> condense(std::size_t n, const std::vector<Merge>& merges, std::size_t min_cluster_size) {
    std::vector<CondensedRow> rows;
    const std::size_t root = 2 * n - 2;
    std::vector<std::size_t> relabel(2 * n - 1, 0);
    relabel[root] = n;
    std::size_t next_label = n + 1;

    // Breadth-first over internal nodes; nodes whose points were already
    // emitted are never enqueued.
    std::vector<std::size_t> queue{root};
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        const std::size_t node = queue[qi];
        const Merge& m = merges[node - n];
        const double lambda = lambda_of(m.distance);
        const std::size_t left_size = node_size(m.left, n, merges);
        const std::size_t right_size = node_size(m.right, n, merges);
        const bool left_big = left_size >= min_cluster_size;
        const bool right_big = right_size >= min_cluster_size;

        auto emit_points = [&](std::size_t sub) {
            std::vector<std::size_t> pts;
            collect_leaves(sub, n, merges, pts);
            for (std::size_t p : pts) rows.push_back({relabel[node], p, lambda, 1});
        };
        auto descend = [&](std::size_t child) {
            if (child >= n) queue.push_back(child);
        };

        if (left_big && right_big) {
            relabel[m.left] = next_label++;
            rows.push_back({relabel[node], relabel[m.left], lambda, left_size});
            relabel[m.right] = next_label++;
            rows.push_back({relabel[node], relabel[m.right], lambda, right_size});
            descend(m.left);
            descend(m.right);
        } else if (!left_big && !right_big) {
            emit_points(m.left);
            emit_points(m.right);
        } else if (!left_big) {
            relabel[m.right] = relabel[node];
            emit_points(m.left);
            descend(m.right);
        } else {
            relabel[m.left] = relabel[node];
            emit_points(m.right);
            descend(m.left);
        }
    }
    return rows;
}

std::vector<int> select_and_label(std::size_t n, const std::vector<CondensedRow>& rows, const HdbscanParams& params) {
    std::vector<int> labels(n, -1);
    if (rows.empty()) return labels;

    const std::size_t root = n;
    std::size_t max_label = root;
    for (const auto& r : rows) max_label = std::max({max_label, r.parent, r.child});
    const std::size_t count = max_label + 1;

    std::vector<double> birth(count, 0.0);
    std::vector<std::size_t> parent_of(count, count);
    std::vector<std::vector<std::size_t>> children(count);
    std::vector<bool> is_cluster_node(count, false);
    is_cluster_node[root] = true;
    for (const auto& r : rows) {
        if (r.child_size > 1 || r.child >= n) {
            birth[r.child] = r.lambda;
            parent_of[r.child] = r.parent;
            children[r.parent].push_back(r.child);
            is_cluster_node[r.child] = true;
        }
    }

    std::vector<double> stability(count, 0.0);
    for (const auto& r : rows) stability[r.parent] += (r.lambda - birth[r.parent]) * static_cast<double>(r.child_size);

    // Excess of mass, children before parents (labels grow with depth).
    std::vector<bool> selected(count, false);
    for (std::size_t c = count; c-- > root + 1;) {
        if (!is_cluster_node[c]) continue;
        double subtree = 0.0;
        for (std::size_t ch : children[c]) subtree += stability[ch];
        if (subtree > stability[c]) {
            selected[c] = false;
            stability[c] = subtree;
        } else {
            selected[c] = true;
            std::vector<std::size_t> stack(children[c].begin(), children[c].end());
            while (!stack.empty()) {
                const std::size_t x = stack.back();
                stack.pop_back();
                selected[x] = false;
                stack.insert(stack.end(), children[x].begin(), children[x].end());
            }
        }
    }

    if (params.epsilon > 0.0) {
        std::vector<bool> merged(count, false);
        std::vector<bool> processed(count, false);
        for (std::size_t c = root + 1; c < count; ++c) {
            if (!selected[c]) continue;
            if (1.0 / birth[c] >= params.epsilon) {
                merged[c] = true;
                continue;
            }
            if (processed[c]) continue;
            std::size_t node = c;
            while (true) {
                const std::size_t p = parent_of[node];
                if (p == root) break;
                if (1.0 / birth[p] > params.epsilon) {
                    node = p;
                    break;
                }
                node = p;
            }
            merged[node] = true;
            std::vector<std::size_t> stack(children[node].begin(), children[node].end());
            while (!stack.empty()) {
                const std::size_t x = stack.back();
                stack.pop_back();
                processed[x] = true;
                stack.insert(stack.end(), children[x].begin(), children[x].end());
            }
        }
        // Drop selections nested under another selection.
        for (std::size_t c = root + 1; c < count; ++c) {
            if (!merged[c]) continue;
            for (std::size_t p = parent_of[c]; p != count && p != root; p = parent_of[p]) {
                if (merged[p]) {
                    merged[c] = false;
                    break;
                }
            }
        }
        selected = std::move(merged);
    }

    // Each point joins the nearest selected ancestor of the node it left.
    std::vector<int> raw(n, -1);
    for (const auto& r : rows) {
        if (r.child >= n) continue;
        for (std::size_t c = r.parent; c != count && c != root; c = parent_of[c]) {
            if (selected[c]) {
                raw[r.child] = static_cast<int>(c);
                break;
            }
        }
    }

    std::map<int, int> renumber;
    for (std::size_t i = 0; i < n; ++i) {
        if (raw[i] < 0) continue;
        auto [it, inserted] = renumber.emplace(raw[i], static_cast<int>(renumber.size()));
        labels[i] = it->second;
    }
    return labels;
}

// Keyword stems per predicate; matched case-insensitively against the
// whole reasoning chain.
struct PredicateKeywords {
    std::string_view label;
    std::array<std::string_view, 8> stems;
};

constexpr std::array<PredicateKeywords, 8> kPredicateKeywords{{
    {"anti-analysis", {"evade", "evasion", "obfuscat", "sandbox", "anti-analysis", "anti-debug", "conceal", "hide"}},
    {"backdoor", {"backdoor", "remote access", "c2 ", "command-and-control", "command and control", "reverse shell",
                  "c2.", "c2,"}},
    {"code injection", {"inject", "eval", "function constructor", "function()", "as code", "dynamic code",
                        "dynamically constructed code", "code execution"}},
    {"command execution", {"command execution", "shell", "spawn", "subprocess", "child_process", "execute command",
                           "runs command", "system command"}},
    {"credential theft", {"credential", "password", "token", "ssh key", "cookie", "secret", "wallet", "keychain"}},
    {"data exfiltration", {"exfiltrat", "send data", "sends", "upload", "transmit", "leak", "external domain",
                           "external server"}},
    {"dropper", {"download", "dropper", "drops ", "fetches", "fetched", "second-stage", "second stage", "payload from"}},
    {"persistence", {"persist", "startup", "cron", "registry", "autorun", "launch agent", "bashrc", "scheduled task"}},
}};

}  // namespace

std::vector<int> cluster_level(std::span<const Embedding> vectors, const HdbscanParams& params) {
    if (vectors.empty()) throw InputError("cluster_level: no vectors");
    if (params.min_cluster_size < 2) throw ConfigError("cluster_level: min_cluster_size must be >= 2");
    const auto pts = unit_copies(vectors);
    const std::size_t n = pts.size();
    if (n < params.min_cluster_size) return std::vector<int>(n, -1);

    const auto core = core_distances(pts, params.min_samples);
    const auto edges = mst_edges(pts, core);
    const auto merges = single_linkage(n, edges);
    const auto rows = condense(n, merges, params.min_cluster_size);
    return select_and_label(n, rows, params);
}

Embedding compute_centroid(std::span<const Embedding> members) {
    if (members.empty()) throw InputError("compute_centroid: no members");
    const std::size_t dim = members.front().size();
    std::vector<double> sum(dim, 0.0);
    for (const auto& m : members) {
        if (m.size() != dim) throw InputError("compute_centroid: dimension mismatch");
        for (std::size_t i = 0; i < dim; ++i) sum[i] += m[i];
    }
    double norm_sq = 0.0;
    for (double& x : sum) {
        x /= static_cast<double>(members.size());
        norm_sq += x * x;
    }
    if (std::sqrt(norm_sq) < 1e-9) throw DegenerateClusterError("compute_centroid: mean vector is zero");
    return normalized(sum);
}

std::string select_representative(std::span<const std::string> ids, std::span<const Embedding> embeddings,
                                  const Embedding& centroid) {
    if (ids.empty() || ids.size() != embeddings.size()) {
        throw InputError("select_representative: ids and embeddings must be non-empty and aligned");
    }
    std::size_t best = 0;
    double best_sim = cosine(embeddings[0], centroid);
    for (std::size_t i = 1; i < ids.size(); ++i) {
        const double sim = cosine(embeddings[i], centroid);
        if (sim > best_sim || (sim == best_sim && ids[i] < ids[best])) {
            best = i;
            best_sim = sim;
        }
    }
    return ids[best];
}

std::set<std::string> predicates_for(const ReasoningChain& reasoning) {
    std::string all = reasoning.why_suspicious + " " + reasoning.boundary_distinction + " ";
    for (const auto& v : reasoning.violated_expectations) all += v.statement + " ";
    all = text::to_lower(all);
    std::set<std::string> out;
    for (const auto& p : kPredicateKeywords) {
        for (auto stem : p.stems) {
            if (!stem.empty() && all.find(stem) != std::string::npos) {
                out.insert(std::string(p.label));
                break;
            }
        }
    }
    return out;
}

std::vector<std::string> vote_predicate_sets(std::span<const std::set<std::string>> member_predicates) {
    std::map<std::string, std::size_t> counts;
    for (const auto& s : member_predicates) {
        for (const auto& p : s) ++counts[p];
    }
    std::vector<std::string> out;
    for (const auto& [label, c] : counts) {
        if (2 * c > member_predicates.size()) out.push_back(label);
    }
    return out;  // std::map iteration is already sorted
}

std::vector<std::string> vote_predicates(std::span<const ReasoningChain> members) {
    std::vector<std::set<std::string>> sets;
    sets.reserve(members.size());
    for (const auto& m : members) sets.push_back(predicates_for(m));
    return vote_predicate_sets(sets);
}

KnowledgeClusters cluster_knowledge(std::span<const KnowledgeEntry> entries, const HdbscanParams& code_params,
                                    const HdbscanParams& behavior_params) {
    KnowledgeClusters out;
    if (entries.empty()) return out;

    std::vector<Embedding> code, behav;
    for (const auto& e : entries) {
        code.push_back(e.code_embedding);
        behav.push_back(e.behavior_embedding);
    }
    const auto code_labels = cluster_level(code, code_params);
    const auto behav_labels = cluster_level(behav, behavior_params);

    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        out.code_labels[entries[i].id] = code_labels[i];
        out.behavior_labels[entries[i].id] = behav_labels[i];
        if (behav_labels[i] >= 0) groups[behav_labels[i]].push_back(i);
    }

    for (const auto& [label, idx] : groups) {
        BehaviorCluster cluster;
        cluster.cluster_id = label;
        std::vector<Embedding> member_vecs;
        std::vector<ReasoningChain> chains;
        for (std::size_t i : idx) {
            cluster.member_ids.push_back(entries[i].id);
            member_vecs.push_back(entries[i].behavior_embedding);
            chains.push_back(entries[i].reasoning);
        }
        cluster.centroid = compute_centroid(member_vecs);
        cluster.representative_id = select_representative(cluster.member_ids, member_vecs, cluster.centroid);
        cluster.voted_predicates = vote_predicates(chains);

        const auto rep = std::find_if(entries.begin(), entries.end(),
                                      [&](const KnowledgeEntry& e) { return e.id == cluster.representative_id; });
        std::string predicates;
        for (const auto& p : cluster.voted_predicates) predicates += (predicates.empty() ? "" : ", ") + p;
        cluster.unified_explanation =
            rep->reasoning.why_suspicious + " Voted predicates: " + (predicates.empty() ? "none" : predicates) + ".";
        out.behavior_clusters.push_back(std::move(cluster));
    }
    return out;
}

}  // namespace intelguard
