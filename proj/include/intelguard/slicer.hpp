#pragma once

/**
 * @file slicer.hpp
 * @brief Program graphs, sensitive call sites and backward slices.
 *
 * Nodes are statements; a statement spanning several lines is keyed by its
 * first line. Python lines holding several `;`-separated statements yield
 * several nodes on the same line, and slices deduplicate by (file, line).
 *
 * Resolution is name based. Imports are followed into the package's own
 * files; everything else resolves to a dotted path such as "os.system" or
 * "child_process.exec". Unbound names become "builtins.<name>" (Python) or
 * "global.<name>" (JavaScript).
 */

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "intelguard/core_model.hpp"
#include "intelguard/package_source.hpp"

namespace intelguard {

struct ResolvedCall {
    std::string target;  // dotted path; empty when unresolved
    std::vector<int> callees;  // header nodes of package functions
    std::vector<std::string> arg_targets;  // resolved bare-name arguments, "" when not a path
    bool dynamic = false;
    bool low_confidence = false;
};

struct GraphNode {
    std::string file;
    int line = 0;
    std::string kind;  // "simple", "def", "if", ..., "opaque"
    std::string text;  // first source line, trimmed
    Language language = Language::Other;
    bool module_level = false;
    int function = -1;  // header node of the innermost enclosing function
    int owner = -1;     // header node of the innermost enclosing function or class
    bool function_header = false;  // the statement defines a function body
    std::string function_name;     // empty for anonymous functions
    bool dynamic = false;
    bool low_confidence = false;
    bool opaque = false;
    std::vector<ResolvedCall> calls;
};

struct DataEdge {
    int from = 0;
    int to = 0;
    std::string variable;  // "<return>" for callee return values

    auto operator<=>(const DataEdge&) const = default;
};

struct ControlEdge {
    int from = 0;
    int to = 0;

    auto operator<=>(const ControlEdge&) const = default;
};

struct CallEdge {
    int caller = 0;  // node holding the call
    int callee = 0;  // header node of the called function
    bool low_confidence = false;

    auto operator<=>(const CallEdge&) const = default;
};

struct ProgramGraph {
    std::string package_id;
    std::vector<GraphNode> nodes;
    std::vector<DataEdge> data_edges;
    std::vector<ControlEdge> control_edges;
    std::vector<CallEdge> call_edges;
    std::vector<int> entry_points;  // sorted node ids
    std::vector<std::string> install_hooks;
    std::vector<std::string> unparsed_files;
};

/// Throws InputError when no file could be parsed. Unparseable or minified
/// files become one opaque node each and are listed in unparsed_files.
ProgramGraph build_program_graph(const PackageSource& pkg);

struct SensitiveSite {
    int node = 0;
    std::size_t call_index = 0;
    SensitiveCall call;
    std::vector<ApiCategory> categories;  // sorted, unique

    bool operator==(const SensitiveSite&) const = default;
};

/// Sites in node order. A call whose own target is not catalogued but which
/// receives catalogued modules or functions as arguments is a site too; its
/// api_name joins the argument targets with '+'.
std::vector<SensitiveSite> locate_sensitive_calls(const ProgramGraph& graph, const SensitiveApiCatalogue& catalogue);

enum class SliceMode { Data, Control, Both };

inline constexpr std::size_t kDefaultMaxStatements = 400;

struct SliceOptions {
    std::size_t max_statements = kDefaultMaxStatements;  // distinct (file, line) pairs
    std::span<const SensitiveSite> sites;  // all sites, for the slice's category set
};

/// Node ids in the slice, ascending. Throws InputError when the site is not
/// a call of the graph.
std::vector<int> slice_nodes(const ProgramGraph& graph, const SensitiveSite& site, SliceMode mode,
                             const SliceOptions& options = {}, bool* truncated = nullptr);

CodeSlice backward_slice(const ProgramGraph& graph, const SensitiveSite& site, SliceMode mode,
                         const SliceOptions& options = {});

struct PackageSlices {
    ProgramGraph graph;
    std::vector<SensitiveSite> sites;
    std::vector<CodeSlice> slices;  // one per site, mode both
};

PackageSlices slice_package(const PackageSource& pkg, const SensitiveApiCatalogue& catalogue,
                            std::size_t max_statements = kDefaultMaxStatements);

/// Statement texts, one per line. This is what gets embedded, so it carries
/// no file names or line numbers.
std::string slice_source(const CodeSlice& slice);

/// "file:line: text" per statement, for prompts and reports.
std::string render_slice(const CodeSlice& slice);

}  // namespace intelguard
