#pragma once

// Per-file statement IR produced by the language frontends and consumed by
// the program-graph builder. Statement order is textual order.

#include <optional>
#include <string>
#include <vector>

#include "intelguard/core_model.hpp"

namespace intelguard::frontend {

enum class StmtKind { Simple, Def, Class, If, Elif, Else, While, For, Try, Except, Finally, With, Switch, Return, Import };

struct Call {
    std::vector<std::string> chain;  // dotted callee, e.g. {"os", "system"}
    std::string module_receiver;     // require('m').x() / __import__('m').x(): "m"
    bool computed = false;           // callee is the value of an arbitrary expression
    bool on_expression = false;      // expr().name(...): chain holds {"name"}
    bool is_new = false;
    std::vector<std::vector<std::string>> arg_refs;  // arguments that are bare (dotted) names
};

struct Import {
    std::string local;   // bound name
    std::string module;  // as written, without relative dots
    std::string member;  // empty: the module object itself
    int level = 0;       // Python relative-import dots; JS "./x" counts as 1
};

struct Statement {
    int line = 0;
    StmtKind kind = StmtKind::Simple;
    int block = 0;        // block the statement lives in
    int body_block = -1;  // Def/Class: the block of the body

    std::vector<std::string> decls;      // names declared local to the statement's scope
    std::vector<std::string> defs;       // strong definitions
    std::vector<std::string> weak_defs;  // a.b = .., a[i] = .., x += ..
    std::vector<std::string> uses;
    std::vector<Call> calls;
    std::vector<Import> imports;
    std::vector<std::string> globals;  // Python global / nonlocal names

    // NAME = a.b.c with a pure dotted right-hand side.
    std::optional<std::vector<std::string>> alias_of;

    std::string def_name;             // Def/Class; JS exports.NAME = function
    std::vector<std::string> params;  // Def: declared in body_block's scope
    bool exported = false;            // Def: exported/public function
    bool is_return = false;

    // Header statements whose controller is not the enclosing block's
    // (elif/else/except point at the preceding header).
    std::optional<int> control_override;
};

enum class BlockKind { Root, Function, Class, Body };

struct Block {
    int parent = -1;
    BlockKind kind = BlockKind::Root;
    int header = -1;           // statement owning the block
    int control = -1;          // statement controlling members directly in this block
    bool inherit_control = false;
    bool loop = false;
    int chain = -1;   // if/elif/else chain id
    int branch = -1;  // branch index inside the chain
    std::vector<std::string> params;  // Function: parameters, defined by `header`
};

struct File {
    std::string path;
    Language language = Language::Other;
    std::vector<std::string> lines;  // physical lines, 1-based line n is lines[n-1]
    std::vector<Statement> statements;
    std::vector<Block> blocks;  // blocks[0] is the module root
    bool opaque = false;
    std::string opaque_reason;
    std::vector<std::string> exported_names;  // JS export lists, module.exports = {..}
};

/// Long lines or a very high mean line length mark minified code.
bool looks_minified(const std::vector<std::string>& lines);

/// Never throws; failures yield an opaque file.
File parse_python(const std::string& path, const std::string& source);
File parse_javascript(const std::string& path, const std::string& source);

}  // namespace intelguard::frontend
