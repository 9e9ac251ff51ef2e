#include <algorithm>
#include <map>
#include <set>
#include <string_view>

#include "frontend.hpp"
#include "intelguard/error.hpp"
#include "intelguard/log.hpp"
#include "intelguard/slicer.hpp"
#include "intelguard/text_util.hpp"

namespace intelguard {

namespace {

using frontend::Block;
using frontend::BlockKind;
using frontend::File;
using frontend::Import;
using frontend::Statement;
using frontend::StmtKind;

constexpr int kMaxAliasDepth = 8;

const std::set<std::string, std::less<>> kDynamicTargets{
    "builtins.eval",     "builtins.exec", "builtins.compile", "builtins.getattr", "builtins.__import__",
    "global.eval",       "global.Function", "importlib.import_module",
};

std::string_view kind_name(StmtKind kind) {
    switch (kind) {
        case StmtKind::Simple: return "simple";
        case StmtKind::Def: return "def";
        case StmtKind::Class: return "class";
        case StmtKind::If: return "if";
        case StmtKind::Elif: return "elif";
        case StmtKind::Else: return "else";
        case StmtKind::While: return "while";
        case StmtKind::For: return "for";
        case StmtKind::Try: return "try";
        case StmtKind::Except: return "except";
        case StmtKind::Finally: return "finally";
        case StmtKind::With: return "with";
        case StmtKind::Switch: return "switch";
        case StmtKind::Return: return "return";
        case StmtKind::Import: return "import";
    }
    return "simple";
}

std::string join(const std::vector<std::string>& parts, std::size_t from = 0) {
    std::string out;
    for (std::size_t i = from; i < parts.size(); ++i) {
        if (!out.empty()) out += '.';
        out += parts[i];
    }
    return out;
}

std::string dirname(const std::string& path) {
    const auto slash = path.rfind('/');
    return slash == std::string::npos ? "" : path.substr(0, slash);
}

// Joins and normalises '/'-separated segments, resolving "." and "..".
std::string normalize_path(const std::string& path) {
    std::vector<std::string> out;
    for (const auto& part : text::split(path, '/')) {
        if (part.empty() || part == ".") continue;
        if (part == "..") {
            if (!out.empty()) out.pop_back();
            continue;
        }
        out.push_back(part);
    }
    std::string s;
    for (const auto& p : out) s += (s.empty() ? "" : "/") + p;
    return s;
}

struct Binding {
    int stmt = 0;
    bool strong = true;
    bool param = false;  // defined by the function header, positioned in the body
};

struct Resolution {
    enum Kind { None, Path, Functions, Variable } kind = None;
    std::string path;
    std::vector<int> functions;  // node ids
    bool low = false;
};

struct FileInfo {
    File file;
    int base = 0;
    std::vector<int> scope_of_block;
    std::map<int, std::set<std::string>> declared;
    std::map<int, std::set<std::string>> globals;
    std::map<std::pair<int, std::string>, std::vector<Binding>> defs;
    std::vector<int> function_block;  // stmt -> Function block it heads, -1 otherwise
    std::vector<int> loop_body;       // stmt -> loop body block it heads, -1 otherwise
    std::vector<std::string> function_name;  // stmt -> name when it heads a named function
    std::map<std::string, std::vector<int>> module_functions;  // name -> stmt
    std::vector<Import> star_imports;

    const Statement& stmt(int i) const { return file.statements[static_cast<std::size_t>(i)]; }
    const Block& block(int b) const { return file.blocks[static_cast<std::size_t>(b)]; }
    int scope(int block_id) const { return scope_of_block[static_cast<std::size_t>(block_id)]; }
    int stmt_scope(int i) const { return scope(stmt(i).block); }

    int enclosing_scope(int scope_id) const {
        const int parent = block(scope_id).parent;
        return parent < 0 ? -1 : scope(parent);
    }

    bool python() const { return file.language == Language::Python; }

    // Scope that binds `name` as seen from `from`, or -1 when unbound.
    int lookup(int from, const std::string& name) const {
        if (python()) {
            if (auto g = globals.find(from); g != globals.end() && g->second.count(name)) {
                for (int s = enclosing_scope(from); s >= 0; s = enclosing_scope(s)) {
                    if (block(s).kind == BlockKind::Class) continue;
                    if (auto d = declared.find(s); d != declared.end() && d->second.count(name)) return s;
                }
                return 0;
            }
        }
        for (int s = from; s >= 0; s = enclosing_scope(s)) {
            if (python() && s != from && block(s).kind == BlockKind::Class) continue;
            if (auto d = declared.find(s); d != declared.end() && d->second.count(name)) return s;
        }
        return -1;
    }

    bool ancestor_or_self(int ancestor, int b) const {
        for (; b >= 0; b = block(b).parent) {
            if (b == ancestor) return true;
        }
        return false;
    }

    std::set<int> loops_of(int b) const {
        std::set<int> out;
        for (; b >= 0; b = block(b).parent) {
            if (block(b).loop) out.insert(b);
        }
        return out;
    }

    std::set<int> stmt_loops(int i) const {
        auto out = loops_of(stmt(i).block);
        if (loop_body[static_cast<std::size_t>(i)] >= 0) out.insert(loop_body[static_cast<std::size_t>(i)]);
        return out;
    }

    // Blocks in different branches of one if-chain never both run, unless a
    // loop around the chain carries the value to the next iteration.
    bool exclusive(int a, int b) const {
        for (int x = a; x >= 0; x = block(x).parent) {
            if (block(x).chain < 0) continue;
            for (int y = b; y >= 0; y = block(y).parent) {
                if (block(y).chain == block(x).chain && block(y).branch != block(x).branch) {
                    const auto la = loops_of(a);
                    for (int l : loops_of(b)) {
                        if (la.count(l)) return false;
                    }
                    return true;
                }
            }
        }
        return false;
    }
};

class GraphBuilder {
public:
    explicit GraphBuilder(const PackageSource& pkg) : pkg_(pkg) {}

    ProgramGraph build() {
        graph_.package_id = pkg_.package_id;
        graph_.install_hooks = pkg_.install_hooks;
        parse_files();
        for (auto& fi : files_) {
            if (!fi.file.opaque) prepare(fi);
        }
        for (const auto& fi : files_) {
            for (std::size_t i = 0; i < fi.file.statements.size(); ++i) {
                const int name_stmt = static_cast<int>(i);
                if (!fi.function_name[i].empty()) {
                    package_functions_[fi.function_name[i]].push_back(fi.base + name_stmt);
                }
            }
        }
        for (std::size_t f = 0; f < files_.size(); ++f) {
            if (!files_[f].file.opaque) emit(f);
        }
        finish();
        return std::move(graph_);
    }

private:
    void parse_files() {
        int next = 0;
        for (const auto& pf : pkg_.files) {
            FileInfo fi;
            if (pf.language == Language::Python) {
                fi.file = frontend::parse_python(pf.path, pf.text);
            } else if (pf.language == Language::JavaScript) {
                fi.file = frontend::parse_javascript(pf.path, pf.text);
            } else {
                continue;
            }
            fi.base = next;
            if (fi.file.opaque) {
                log::warn("slicer", "skipping " + pf.path + ": " + fi.file.opaque_reason);
                graph_.unparsed_files.push_back(pf.path);
                GraphNode node;
                node.file = pf.path;
                node.line = 1;
                node.kind = "opaque";
                node.text = fi.file.lines.empty() ? "" : text::trim(fi.file.lines[0]).substr(0, 160);
                node.language = pf.language;
                node.module_level = true;
                node.opaque = true;
                graph_.nodes.push_back(std::move(node));
                next += 1;
            } else {
                parsed_ = true;
                next += static_cast<int>(fi.file.statements.size());
                for (const auto& st : fi.file.statements) {
                    GraphNode node;
                    node.file = pf.path;
                    node.line = st.line;
                    node.kind = std::string(kind_name(st.kind));
                    const auto idx = static_cast<std::size_t>(st.line - 1);
                    node.text = idx < fi.file.lines.size() ? text::trim(fi.file.lines[idx]) : "";
                    node.language = pf.language;
                    graph_.nodes.push_back(std::move(node));
                }
            }
            path_to_file_[pf.path] = static_cast<int>(files_.size());
            files_.push_back(std::move(fi));
        }
        if (!parsed_) throw InputError("package " + pkg_.package_id + " has no parseable source file");
    }

    static void prepare(FileInfo& fi) {
        const auto& blocks = fi.file.blocks;
        const auto& stmts = fi.file.statements;
        fi.scope_of_block.resize(blocks.size());
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            fi.scope_of_block[b] = blocks[b].kind == BlockKind::Body ? fi.scope_of_block[static_cast<std::size_t>(blocks[b].parent)]
                                                                      : static_cast<int>(b);
        }
        fi.function_block.assign(stmts.size(), -1);
        fi.loop_body.assign(stmts.size(), -1);
        fi.function_name.assign(stmts.size(), "");
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            const int h = blocks[b].header;
            if (h < 0) continue;
            const auto hs = static_cast<std::size_t>(h);
            if (blocks[b].kind == BlockKind::Function && fi.function_block[hs] < 0) fi.function_block[hs] = static_cast<int>(b);
            if (blocks[b].loop && blocks[b].kind == BlockKind::Body) fi.loop_body[hs] = static_cast<int>(b);
        }
        for (std::size_t i = 0; i < stmts.size(); ++i) {
            const Statement& st = stmts[i];
            if (fi.function_block[i] < 0) continue;
            if (st.kind == StmtKind::Def || !st.def_name.empty()) {
                fi.function_name[i] = st.def_name;
            } else if (st.defs.size() == 1) {
                fi.function_name[i] = st.defs[0];
            }
            if (!fi.function_name[i].empty() && fi.scope(st.block) == 0) {
                fi.module_functions[fi.function_name[i]].push_back(static_cast<int>(i));
            }
        }

        // Declarations.
        for (const auto& st : stmts) {
            for (const auto& g : st.globals) fi.globals[fi.scope(st.block)].insert(g);
        }
        for (const auto& st : stmts) {
            const int s = fi.scope(st.block);
            auto declare = [&](const std::string& n) {
                if (!fi.globals[s].count(n)) fi.declared[s].insert(n);
            };
            for (const auto& n : st.decls) declare(n);
            if (fi.python()) {
                for (const auto& n : st.defs) declare(n);
            }
            for (const auto& imp : st.imports) {
                if (imp.local == "*") fi.star_imports.push_back(imp);
            }
        }
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            if (blocks[b].kind != BlockKind::Function) continue;
            for (const auto& p : blocks[b].params) fi.declared[static_cast<int>(b)].insert(p);
        }
        if (!fi.python()) {
            // Assignments to undeclared names create module-level bindings.
            for (const auto& st : stmts) {
                const int s = fi.scope(st.block);
                for (const auto* names : {&st.defs, &st.weak_defs}) {
                    for (const auto& n : *names) {
                        if (fi.lookup(s, n) < 0) fi.declared[0].insert(n);
                    }
                }
            }
        }

        // Definition sites.
        for (std::size_t i = 0; i < stmts.size(); ++i) {
            const Statement& st = stmts[i];
            const int s = fi.scope(st.block);
            std::set<std::string> seen;
            for (const auto& n : st.defs) {
                const int t = fi.lookup(s, n);
                if (t < 0 || !seen.insert(n).second) continue;
                const bool weak = std::find(st.weak_defs.begin(), st.weak_defs.end(), n) != st.weak_defs.end();
                fi.defs[{t, n}].push_back({static_cast<int>(i), !weak, false});
            }
            for (const auto& n : st.weak_defs) {
                const int t = fi.lookup(s, n);
                if (t < 0 || !seen.insert(n).second) continue;
                fi.defs[{t, n}].push_back({static_cast<int>(i), false, false});
            }
        }
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            if (blocks[b].kind != BlockKind::Function || blocks[b].header < 0) continue;
            for (const auto& p : blocks[b].params) {
                fi.defs[{static_cast<int>(b), p}].push_back({blocks[b].header, true, true});
            }
        }
    }

    // --- resolution --------------------------------------------------------

    int find_file(const std::string& path) const {
        auto it = path_to_file_.find(path);
        return it == path_to_file_.end() || files_[static_cast<std::size_t>(it->second)].file.opaque ? -1 : it->second;
    }

    // Package file implementing a module, or -1.
    int module_file(const FileInfo& fi, const std::string& module, int level) const {
        if (fi.python()) {
            std::vector<std::string> bases;
            if (level > 0) {
                std::string dir = dirname(fi.file.path);
                for (int up = 1; up < level; ++up) dir = dirname(dir);
                bases.push_back(dir);
            } else {
                bases = {"", "src", dirname(fi.file.path)};
            }
            std::string rel = module;
            std::replace(rel.begin(), rel.end(), '.', '/');
            for (const auto& b : bases) {
                const std::string p = normalize_path(b + "/" + rel);
                for (const auto& candidate : {p + ".py", normalize_path(p + "/__init__.py")}) {
                    if (rel.empty() && candidate == p + ".py") continue;
                    if (const int f = find_file(candidate); f >= 0) return f;
                }
            }
            return -1;
        }
        if (module.rfind('.', 0) != 0) return -1;
        const std::string p = normalize_path(dirname(fi.file.path) + "/" + module);
        for (const auto& candidate : {p, p + ".js", p + ".cjs", p + ".mjs", p + "/index.js"}) {
            if (const int f = find_file(candidate); f >= 0) return f;
        }
        return -1;
    }

    Resolution method_fallback(const std::string& name) const {
        Resolution r;
        auto it = package_functions_.find(name);
        if (it == package_functions_.end()) return r;
        r.kind = Resolution::Functions;
        r.functions = it->second;
        r.low = true;
        return r;
    }

    Resolution resolve_import(const FileInfo& fi, const Import& imp, const std::vector<std::string>& rest) const {
        int target = module_file(fi, imp.module, imp.level);
        std::string member = imp.member;
        if (fi.python() && !member.empty()) {
            // "from pkg import mod" may name a submodule.
            const std::string sub = imp.module.empty() ? member : imp.module + "." + member;
            if (const int f = module_file(fi, sub, imp.level); f >= 0) {
                target = f;
                member.clear();
            }
        }
        std::vector<std::string> names;
        if (!member.empty()) names.push_back(member);
        names.insert(names.end(), rest.begin(), rest.end());
        Resolution r;
        if (target >= 0) {
            const FileInfo& tf = files_[static_cast<std::size_t>(target)];
            if (names.size() == 1) {
                if (auto it = tf.module_functions.find(names[0]); it != tf.module_functions.end()) {
                    r.kind = Resolution::Functions;
                    for (int s : it->second) r.functions.push_back(tf.base + s);
                    return r;
                }
            }
            if (names.size() > 1) return method_fallback(names.back());
        }
        r.kind = Resolution::Path;
        r.path = imp.module;
        for (const auto& n : names) r.path += "." + n;
        return r;
    }

    Resolution resolve(const FileInfo& fi, int scope, const std::vector<std::string>& chain, int depth) const {
        Resolution r;
        if (chain.empty() || depth > kMaxAliasDepth) return r;
        const std::string& base = chain[0];
        const std::vector<std::string> rest(chain.begin() + 1, chain.end());
        const int t = fi.lookup(scope, base);
        if (t < 0) {
            if (fi.python()) {
                for (auto it = fi.star_imports.rbegin(); it != fi.star_imports.rend(); ++it) {
                    const int f = module_file(fi, it->module, it->level);
                    if (f >= 0) {
                        const FileInfo& tf = files_[static_cast<std::size_t>(f)];
                        if (tf.module_functions.count(base)) return resolve_import(fi, {base, it->module, base, it->level}, rest);
                        continue;
                    }
                    r.kind = Resolution::Path;
                    r.path = it->module + "." + join(chain);
                    return r;
                }
            }
            r.kind = Resolution::Path;
            r.path = (fi.python() ? "builtins." : "global.") + join(chain);
            return r;
        }
        const auto it = fi.defs.find({t, base});
        if (it == fi.defs.end()) {
            r.kind = Resolution::Variable;
            return rest.empty() ? r : method_fallback(rest.back());
        }
        const auto& bindings = it->second;

        // Local function and class definitions shadow everything else.
        std::vector<int> functions;
        bool is_class = false;
        int class_stmt = -1;
        for (const auto& b : bindings) {
            if (b.param) continue;
            if (fi.function_name[static_cast<std::size_t>(b.stmt)] == base) functions.push_back(fi.base + b.stmt);
            if (fi.stmt(b.stmt).kind == StmtKind::Class && fi.stmt(b.stmt).def_name == base) {
                is_class = true;
                class_stmt = b.stmt;
            }
        }
        if (!functions.empty()) {
            if (!rest.empty()) return method_fallback(rest.back());
            r.kind = Resolution::Functions;
            r.functions = functions;
            return r;
        }
        if (is_class) {
            if (!rest.empty()) return method_fallback(rest.back());
            const int body = fi.stmt(class_stmt).body_block;
            for (std::size_t i = 0; i < fi.file.statements.size(); ++i) {
                const Statement& st = fi.file.statements[i];
                if (st.block == body && st.kind == StmtKind::Def &&
                    (st.def_name == "__init__" || st.def_name == "constructor")) {
                    r.kind = Resolution::Functions;
                    r.functions.push_back(fi.base + static_cast<int>(i));
                }
            }
            return r;
        }
        for (const auto& b : bindings) {
            if (b.param) continue;
            for (const auto& imp : fi.stmt(b.stmt).imports) {
                if (imp.local == base) return resolve_import(fi, imp, rest);
            }
        }
        for (const auto& b : bindings) {
            if (b.param) continue;
            const Statement& st = fi.stmt(b.stmt);
            if (st.alias_of && !st.alias_of->empty()) {
                std::vector<std::string> target = *st.alias_of;
                target.insert(target.end(), rest.begin(), rest.end());
                return resolve(fi, fi.scope(st.block), target, depth + 1);
            }
        }
        if (!rest.empty()) return method_fallback(rest.back());
        r.kind = Resolution::Variable;
        return r;
    }

    ResolvedCall resolve_call(const FileInfo& fi, const Statement& st, const frontend::Call& call) const {
        ResolvedCall out;
        Resolution r;
        if (call.computed) {
            out.dynamic = true;
        } else if (!call.module_receiver.empty()) {
            Import imp{"", call.module_receiver, "", call.module_receiver.rfind('.', 0) == 0 ? 1 : 0};
            r = resolve_import(fi, imp, call.chain);
        } else if (call.on_expression) {
            if (!call.chain.empty()) r = method_fallback(call.chain.back());
        } else {
            r = resolve(fi, fi.scope(st.block), call.chain, 0);
        }
        switch (r.kind) {
            case Resolution::Path:
                out.target = r.path;
                if (kDynamicTargets.count(r.path)) out.dynamic = true;
                break;
            case Resolution::Functions:
                out.callees = r.functions;
                out.low_confidence = r.low;
                break;
            case Resolution::Variable:
                out.dynamic = true;
                break;
            case Resolution::None:
                break;
        }
        for (const auto& arg : call.arg_refs) {
            const Resolution a = resolve(fi, fi.scope(st.block), arg, 0);
            out.arg_targets.push_back(a.kind == Resolution::Path ? a.path : "");
        }
        return out;
    }

    // --- edges ---------------------------------------------------------------

    bool reaches(const FileInfo& fi, const Binding& d, int use, int scope, const std::string& name) const {
        if (fi.stmt_scope(use) != scope) return true;
        if (!d.param && fi.stmt_scope(d.stmt) != scope) return true;
        const int d_block = d.param ? scope : fi.stmt(d.stmt).block;
        const int u_block = fi.stmt(use).block;
        if (d.stmt < use) {
            if (fi.exclusive(d_block, u_block)) return false;
            for (const auto& k : fi.defs.at({scope, name})) {
                if (!k.strong || k.param || k.stmt <= d.stmt || k.stmt >= use) continue;
                if (fi.stmt_scope(k.stmt) != scope) continue;
                const int k_block = fi.stmt(k.stmt).block;
                if (fi.ancestor_or_self(k_block, u_block) || fi.ancestor_or_self(k_block, d_block)) return false;
            }
            return true;
        }
        if (d.param) return false;
        const auto dl = fi.stmt_loops(d.stmt);
        for (int l : fi.stmt_loops(use)) {
            if (dl.count(l)) return true;
        }
        return false;
    }

    void emit(std::size_t f) {
        const FileInfo& fi = files_[f];
        const auto& stmts = fi.file.statements;
        for (std::size_t i = 0; i < stmts.size(); ++i) {
            const Statement& st = stmts[i];
            const int id = fi.base + static_cast<int>(i);
            GraphNode& node = graph_.nodes[static_cast<std::size_t>(id)];

            // Placement.
            node.function_header = fi.function_block[i] >= 0;
            node.function_name = fi.function_name[i];
            node.module_level = true;
            for (int b = st.block; b >= 0; b = fi.block(b).parent) {
                const Block& blk = fi.block(b);
                if (blk.kind == BlockKind::Function) {
                    if (node.function < 0) node.function = fi.base + blk.header;
                    node.module_level = false;
                }
                if ((blk.kind == BlockKind::Function || blk.kind == BlockKind::Class) && node.owner < 0) {
                    node.owner = fi.base + blk.header;
                }
            }

            // Calls.
            std::set<std::string> call_bases;
            for (const auto& call : st.calls) {
                ResolvedCall rc = resolve_call(fi, st, call);
                node.dynamic = node.dynamic || rc.dynamic;
                node.low_confidence = node.low_confidence || rc.low_confidence;
                for (int callee : rc.callees) {
                    call_edges_.insert({id, callee, rc.low_confidence});
                }
                if (!call.computed && !call.on_expression && call.module_receiver.empty() && call.chain.size() == 1 &&
                    !rc.callees.empty()) {
                    call_bases.insert(call.chain[0]);
                }
                node.calls.push_back(std::move(rc));
            }

            // Reaching definitions.
            const int scope = fi.scope(st.block);
            for (const auto& n : st.uses) {
                const int t = fi.lookup(scope, n);
                if (t < 0) continue;
                const auto it = fi.defs.find({t, n});
                if (it == fi.defs.end()) continue;
                for (const auto& d : it->second) {
                    if (d.stmt == static_cast<int>(i)) continue;
                    if (call_bases.count(n) && !d.param && fi.function_name[static_cast<std::size_t>(d.stmt)] == n) continue;
                    if (!reaches(fi, d, static_cast<int>(i), t, n)) continue;
                    data_edges_.insert({fi.base + d.stmt, id, n});
                }
            }

            // Control.
            int controller = -1;
            if (st.control_override) {
                controller = *st.control_override;
            } else {
                for (int b = st.block; b >= 0; b = fi.block(b).parent) {
                    const Block& blk = fi.block(b);
                    if (blk.kind != BlockKind::Body) break;
                    if (!blk.inherit_control && blk.control >= 0) {
                        controller = blk.control;
                        break;
                    }
                }
            }
            if (controller >= 0 && controller != static_cast<int>(i)) {
                control_edges_.insert({fi.base + controller, id});
            }
        }
    }

    // Node of a function header -> its file and Function block.
    std::pair<const FileInfo*, int> function_of(int header_node) const {
        for (const auto& fi : files_) {
            if (fi.file.opaque) continue;
            const int local = header_node - fi.base;
            if (local >= 0 && local < static_cast<int>(fi.file.statements.size())) {
                return {&fi, fi.function_block[static_cast<std::size_t>(local)]};
            }
        }
        return {nullptr, -1};
    }

    void finish() {
        // Return values flow back to confidently resolved call sites.
        for (const auto& e : call_edges_) {
            if (e.low_confidence) continue;
            const auto [fi, fb] = function_of(e.callee);
            if (!fi || fb < 0) continue;
            for (std::size_t i = 0; i < fi->file.statements.size(); ++i) {
                const Statement& st = fi->file.statements[i];
                if (st.is_return && fi->scope(st.block) == fb) {
                    const int from = fi->base + static_cast<int>(i);
                    if (from != e.caller) data_edges_.insert({from, e.caller, "<return>"});
                }
            }
        }
        graph_.data_edges.assign(data_edges_.begin(), data_edges_.end());
        graph_.control_edges.assign(control_edges_.begin(), control_edges_.end());
        graph_.call_edges.assign(call_edges_.begin(), call_edges_.end());

        std::set<int> entries;
        for (const auto& fi : files_) {
            if (fi.file.opaque) {
                entries.insert(fi.base);
                continue;
            }
            for (std::size_t i = 0; i < fi.file.statements.size(); ++i) {
                const Statement& st = fi.file.statements[i];
                const int id = fi.base + static_cast<int>(i);
                if (graph_.nodes[static_cast<std::size_t>(id)].module_level && st.block == 0) {
                    entries.insert(id);
                    break;
                }
            }
            for (std::size_t i = 0; i < fi.file.statements.size(); ++i) {
                const Statement& st = fi.file.statements[i];
                const auto& name = fi.function_name[i];
                const bool exported_name = !name.empty() && std::find(fi.file.exported_names.begin(),
                                                                      fi.file.exported_names.end(),
                                                                      name) != fi.file.exported_names.end();
                if (fi.function_block[i] >= 0 && (st.exported || exported_name)) entries.insert(fi.base + static_cast<int>(i));
            }
        }
        graph_.entry_points.assign(entries.begin(), entries.end());
    }

    const PackageSource& pkg_;
    ProgramGraph graph_;
    std::vector<FileInfo> files_;
    std::map<std::string, int> path_to_file_;
    std::map<std::string, std::vector<int>> package_functions_;
    std::set<DataEdge> data_edges_;
    std::set<ControlEdge> control_edges_;
    std::set<CallEdge> call_edges_;
    bool parsed_ = false;
};

}  // namespace

ProgramGraph build_program_graph(const PackageSource& pkg) { return GraphBuilder(pkg).build(); }

}  // namespace intelguard
