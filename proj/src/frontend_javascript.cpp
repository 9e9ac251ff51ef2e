#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>
#include <string_view>
#include <unordered_set>

#include "frontend.hpp"
#include "intelguard/text_util.hpp"

namespace intelguard::frontend {

namespace {

struct Tok {
    enum Kind { Name, Number, String, Template, Regex, Op, End } kind = Op;
    std::string s;
    int line = 0;
    bool nl_before = false;
    std::vector<Tok> embedded;  // template substitutions
};

struct ParseFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::unordered_set<std::string_view> kKeywords{
    "break",  "case",   "catch",  "class",  "const",     "continue", "debugger", "default", "delete",
    "do",     "else",   "export", "extends", "finally",  "for",      "function", "if",      "import",
    "in",     "instanceof", "let", "new",   "return",    "super",    "switch",   "this",    "throw",
    "try",    "typeof", "var",    "void",   "while",     "with",     "yield",    "await",   "async",
    "of",     "null",   "true",   "false",  "undefined", "static",   "get",      "set",
};

// Keywords after which '/' starts a regular expression.
const std::unordered_set<std::string_view> kRegexAfter{"return", "typeof", "case",   "do",    "else", "in",
                                                       "of",     "new",    "delete", "void",  "throw",
                                                       "instanceof", "yield", "await"};

bool is_name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$' || (c & 0x80);
}
bool is_name_char(char c) { return is_name_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

class Tokenizer {
public:
    explicit Tokenizer(const std::string& src, int first_line = 1) : src_(src), line_(first_line) {}

    std::vector<Tok> run() {
        std::vector<Tok> out;
        bool nl = false;
        if (src_.rfind("#!", 0) == 0) {
            while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        }
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
                nl = true;
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
                continue;
            }
            if (c == '/' && peek(1) == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
                continue;
            }
            if (c == '/' && peek(1) == '*') {
                const auto end = src_.find("*/", pos_ + 2);
                if (end == std::string::npos) throw ParseFailure("unterminated comment");
                for (std::size_t i = pos_; i < end; ++i) {
                    if (src_[i] == '\n') {
                        ++line_;
                        nl = true;
                    }
                }
                pos_ = end + 2;
                continue;
            }
            Tok t;
            t.line = line_;
            t.nl_before = nl;
            nl = false;
            if (c == '"' || c == '\'') {
                t.kind = Tok::String;
                t.s = read_quoted(c);
            } else if (c == '`') {
                t.kind = Tok::Template;
                read_template(t);
            } else if (is_name_start(c) || (c == '#' && is_name_start(peek(1)))) {
                const std::size_t b = pos_++;
                while (pos_ < src_.size() && is_name_char(src_[pos_])) ++pos_;
                t.kind = Tok::Name;
                t.s = src_.substr(b, pos_ - b);
            } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                       (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
                const std::size_t b = pos_;
                while (pos_ < src_.size() && (is_name_char(src_[pos_]) || src_[pos_] == '.')) ++pos_;
                t.kind = Tok::Number;
                t.s = src_.substr(b, pos_ - b);
            } else if (c == '/' && regex_allowed(out)) {
                t.kind = Tok::Regex;
                t.s = read_regex();
            } else {
                t.kind = Tok::Op;
                t.s = read_op();
            }
            out.push_back(std::move(t));
        }
        return out;
    }

private:
    char peek(std::size_t k) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

    static bool regex_allowed(const std::vector<Tok>& out) {
        if (out.empty()) return true;
        const Tok& p = out.back();
        if (p.kind == Tok::Name) return kRegexAfter.count(p.s) > 0;
        if (p.kind != Tok::Op) return false;
        return !(p.s == ")" || p.s == "]" || p.s == "}" || p.s == "++" || p.s == "--");
    }

    std::string read_quoted(char q) {
        std::string out;
        ++pos_;
        while (true) {
            if (pos_ >= src_.size()) throw ParseFailure("unterminated string");
            const char c = src_[pos_];
            if (c == '\\') {
                if (peek(1) == '\n') ++line_;
                out += src_.substr(pos_, 2);
                pos_ += 2;
                continue;
            }
            if (c == '\n') throw ParseFailure("newline in string literal");
            ++pos_;
            if (c == q) break;
            out += c;
        }
        return out;
    }

    void read_template(Tok& t) {
        ++pos_;
        while (true) {
            if (pos_ >= src_.size()) throw ParseFailure("unterminated template literal");
            const char c = src_[pos_];
            if (c == '\\') {
                if (peek(1) == '\n') ++line_;
                t.s += src_.substr(pos_, 2);
                pos_ += 2;
                continue;
            }
            if (c == '`') {
                ++pos_;
                return;
            }
            if (c == '$' && peek(1) == '{') {
                pos_ += 2;
                const int start_line = line_;
                const std::size_t b = pos_;
                int depth = 1;
                while (pos_ < src_.size() && depth > 0) {
                    const char d = src_[pos_];
                    if (d == '{') ++depth;
                    if (d == '}') --depth;
                    if (d == '\n') ++line_;
                    if (d == '\'' || d == '"') {
                        read_quoted(d);
                        continue;
                    }
                    if (d == '`') {
                        Tok nested;
                        read_template(nested);
                        continue;
                    }
                    ++pos_;
                }
                if (depth != 0) throw ParseFailure("unterminated template substitution");
                const std::string expr = src_.substr(b, pos_ - b - 1);
                for (auto& tok : Tokenizer(expr, start_line).run()) t.embedded.push_back(std::move(tok));
                continue;
            }
            if (c == '\n') ++line_;
            t.s += c;
            ++pos_;
        }
    }

    std::string read_regex() {
        const std::size_t b = pos_++;
        bool in_class = false;
        while (true) {
            if (pos_ >= src_.size() || src_[pos_] == '\n') throw ParseFailure("unterminated regular expression");
            const char c = src_[pos_];
            if (c == '\\') {
                pos_ += 2;
                continue;
            }
            if (c == '[') in_class = true;
            if (c == ']') in_class = false;
            ++pos_;
            if (c == '/' && !in_class) break;
        }
        while (pos_ < src_.size() && is_name_char(src_[pos_])) ++pos_;
        return src_.substr(b, pos_ - b);
    }

    std::string read_op() {
        static const char* ops[] = {">>>=", "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "&&=", "||=", "?\?=",
                                    "=>",   "==",  "!=",  "<=",  ">=",  "&&",  "||",  "??",  "++",  "--",  "+=",
                                    "-=",   "*=",  "/=",  "%=",  "&=",  "|=",  "^=",  "**",  "<<",  ">>"};
        for (const char* op : ops) {
            const std::size_t n = std::char_traits<char>::length(op);
            if (src_.compare(pos_, n, op) == 0) {
                pos_ += n;
                return op;
            }
        }
        if (src_[pos_] == '?' && peek(1) == '.' && !std::isdigit(static_cast<unsigned char>(peek(2)))) {
            pos_ += 2;
            return "?.";
        }
        return std::string(1, src_[pos_++]);
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_;
};

using Range = std::vector<Tok>;

bool is_op(const Tok& t, std::string_view s) { return t.kind == Tok::Op && t.s == s; }
bool is_kw(const Tok& t, std::string_view s) { return t.kind == Tok::Name && t.s == s; }
// Contextual keywords (get, set, of, static) are ordinary identifiers
// outside the few positions the statement parser checks explicitly.
const std::unordered_set<std::string_view> kContextual{"of", "get", "set", "static", "undefined"};

bool is_plain_name(const Tok& t) {
    return t.kind == Tok::Name && (!kKeywords.count(t.s) || kContextual.count(t.s));
}
bool is_fn_placeholder(const Tok& t) { return t.kind == Tok::Op && t.s == "<fn>"; }
bool opens(const Tok& t) { return is_op(t, "(") || is_op(t, "[") || is_op(t, "{"); }
bool closes(const Tok& t) { return is_op(t, ")") || is_op(t, "]") || is_op(t, "}"); }

std::size_t matching_close(const Range& r, std::size_t open) {
    int depth = 0;
    for (std::size_t i = open; i < r.size(); ++i) {
        if (opens(r[i])) ++depth;
        if (closes(r[i]) && --depth == 0) return i;
    }
    return r.size();
}

std::size_t matching_open(const Range& r, std::size_t close) {
    int depth = 0;
    for (std::size_t i = close + 1; i-- > 0;) {
        if (closes(r[i])) ++depth;
        if (opens(r[i]) && --depth == 0) return i;
    }
    return r.size();
}

Range slice(const Range& r, std::size_t b, std::size_t e) {
    b = std::min(b, r.size());
    e = std::min(std::max(e, b), r.size());
    return Range(r.begin() + static_cast<std::ptrdiff_t>(b), r.begin() + static_cast<std::ptrdiff_t>(e));
}

std::vector<Range> split_top(const Range& r, std::string_view sep) {
    std::vector<Range> out(1);
    int depth = 0;
    for (const auto& t : r) {
        if (opens(t)) ++depth;
        if (closes(t)) --depth;
        if (depth == 0 && is_op(t, sep)) {
            out.emplace_back();
            continue;
        }
        out.back().push_back(t);
    }
    return out;
}

std::size_t find_top(const Range& r, const auto& pred) {
    int depth = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (depth == 0 && pred(r[i])) return i;
        if (opens(r[i])) ++depth;
        if (closes(r[i])) --depth;
    }
    return r.size();
}

bool is_dotted(const Range& r) {
    if (r.empty() || r.size() % 2 == 0) return false;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (i % 2 == 0 ? !is_plain_name(r[i]) : !(is_op(r[i], ".") || is_op(r[i], "?."))) return false;
    }
    return true;
}

std::vector<std::string> dotted_parts(const Range& r) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < r.size(); i += 2) out.push_back(r[i].s);
    return out;
}

void add_unique(std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

const std::set<std::string> kAssignOps{"=",  "+=", "-=",  "*=",  "/=",  "%=",   "**=", "<<=",
                                       ">>=", ">>>=", "&=", "|=", "^=", "&&=", "||=", "?\?="};

bool is_assign_op(const Tok& t) { return t.kind == Tok::Op && kAssignOps.count(t.s) > 0; }

// Names bound by a destructuring pattern or a parameter list.
void pattern_names(const Range& r, std::vector<std::string>& out) {
    int depth = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const Tok& t = r[i];
        if (opens(t)) ++depth;
        if (closes(t)) --depth;
        if (is_op(t, "=")) {
            // Skip the default value.
            int d = 0;
            std::size_t j = i + 1;
            for (; j < r.size(); ++j) {
                if (opens(r[j])) ++d;
                if (closes(r[j])) {
                    if (d == 0) break;
                    --d;
                }
                if (d == 0 && is_op(r[j], ",")) break;
            }
            i = j - 1;
            continue;
        }
        if (!is_plain_name(t)) continue;
        const bool key = i + 1 < r.size() && is_op(r[i + 1], ":");
        if (key) continue;
        if (i > 0 && (is_op(r[i - 1], ".") || is_op(r[i - 1], "?."))) continue;
        add_unique(out, t.s);
    }
}

std::string require_module(const Range& r) {
    // require('m') exactly
    if (r.size() == 4 && is_kw(r[0], "require") && is_op(r[1], "(") && r[2].kind == Tok::String && is_op(r[3], ")")) {
        return r[2].s;
    }
    return "";
}

std::string strip_node_prefix(std::string m) { return m.rfind("node:", 0) == 0 ? m.substr(5) : m; }

Import make_import(const std::string& local, const std::string& module, const std::string& member) {
    Import imp;
    imp.local = local;
    imp.module = strip_node_prefix(module);
    imp.member = member;
    imp.level = module.rfind('.', 0) == 0 ? 1 : 0;
    return imp;
}

class Analyzer {
public:
    Analyzer(Statement& st, const std::set<std::string>& excluded) : st_(st), excluded_(excluded) {}

    void expr(const Range& r) {
        std::vector<char> brackets;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const Tok& t = r[i];
            if (opens(t)) brackets.push_back(t.s[0]);
            if (closes(t) && !brackets.empty()) brackets.pop_back();
            if (t.kind == Tok::Template) {
                expr(t.embedded);
                continue;
            }
            if (is_op(t, "(")) record_call(r, i);
            if (!is_plain_name(t)) continue;
            if (i > 0 && (is_op(r[i - 1], ".") || is_op(r[i - 1], "?."))) continue;
            const bool in_object = !brackets.empty() && brackets.back() == '{';
            if (in_object && i + 1 < r.size() && is_op(r[i + 1], ":") && i > 0 &&
                (is_op(r[i - 1], "{") || is_op(r[i - 1], ","))) {
                continue;  // object key
            }
            if (excluded_.count(t.s)) continue;
            add_unique(st_.uses, t.s);
            // Nested assignment or update inside an expression.
            if ((i + 1 < r.size() && (is_assign_op(r[i + 1]) || is_op(r[i + 1], "++") || is_op(r[i + 1], "--"))) ||
                (i > 0 && (is_op(r[i - 1], "++") || is_op(r[i - 1], "--")))) {
                add_unique(st_.weak_defs, t.s);
            }
        }
    }

private:
    void record_call(const Range& r, std::size_t open) {
        if (open == 0) return;
        Call call;
        const Tok& prev = r[open - 1];
        if (is_op(prev, ")") || is_op(prev, "]") || is_fn_placeholder(prev)) {
            call.computed = true;
        } else if (is_plain_name(prev) || is_kw(prev, "require")) {
            std::size_t start = open - 1;
            while (start >= 2 && (is_op(r[start - 1], ".") || is_op(r[start - 1], "?.")) && is_plain_name(r[start - 2])) {
                start -= 2;
            }
            call.chain = dotted_parts(slice(r, start, open));
            if (start >= 1 && is_kw(r[start - 1], "new")) call.is_new = true;
            if (start >= 1 && is_kw(r[start - 1], "function")) return;
            if (excluded_.count(call.chain[0])) {
                // Parameter of an expression-bodied arrow: unknown value.
                if (call.chain.size() == 1) {
                    call.computed = true;
                } else {
                    call.chain = {call.chain.back()};
                    call.on_expression = true;
                }
            }
            if (start >= 1 && (is_op(r[start - 1], ".") || is_op(r[start - 1], "?."))) {
                call.on_expression = true;
                if (start >= 2 && is_op(r[start - 2], ")")) {
                    const std::size_t o = matching_open(r, start - 2);
                    if (o >= 1 && o < r.size()) {
                        const std::string m = require_module(slice(r, o - 1, start - 1));
                        if (!m.empty() && !(o >= 2 && is_op(r[o - 2], "."))) {
                            call.module_receiver = strip_node_prefix(m);
                            call.on_expression = false;
                        }
                    }
                }
            }
        } else {
            return;
        }
        const std::size_t close = matching_close(r, open);
        for (const auto& arg : split_top(slice(r, open + 1, close), ",")) {
            if (is_dotted(arg)) call.arg_refs.push_back(dotted_parts(arg));
        }
        st_.calls.push_back(std::move(call));
    }

    Statement& st_;
    const std::set<std::string>& excluded_;
};

class JsParser {
public:
    JsParser(const std::string& path, const std::string& source) {
        file_.path = path;
        file_.language = Language::JavaScript;
        file_.lines = text::split_lines(source);
        file_.blocks.push_back(Block{});
    }

    File run(const std::string& source) {
        if (looks_minified(file_.lines)) {
            file_.opaque = true;
            file_.opaque_reason = "minified";
            return file_;
        }
        try {
            toks_ = Tokenizer(source).run();
            Tok end;
            end.kind = Tok::End;
            end.line = toks_.empty() ? 1 : toks_.back().line;
            toks_.push_back(end);
            statements(0, false);
        } catch (const ParseFailure& e) {
            File opaque;
            opaque.path = file_.path;
            opaque.language = Language::JavaScript;
            opaque.lines = std::move(file_.lines);
            opaque.blocks.push_back(Block{});
            opaque.opaque = true;
            opaque.opaque_reason = e.what();
            return opaque;
        }
        return file_;
    }

private:
    // --- token access -------------------------------------------------------
    const Tok& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    const Tok& next() {
        const Tok& t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }
    bool at_end() const { return peek().kind == Tok::End; }
    void expect(std::string_view op) {
        if (!is_op(peek(), op)) {
            throw ParseFailure("expected '" + std::string(op) + "' on line " + std::to_string(peek().line));
        }
        next();
    }

    // --- IR building --------------------------------------------------------
    int new_block(int parent, BlockKind kind, int header) {
        Block b;
        b.parent = parent;
        b.kind = kind;
        b.header = header;
        b.inherit_control = kind == BlockKind::Body;
        file_.blocks.push_back(b);
        return static_cast<int>(file_.blocks.size()) - 1;
    }

    int add(int block, int line, StmtKind kind) {
        Statement st;
        st.line = line;
        st.kind = kind;
        st.block = block;
        file_.statements.push_back(std::move(st));
        return static_cast<int>(file_.statements.size()) - 1;
    }

    Statement& stmt(int id) { return file_.statements[static_cast<std::size_t>(id)]; }

    // --- statements ---------------------------------------------------------
    void statements(int block, bool until_brace) {
        while (!at_end()) {
            if (until_brace && is_op(peek(), "}")) return;
            statement(block);
        }
        if (until_brace) throw ParseFailure("unexpected end of file inside block");
    }

    // Body of a compound statement. Returns the block.
    int body(int parent, int control, bool loop, int chain = -1, int branch = -1) {
        const int b = new_block(parent, BlockKind::Body, control);
        Block& blk = file_.blocks[static_cast<std::size_t>(b)];
        if (control >= 0) {
            blk.control = control;
            blk.inherit_control = false;
        }
        blk.loop = loop;
        blk.chain = chain;
        blk.branch = branch;
        if (is_op(peek(), "{")) {
            next();
            statements(b, true);
            expect("}");
        } else {
            statement(b);
        }
        return b;
    }

    void statement(int block) {
        const Tok& t = peek();
        if (is_op(t, ";")) {
            next();
            return;
        }
        if (is_op(t, "{")) {
            next();
            const int b = new_block(block, BlockKind::Body, -1);
            statements(b, true);
            expect("}");
            return;
        }
        if (t.kind == Tok::Name) {
            if (t.s == "function" || (t.s == "async" && is_kw(peek(1), "function") && !peek(1).nl_before)) {
                function_declaration(block, false);
                return;
            }
            if (t.s == "class") return class_declaration(block, false);
            if (t.s == "if") return if_statement(block);
            if (t.s == "for") return for_statement(block);
            if (t.s == "while") return while_statement(block);
            if (t.s == "do") return do_statement(block);
            if (t.s == "try") return try_statement(block);
            if (t.s == "switch") return switch_statement(block);
            if (t.s == "return" || t.s == "throw") {
                const int line = next().line;
                const int id = add(block, line, t.s == "return" ? StmtKind::Return : StmtKind::Simple);
                stmt(id).is_return = file_.statements[static_cast<std::size_t>(id)].kind == StmtKind::Return;
                if (peek().nl_before || is_op(peek(), ";") || is_op(peek(), "}")) {
                    if (is_op(peek(), ";")) next();
                    return;
                }
                std::set<std::string> excluded;
                Range r = collect(id, excluded, false);
                Analyzer(stmt(id), excluded).expr(r);
                return;
            }
            if (t.s == "break" || t.s == "continue" || t.s == "debugger") {
                const int line = next().line;
                if (peek().kind == Tok::Name && !peek().nl_before && peek().line == line) next();
                if (is_op(peek(), ";")) next();
                return;
            }
            if (t.s == "import" && !is_op(peek(1), "(") && !is_op(peek(1), ".")) return import_statement(block);
            if (t.s == "export") return export_statement(block);
            if (t.s == "const" || t.s == "let" || t.s == "var") {
                declaration(block, false);
                return;
            }
            if (is_plain_name(t) && is_op(peek(1), ":") && !is_op(peek(2), ":")) {
                // label
                next();
                next();
                return;
            }
        }
        expression_statement(block);
    }

    void function_declaration(int block, bool exported) {
        const int line = peek().line;
        if (is_kw(peek(), "async")) next();
        next();  // function
        if (is_op(peek(), "*")) next();
        const int id = add(block, line, StmtKind::Def);
        if (is_plain_name(peek())) {
            stmt(id).def_name = next().s;
            add_unique(stmt(id).defs, stmt(id).def_name);
            add_unique(stmt(id).decls, stmt(id).def_name);
        }
        stmt(id).exported = exported;
        function_rest(block, id, true);
    }

    // Parses "(params) { body }" for the function owned by statement `id`.
    int function_rest(int block, int id, bool is_def) {
        expect("(");
        std::set<std::string> excluded;
        Range params = collect_group(id, excluded, ")");
        expect(")");
        const int b = new_block(block, BlockKind::Function, id);
        std::vector<std::string> names;
        pattern_names(params, names);
        file_.blocks[static_cast<std::size_t>(b)].params = names;
        if (is_def) {
            stmt(id).params = names;
            stmt(id).body_block = b;
        }
        default_uses(id, params);
        expect("{");
        statements(b, true);
        expect("}");
        return b;
    }

    void default_uses(int id, const Range& params) {
        for (const auto& p : split_top(params, ",")) {
            const std::size_t eq = find_top(p, [](const Tok& t) { return is_op(t, "="); });
            if (eq < p.size()) {
                std::set<std::string> none;
                Analyzer(stmt(id), none).expr(slice(p, eq + 1, p.size()));
            }
        }
    }

    void class_declaration(int block, bool exported) {
        const int line = next().line;  // class
        const int id = add(block, line, StmtKind::Class);
        if (is_plain_name(peek())) {
            stmt(id).def_name = next().s;
            add_unique(stmt(id).defs, stmt(id).def_name);
            add_unique(stmt(id).decls, stmt(id).def_name);
        }
        stmt(id).exported = exported;
        if (is_kw(peek(), "extends")) {
            next();
            std::set<std::string> excluded;
            Range base;
            while (!at_end() && !is_op(peek(), "{")) base.push_back(next());
            Analyzer(stmt(id), excluded).expr(base);
        }
        const int b = new_block(block, BlockKind::Class, id);
        stmt(id).body_block = b;
        expect("{");
        while (!at_end() && !is_op(peek(), "}")) {
            if (is_op(peek(), ";")) {
                next();
                continue;
            }
            class_member(b);
        }
        expect("}");
    }

    void class_member(int block) {
        const int line = peek().line;
        // Modifiers.
        while ((is_kw(peek(), "static") || is_kw(peek(), "async") || is_kw(peek(), "get") || is_kw(peek(), "set")) &&
               !is_op(peek(1), "(") && !is_op(peek(1), "=")) {
            next();
        }
        if (is_op(peek(), "*")) next();
        std::string name;
        if (peek().kind == Tok::Name || peek().kind == Tok::String) {
            name = next().s;
        } else if (is_op(peek(), "[")) {
            int depth = 0;
            do {
                if (is_op(peek(), "[")) ++depth;
                if (is_op(peek(), "]")) --depth;
                next();
            } while (depth > 0 && !at_end());
        } else {
            next();
            return;
        }
        if (is_op(peek(), "(")) {
            const int id = add(block, line, StmtKind::Def);
            stmt(id).def_name = name;
            function_rest(block, id, true);
            return;
        }
        // Field, optionally initialised.
        const int id = add(block, line, StmtKind::Simple);
        if (is_op(peek(), "=")) {
            next();
            std::set<std::string> excluded;
            Range r = collect(id, excluded, false);
            Analyzer(stmt(id), excluded).expr(r);
        } else if (is_op(peek(), ";")) {
            next();
        }
    }

    Range paren_header(int id, std::set<std::string>& excluded) {
        expect("(");
        Range r = collect_group(id, excluded, ")");
        expect(")");
        return r;
    }

    void if_statement(int block) {
        const int line = next().line;  // if
        const int id = add(block, line, StmtKind::If);
        std::set<std::string> excluded;
        Range cond = paren_header(id, excluded);
        Analyzer(stmt(id), excluded).expr(cond);
        const int chain = next_chain_++;
        int branch = 0;
        body(block, id, false, chain, branch);
        int last = id;
        while (is_kw(peek(), "else")) {
            const int else_line = next().line;
            if (is_kw(peek(), "if")) {
                next();
                const int eid = add(block, else_line, StmtKind::Elif);
                stmt(eid).control_override = last;
                std::set<std::string> ex;
                Range c = paren_header(eid, ex);
                Analyzer(stmt(eid), ex).expr(c);
                body(block, eid, false, chain, ++branch);
                last = eid;
                continue;
            }
            const int eid = add(block, else_line, StmtKind::Else);
            stmt(eid).control_override = last;
            body(block, eid, false, chain, ++branch);
            break;
        }
    }

    void for_statement(int block) {
        const int line = next().line;  // for
        if (is_kw(peek(), "await")) next();
        const int id = add(block, line, StmtKind::For);
        std::set<std::string> excluded;
        Range header = paren_header(id, excluded);
        Analyzer an(stmt(id), excluded);
        const std::size_t of = find_top(header, [](const Tok& t) { return is_kw(t, "of") || is_kw(t, "in"); });
        const bool iteration = of < header.size() && find_top(header, [](const Tok& t) { return is_op(t, ";"); }) == header.size();
        if (iteration) {
            Range target = slice(header, 0, of);
            const bool declared = !target.empty() && (is_kw(target[0], "const") || is_kw(target[0], "let") ||
                                                      is_kw(target[0], "var"));
            if (declared) target = slice(target, 1, target.size());
            std::vector<std::string> names;
            pattern_names(target, names);
            for (const auto& n : names) {
                add_unique(stmt(id).defs, n);
                if (declared) add_unique(stmt(id).decls, n);
            }
            an.expr(slice(header, of + 1, header.size()));
        } else {
            auto parts = split_top(header, ";");
            if (!parts.empty()) declaration_parts(id, parts[0], excluded);
            for (std::size_t i = 1; i < parts.size(); ++i) an.expr(parts[i]);
        }
        body(block, id, true);
    }

    void while_statement(int block) {
        const int line = next().line;
        const int id = add(block, line, StmtKind::While);
        std::set<std::string> excluded;
        Range cond = paren_header(id, excluded);
        Analyzer(stmt(id), excluded).expr(cond);
        body(block, id, true);
    }

    void do_statement(int block) {
        const int line = next().line;  // do
        const int id = add(block, line, StmtKind::While);
        body(block, id, true);
        if (is_kw(peek(), "while")) {
            next();
            std::set<std::string> excluded;
            Range cond = paren_header(id, excluded);
            Analyzer(stmt(id), excluded).expr(cond);
        }
        if (is_op(peek(), ";")) next();
    }

    void try_statement(int block) {
        const int line = next().line;  // try
        const int id = add(block, line, StmtKind::Try);
        body(block, -1, false);
        if (is_kw(peek(), "catch")) {
            const int cline = next().line;
            const int cid = add(block, cline, StmtKind::Except);
            stmt(cid).control_override = id;
            if (is_op(peek(), "(")) {
                std::set<std::string> excluded;
                Range param = paren_header(cid, excluded);
                std::vector<std::string> names;
                pattern_names(param, names);
                for (const auto& n : names) {
                    add_unique(stmt(cid).defs, n);
                    add_unique(stmt(cid).decls, n);
                }
            }
            body(block, cid, false);
        }
        if (is_kw(peek(), "finally")) {
            const int fline = next().line;
            add(block, fline, StmtKind::Finally);
            body(block, -1, false);
        }
    }

    void switch_statement(int block) {
        const int line = next().line;
        const int id = add(block, line, StmtKind::Switch);
        std::set<std::string> excluded;
        Range disc = paren_header(id, excluded);
        Analyzer(stmt(id), excluded).expr(disc);
        const int b = new_block(block, BlockKind::Body, id);
        file_.blocks[static_cast<std::size_t>(b)].control = id;
        file_.blocks[static_cast<std::size_t>(b)].inherit_control = false;
        expect("{");
        while (!at_end() && !is_op(peek(), "}")) {
            if (is_kw(peek(), "case")) {
                next();
                Range label;
                int depth = 0;
                while (!at_end() && !(depth == 0 && is_op(peek(), ":"))) {
                    if (opens(peek())) ++depth;
                    if (closes(peek())) --depth;
                    label.push_back(next());
                }
                next();
                Analyzer(stmt(id), excluded).expr(label);
                continue;
            }
            if (is_kw(peek(), "default") && is_op(peek(1), ":")) {
                next();
                next();
                continue;
            }
            statement(b);
        }
        expect("}");
    }

    void import_statement(int block) {
        const int line = next().line;  // import
        const int id = add(block, line, StmtKind::Import);
        Range r;
        while (!at_end() && !is_op(peek(), ";") && !(peek().nl_before && !r.empty() && r.back().kind == Tok::String)) {
            r.push_back(next());
        }
        if (is_op(peek(), ";")) next();
        if (r.empty()) return;
        const std::string module = r.back().kind == Tok::String ? r.back().s : "";
        const std::size_t from = find_top(r, [](const Tok& t) { return is_kw(t, "from"); });
        Range spec = slice(r, 0, from);
        auto bind = [&](const std::string& local, const std::string& member) {
            Import imp = make_import(local, module, member);
            add_unique(stmt(id).defs, local);
            add_unique(stmt(id).decls, local);
            stmt(id).imports.push_back(imp);
        };
        for (std::size_t i = 0; i < spec.size(); ++i) {
            if (is_op(spec[i], "*") && i + 2 < spec.size() && is_kw(spec[i + 1], "as")) {
                bind(spec[i + 2].s, "");
                i += 2;
            } else if (is_op(spec[i], "{")) {
                const std::size_t close = matching_close(spec, i);
                for (auto& item : split_top(slice(spec, i + 1, close), ",")) {
                    if (item.empty()) continue;
                    const std::string member = item[0].s;
                    const std::string local = item.size() >= 3 && is_kw(item[1], "as") ? item[2].s : member;
                    bind(local, member == "default" ? "" : member);
                }
                i = close;
            } else if (is_plain_name(spec[i])) {
                bind(spec[i].s, "");
            }
        }
    }

    void export_statement(int block) {
        next();  // export
        const bool is_default = is_kw(peek(), "default");
        if (is_default) next();
        const Tok& t = peek();
        if (is_kw(t, "function") || (is_kw(t, "async") && is_kw(peek(1), "function"))) {
            function_declaration(block, true);
            return;
        }
        if (is_kw(t, "class")) return class_declaration(block, true);
        if (is_kw(t, "const") || is_kw(t, "let") || is_kw(t, "var")) {
            const int id = declaration(block, true);
            for (const auto& d : stmt(id).defs) add_unique(file_.exported_names, d);
            return;
        }
        if (is_op(t, "{") || is_op(t, "*")) {
            Range r;
            while (!at_end() && !is_op(peek(), ";") && !(peek().nl_before && !r.empty() && (is_op(r.back(), "}") || r.back().kind == Tok::String))) {
                r.push_back(next());
            }
            if (is_op(peek(), ";")) next();
            const bool reexport = find_top(r, [](const Tok& x) { return is_kw(x, "from"); }) < r.size();
            if (!reexport && !r.empty() && is_op(r[0], "{")) {
                for (auto& item : split_top(slice(r, 1, matching_close(r, 0)), ",")) {
                    if (!item.empty() && is_plain_name(item[0])) add_unique(file_.exported_names, item[0].s);
                }
            }
            return;
        }
        const int id = expression_statement(block);
        if (is_default && id >= 0) {
            for (const auto& u : stmt(id).uses) add_unique(file_.exported_names, u);
            stmt(id).exported = true;
        }
    }

    // const/let/var; returns the statement id.
    int declaration(int block, bool exported) {
        const int line = peek().line;
        const int id = add(block, line, StmtKind::Simple);
        std::set<std::string> excluded;
        Range r = collect(id, excluded, false);
        declaration_parts(id, r, excluded);
        stmt(id).exported = exported;
        return id;
    }

    void declaration_parts(int id, Range r, const std::set<std::string>& excluded) {
        if (r.empty()) return;
        const bool declared = is_kw(r[0], "const") || is_kw(r[0], "let") || is_kw(r[0], "var");
        if (!declared) {
            assignment(id, r, excluded);
            return;
        }
        r = slice(r, 1, r.size());
        Analyzer an(stmt(id), excluded);
        const auto declarators = split_top(r, ",");
        for (const auto& d : declarators) {
            const std::size_t eq = find_top(d, [](const Tok& t) { return is_op(t, "="); });
            const Range target = slice(d, 0, eq);
            const Range value = eq < d.size() ? slice(d, eq + 1, d.size()) : Range{};
            std::vector<std::string> names;
            pattern_names(target, names);
            for (const auto& n : names) {
                add_unique(stmt(id).defs, n);
                add_unique(stmt(id).decls, n);
            }
            bind_value(id, target, value);
            an.expr(value);
            // Defaults inside destructuring patterns.
            for (std::size_t i = 0; i < target.size(); ++i) {
                if (is_op(target[i], "=")) {
                    Range dv;
                    int depth = 0;
                    for (std::size_t j = i + 1; j < target.size(); ++j) {
                        if (opens(target[j])) ++depth;
                        if (closes(target[j])) {
                            if (depth == 0) break;
                            --depth;
                        }
                        if (depth == 0 && is_op(target[j], ",")) break;
                        dv.push_back(target[j]);
                    }
                    an.expr(dv);
                }
            }
        }
        if (declarators.size() == 1) {
            const auto& d = declarators[0];
            const std::size_t eq = find_top(d, [](const Tok& t) { return is_op(t, "="); });
            if (eq == 1 && is_plain_name(d[0]) && is_dotted(slice(d, 2, d.size()))) {
                stmt(id).alias_of = dotted_parts(slice(d, 2, d.size()));
            }
        }
    }

    // require() bindings: x = require('m'), {a, b: c} = require('m'), x = require('m').y
    void bind_value(int id, const Range& target, const Range& value) {
        std::string module = require_module(value);
        std::string member;
        if (module.empty() && value.size() >= 6 && is_op(value[4], ".") && is_plain_name(value[5]) && value.size() == 6) {
            module = require_module(slice(value, 0, 4));
            member = value[5].s;
        }
        if (module.empty()) return;
        if (target.size() == 1 && is_plain_name(target[0])) {
            stmt(id).imports.push_back(make_import(target[0].s, module, member));
            return;
        }
        if (!target.empty() && is_op(target[0], "{") && member.empty()) {
            for (auto& item : split_top(slice(target, 1, matching_close(target, 0)), ",")) {
                if (item.empty() || !is_plain_name(item[0])) continue;
                const std::string key = item[0].s;
                std::string local = key;
                if (item.size() >= 3 && is_op(item[1], ":") && is_plain_name(item[2])) local = item[2].s;
                stmt(id).imports.push_back(make_import(local, module, key));
            }
        }
    }

    int expression_statement(int block) {
        const int line = peek().line;
        const int id = add(block, line, StmtKind::Simple);
        std::set<std::string> excluded;
        Range r = collect(id, excluded, false);
        if (r.empty()) {
            // Nothing consumed: skip one token to guarantee progress.
            if (!at_end() && !is_op(peek(), "}")) next();
            return id;
        }
        assignment(id, r, excluded);
        return id;
    }

    void assignment(int id, const Range& r, const std::set<std::string>& excluded) {
        Analyzer an(stmt(id), excluded);
        const std::size_t op = find_top(r, is_assign_op);
        if (op >= r.size()) {
            an.expr(r);
            return;
        }
        const Range target = slice(r, 0, op);
        const Range value = slice(r, op + 1, r.size());
        const bool plain = r[op].s == "=";
        if (target.size() == 1 && is_plain_name(target[0])) {
            if (plain) {
                add_unique(stmt(id).defs, target[0].s);
            } else {
                add_unique(stmt(id).weak_defs, target[0].s);
                add_unique(stmt(id).uses, target[0].s);
            }
            if (plain && is_dotted(value)) stmt(id).alias_of = dotted_parts(value);
            const std::string m = require_module(value);
            if (plain && !m.empty()) stmt(id).imports.push_back(make_import(target[0].s, m, ""));
        } else if (!target.empty() && (is_op(target[0], "[") || is_op(target[0], "{"))) {
            std::vector<std::string> names;
            pattern_names(target, names);
            for (const auto& n : names) add_unique(stmt(id).defs, n);
        } else {
            if (!target.empty() && is_plain_name(target[0])) add_unique(stmt(id).weak_defs, target[0].s);
            an.expr(target);
            exports_from(id, target, value);
        }
        // Chained a = b = c.
        if (find_top(value, is_assign_op) < value.size()) {
            assignment(id, value, excluded);
        } else {
            an.expr(value);
        }
    }

    void exports_from(int id, const Range& target, const Range& value) {
        const bool module_exports = target.size() >= 3 && is_kw(target[0], "module") && is_op(target[1], ".") &&
                                    is_kw(target[2], "exports");
        const bool exports = !target.empty() && is_kw(target[0], "exports");
        if (!module_exports && !exports) return;
        if (std::any_of(value.begin(), value.end(), is_fn_placeholder)) {
            stmt(id).exported = true;
            const std::size_t name_at = module_exports ? 4 : 2;
            if (target.size() == name_at + 1 && is_op(target[name_at - 1], ".") && is_plain_name(target[name_at])) {
                stmt(id).def_name = target[name_at].s;
            }
        }
        if (value.size() == 1 && is_plain_name(value[0])) add_unique(file_.exported_names, value[0].s);
        if (!value.empty() && is_op(value[0], "{")) {
            for (auto& item : split_top(slice(value, 1, matching_close(value, 0)), ",")) {
                if (item.empty() || !is_plain_name(item[0])) continue;
                if (item.size() == 1) add_unique(file_.exported_names, item[0].s);
                if (item.size() == 3 && is_op(item[1], ":") && is_plain_name(item[2])) {
                    add_unique(file_.exported_names, item[2].s);
                }
            }
        }
    }

    // --- expressions ----------------------------------------------------------
    static bool continues_after(const Tok& prev) {
        static const std::set<std::string> ops{
            "=",  "+",  "-",  "*",  "/",  "%",   "**", "&&", "||", "??", "==", "===", "!=",  "!==", "<",  ">",
            "<=", ">=", "&",  "|",  "^",  "<<",  ">>", ">>>", "?", ":", ",",  ".",   "?.",  "=>",  "(",  "[",
            "{",  "!",  "~",  "+=", "-=", "*=",  "/=", "%=", "&=", "|=", "^=", "**=", "<<=", ">>=", "&&=", "||=", "?\?="};
        if (prev.kind == Tok::Op) return ops.count(prev.s) > 0;
        if (prev.kind == Tok::Name) {
            static const std::set<std::string> kws{"new", "typeof", "void", "delete", "await", "in", "instanceof", "of",
                                                   "extends", "yield"};
            return kws.count(prev.s) > 0;
        }
        return false;
    }

    static bool continues_before(const Tok& next) {
        static const std::set<std::string> ops{
            ".",  "?.", ",",  "?",  ":",  "=",   "==", "===", "!=", "!==", "&&", "||", "??", "+",   "*",   "/",
            "%",  "<",  ">",  "<=", ">=", "|",   "&",  "^",   ")",  "]",   "=>", "+=", "-=", "*=",  "/=",  "**",
            "<<", ">>", ">>>", "%=", "&=", "|=", "^=", "**=", "&&=", "||=", "?\?="};
        if (next.kind == Tok::Op) return ops.count(next.s) > 0;
        return is_kw(next, "in") || is_kw(next, "instanceof") || is_kw(next, "of");
    }

    // Collects one statement's expression tokens; nested function bodies
    // become blocks owned by statement `owner` and are replaced by "<fn>".
    Range collect(int owner, std::set<std::string>& excluded, bool /*unused*/) {
        Range out;
        std::vector<char> brackets;
        while (!at_end()) {
            const Tok& t = peek();
            if (brackets.empty()) {
                if (is_op(t, ";")) {
                    next();
                    break;
                }
                if (is_op(t, "}") || is_op(t, ")") || is_op(t, "]")) break;
                if (t.nl_before && !out.empty() && !continues_after(out.back()) && !continues_before(t)) break;
            }
            if (step(owner, out, brackets, excluded)) continue;
        }
        return out;
    }

    // Collects up to (not including) the bracket closing the current group.
    Range collect_group(int owner, std::set<std::string>& excluded, std::string_view close) {
        Range out;
        std::vector<char> brackets;
        while (!at_end()) {
            const Tok& t = peek();
            if (brackets.empty() && is_op(t, close)) break;
            step(owner, out, brackets, excluded);
        }
        return out;
    }

    // Consumes one token (or a whole nested function) into `out`.
    bool step(int owner, Range& out, std::vector<char>& brackets, std::set<std::string>& excluded) {
        const Tok& t = peek();
        const int block = file_.statements[static_cast<std::size_t>(owner)].block;
        // function expression
        if (is_kw(t, "function") || (is_kw(t, "async") && is_kw(peek(1), "function"))) {
            const int line = t.line;
            if (is_kw(t, "async")) next();
            next();
            if (is_op(peek(), "*")) next();
            if (is_plain_name(peek())) next();
            function_rest(block, owner, false);
            Tok fn{Tok::Op, "<fn>", line, false, {}};
            out.push_back(fn);
            return true;
        }
        // arrow function
        if (is_op(t, "=>")) {
            const int line = t.line;
            next();
            std::vector<std::string> params;
            Range param_tokens;
            if (!out.empty() && is_plain_name(out.back())) {
                params.push_back(out.back().s);
                out.pop_back();
            } else if (!out.empty() && is_op(out.back(), ")")) {
                const std::size_t o = matching_open(out, out.size() - 1);
                if (o < out.size()) {
                    param_tokens = slice(out, o + 1, out.size() - 1);
                    pattern_names(param_tokens, params);
                    out.resize(o);
                    if (!brackets.empty()) {
                        // The group's brackets were already balanced; nothing to pop.
                    }
                }
            }
            if (!out.empty() && is_kw(out.back(), "async")) out.pop_back();
            default_uses(owner, param_tokens);
            if (is_op(peek(), "{")) {
                const int b = new_block(block, BlockKind::Function, owner);
                file_.blocks[static_cast<std::size_t>(b)].params = params;
                next();
                statements(b, true);
                expect("}");
            } else {
                for (const auto& p : params) excluded.insert(p);
            }
            out.push_back(Tok{Tok::Op, "<fn>", line, false, {}});
            return true;
        }
        // method shorthand inside an object literal: name(params) { body }
        if (is_op(t, "{") && !out.empty() && is_op(out.back(), ")") && !brackets.empty() && brackets.back() == '{') {
            const std::size_t o = matching_open(out, out.size() - 1);
            if (o < out.size() && o >= 1 && (is_plain_name(out[o - 1]) || out[o - 1].kind == Tok::Name)) {
                Range param_tokens = slice(out, o + 1, out.size() - 1);
                std::vector<std::string> params;
                pattern_names(param_tokens, params);
                const int line = out[o - 1].line;
                out.resize(o - 1);
                const int b = new_block(block, BlockKind::Function, owner);
                file_.blocks[static_cast<std::size_t>(b)].params = params;
                next();
                statements(b, true);
                expect("}");
                out.push_back(Tok{Tok::Op, "<fn>", line, false, {}});
                return true;
            }
        }
        if (opens(t)) brackets.push_back(t.s[0]);
        if (closes(t)) {
            if (brackets.empty()) throw ParseFailure("unbalanced '" + t.s + "' on line " + std::to_string(t.line));
            brackets.pop_back();
        }
        out.push_back(next());
        return false;
    }

    File file_;
    std::vector<Tok> toks_;
    std::size_t pos_ = 0;
    int next_chain_ = 0;
};

}  // namespace

File parse_javascript(const std::string& path, const std::string& source) {
    JsParser parser(path, source);
    return parser.run(source);
}

}  // namespace intelguard::frontend
