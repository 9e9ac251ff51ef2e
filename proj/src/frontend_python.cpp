#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <stdexcept>
#include <string_view>
#include <unordered_set>

#include "frontend.hpp"
#include "intelguard/text_util.hpp"

namespace intelguard::frontend {

namespace {

struct Tok {
    enum Kind { Name, Number, String, Op } kind = Op;
    std::string s;
    int line = 0;
    std::vector<Tok> embedded;  // f-string replacement fields
};

struct LogicalLine {
    int line = 0;
    int indent = 0;
    std::vector<Tok> toks;
};

struct ParseFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::unordered_set<std::string_view> kKeywords{
    "False", "None",   "True",    "and",      "as",   "assert", "async", "await",  "break",
    "class", "continue", "def",   "del",      "elif", "else",   "except", "finally", "for",
    "from",  "global", "if",      "import",   "in",   "is",     "lambda", "nonlocal", "not",
    "or",    "pass",   "raise",   "return",   "try",  "while",  "with",  "yield",
};

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || (c & 0x80); }
bool is_name_char(char c) { return is_name_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

class Tokenizer {
public:
    explicit Tokenizer(const std::string& src) : src_(src) {}

    std::vector<LogicalLine> run() {
        std::vector<LogicalLine> out;
        LogicalLine current;
        int depth = 0;
        bool line_start = true;
        int col = 0;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (line_start) {
                col = 0;
                while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\f')) {
                    col = src_[pos_] == '\t' ? (col / 8 + 1) * 8 : col + 1;
                    ++pos_;
                }
                line_start = false;
                continue;
            }
            if (c == '\n') {
                ++pos_;
                ++line_;
                line_start = true;
                if (depth == 0 && !current.toks.empty()) {
                    out.push_back(std::move(current));
                    current = LogicalLine{};
                }
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
                ++pos_;
                continue;
            }
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
                continue;
            }
            if (c == '\\' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == '\n' || src_[pos_ + 1] == '\r')) {
                pos_ += src_[pos_ + 1] == '\r' ? 3 : 2;
                ++line_;
                continue;
            }
            if (current.toks.empty()) {
                current.line = line_;
                current.indent = col;
            }
            if (is_string_start()) {
                current.toks.push_back(read_string());
                continue;
            }
            if (is_name_start(c)) {
                const std::size_t b = pos_;
                while (pos_ < src_.size() && is_name_char(src_[pos_])) ++pos_;
                current.toks.push_back({Tok::Name, src_.substr(b, pos_ - b), line_, {}});
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
                const std::size_t b = pos_;
                while (pos_ < src_.size() && (is_name_char(src_[pos_]) || src_[pos_] == '.' ||
                                              ((src_[pos_] == '+' || src_[pos_] == '-') &&
                                               (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E')))) {
                    ++pos_;
                }
                current.toks.push_back({Tok::Number, src_.substr(b, pos_ - b), line_, {}});
                continue;
            }
            std::string op = read_op();
            if (op == "(" || op == "[" || op == "{") ++depth;
            if (op == ")" || op == "]" || op == "}") depth = std::max(0, depth - 1);
            current.toks.push_back({Tok::Op, op, line_, {}});
        }
        if (depth != 0) throw ParseFailure("unbalanced brackets at end of file");
        if (!current.toks.empty()) out.push_back(std::move(current));
        return out;
    }

private:
    bool is_string_start() const {
        std::size_t p = pos_;
        int letters = 0;
        while (p < src_.size() && letters < 3 && std::string_view("rRbBuUfF").find(src_[p]) != std::string_view::npos) {
            ++p;
            ++letters;
        }
        return p < src_.size() && (src_[p] == '\'' || src_[p] == '"');
    }

    Tok read_string() {
        Tok t{Tok::String, "", line_, {}};
        bool raw = false;
        bool fstr = false;
        while (src_[pos_] != '\'' && src_[pos_] != '"') {
            const char p = static_cast<char>(std::tolower(static_cast<unsigned char>(src_[pos_])));
            raw |= p == 'r';
            fstr |= p == 'f';
            ++pos_;
        }
        const char q = src_[pos_];
        const bool triple = src_.compare(pos_, 3, std::string(3, q)) == 0;
        pos_ += triple ? 3 : 1;
        std::string body;
        while (true) {
            if (pos_ >= src_.size()) throw ParseFailure("unterminated string");
            const char c = src_[pos_];
            if (c == '\\' && !raw && pos_ + 1 < src_.size()) {
                if (src_[pos_ + 1] == '\n') ++line_;
                body += src_.substr(pos_, 2);
                pos_ += 2;
                continue;
            }
            if (c == '\\' && raw && pos_ + 1 < src_.size()) {
                body += src_.substr(pos_, 2);
                if (src_[pos_ + 1] == '\n') ++line_;
                pos_ += 2;
                continue;
            }
            if (triple ? src_.compare(pos_, 3, std::string(3, q)) == 0 : c == q) {
                pos_ += triple ? 3 : 1;
                break;
            }
            if (c == '\n') {
                if (!triple) throw ParseFailure("newline in string literal");
                ++line_;
            }
            body += c;
            ++pos_;
        }
        t.s = body;
        if (fstr) t.embedded = replacement_fields(body, t.line);
        return t;
    }

    static std::vector<Tok> replacement_fields(const std::string& body, int line) {
        std::vector<Tok> out;
        for (std::size_t i = 0; i < body.size(); ++i) {
            if (body[i] != '{') continue;
            if (i + 1 < body.size() && body[i + 1] == '{') {
                ++i;
                continue;
            }
            int depth = 1;
            std::size_t j = i + 1;
            while (j < body.size() && depth > 0) {
                if (body[j] == '{') ++depth;
                if (body[j] == '}') --depth;
                ++j;
            }
            std::string expr = body.substr(i + 1, j - i - 2);
            // Drop conversion and format spec.
            int d = 0;
            for (std::size_t k = 0; k < expr.size(); ++k) {
                const char c = expr[k];
                if (c == '(' || c == '[' || c == '{') ++d;
                if (c == ')' || c == ']' || c == '}') --d;
                if (d == 0 && (c == '!' || c == ':') && !(c == '!' && k + 1 < expr.size() && expr[k + 1] == '=')) {
                    expr = expr.substr(0, k);
                    break;
                }
            }
            try {
                Tokenizer inner(expr);
                for (auto& ll : inner.run()) {
                    for (auto& tok : ll.toks) {
                        tok.line = line;
                        out.push_back(std::move(tok));
                    }
                }
            } catch (const ParseFailure&) {
            }
            i = j - 1;
        }
        return out;
    }

    std::string read_op() {
        static const char* three[] = {"**=", "//=", ">>=", "<<=", "..."};
        static const char* two[] = {"==", "!=", "<=", ">=", "->", "+=", "-=", "*=", "/=", "%=", "&=",
                                    "|=", "^=", "**", "//", "<<", ">>", ":=", "@="};
        for (const char* op : three) {
            if (src_.compare(pos_, 3, op) == 0) {
                pos_ += 3;
                return op;
            }
        }
        for (const char* op : two) {
            if (src_.compare(pos_, 2, op) == 0) {
                pos_ += 2;
                return op;
            }
        }
        return std::string(1, src_[pos_++]);
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

using Range = std::vector<Tok>;

bool is_op(const Tok& t, std::string_view s) { return t.kind == Tok::Op && t.s == s; }
bool is_kw(const Tok& t, std::string_view s) { return t.kind == Tok::Name && t.s == s; }
bool is_plain_name(const Tok& t) { return t.kind == Tok::Name && !kKeywords.count(t.s); }

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

// Splits on a top-level operator token.
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

std::size_t find_top(const Range& r, const auto& pred, std::size_t from = 0) {
    int depth = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (i >= from && depth == 0 && pred(r[i])) return i;
        if (opens(r[i])) ++depth;
        if (closes(r[i])) --depth;
    }
    return r.size();
}

// Colon ending a compound header; each lambda at depth 0 consumes one colon.
std::size_t header_colon(const Range& r) {
    int depth = 0;
    int lambdas = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (opens(r[i])) ++depth;
        if (closes(r[i])) --depth;
        if (depth != 0) continue;
        if (is_kw(r[i], "lambda")) ++lambdas;
        if (is_op(r[i], ":")) {
            if (lambdas == 0) return i;
            --lambdas;
        }
    }
    return r.size();
}

bool is_dotted(const Range& r) {
    if (r.empty() || r.size() % 2 == 0) return false;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (i % 2 == 0 ? !is_plain_name(r[i]) : !is_op(r[i], ".")) return false;
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

// Names bound by lambdas and comprehensions inside the range.
std::set<std::string> local_binders(const Range& r) {
    std::set<std::string> out;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (is_kw(r[i], "lambda")) {
            for (std::size_t j = i + 1; j < r.size() && !is_op(r[j], ":"); ++j) {
                if (is_plain_name(r[j]) && (j == i + 1 || is_op(r[j - 1], ",") || is_op(r[j - 1], "*") ||
                                            is_op(r[j - 1], "**"))) {
                    out.insert(r[j].s);
                }
            }
        }
    }
    // Comprehension targets: "for <targets> in" nested in brackets.
    int depth = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (opens(r[i])) ++depth;
        if (closes(r[i])) --depth;
        if (depth > 0 && is_kw(r[i], "for")) {
            for (std::size_t j = i + 1; j < r.size() && !is_kw(r[j], "in"); ++j) {
                if (is_plain_name(r[j])) out.insert(r[j].s);
            }
        }
    }
    return out;
}

class StatementAnalyzer {
public:
    explicit StatementAnalyzer(Statement& st) : st_(st) {}

    void expr(const Range& r, const std::set<std::string>& outer = {}) {
        auto binders = local_binders(r);
        binders.insert(outer.begin(), outer.end());
        int depth = 0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const Tok& t = r[i];
            if (opens(t)) ++depth;
            if (closes(t)) --depth;
            if (t.kind == Tok::String) {
                if (!t.embedded.empty()) expr(t.embedded, binders);
                continue;
            }
            if (is_op(t, "(")) record_call(r, i, binders);
            if (!is_plain_name(t)) continue;
            if (i > 0 && is_op(r[i - 1], ".")) continue;
            if (depth > 0 && i + 1 < r.size() && is_op(r[i + 1], "=") && i > 0 &&
                (is_op(r[i - 1], "(") || is_op(r[i - 1], ","))) {
                continue;  // keyword argument name
            }
            if (binders.count(t.s)) continue;
            if (i + 1 < r.size() && is_op(r[i + 1], ":=")) {
                add_unique(st_.defs, t.s);
                add_unique(st_.decls, t.s);
                continue;
            }
            add_unique(st_.uses, t.s);
        }
    }

    // Assignment targets: plain names are strong definitions, attribute and
    // subscript targets weakly define their base name.
    void targets(Range r) {
        while (r.size() >= 2 && (is_op(r.front(), "(") || is_op(r.front(), "[")) &&
               matching_close(r, 0) == r.size() - 1) {
            r = slice(r, 1, r.size() - 1);
        }
        auto parts = split_top(r, ",");
        if (parts.size() > 1) {
            for (auto& p : parts) {
                if (!p.empty()) targets(p);
            }
            return;
        }
        if (!r.empty() && (is_op(r.front(), "*") || is_op(r.front(), "**"))) r = slice(r, 1, r.size());
        if (r.empty()) return;
        if (r.size() == 1 && is_plain_name(r[0])) {
            add_unique(st_.defs, r[0].s);
            add_unique(st_.decls, r[0].s);
            return;
        }
        if (is_plain_name(r[0]) && r.size() > 1 && (is_op(r[1], ".") || is_op(r[1], "["))) {
            add_unique(st_.weak_defs, r[0].s);
        }
        expr(r);
    }

private:
    void record_call(const Range& r, std::size_t open, const std::set<std::string>& binders) {
        Call call;
        if (open == 0) return;
        const Tok& prev = r[open - 1];
        if (closes(prev)) {
            call.computed = !is_op(prev, "}");
            if (!call.computed) return;
        } else if (is_plain_name(prev)) {
            std::size_t start = open - 1;
            while (start >= 2 && is_op(r[start - 1], ".") && is_plain_name(r[start - 2])) start -= 2;
            if (start >= 1 && (is_kw(r[start - 1], "def") || is_kw(r[start - 1], "class"))) return;
            call.chain = dotted_parts(slice(r, start, open));
            if (binders.count(call.chain[0])) {
                // Lambda or comprehension variable: unknown value.
                if (call.chain.size() == 1) {
                    call.computed = true;
                } else {
                    call.chain = {call.chain.back()};
                    call.on_expression = true;
                }
            }
            if (start >= 1 && is_op(r[start - 1], ".")) {
                // Receiver is an expression: __import__('m').x() names a module.
                call.on_expression = true;
                if (start >= 2 && is_op(r[start - 2], ")")) {
                    const std::size_t o = matching_open(r, start - 2);
                    if (o < r.size() && o >= 1 && o + 2 == start - 2 && r[o + 1].kind == Tok::String) {
                        const bool dunder = is_kw(r[o - 1], "__import__") && !(o >= 2 && is_op(r[o - 2], "."));
                        const bool importlib = is_kw(r[o - 1], "import_module");
                        if (dunder || importlib) {
                            call.module_receiver = r[o + 1].s;
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
            Range a = arg;
            const std::size_t eq = find_top(a, [](const Tok& t) { return is_op(t, "="); });
            if (eq < a.size()) a = slice(a, eq + 1, a.size());
            if (is_dotted(a)) call.arg_refs.push_back(dotted_parts(a));
        }
        st_.calls.push_back(std::move(call));
    }

    Statement& st_;
};

class PythonParser {
public:
    PythonParser(const std::string& path, const std::string& source) {
        file_.path = path;
        file_.language = Language::Python;
        file_.lines = text::split_lines(source);
        file_.blocks.push_back(Block{});
    }

    File run(const std::string& source) {
        if (looks_minified(file_.lines)) {
            file_.opaque = true;
            file_.opaque_reason = "minified";
            return file_;
        }
        std::vector<LogicalLine> lines;
        try {
            lines = Tokenizer(source).run();
        } catch (const ParseFailure& e) {
            file_.opaque = true;
            file_.opaque_reason = e.what();
            return file_;
        }
        stack_.push_back({-1, 0});
        for (auto& ll : lines) logical_line(ll);
        return file_;
    }

private:
    struct Level {
        int indent;
        int block;
    };

    void logical_line(LogicalLine& ll) {
        if (pending_ >= 0) {
            if (ll.indent > pending_indent_) stack_.push_back({ll.indent, pending_});
            pending_ = -1;
        }
        while (stack_.size() > 1 && ll.indent < stack_.back().indent) stack_.pop_back();
        if (ll.indent > stack_.back().indent && stack_.size() > 1) {
            // Unexpected indent: keep it in the current block.
            ll.indent = stack_.back().indent;
        }
        const int block = stack_.back().block;
        Range& toks = ll.toks;

        std::size_t lead = 0;
        if (is_kw(toks[0], "async") && toks.size() > 1 &&
            (is_kw(toks[1], "def") || is_kw(toks[1], "for") || is_kw(toks[1], "with"))) {
            lead = 1;
        }
        static const std::set<std::string> compound{"if", "elif", "else", "while", "for", "try",
                                                    "except", "finally", "with", "def", "class"};
        if (toks[lead].kind == Tok::Name && compound.count(toks[lead].s)) {
            Range rest = slice(toks, lead, toks.size());
            const std::size_t colon = header_colon(rest);
            if (colon < rest.size()) {
                const int body = header(slice(rest, 0, colon), block, ll.line);
                Range inline_body = slice(rest, colon + 1, rest.size());
                if (inline_body.empty()) {
                    pending_ = body;
                    pending_indent_ = ll.indent;
                } else {
                    for (auto& piece : split_top(inline_body, ";")) {
                        if (!piece.empty()) simple(piece, body, ll.line);
                    }
                }
                return;
            }
        }
        for (auto& piece : split_top(toks, ";")) {
            if (!piece.empty()) simple(piece, block, ll.line);
        }
    }

    int new_block(int parent, BlockKind kind, int header_stmt) {
        Block b;
        b.parent = parent;
        b.kind = kind;
        b.header = header_stmt;
        file_.blocks.push_back(b);
        return static_cast<int>(file_.blocks.size()) - 1;
    }

    Statement& add(int block, int line, StmtKind kind) {
        Statement st;
        st.line = line;
        st.kind = kind;
        st.block = block;
        file_.statements.push_back(std::move(st));
        return file_.statements.back();
    }

    int last_id() const { return static_cast<int>(file_.statements.size()) - 1; }

    // Returns the body block.
    int header(const Range& h, int block, int line) {
        const std::string kw = h[0].s;
        Range rest = slice(h, 1, h.size());
        const auto prev = last_compound_.count(block) ? last_compound_[block] : -1;

        if (kw == "def" || kw == "class") {
            Statement& st = add(block, line, kw == "def" ? StmtKind::Def : StmtKind::Class);
            const int id = last_id();
            const int body = new_block(block, kw == "def" ? BlockKind::Function : BlockKind::Class, id);
            st.body_block = body;
            StatementAnalyzer an(st);
            if (!rest.empty() && is_plain_name(rest[0])) {
                st.def_name = rest[0].s;
                add_unique(st.defs, st.def_name);
                add_unique(st.decls, st.def_name);
            }
            if (rest.size() > 1 && is_op(rest[1], "(")) {
                const std::size_t close = matching_close(rest, 1);
                Range inside = slice(rest, 2, close);
                if (kw == "def") {
                    params(st, inside, an);
                    file_.blocks[static_cast<std::size_t>(body)].params = st.params;
                } else {
                    an.expr(inside);
                }
            }
            st.exported = kw == "def" && block == 0 && !st.def_name.empty() && st.def_name[0] != '_';
            last_compound_[block] = -1;
            return body;
        }

        Statement* st = nullptr;
        int body = -1;
        if (kw == "if" || kw == "while") {
            st = &add(block, line, kw == "if" ? StmtKind::If : StmtKind::While);
            StatementAnalyzer(*st).expr(rest);
            const int id = last_id();
            body = new_block(block, BlockKind::Body, id);
            file_.blocks[body].control = id;
            if (kw == "if") {
                file_.blocks[body].chain = next_chain_++;
                file_.blocks[body].branch = 0;
                prev_body_[id] = body;
            } else {
                file_.blocks[body].loop = true;
            }
            last_compound_[block] = id;
            return body;
        }
        if (kw == "for") {
            st = &add(block, line, StmtKind::For);
            const std::size_t in = find_top(rest, [](const Tok& t) { return is_kw(t, "in"); });
            StatementAnalyzer an(*st);
            an.targets(slice(rest, 0, in));
            an.expr(slice(rest, in + 1, rest.size()));
            const int id = last_id();
            body = new_block(block, BlockKind::Body, id);
            file_.blocks[body].control = id;
            file_.blocks[body].loop = true;
            last_compound_[block] = id;
            return body;
        }
        if (kw == "elif" || kw == "else") {
            const StmtKind prev_kind = prev >= 0 ? file_.statements[static_cast<std::size_t>(prev)].kind
                                                 : StmtKind::Simple;
            st = &add(block, line, kw == "elif" ? StmtKind::Elif : StmtKind::Else);
            StatementAnalyzer(*st).expr(rest);
            const int id = last_id();
            body = new_block(block, BlockKind::Body, id);
            file_.blocks[body].control = id;
            if (prev >= 0 && (prev_kind == StmtKind::If || prev_kind == StmtKind::Elif)) {
                st->control_override = prev;
                const Block& prev_body = file_.blocks[static_cast<std::size_t>(prev_body_[prev])];
                file_.blocks[body].chain = prev_body.chain;
                file_.blocks[body].branch = prev_body.branch + 1;
            } else if (prev >= 0 && (prev_kind == StmtKind::For || prev_kind == StmtKind::While)) {
                st->control_override = prev;
            } else if (prev >= 0 && (prev_kind == StmtKind::Try || prev_kind == StmtKind::Except)) {
                // try/else runs when the body did not raise.
                st->control_override = try_of_[prev];
            }
            last_compound_[block] = kw == "elif" ? id : -1;
            prev_body_[id] = body;
            return body;
        }
        if (kw == "try" || kw == "finally" || kw == "with") {
            st = &add(block, line, kw == "try" ? StmtKind::Try : kw == "finally" ? StmtKind::Finally : StmtKind::With);
            if (kw == "with") with_items(*st, rest);
            const int id = last_id();
            body = new_block(block, BlockKind::Body, id);
            file_.blocks[body].inherit_control = true;
            if (kw == "try") {
                try_of_[id] = id;
                last_compound_[block] = id;
            } else {
                last_compound_[block] = -1;
            }
            return body;
        }
        // except
        st = &add(block, line, StmtKind::Except);
        const std::size_t as = find_top(rest, [](const Tok& t) { return is_kw(t, "as"); });
        StatementAnalyzer an(*st);
        an.expr(slice(rest, 0, as));
        if (as < rest.size()) an.targets(slice(rest, as + 1, rest.size()));
        const int id = last_id();
        if (prev >= 0 && try_of_.count(prev)) {
            st->control_override = try_of_[prev];
            try_of_[id] = try_of_[prev];
        }
        body = new_block(block, BlockKind::Body, id);
        file_.blocks[body].control = id;
        last_compound_[block] = id;
        return body;
    }

    void params(Statement& st, const Range& inside, StatementAnalyzer& an) {
        for (auto& p : split_top(inside, ",")) {
            Range r = p;
            while (!r.empty() && (is_op(r.front(), "*") || is_op(r.front(), "**"))) r = slice(r, 1, r.size());
            if (r.empty() || !is_plain_name(r[0])) continue;
            st.params.push_back(r[0].s);
            const std::size_t eq = find_top(r, [](const Tok& t) { return is_op(t, "="); });
            if (eq < r.size()) an.expr(slice(r, eq + 1, r.size()));
        }
    }

    void with_items(Statement& st, Range rest) {
        if (!rest.empty() && is_op(rest.front(), "(") && matching_close(rest, 0) == rest.size() - 1 &&
            find_top(slice(rest, 1, rest.size() - 1), [](const Tok& t) { return is_kw(t, "as"); }) < rest.size() - 2) {
            rest = slice(rest, 1, rest.size() - 1);
        }
        StatementAnalyzer an(st);
        for (auto& item : split_top(rest, ",")) {
            const std::size_t as = find_top(item, [](const Tok& t) { return is_kw(t, "as"); });
            an.expr(slice(item, 0, as));
            if (as < item.size()) an.targets(slice(item, as + 1, item.size()));
        }
    }

    void simple(const Range& r, int block, int line) {
        last_compound_[block] = -1;
        const Tok& first = r[0];
        if (is_kw(first, "import") || is_kw(first, "from")) {
            Statement& st = add(block, line, StmtKind::Import);
            imports(st, r);
            return;
        }
        if (is_kw(first, "global") || is_kw(first, "nonlocal")) {
            Statement& st = add(block, line, StmtKind::Simple);
            for (std::size_t i = 1; i < r.size(); ++i) {
                if (is_plain_name(r[i])) add_unique(st.globals, r[i].s);
            }
            return;
        }
        if (is_kw(first, "return")) {
            Statement& st = add(block, line, StmtKind::Return);
            st.is_return = true;
            StatementAnalyzer(st).expr(slice(r, 1, r.size()));
            return;
        }
        Statement& st = add(block, line, StmtKind::Simple);
        StatementAnalyzer an(st);

        static const std::set<std::string> aug{"+=", "-=", "*=", "/=", "//=", "%=", "**=", ">>=", "<<=", "&=", "|=",
                                               "^=", "@="};
        const std::size_t aug_at = find_top(r, [](const Tok& t) { return t.kind == Tok::Op && aug.count(t.s); });
        if (aug_at < r.size()) {
            const Range target = slice(r, 0, aug_at);
            if (target.size() == 1 && is_plain_name(target[0])) {
                add_unique(st.weak_defs, target[0].s);
                add_unique(st.decls, target[0].s);
                add_unique(st.uses, target[0].s);
            } else {
                an.targets(target);
            }
            an.expr(slice(r, aug_at + 1, r.size()));
            return;
        }

        auto segments = split_top(r, "=");
        if (segments.size() > 1) {
            for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
                Range target = segments[i];
                const std::size_t colon = find_top(target, [](const Tok& t) { return is_op(t, ":"); });
                if (colon < target.size()) target = slice(target, 0, colon);
                an.targets(target);
            }
            const Range& value = segments.back();
            an.expr(value);
            if (segments.size() == 2 && segments[0].size() == 1 && is_plain_name(segments[0][0]) && is_dotted(value)) {
                st.alias_of = dotted_parts(value);
            }
            return;
        }
        // Bare annotation "x: T" defines nothing.
        const std::size_t colon = find_top(r, [](const Tok& t) { return is_op(t, ":"); });
        if (colon < r.size() && colon == 1 && is_plain_name(r[0])) return;
        an.expr(r);
    }

    void imports(Statement& st, const Range& r) {
        auto bind = [&](Import imp) {
            if (imp.local != "*") {
                add_unique(st.defs, imp.local);
                add_unique(st.decls, imp.local);
            }
            st.imports.push_back(std::move(imp));
        };
        if (is_kw(r[0], "import")) {
            for (auto& item : split_top(slice(r, 1, r.size()), ",")) {
                const std::size_t as = find_top(item, [](const Tok& t) { return is_kw(t, "as"); });
                const Range mod = slice(item, 0, as);
                if (!is_dotted(mod)) continue;
                const auto parts = dotted_parts(mod);
                std::string module;
                for (const auto& p : parts) module += (module.empty() ? "" : ".") + p;
                if (as < item.size() && as + 1 < item.size()) {
                    bind({item[as + 1].s, module, "", 0});
                } else {
                    bind({parts[0], parts[0], "", 0});
                    // Keep the full dotted name reachable for resolution.
                    if (parts.size() > 1) st.imports.push_back({"", module, "", 0});
                }
            }
            return;
        }
        // from [.]*module import names
        std::size_t i = 1;
        int level = 0;
        std::string module;
        for (; i < r.size() && !is_kw(r[i], "import"); ++i) {
            if (is_op(r[i], ".")) {
                if (module.empty()) ++level;
                else module += ".";
            } else if (is_op(r[i], "...")) {
                level += 3;
            } else if (r[i].kind == Tok::Name) {
                module += r[i].s;
            }
        }
        Range names = slice(r, i + 1, r.size());
        if (!names.empty() && is_op(names.front(), "(")) names = slice(names, 1, names.size() - 1);
        for (auto& item : split_top(names, ",")) {
            if (item.empty()) continue;
            if (is_op(item[0], "*")) {
                st.imports.push_back({"*", module, "*", level});
                continue;
            }
            const std::string member = item[0].s;
            const std::size_t as = find_top(item, [](const Tok& t) { return is_kw(t, "as"); });
            const std::string local = as + 1 < item.size() ? item[as + 1].s : member;
            bind({local, module, member, level});
        }
    }

    File file_;
    std::vector<Level> stack_;
    int pending_ = -1;
    int pending_indent_ = 0;
    int next_chain_ = 0;
    std::map<int, int> last_compound_;  // block -> last compound header still open for elif/else/except
    std::map<int, int> prev_body_;      // if/elif header -> its body block
    std::map<int, int> try_of_;         // try/except header -> owning try
};

}  // namespace

bool looks_minified(const std::vector<std::string>& lines) {
    std::size_t total = 0;
    for (const auto& l : lines) {
        if (l.size() > 2000) return true;
        total += l.size();
    }
    return lines.size() >= 1 && total > 4000 && total / lines.size() > 300;
}

File parse_python(const std::string& path, const std::string& source) {
    PythonParser parser(path, source);
    return parser.run(source);
}

}  // namespace intelguard::frontend
