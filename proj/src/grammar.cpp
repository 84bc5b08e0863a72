#include "tinypy/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace tinypy {

const Production* Grammar::find(std::string_view name) const {
    for (const Production& p : productions)
        if (p.lhs == name) return &p;
    return nullptr;
}

size_t Grammar::index_of(std::string_view name) const {
    for (size_t i = 0; i < productions.size(); ++i)
        if (productions[i].lhs == name) return i;
    return npos;
}

bool ValidationReport::has(const std::vector<ValidationIssue>& v, std::string_view kind,
                           std::string_view symbol) const {
    return std::any_of(v.begin(), v.end(), [&](const ValidationIssue& i) {
        return i.kind == kind && i.symbol == symbol;
    });
}

namespace {

[[noreturn]] void syntax_error(int line, const std::string& msg) {
    throw GrammarError(GrammarError::Kind::Syntax, line, "",
                       "syntax error at line " + std::to_string(line) + ": " + msg);
}

struct RawToken {
    enum class Kind { Pipe, Reference, Terminal, Empty } kind;
    std::string text;
    int line;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

bool is_name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '.';
}

// Splits one rule's right-hand side into tokens. `line` tracks the source
// line of each token for error reporting.
void lex_rhs(std::string_view rhs, int line_of_char_0, const std::vector<int>& line_breaks,
             std::vector<RawToken>& out) {
    auto line_at = [&](size_t pos) {
        int line = line_of_char_0;
        for (int brk : line_breaks)
            if (static_cast<size_t>(brk) <= pos) ++line;
        return line;
    };
    size_t i = 0;
    while (i < rhs.size()) {
        char c = rhs[i];
        if (is_space(c) || c == '\n') {
            ++i;
            continue;
        }
        int line = line_at(i);
        if (c == '|') {
            out.push_back({RawToken::Kind::Pipe, "|", line});
            ++i;
        } else if (c == '<' && i + 1 < rhs.size() && is_name_char(rhs[i + 1])) {
            // `<name>` is a reference; any other `<` (the relational
            // operators `<` and `<=`) is an ordinary terminal.
            size_t j = i + 1;
            while (j < rhs.size() && is_name_char(rhs[j])) ++j;
            if (j >= rhs.size() || rhs[j] != '>')
                syntax_error(line, "unterminated <...> reference");
            out.push_back({RawToken::Kind::Reference, std::string(rhs.substr(i + 1, j - i - 1)), line});
            i = j + 1;
        } else if (c == '"') {
            if (i + 1 < rhs.size() && rhs[i + 1] == '"' &&
                (i + 2 >= rhs.size() || is_space(rhs[i + 2]) || rhs[i + 2] == '\n' || rhs[i + 2] == '|')) {
                out.push_back({RawToken::Kind::Empty, "", line});
                i += 2;
                continue;
            }
            std::string text;
            size_t j = i + 1;
            while (j < rhs.size() && rhs[j] != '"') {
                if (rhs[j] == '\\') {
                    if (j + 1 >= rhs.size()) syntax_error(line, "dangling escape in quoted terminal");
                    char e = rhs[j + 1];
                    switch (e) {
                        case 'n': text += '\n'; break;
                        case 't': text += '\t'; break;
                        case 's': text += ' '; break;
                        case '\\': text += '\\'; break;
                        case '"': text += '"'; break;
                        default: syntax_error(line, std::string("unknown escape \\") + e);
                    }
                    j += 2;
                } else {
                    text += rhs[j++];
                }
            }
            if (j >= rhs.size()) syntax_error(line, "unterminated quoted terminal");
            out.push_back({RawToken::Kind::Terminal, std::move(text), line});
            i = j + 1;
        } else {
            size_t j = i;
            while (j < rhs.size() && !is_space(rhs[j]) && rhs[j] != '\n' && rhs[j] != '|') ++j;
            std::string word(rhs.substr(i, j - i));
            if (word == "\\n")
                out.push_back({RawToken::Kind::Terminal, "\n", line});
            else if (word == "\\t")
                out.push_back({RawToken::Kind::Terminal, "\t", line});
            else if (word == "\\s")
                out.push_back({RawToken::Kind::Terminal, " ", line});
            else
                out.push_back({RawToken::Kind::Terminal, std::move(word), line});
            i = j;
        }
    }
}

struct RawRule {
    std::string lhs;
    std::string rhs;               // accumulated over continuation lines
    int first_line = 0;
    std::vector<int> line_breaks;  // offsets in rhs where a new source line starts
};

}  // namespace

Grammar parse_grammar(std::string_view text) {
    Grammar g;
    std::vector<RawRule> rules;
    std::map<std::string, int> seen_lhs;

    int line_no = 0;
    size_t pos = 0;
    RawRule* current = nullptr;
    while (pos <= text.size()) {
        if (pos == text.size() && line_no > 0) break;
        size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string_view::npos) continue;  // blank
        if (line[first] == '#') continue;               // comment

        if (line[first] == '@') {
            std::string word(line.substr(first));
            std::istringstream is(word);
            std::string directive, name, extra;
            is >> directive >> name;
            if (name.empty() || (is >> extra && !extra.empty()))
                syntax_error(line_no, "malformed directive: " + word);
            if (directive == "@start")
                g.start = name;
            else if (directive == "@hook")
                g.hooks.insert(name);
            else if (directive == "@computed")
                g.computed.insert(name);
            else
                syntax_error(line_no, "unknown directive " + directive);
            current = nullptr;
            continue;
        }

        // Rule header: <name> ::= ...
        size_t sep = line.find("::=");
        if (line[first] == '<' && sep != std::string_view::npos) {
            size_t close = line.find('>', first);
            if (close == std::string_view::npos || close > sep)
                syntax_error(line_no, "malformed rule head");
            std::string_view between = line.substr(close + 1, sep - close - 1);
            if (between.find_first_not_of(" \t") != std::string_view::npos)
                syntax_error(line_no, "malformed rule head");
            std::string lhs(line.substr(first + 1, close - first - 1));
            if (lhs.empty() || lhs.find_first_of(" \t<>") != std::string::npos)
                syntax_error(line_no, "malformed rule name <" + lhs + ">");
            if (seen_lhs.count(lhs))
                throw GrammarError(GrammarError::Kind::DuplicateRule, line_no, lhs,
                                   "duplicate rule <" + lhs + "> at line " + std::to_string(line_no) +
                                       " (first defined at line " + std::to_string(seen_lhs[lhs]) + ")");
            seen_lhs[lhs] = line_no;
            rules.push_back({lhs, std::string(line.substr(sep + 3)), line_no, {}});
            current = &rules.back();
            continue;
        }

        // Continuation of the previous rule.
        if (!current) syntax_error(line_no, "expected <name> ::= rule");
        current->line_breaks.push_back(static_cast<int>(current->rhs.size()) + 1);
        current->rhs += "\n";
        current->rhs += std::string(line);
    }

    if (rules.empty()) throw GrammarError(GrammarError::Kind::Syntax, 0, "", "no rules");
    if (g.start.empty()) g.start = rules.front().lhs;

    for (const RawRule& r : rules) {
        std::vector<RawToken> tokens;
        lex_rhs(r.rhs, r.first_line, r.line_breaks, tokens);

        Production p;
        p.lhs = r.lhs;
        SymbolSeq seq;
        bool saw_empty_marker = false;
        bool any_token_since_pipe = false;
        auto flush = [&](int line) {
            if (!any_token_since_pipe) syntax_error(line, "empty alternative in <" + r.lhs + "> (use \"\")");
            if (saw_empty_marker && !seq.empty())
                syntax_error(line, "\"\" must stand alone in its alternative");
            p.alternatives.push_back(std::move(seq));
            seq.clear();
            saw_empty_marker = false;
            any_token_since_pipe = false;
        };
        for (const RawToken& t : tokens) {
            switch (t.kind) {
                case RawToken::Kind::Pipe:
                    flush(t.line);
                    break;
                case RawToken::Kind::Empty:
                    if (!seq.empty()) syntax_error(t.line, "\"\" must stand alone in its alternative");
                    saw_empty_marker = true;
                    any_token_since_pipe = true;
                    break;
                case RawToken::Kind::Reference:
                    if (saw_empty_marker) syntax_error(t.line, "\"\" must stand alone in its alternative");
                    seq.push_back(Symbol::nonterminal(t.text));  // kind resolved below
                    any_token_since_pipe = true;
                    break;
                case RawToken::Kind::Terminal:
                    if (saw_empty_marker) syntax_error(t.line, "\"\" must stand alone in its alternative");
                    if (t.text.empty()) syntax_error(t.line, "empty terminal");
                    seq.push_back(Symbol::terminal(t.text));
                    any_token_since_pipe = true;
                    break;
            }
        }
        flush(tokens.empty() ? r.first_line : tokens.back().line);
        g.productions.push_back(std::move(p));
    }

    // Classify references against the final hook/computed sets and check the
    // name-space invariants.
    for (const std::string& h : g.hooks)
        if (seen_lhs.count(h))
            syntax_error(seen_lhs[h], "rule <" + h + "> collides with @hook declaration");
    for (const std::string& c : g.computed) {
        if (seen_lhs.count(c))
            syntax_error(seen_lhs[c], "rule <" + c + "> collides with @computed declaration");
        if (c != "final")
            throw GrammarError(GrammarError::Kind::Syntax, 0, c,
                               "unsupported computed symbol <" + c + "> (only <final> is defined)");
    }
    for (Production& p : g.productions)
        for (SymbolSeq& alt : p.alternatives)
            for (Symbol& s : alt) {
                if (s.kind != SymbolKind::NonTerminal) continue;
                if (g.hooks.count(s.text))
                    s.kind = SymbolKind::Hook;
                else if (g.computed.count(s.text))
                    s.kind = SymbolKind::Computed;
            }

    return g;
}

namespace {

// A terminal may be written bare only when lexing the candidate back yields
// exactly that terminal.
bool bare_safe(const std::string& t) {
    if (t.empty()) return false;
    for (char c : t)
        if (!std::isprint(static_cast<unsigned char>(c)) || is_space(c) || c == '\n') return false;
    try {
        std::vector<RawToken> toks;
        lex_rhs(t, 1, {}, toks);
        return toks.size() == 1 && toks[0].kind == RawToken::Kind::Terminal && toks[0].text == t;
    } catch (const GrammarError&) {
        return false;
    }
}

std::string render_terminal(const std::string& t) {
    if (t == "\n") return "\\n";
    if (t == "\t") return "\\t";
    if (t == " ") return "\\s";
    if (bare_safe(t)) return t;
    std::string out = "\"";
    for (char c : t) {
        switch (c) {
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\\': out += "\\\\"; break;
            case '"': out += "\\\""; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

}  // namespace

std::string serialize(const Grammar& g) {
    std::string out;
    out += "@start " + g.start + "\n";
    for (const std::string& h : g.hooks) out += "@hook " + h + "\n";
    for (const std::string& c : g.computed) out += "@computed " + c + "\n";
    out += "\n";
    for (const Production& p : g.productions) {
        out += "<" + p.lhs + "> ::= ";
        for (size_t a = 0; a < p.alternatives.size(); ++a) {
            if (a) out += " | ";
            const SymbolSeq& alt = p.alternatives[a];
            if (alt.empty()) {
                out += "\"\"";
                continue;
            }
            for (size_t s = 0; s < alt.size(); ++s) {
                if (s) out += " ";
                const Symbol& sym = alt[s];
                if (sym.kind == SymbolKind::Terminal)
                    out += render_terminal(sym.text);
                else
                    out += "<" + sym.text + ">";
            }
        }
        out += "\n";
    }
    return out;
}

namespace {

// Names the computed bound formula draws values from. Referencing <final>
// makes these rules live even though no production mentions them directly.
const char* const kFinalDependencies[] = {"initial", "step", "execution_count"};

}  // namespace

std::vector<size_t> reachable_productions(const Grammar& g) {
    std::vector<size_t> order;
    std::set<size_t> seen;
    size_t start = g.index_of(g.start);
    if (start == Grammar::npos) return order;

    std::vector<size_t> stack = {start};
    seen.insert(start);
    auto push_name = [&](std::string_view name) {
        size_t idx = g.index_of(name);
        if (idx != Grammar::npos && seen.insert(idx).second) stack.push_back(idx);
    };
    while (!stack.empty()) {
        size_t cur = stack.back();
        stack.pop_back();
        order.push_back(cur);
        for (const SymbolSeq& alt : g.productions[cur].alternatives)
            for (const Symbol& s : alt) {
                if (s.kind == SymbolKind::NonTerminal) push_name(s.text);
                if (s.kind == SymbolKind::Computed && s.text == "final")
                    for (const char* dep : kFinalDependencies) push_name(dep);
            }
    }
    std::sort(order.begin(), order.end());
    return order;
}

std::vector<std::pair<size_t, size_t>> reachable_alternatives(const Grammar& g) {
    std::vector<std::pair<size_t, size_t>> pairs;
    for (size_t p : reachable_productions(g))
        for (size_t a = 0; a < g.productions[p].alternatives.size(); ++a) pairs.emplace_back(p, a);
    return pairs;
}

ValidationReport validate(const Grammar& g) {
    ValidationReport report;
    auto error = [&](std::string kind, std::string symbol) {
        report.errors.push_back({std::move(kind), std::move(symbol)});
    };
    auto warning = [&](std::string kind, std::string symbol) {
        report.warnings.push_back({std::move(kind), std::move(symbol)});
    };

    std::set<std::string> defined;
    for (const Production& p : g.productions) defined.insert(p.lhs);

    if (!defined.count(g.start)) error("UndefinedNonterminal", g.start);
    for (const std::string& h : g.hooks)
        if (defined.count(h)) error("HookCollision", h);
    for (const std::string& c : g.computed)
        if (defined.count(c)) error("HookCollision", c);

    // Referenced-but-undefined names, reported once each in reference order.
    std::set<std::string> flagged;
    std::set<std::string> referenced;
    for (const Production& p : g.productions)
        for (const SymbolSeq& alt : p.alternatives)
            for (const Symbol& s : alt) {
                if (s.kind == SymbolKind::Terminal) continue;
                if (s.kind == SymbolKind::Computed && s.text == "final")
                    for (const char* dep : kFinalDependencies) referenced.insert(dep);
                if (s.kind == SymbolKind::Hook && g.hooks.count(s.text)) continue;
                if (s.kind == SymbolKind::Computed && g.computed.count(s.text)) continue;
                referenced.insert(s.text);
                if (!defined.count(s.text) && !g.hooks.count(s.text) && !g.computed.count(s.text) &&
                    flagged.insert(s.text).second)
                    error("UndefinedNonterminal", s.text);
            }

    if (!report.errors.empty()) return report;

    std::set<size_t> reachable;
    for (size_t i : reachable_productions(g)) reachable.insert(i);
    for (size_t i = 0; i < g.productions.size(); ++i) {
        const std::string& name = g.productions[i].lhs;
        if (!referenced.count(name) && name != g.start) warning("UnusedToken", name);
        if (!reachable.count(i)) warning("UnreachableRule", name);
    }
    return report;
}

const Grammar& builtin_tinypy() {
    static const Grammar g = parse_grammar(builtin_tinypy_text());
    return g;
}

}  // namespace tinypy
