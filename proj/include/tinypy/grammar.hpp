#ifndef TINYPY_GRAMMAR_HPP
#define TINYPY_GRAMMAR_HPP

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tinypy {

// A right-hand-side symbol. Terminals carry the exact characters they emit.
// NonTerminal names refer to a production; Hook and Computed names are
// resolved by the derivation engine instead of by a production rule (hooks
// against the set of in-scope variables, computed symbols by an arithmetic
// formula).
enum class SymbolKind : uint8_t { Terminal, NonTerminal, Hook, Computed };

struct Symbol {
    SymbolKind kind = SymbolKind::Terminal;
    std::string text;  // terminal characters, or the symbol name

    static Symbol terminal(std::string t) { return {SymbolKind::Terminal, std::move(t)}; }
    static Symbol nonterminal(std::string n) { return {SymbolKind::NonTerminal, std::move(n)}; }
    static Symbol hook(std::string n) { return {SymbolKind::Hook, std::move(n)}; }
    static Symbol computed(std::string n) { return {SymbolKind::Computed, std::move(n)}; }

    friend bool operator==(const Symbol&, const Symbol&) = default;
};

using SymbolSeq = std::vector<Symbol>;

struct Production {
    std::string lhs;
    std::vector<SymbolSeq> alternatives;  // order preserved from the source

    friend bool operator==(const Production&, const Production&) = default;
};

struct Grammar {
    std::vector<Production> productions;  // definition order
    std::string start;
    std::set<std::string> hooks;
    std::set<std::string> computed;

    static constexpr size_t npos = static_cast<size_t>(-1);

    const Production* find(std::string_view name) const;
    size_t index_of(std::string_view name) const;  // npos when absent
    bool is_hook(std::string_view name) const { return hooks.count(std::string(name)) != 0; }
    bool is_computed(std::string_view name) const { return computed.count(std::string(name)) != 0; }

    friend bool operator==(const Grammar&, const Grammar&) = default;
};

struct ValidationIssue {
    std::string kind;    // "UndefinedNonterminal", "UnreachableRule", "UnusedToken", ...
    std::string symbol;

    friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

struct ValidationReport {
    std::vector<ValidationIssue> errors;
    std::vector<ValidationIssue> warnings;

    bool ok() const { return errors.empty(); }
    bool has(const std::vector<ValidationIssue>& v, std::string_view kind, std::string_view symbol) const;
    bool has_error(std::string_view kind, std::string_view symbol) const { return has(errors, kind, symbol); }
    bool has_warning(std::string_view kind, std::string_view symbol) const { return has(warnings, kind, symbol); }

    friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

class GrammarError : public std::runtime_error {
public:
    enum class Kind { Syntax, DuplicateRule };

    GrammarError(Kind k, int line, std::string symbol, const std::string& message)
        : std::runtime_error(message), kind(k), line(line), symbol(std::move(symbol)) {}

    Kind kind;
    int line;            // 1-based source line, 0 when not tied to a line
    std::string symbol;  // offending rule name for DuplicateRule
};

// Parses the grammar file format:
//   <name> ::= alt1 | alt2 | ...
// Alternatives are whitespace-separated tokens; `<x>` references a rule (or a
// declared hook/computed symbol), `""` is the empty sequence, `\n` `\t` `\s`
// are the newline/tab/space terminals, `"..."` quotes an arbitrary terminal,
// and anything else is a bare terminal. A rule may continue onto following
// lines until the next `<name> ::=` line. `#` starts a comment line.
// Directives on their own line: `@start name`, `@hook name`, `@computed name`.
// Without `@start`, the first rule is the start symbol.
Grammar parse_grammar(std::string_view text);

// Inverse of parse_grammar up to structural equality.
std::string serialize(const Grammar& grammar);

// Checks the Grammar invariants. Errors make the grammar unusable for
// derivation; warnings point at dead rules. Pure: equal grammars yield equal
// reports.
ValidationReport validate(const Grammar& grammar);

// Productions reachable from the start symbol, as indices into
// grammar.productions. The computed symbol `final` counts as a reference to
// `initial`, `step` and `execution_count`, which the engine draws from when
// it evaluates the bound formula.
std::vector<size_t> reachable_productions(const Grammar& grammar);

// Every (production index, alternative index) pair reachable from start.
std::vector<std::pair<size_t, size_t>> reachable_alternatives(const Grammar& grammar);

// The built-in grammar: assignments, if/elif/else conditionals and bounded
// for loops over single-letter variables and single digits, organized as six
// complexity levels under the start symbol `all`. Parsed once from the
// embedded grammar file; validates with zero errors.
const Grammar& builtin_tinypy();

// The embedded grammar file the builtin is parsed from (what --dump-grammar
// emits).
std::string_view builtin_tinypy_text();

}  // namespace tinypy

#endif  // TINYPY_GRAMMAR_HPP
