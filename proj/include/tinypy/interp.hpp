#ifndef TINYPY_INTERP_HPP
#define TINYPY_INTERP_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tinypy {

// ---------------------------------------------------------------------------
// Tokens

enum class TokenKind : uint8_t {
    Ident, Int,
    Plus, Minus, Star, Slash,
    Lt, Gt, Le, Ge, Ne, EqEq,
    Assign, LParen, RParen, Colon, Comma,
    And, Or, Not,
    If, Elif, Else, For, In, Range, Print,
    Newline, Indent, End,
};

struct Token {
    TokenKind kind;
    std::string text;
    int line;  // 1-based
};

class InterpParseError : public std::runtime_error {
public:
    InterpParseError(int line, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg), line(line) {}
    int line;
};

// Lexes the supported subset. `<=` `>=` `!=` `==` are single tokens, a tab at
// line start is Indent, spaces elsewhere are skipped. A trailing Newline is
// synthesized when the source does not end with one; the list always ends
// with End. Throws InterpParseError on unknown characters.
std::vector<Token> tokenize(std::string_view source);

// ---------------------------------------------------------------------------
// Program tree

enum class BinOp : uint8_t { Add, Sub, Mul, Div, Lt, Gt, Le, Ge, Ne, Eq, And, Or };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
    enum class Kind : uint8_t { IntLit, Var, Binary, Not, Paren };
    Kind kind;
    int line;
    int64_t literal = 0;   // IntLit
    std::string name;      // Var
    BinOp op{};            // Binary
    ExprPtr lhs, rhs;      // Binary
    ExprPtr inner;         // Not, Paren
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct IfArm {
    ExprPtr condition;
    StmtPtr body;
};

struct Stmt {
    enum class Kind : uint8_t { Assign, Print, If, For };
    Kind kind;
    int line;
    // Assign
    std::string target;
    ExprPtr value;
    // Print
    ExprPtr print_arg;
    // If: one arm per if/elif header, in source order
    std::vector<IfArm> arms;
    StmtPtr else_body;
    // For
    std::string loop_var;
    ExprPtr initial;
    ExprPtr final_bound;
    ExprPtr step;  // null for the two-argument range form
    StmtPtr body;
};

using ProgramAst = std::vector<StmtPtr>;

// Recursive-descent parser for the subset. Blocks are exactly one tab-indented
// simple statement (assignment or print). if/elif/else headers group into a
// single If statement. A for header is `for v in range(initial, final[, step])`
// where step must be a positive integer literal. Operator precedence follows
// the reference language: or < and < not < comparisons < +- < */ < atoms.
// Throws InterpParseError on any structural violation.
ProgramAst parse_program(const std::vector<Token>& tokens);

// ---------------------------------------------------------------------------
// Values and results

// Runtime value with reference-language semantics. Int arithmetic is exact
// within a guarded envelope of |v| <= 2^63 - 1; results outside it raise
// OverflowGuard instead of wrapping.
struct Value {
    enum class Kind : uint8_t { Int, Float, Bool };
    Kind kind = Kind::Int;
    int64_t i = 0;
    double f = 0.0;
    bool b = false;

    static Value from_int(int64_t v) { Value r; r.kind = Kind::Int; r.i = v; return r; }
    static Value from_float(double v) { Value r; r.kind = Kind::Float; r.f = v; return r; }
    static Value from_bool(bool v) { Value r; r.kind = Kind::Bool; r.b = v; return r; }
};

enum class RunError : uint8_t { DivisionByZero, OverflowGuard, StepLimit, UnboundVariable, ParseError };
constexpr size_t kRunErrorCount = 5;
std::string_view to_string(RunError e);

struct Limits {
    uint64_t max_steps = 100000;  // statement-execution budget
};

struct RunResult {
    std::optional<RunError> error;  // empty means Ok
    std::string output;             // exact concatenation of print lines (Ok only)
    int error_line = 0;

    bool ok() const { return !error.has_value(); }
    static RunResult success(std::string out) { return {std::nullopt, std::move(out), 0}; }
    static RunResult failure(RunError e, int line) { return {e, {}, line}; }
};

// Executes a parsed program against an empty environment, capturing print
// output. Every statement execution (including each loop-body iteration)
// consumes one step from the budget; StepLimit is returned exactly when the
// budget would be exceeded.
RunResult evaluate(const ProgramAst& program, const Limits& limits = {});

// tokenize + parse_program + evaluate; parse failures surface as
// RunError::ParseError instead of an exception.
RunResult run(std::string_view source, const Limits& limits = {});

// ---------------------------------------------------------------------------
// Formatting

// Renders a value the way the reference interpreter prints it: integers in
// decimal, floats as the shortest decimal string that round-trips (always
// with a decimal point or exponent), booleans as True/False.
std::string format_value(const Value& v);

// The float piece of format_value, exposed for direct testing.
std::string format_double(double d);

// Correctly rounded double quotient of two 64-bit integers, matching the
// reference interpreter's exact-rational true division (casting both sides
// to double first would double-round when |operand| > 2^53).
double int_true_divide(int64_t numerator, int64_t denominator);

}  // namespace tinypy

#endif  // TINYPY_INTERP_HPP
