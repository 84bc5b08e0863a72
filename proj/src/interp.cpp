#include "tinypy/interp.hpp"

#include <cassert>
#include <charconv>
#include <cmath>
#include <cstring>

namespace tinypy {

std::string_view to_string(RunError e) {
    switch (e) {
        case RunError::DivisionByZero: return "DivisionByZero";
        case RunError::OverflowGuard: return "OverflowGuard";
        case RunError::StepLimit: return "StepLimit";
        case RunError::UnboundVariable: return "UnboundVariable";
        case RunError::ParseError: return "ParseError";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

TokenKind keyword_kind(std::string_view word) {
    if (word == "and") return TokenKind::And;
    if (word == "or") return TokenKind::Or;
    if (word == "not") return TokenKind::Not;
    if (word == "if") return TokenKind::If;
    if (word == "elif") return TokenKind::Elif;
    if (word == "else") return TokenKind::Else;
    if (word == "for") return TokenKind::For;
    if (word == "in") return TokenKind::In;
    if (word == "range") return TokenKind::Range;
    if (word == "print") return TokenKind::Print;
    return TokenKind::Ident;
}

}  // namespace

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    int line = 1;
    bool at_line_start = true;
    size_t i = 0;
    while (i < src.size()) {
        char c = src[i];
        if (c == '\n') {
            out.push_back({TokenKind::Newline, "\n", line});
            ++line;
            ++i;
            at_line_start = true;
            continue;
        }
        if (c == '\t') {
            if (at_line_start) out.push_back({TokenKind::Indent, "\t", line});
            ++i;  // mid-line tabs are plain whitespace
            continue;
        }
        at_line_start = false;
        if (c == ' ') {
            ++i;
            continue;
        }
        if (c >= '0' && c <= '9') {
            size_t j = i;
            while (j < src.size() && src[j] >= '0' && src[j] <= '9') ++j;
            std::string text(src.substr(i, j - i));
            int64_t v = 0;
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (ec != std::errc() || ptr != text.data() + text.size())
                throw InterpParseError(line, "integer literal out of range: " + text);
            out.push_back({TokenKind::Int, std::move(text), line});
            i = j;
            continue;
        }
        if (is_ident_start(c)) {
            size_t j = i;
            while (j < src.size() && is_ident_char(src[j])) ++j;
            std::string word(src.substr(i, j - i));
            out.push_back({keyword_kind(word), std::move(word), line});
            i = j;
            continue;
        }
        auto two = [&](char a, char b) { return c == a && i + 1 < src.size() && src[i + 1] == b; };
        if (two('<', '=')) { out.push_back({TokenKind::Le, "<=", line}); i += 2; continue; }
        if (two('>', '=')) { out.push_back({TokenKind::Ge, ">=", line}); i += 2; continue; }
        if (two('!', '=')) { out.push_back({TokenKind::Ne, "!=", line}); i += 2; continue; }
        if (two('=', '=')) { out.push_back({TokenKind::EqEq, "==", line}); i += 2; continue; }
        TokenKind k;
        switch (c) {
            case '<': k = TokenKind::Lt; break;
            case '>': k = TokenKind::Gt; break;
            case '=': k = TokenKind::Assign; break;
            case '+': k = TokenKind::Plus; break;
            case '-': k = TokenKind::Minus; break;
            case '*': k = TokenKind::Star; break;
            case '/': k = TokenKind::Slash; break;
            case '(': k = TokenKind::LParen; break;
            case ')': k = TokenKind::RParen; break;
            case ':': k = TokenKind::Colon; break;
            case ',': k = TokenKind::Comma; break;
            default:
                throw InterpParseError(line, std::string("unexpected character '") + c + "'");
        }
        out.push_back({k, std::string(1, c), line});
        ++i;
    }
    if (!out.empty() && out.back().kind != TokenKind::Newline)
        out.push_back({TokenKind::Newline, "\n", line});
    out.push_back({TokenKind::End, "", line});
    return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
public:
    explicit Parser(const std::vector<Token>& toks) : toks_(toks) {}

    ProgramAst parse() {
        ProgramAst program;
        skip_blank_lines();
        while (peek().kind != TokenKind::End) {
            program.push_back(statement());
            skip_blank_lines();
        }
        return program;
    }

private:
    const std::vector<Token>& toks_;
    size_t pos_ = 0;

    const Token& peek(size_t ahead = 0) const {
        size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool check(TokenKind k) const { return peek().kind == k; }
    const Token& expect(TokenKind k, const char* what) {
        if (!check(k)) throw InterpParseError(peek().line, std::string("expected ") + what);
        return advance();
    }
    void skip_blank_lines() {
        while (check(TokenKind::Newline)) advance();
    }

    StmtPtr statement() {
        const Token& t = peek();
        switch (t.kind) {
            case TokenKind::Indent: throw InterpParseError(t.line, "unexpected indent");
            case TokenKind::Elif: throw InterpParseError(t.line, "elif without a matching if");
            case TokenKind::Else: throw InterpParseError(t.line, "else without a matching if");
            case TokenKind::If: return if_statement();
            case TokenKind::For: return for_statement();
            case TokenKind::Ident: return assignment();
            case TokenKind::Print: return print_statement();
            default: throw InterpParseError(t.line, "expected a statement");
        }
    }

    // Block body: exactly one tab-indented simple statement.
    StmtPtr block_body() {
        expect(TokenKind::Indent, "an indented block");
        const Token& t = peek();
        if (t.kind == TokenKind::Indent) throw InterpParseError(t.line, "unexpected indent");
        if (t.kind == TokenKind::If || t.kind == TokenKind::For)
            throw InterpParseError(t.line, "nested blocks are not supported");
        if (t.kind == TokenKind::Ident) return assignment();
        if (t.kind == TokenKind::Print) return print_statement();
        throw InterpParseError(t.line, "expected a statement after indent");
    }

    StmtPtr assignment() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::Assign;
        const Token& name = expect(TokenKind::Ident, "an identifier");
        s->line = name.line;
        s->target = name.text;
        expect(TokenKind::Assign, "'='");
        s->value = expression();
        expect(TokenKind::Newline, "end of line");
        return s;
    }

    StmtPtr print_statement() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::Print;
        s->line = expect(TokenKind::Print, "'print'").line;
        expect(TokenKind::LParen, "'('");
        s->print_arg = expression();
        expect(TokenKind::RParen, "')'");
        expect(TokenKind::Newline, "end of line");
        return s;
    }

    StmtPtr if_statement() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::If;
        s->line = expect(TokenKind::If, "'if'").line;
        IfArm first;
        first.condition = expression();
        expect(TokenKind::Colon, "':'");
        expect(TokenKind::Newline, "end of line");
        first.body = block_body();
        s->arms.push_back(std::move(first));
        while (check(TokenKind::Elif)) {
            advance();
            IfArm arm;
            arm.condition = expression();
            expect(TokenKind::Colon, "':'");
            expect(TokenKind::Newline, "end of line");
            arm.body = block_body();
            s->arms.push_back(std::move(arm));
        }
        if (check(TokenKind::Else)) {
            advance();
            expect(TokenKind::Colon, "':'");
            expect(TokenKind::Newline, "end of line");
            s->else_body = block_body();
        }
        return s;
    }

    StmtPtr for_statement() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::For;
        s->line = expect(TokenKind::For, "'for'").line;
        s->loop_var = expect(TokenKind::Ident, "a loop variable").text;
        expect(TokenKind::In, "'in'");
        expect(TokenKind::Range, "'range'");
        expect(TokenKind::LParen, "'('");
        s->initial = expression();
        expect(TokenKind::Comma, "','");
        s->final_bound = expression();
        if (check(TokenKind::Comma)) {
            advance();
            const Token& st = peek();
            s->step = expression();
            if (s->step->kind != Expr::Kind::IntLit || s->step->literal < 1)
                throw InterpParseError(st.line, "range step must be a positive integer literal");
        }
        expect(TokenKind::RParen, "')'");
        expect(TokenKind::Colon, "':'");
        expect(TokenKind::Newline, "end of line");
        s->body = block_body();
        return s;
    }

    // Precedence, loosest first: or, and, not, comparison, +-, */.
    ExprPtr expression() { return or_expr(); }

    ExprPtr or_expr() {
        ExprPtr lhs = and_expr();
        while (check(TokenKind::Or)) {
            int line = advance().line;
            lhs = binary(BinOp::Or, line, std::move(lhs), and_expr());
        }
        return lhs;
    }

    ExprPtr and_expr() {
        ExprPtr lhs = not_expr();
        while (check(TokenKind::And)) {
            int line = advance().line;
            lhs = binary(BinOp::And, line, std::move(lhs), not_expr());
        }
        return lhs;
    }

    ExprPtr not_expr() {
        if (check(TokenKind::Not)) {
            int line = advance().line;
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::Not;
            e->line = line;
            e->inner = not_expr();
            return e;
        }
        return comparison();
    }

    ExprPtr comparison() {
        ExprPtr lhs = arith();
        auto relop = [&](TokenKind k) -> std::optional<BinOp> {
            switch (k) {
                case TokenKind::Lt: return BinOp::Lt;
                case TokenKind::Gt: return BinOp::Gt;
                case TokenKind::Le: return BinOp::Le;
                case TokenKind::Ge: return BinOp::Ge;
                case TokenKind::Ne: return BinOp::Ne;
                case TokenKind::EqEq: return BinOp::Eq;
                default: return std::nullopt;
            }
        };
        if (auto op = relop(peek().kind)) {
            int line = advance().line;
            ExprPtr rhs = arith();
            if (relop(peek().kind))
                throw InterpParseError(peek().line, "chained comparisons are not supported");
            return binary(*op, line, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    ExprPtr arith() {
        ExprPtr lhs = term();
        while (check(TokenKind::Plus) || check(TokenKind::Minus)) {
            BinOp op = check(TokenKind::Plus) ? BinOp::Add : BinOp::Sub;
            int line = advance().line;
            lhs = binary(op, line, std::move(lhs), term());
        }
        return lhs;
    }

    ExprPtr term() {
        ExprPtr lhs = factor();
        while (check(TokenKind::Star) || check(TokenKind::Slash)) {
            BinOp op = check(TokenKind::Star) ? BinOp::Mul : BinOp::Div;
            int line = advance().line;
            lhs = binary(op, line, std::move(lhs), factor());
        }
        return lhs;
    }

    ExprPtr factor() {
        const Token& t = peek();
        if (t.kind == TokenKind::Int) {
            advance();
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::IntLit;
            e->line = t.line;
            std::from_chars(t.text.data(), t.text.data() + t.text.size(), e->literal);
            return e;
        }
        if (t.kind == TokenKind::Ident) {
            advance();
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::Var;
            e->line = t.line;
            e->name = t.text;
            return e;
        }
        if (t.kind == TokenKind::LParen) {
            advance();
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::Paren;
            e->line = t.line;
            e->inner = expression();
            expect(TokenKind::RParen, "')'");
            return e;
        }
        throw InterpParseError(t.line, "expected an expression");
    }

    static ExprPtr binary(BinOp op, int line, ExprPtr lhs, ExprPtr rhs) {
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::Binary;
        e->line = line;
        e->op = op;
        e->lhs = std::move(lhs);
        e->rhs = std::move(rhs);
        return e;
    }
};

}  // namespace

ProgramAst parse_program(const std::vector<Token>& tokens) { return Parser(tokens).parse(); }

// ---------------------------------------------------------------------------
// Arithmetic helpers

namespace {

using i128 = __int128;
using u128 = unsigned __int128;

constexpr int64_t kIntEnvelope = INT64_MAX;  // |v| <= 2^63 - 1

int bitlen(u128 v) {
    auto hi = static_cast<uint64_t>(v >> 64);
    if (hi) return 128 - __builtin_clzll(hi);
    auto lo = static_cast<uint64_t>(v);
    return lo ? 64 - __builtin_clzll(lo) : 0;
}

}  // namespace

double int_true_divide(int64_t numerator, int64_t denominator) {
    assert(denominator != 0);
    if (numerator == 0) return denominator < 0 ? -0.0 : 0.0;
    bool negative = (numerator < 0) != (denominator < 0);
    i128 wa = numerator, wb = denominator;
    u128 a = static_cast<u128>(wa < 0 ? -wa : wa);
    u128 b = static_cast<u128>(wb < 0 ? -wb : wb);

    // Scale so the integer quotient carries 55 or 56 significant bits, then
    // round to nearest-even over quotient + remainder sticky bit.
    int shift = 55 - (bitlen(a) - bitlen(b));
    u128 n, d;
    if (shift >= 0) {
        n = a << shift;
        d = b;
    } else {
        n = a;
        d = b << -shift;
    }
    u128 q = n / d;
    u128 r = n % d;
    int extra = bitlen(q) - 53;  // 2 or 3
    auto mantissa = static_cast<uint64_t>(q >> extra);
    u128 low = q & ((u128(1) << extra) - 1);
    u128 half = u128(1) << (extra - 1);
    bool sticky = r != 0;
    if (low > half || (low == half && (sticky || (mantissa & 1)))) ++mantissa;
    double magnitude = std::ldexp(static_cast<double>(mantissa), extra - shift);
    return negative ? -magnitude : magnitude;
}

namespace {

// -1/0/+1 ordering of an exact integer against a finite double.
int compare_int_double(int64_t i, double f) {
    if (f >= 9223372036854775808.0) return -1;   // f >= 2^63 > i
    if (f <= -9223372036854775808.0) return 1;   // f <= -2^63 < i (envelope keeps i > -2^63)
    double fl = std::floor(f);
    auto fi = static_cast<int64_t>(fl);
    if (i < fi) return -1;
    if (i > fi) return 1;
    return f > fl ? -1 : 0;
}

struct EvalError {
    RunError kind;
    int line;
};

class Interpreter {
public:
    explicit Interpreter(const Limits& limits) : steps_left_(limits.max_steps) {}

    RunResult exec_program(const ProgramAst& program) {
        try {
            for (const StmtPtr& s : program) exec(*s);
        } catch (const EvalError& e) {
            return RunResult::failure(e.kind, e.line);
        }
        return RunResult::success(std::move(out_));
    }

private:
    std::vector<std::pair<std::string, Value>> env_;
    std::string out_;
    uint64_t steps_left_;

    [[noreturn]] static void fail(RunError kind, int line) { throw EvalError{kind, line}; }

    Value* lookup(const std::string& name) {
        for (auto& [k, v] : env_)
            if (k == name) return &v;
        return nullptr;
    }

    void bind(const std::string& name, Value v) {
        if (Value* slot = lookup(name))
            *slot = v;
        else
            env_.emplace_back(name, v);
    }

    void exec(const Stmt& s) {
        if (steps_left_ == 0) fail(RunError::StepLimit, s.line);
        --steps_left_;
        switch (s.kind) {
            case Stmt::Kind::Assign:
                bind(s.target, eval(*s.value));
                break;
            case Stmt::Kind::Print: {
                Value v = eval(*s.print_arg);
                out_ += format_value(v);
                out_ += '\n';
                break;
            }
            case Stmt::Kind::If: {
                for (const IfArm& arm : s.arms)
                    if (truthy(eval(*arm.condition))) {
                        exec(*arm.body);
                        return;
                    }
                if (s.else_body) exec(*s.else_body);
                break;
            }
            case Stmt::Kind::For: {
                int64_t start = want_int(eval(*s.initial), s.line);
                int64_t stop = want_int(eval(*s.final_bound), s.line);
                int64_t step = s.step ? s.step->literal : 1;
                for (i128 v = start; v < stop; v += step) {
                    bind(s.loop_var, Value::from_int(static_cast<int64_t>(v)));
                    exec(*s.body);
                }
                break;
            }
        }
    }

    // range() arguments must be integers in this subset; anything else is a
    // program outside the supported language.
    static int64_t want_int(const Value& v, int line) {
        if (v.kind == Value::Kind::Int) return v.i;
        if (v.kind == Value::Kind::Bool) return v.b ? 1 : 0;
        fail(RunError::ParseError, line);
    }

    static bool truthy(const Value& v) {
        switch (v.kind) {
            case Value::Kind::Int: return v.i != 0;
            case Value::Kind::Float: return v.f != 0.0;
            case Value::Kind::Bool: return v.b;
        }
        return false;
    }

    Value eval(const Expr& e) {
        switch (e.kind) {
            case Expr::Kind::IntLit: return Value::from_int(e.literal);
            case Expr::Kind::Var: {
                Value* v = lookup(e.name);
                if (!v) fail(RunError::UnboundVariable, e.line);
                return *v;
            }
            case Expr::Kind::Paren: return eval(*e.inner);
            case Expr::Kind::Not: return Value::from_bool(!truthy(eval(*e.inner)));
            case Expr::Kind::Binary: break;
        }
        if (e.op == BinOp::And) {
            Value lhs = eval(*e.lhs);
            if (!truthy(lhs)) return Value::from_bool(false);
            return Value::from_bool(truthy(eval(*e.rhs)));
        }
        if (e.op == BinOp::Or) {
            Value lhs = eval(*e.lhs);
            if (truthy(lhs)) return Value::from_bool(true);
            return Value::from_bool(truthy(eval(*e.rhs)));
        }
        Value lhs = eval(*e.lhs);
        Value rhs = eval(*e.rhs);
        switch (e.op) {
            case BinOp::Add:
            case BinOp::Sub:
            case BinOp::Mul:
                return arith(e.op, lhs, rhs, e.line);
            case BinOp::Div:
                return divide(lhs, rhs, e.line);
            default:
                return Value::from_bool(compare(e.op, lhs, rhs));
        }
    }

    // Bools participate in arithmetic and comparisons as 0/1.
    static bool is_intlike(const Value& v) { return v.kind != Value::Kind::Float; }
    static int64_t as_int(const Value& v) { return v.kind == Value::Kind::Bool ? (v.b ? 1 : 0) : v.i; }
    static double as_double(const Value& v) {
        switch (v.kind) {
            case Value::Kind::Int: return static_cast<double>(v.i);
            case Value::Kind::Bool: return v.b ? 1.0 : 0.0;
            case Value::Kind::Float: return v.f;
        }
        return 0.0;
    }

    static Value arith(BinOp op, const Value& lhs, const Value& rhs, int line) {
        if (is_intlike(lhs) && is_intlike(rhs)) {
            i128 a = as_int(lhs), b = as_int(rhs);
            i128 r = op == BinOp::Add ? a + b : op == BinOp::Sub ? a - b : a * b;
            if (r > kIntEnvelope || r < -static_cast<i128>(kIntEnvelope))
                fail(RunError::OverflowGuard, line);
            return Value::from_int(static_cast<int64_t>(r));
        }
        double a = as_double(lhs), b = as_double(rhs);
        double r = op == BinOp::Add ? a + b : op == BinOp::Sub ? a - b : a * b;
        return Value::from_float(r);
    }

    static Value divide(const Value& lhs, const Value& rhs, int line) {
        if (is_intlike(lhs) && is_intlike(rhs)) {
            int64_t b = as_int(rhs);
            if (b == 0) fail(RunError::DivisionByZero, line);
            return Value::from_float(int_true_divide(as_int(lhs), b));
        }
        double b = as_double(rhs);
        if (b == 0.0) fail(RunError::DivisionByZero, line);
        return Value::from_float(as_double(lhs) / b);
    }

    static bool compare(BinOp op, const Value& lhs, const Value& rhs) {
        // cmp: -1/0/+1, or +2 for unordered (NaN involved).
        int cmp;
        if (is_intlike(lhs) && is_intlike(rhs)) {
            int64_t a = as_int(lhs), b = as_int(rhs);
            cmp = a < b ? -1 : a > b ? 1 : 0;
        } else if (!is_intlike(lhs) && !is_intlike(rhs)) {
            if (std::isnan(lhs.f) || std::isnan(rhs.f))
                cmp = 2;
            else
                cmp = lhs.f < rhs.f ? -1 : lhs.f > rhs.f ? 1 : 0;
        } else if (is_intlike(lhs)) {
            cmp = std::isnan(rhs.f) ? 2 : compare_int_double(as_int(lhs), rhs.f);
        } else {
            cmp = std::isnan(lhs.f) ? 2 : -compare_int_double(as_int(rhs), lhs.f);
        }
        if (cmp == 2) return op == BinOp::Ne;
        switch (op) {
            case BinOp::Lt: return cmp < 0;
            case BinOp::Gt: return cmp > 0;
            case BinOp::Le: return cmp <= 0;
            case BinOp::Ge: return cmp >= 0;
            case BinOp::Eq: return cmp == 0;
            case BinOp::Ne: return cmp != 0;
            default: return false;
        }
    }
};

}  // namespace

RunResult evaluate(const ProgramAst& program, const Limits& limits) {
    return Interpreter(limits).exec_program(program);
}

RunResult run(std::string_view source, const Limits& limits) {
    try {
        std::vector<Token> tokens = tokenize(source);
        ProgramAst program = parse_program(tokens);
        return evaluate(program, limits);
    } catch (const InterpParseError& e) {
        return RunResult::failure(RunError::ParseError, e.line);
    }
}

std::string format_value(const Value& v) {
    switch (v.kind) {
        case Value::Kind::Int: return std::to_string(v.i);
        case Value::Kind::Float: return format_double(v.f);
        case Value::Kind::Bool: return v.b ? "True" : "False";
    }
    return {};
}

}  // namespace tinypy
