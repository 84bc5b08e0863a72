#include "tinypy/derive.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <charconv>
#include <cmath>

namespace tinypy {

std::string_view to_string(Level level) {
    switch (level) {
        case Level::L1_1: return "1.1";
        case Level::L1_2: return "1.2";
        case Level::L2_1: return "2.1";
        case Level::L2_2: return "2.2";
        case Level::L3_1: return "3.1";
        case Level::L3_2: return "3.2";
    }
    return "?";
}

std::optional<Level> parse_level(std::string_view s) {
    for (Level l : kAllLevels)
        if (to_string(l) == s) return l;
    return std::nullopt;
}

void DerivationConfig::check() const {
    bool any_positive = false;
    for (double w : level_weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument("level weights must be finite and non-negative");
        if (w > 0.0) any_positive = true;
    }
    if (!any_positive) throw std::invalid_argument("at least one level weight must be positive");
    if (max_chain_depth < 1) throw std::invalid_argument("max_chain_depth must be >= 1");
    if (init_count_min < 1 || init_count_max < init_count_min || init_count_max > 26)
        throw std::invalid_argument("init count range must satisfy 1 <= min <= max <= 26");
}

bool ScopeContext::contains(char v) const {
    return std::find(initialized.begin(), initialized.end(), v) != initialized.end();
}

Level select_level(const DerivationConfig& config, SplitMix64& rng) {
    bool any_positive = false;
    for (double w : config.level_weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument("level weights must be finite and non-negative");
        any_positive |= w > 0.0;
    }
    if (!any_positive) throw AllWeightsZeroError("all level weights are zero");
    // Scale to integers so the draw is pure integer arithmetic (identical on
    // every platform). Weight ratios beyond 2^32 collapse to zero.
    double max_w = *std::max_element(config.level_weights.begin(), config.level_weights.end());
    std::array<uint64_t, kLevelCount> scaled{};
    for (size_t i = 0; i < kLevelCount; ++i)
        scaled[i] = static_cast<uint64_t>(config.level_weights[i] / max_w * 4294967296.0 + 0.5);
    return kAllLevels[rng.weighted(scaled)];
}

std::string resolve_hook(std::string_view hook, const ScopeContext& context, SplitMix64& rng) {
    const auto& init = context.initialized;
    if (hook == "display_identifier") {
        if (context.loop_variable) {
            if (init.empty()) return std::string(1, *context.loop_variable);
            if (rng.bounded(2) == 0) return std::string(1, *context.loop_variable);
            return std::string(1, init[rng.bounded(init.size())]);
        }
        if (init.empty()) throw EmptyScopeError("no variable in scope for <display_identifier>");
        return std::string(1, init[rng.bounded(init.size())]);
    }
    // expression_identifier (and any other hook): uniform over everything in
    // scope, loop variable included.
    std::vector<char> pool = init;
    if (context.loop_variable) pool.push_back(*context.loop_variable);
    if (pool.empty())
        throw EmptyScopeError("no variable in scope for <" + std::string(hook) + ">");
    return std::string(1, pool[rng.bounded(pool.size())]);
}

int64_t compute_final(int64_t initial, int64_t step, int64_t execution_count) {
    return step * execution_count + initial - 1;
}

bool is_finished(const SententialForm& form) {
    return std::all_of(form.begin(), form.end(), [](const FormSym& fs) {
        return fs.marker == FormSym::Marker::None && fs.sym.kind == SymbolKind::Terminal;
    });
}

// ---------------------------------------------------------------------------
// Deriver

namespace {

constexpr uint64_t kUnitWeight = uint64_t(1) << 32;
constexpr uint32_t kAllLetters = (uint32_t(1) << 26) - 1;
// Hard cap on expansion steps; turns non-terminating custom grammars (e.g.
// mutually recursive rules, which depth damping does not cover) into errors.
constexpr size_t kMaxExpansions = 1 << 20;

int64_t parse_int_terminal(const Symbol& sym) {
    int64_t v = 0;
    auto [ptr, ec] = std::from_chars(sym.text.data(), sym.text.data() + sym.text.size(), v);
    if (ec != std::errc() || ptr != sym.text.data() + sym.text.size())
        throw DerivationError("expected an integer terminal, got \"" + sym.text + "\"");
    return v;
}

}  // namespace

Deriver::Deriver(const Grammar& grammar, const DerivationConfig& config)
    : grammar_(grammar), config_(config) {
    config_.check();
    ValidationReport report = validate(grammar_);
    if (!report.ok()) {
        std::string msg = "grammar has validation errors:";
        for (const ValidationIssue& e : report.errors) msg += " " + e.kind + "(" + e.symbol + ")";
        throw std::invalid_argument(msg);
    }
    for (size_t i = 0; i < grammar_.productions.size(); ++i)
        index_.emplace(grammar_.productions[i].lhs, i);

    auto lookup = [&](std::string_view name) {
        auto it = index_.find(name);
        return it == index_.end() ? Grammar::npos : it->second;
    };
    start_ = lookup(grammar_.start);
    variable_ = lookup("variable");
    initial_ = lookup("initial");
    step_ = lookup("step");
    execution_count_ = lookup("execution_count");
    initialization_ = lookup("initialization");
    identifier_initialization_ = lookup("identifier_initialization");

    info_.resize(grammar_.productions.size());
    for (size_t p = 0; p < grammar_.productions.size(); ++p) {
        const Production& prod = grammar_.productions[p];
        for (const SymbolSeq& alt : prod.alternatives) {
            AltInfo ai;
            for (const Symbol& s : alt) {
                if (s.kind == SymbolKind::NonTerminal && s.text == prod.lhs) ai.self_recursive = true;
                if (s.kind == SymbolKind::Computed && s.text == "final") ai.loop_header = true;
            }
            if (!alt.empty() && alt[0].kind == SymbolKind::NonTerminal && variable_ != Grammar::npos &&
                alt[0].text == "variable") {
                for (size_t k = 1; k < std::min<size_t>(alt.size(), 4); ++k) {
                    const Symbol& s = alt[k];
                    if ((s.kind == SymbolKind::Terminal && s.text == "=") ||
                        (s.kind == SymbolKind::NonTerminal && s.text == "equals")) {
                        ai.binds_target = true;
                        break;
                    }
                }
            }
            info_[p].alts.push_back(ai);
        }
    }
}

size_t Deriver::choose_alternative(size_t prod, int depth, SplitMix64& rng) const {
    const auto& alts = info_[prod].alts;
    size_t n = alts.size();
    if (n == 1) {
        if (alts[0].self_recursive && depth >= config_.max_chain_depth)
            throw DepthExhaustedError("rule <" + grammar_.productions[prod].lhs +
                                      "> exceeds max_chain_depth with no non-recursive alternative");
        return 0;
    }
    bool any_recursive = false;
    for (const AltInfo& ai : alts) any_recursive |= ai.self_recursive;
    if (!any_recursive) return rng.bounded(n);

    std::vector<uint64_t> weights(n);
    uint64_t total = 0;
    for (size_t a = 0; a < n; ++a) {
        if (alts[a].self_recursive)
            weights[a] = depth >= config_.max_chain_depth ? 0 : kUnitWeight >> std::min(depth, 31);
        else
            weights[a] = kUnitWeight;
        total += weights[a];
    }
    if (total == 0)
        throw DepthExhaustedError("rule <" + grammar_.productions[prod].lhs +
                                  "> exceeds max_chain_depth with no non-recursive alternative");
    return rng.weighted(weights);
}

char Deriver::draw_fresh_letter(DeriveState& state, SplitMix64& rng) const {
    uint32_t free = ~state.used_letters & kAllLetters;
    int n = std::popcount(free);
    if (n == 0) throw EmptyScopeError("all 26 variable names are in use");
    auto pick = static_cast<int>(rng.bounded(static_cast<uint64_t>(n)));
    for (int bit = 0; bit < 26; ++bit)
        if (free & (uint32_t(1) << bit)) {
            if (pick-- == 0) return static_cast<char>('a' + bit);
        }
    assert(false);
    return 'a';
}

char Deriver::draw_assignment_target(bool always_fresh, DeriveState& state, SplitMix64& rng,
                                     std::vector<RuleFire>* coverage) const {
    char target = 0;
    const auto& init = state.scope.initialized;
    if (always_fresh) {
        target = draw_fresh_letter(state, rng);
    } else {
        // Reuse an existing variable or bind a fresh one, a coin flip each
        // way; fall back to the other pool when one is empty.
        bool reuse = rng.bounded(2) == 0;
        bool have_fresh = (~state.used_letters & kAllLetters) != 0;
        if (reuse && init.empty()) reuse = false;
        if (!reuse && !have_fresh) reuse = true;
        if (reuse) {
            if (init.empty()) throw EmptyScopeError("no variable available for an assignment target");
            target = init[rng.bounded(init.size())];
        } else {
            target = draw_fresh_letter(state, rng);
        }
    }
    state.used_letters |= uint32_t(1) << (target - 'a');
    state.pending_target = target;
    if (coverage && variable_ != Grammar::npos)
        coverage->push_back({static_cast<uint32_t>(variable_), static_cast<uint32_t>(target - 'a')});
    return target;
}

int64_t Deriver::draw_token_int(size_t prod, SplitMix64& rng, std::vector<RuleFire>* coverage) const {
    if (prod == Grammar::npos) throw DerivationError("grammar is missing a rule the loop bound needs");
    const Production& p = grammar_.productions[prod];
    size_t alt = p.alternatives.size() == 1 ? 0 : rng.bounded(p.alternatives.size());
    if (coverage) coverage->push_back({static_cast<uint32_t>(prod), static_cast<uint32_t>(alt)});
    const SymbolSeq& seq = p.alternatives[alt];
    if (seq.size() != 1)
        throw DerivationError("rule <" + p.lhs + "> is not a simple token class");
    const Symbol& sym = seq[0];
    if (sym.kind == SymbolKind::Terminal) return parse_int_terminal(sym);
    if (sym.kind == SymbolKind::NonTerminal) {
        auto it = index_.find(sym.text);
        if (it == index_.end()) throw DerivationError("undefined rule <" + sym.text + ">");
        return draw_token_int(it->second, rng, coverage);
    }
    throw DerivationError("rule <" + p.lhs + "> is not a simple token class");
}

size_t Deriver::expand_at(SententialForm& form, size_t at, SplitMix64& rng, DeriveState& state,
                          std::vector<RuleFire>* coverage) const {
    FormSym fs = std::move(form[at]);

    // An assignment statement is complete: its target becomes visible.
    if (fs.marker == FormSym::Marker::ScopeCommit) {
        if (state.pending_target) {
            if (!state.scope.contains(*state.pending_target))
                state.scope.initialized.push_back(*state.pending_target);
            state.pending_target.reset();
        }
        form.erase(form.begin() + static_cast<ptrdiff_t>(at));
        return at;
    }

    const Symbol& sym = fs.sym;
    if (sym.kind == SymbolKind::Terminal) throw DerivationError("expand_at called on a terminal");

    if (sym.kind == SymbolKind::Hook) {
        std::string text = resolve_hook(sym.text, state.scope, rng);
        form[at] = FormSym{Symbol::terminal(std::move(text))};
        return at;
    }

    if (sym.kind == SymbolKind::Computed) {
        // <final> is resolved eagerly when its enclosing for-header expands;
        // reaching one loose means the grammar uses it outside that shape.
        throw DerivationError("computed symbol <" + sym.text + "> outside a for-header alternative");
    }

    auto it = index_.find(sym.text);
    if (it == index_.end()) throw DerivationError("undefined rule <" + sym.text + ">");
    size_t prod = it->second;
    const Production& p = grammar_.productions[prod];

    // <identifier_initialization> draws how many initialization lines to emit
    // instead of recursing geometrically; the lines themselves stay symbolic.
    if (prod == identifier_initialization_ && p.alternatives.size() == 2) {
        int rec = info_[prod].alts[0].self_recursive ? 0 : info_[prod].alts[1].self_recursive ? 1 : -1;
        if (rec >= 0 && p.alternatives[rec][0].kind == SymbolKind::NonTerminal &&
            p.alternatives[rec][0].text == p.lhs) {
            int base = 1 - rec;
            int span = config_.init_count_max - config_.init_count_min + 1;
            int count = config_.init_count_min +
                        (span > 1 ? static_cast<int>(rng.bounded(static_cast<uint64_t>(span))) : 0);
            if (coverage) {
                if (count > 1) coverage->push_back({static_cast<uint32_t>(prod), static_cast<uint32_t>(rec)});
                coverage->push_back({static_cast<uint32_t>(prod), static_cast<uint32_t>(base)});
            }
            SententialForm replacement;
            for (const Symbol& s : p.alternatives[base]) replacement.push_back(FormSym{s});
            const SymbolSeq& rec_alt = p.alternatives[rec];
            for (int k = 1; k < count; ++k)
                for (size_t s = 1; s < rec_alt.size(); ++s) replacement.push_back(FormSym{rec_alt[s]});
            form.erase(form.begin() + static_cast<ptrdiff_t>(at));
            form.insert(form.begin() + static_cast<ptrdiff_t>(at), replacement.begin(), replacement.end());
            return at;
        }
    }

    size_t alt_idx = choose_alternative(prod, fs.depth, rng);
    if (coverage) coverage->push_back({static_cast<uint32_t>(prod), static_cast<uint32_t>(alt_idx)});
    const SymbolSeq& alt = p.alternatives[alt_idx];
    const AltInfo& ai = info_[prod].alts[alt_idx];

    SententialForm replacement;
    replacement.reserve(alt.size() + 1);

    if (ai.loop_header) {
        // Loop headers resolve their bound-related symbols eagerly so the
        // emitted range always iterates exactly execution_count times.
        // Draw order: loop variable, execution count, initial, step.
        if (state.scope.loop_variable && !state.scope.contains(*state.scope.loop_variable))
            state.scope.initialized.push_back(*state.scope.loop_variable);
        char loop_var = draw_fresh_letter(state, rng);
        state.scope.loop_variable = loop_var;

        int64_t exec_count = draw_token_int(execution_count_, rng, coverage);
        int64_t initial = draw_token_int(initial_, rng, coverage);
        bool has_step = std::any_of(alt.begin(), alt.end(), [](const Symbol& s) {
            return s.kind == SymbolKind::NonTerminal && s.text == "step";
        });
        int64_t step = has_step ? draw_token_int(step_, rng, coverage) : 1;
        // range excludes its stop, so the step*count+initial-1 bound drops
        // the last iterate exactly when step is 1; initial+count is the one
        // integer bound that still yields execution_count iterations there.
        int64_t final_bound =
            step == 1 ? initial + exec_count : compute_final(initial, step, exec_count);

        bool bound_var = false;
        for (const Symbol& s : alt) {
            if (s.kind == SymbolKind::Hook && !bound_var) {
                replacement.push_back(FormSym{Symbol::terminal(std::string(1, loop_var))});
                bound_var = true;
            } else if (s.kind == SymbolKind::NonTerminal && s.text == "initial") {
                replacement.push_back(FormSym{Symbol::terminal(std::to_string(initial))});
            } else if (s.kind == SymbolKind::NonTerminal && s.text == "step") {
                replacement.push_back(FormSym{Symbol::terminal(std::to_string(step))});
            } else if (s.kind == SymbolKind::Computed && s.text == "final") {
                replacement.push_back(FormSym{Symbol::terminal(std::to_string(final_bound))});
            } else {
                replacement.push_back(FormSym{s});
            }
        }
    } else if (ai.binds_target) {
        bool always_fresh = prod == initialization_;
        char target = draw_assignment_target(always_fresh, state, rng, coverage);
        replacement.push_back(FormSym{Symbol::terminal(std::string(1, target))});
        for (size_t s = 1; s < alt.size(); ++s) replacement.push_back(FormSym{alt[s]});
        FormSym commit;
        commit.marker = FormSym::Marker::ScopeCommit;
        replacement.push_back(commit);
    } else {
        for (const Symbol& s : alt) {
            FormSym next{s};
            if (s.kind == SymbolKind::NonTerminal && s.text == p.lhs) next.depth = fs.depth + 1;
            replacement.push_back(std::move(next));
        }
    }

    form.erase(form.begin() + static_cast<ptrdiff_t>(at));
    form.insert(form.begin() + static_cast<ptrdiff_t>(at),
                std::make_move_iterator(replacement.begin()), std::make_move_iterator(replacement.end()));
    return at;
}

SententialForm Deriver::expand_once(SententialForm form, SplitMix64& rng, DeriveState& state,
                                    std::vector<RuleFire>* coverage) const {
    for (size_t i = 0; i < form.size(); ++i) {
        if (form[i].marker == FormSym::Marker::None && form[i].sym.kind == SymbolKind::Terminal)
            continue;
        expand_at(form, i, rng, state, coverage);
        return form;
    }
    throw DerivationError("expand_once: form contains no expandable symbol");
}

DerivedProgram Deriver::derive(Level level, SplitMix64& rng) const {
    const Production& start = grammar_.productions[start_];
    size_t alt_idx = level_index(level);
    if (alt_idx >= start.alternatives.size())
        throw std::invalid_argument("level " + std::string(to_string(level)) +
                                    " does not name an alternative of <" + start.lhs + ">");

    DerivedProgram out;
    out.level = level;
    out.rule_coverage.push_back({static_cast<uint32_t>(start_), static_cast<uint32_t>(alt_idx)});

    DeriveState state;
    SententialForm form;
    for (const Symbol& s : start.alternatives[alt_idx]) {
        FormSym fs{s};
        if (s.kind == SymbolKind::NonTerminal && s.text == start.lhs) fs.depth = 1;
        form.push_back(std::move(fs));
    }

    size_t cursor = 0;
    size_t steps = 0;
    while (true) {
        while (cursor < form.size() && form[cursor].marker == FormSym::Marker::None &&
               form[cursor].sym.kind == SymbolKind::Terminal)
            ++cursor;
        if (cursor == form.size()) break;
        if (++steps > kMaxExpansions) throw DerivationError("derivation did not terminate");
        expand_at(form, cursor, rng, state, &out.rule_coverage);
    }

    for (const FormSym& fs : form) out.code += fs.sym.text;
    while (out.code.size() >= 2 && out.code[out.code.size() - 1] == '\n' &&
           out.code[out.code.size() - 2] == '\n')
        out.code.pop_back();
    if (out.code.empty() || out.code.back() != '\n') out.code += '\n';

    std::sort(out.rule_coverage.begin(), out.rule_coverage.end());
    out.rule_coverage.erase(std::unique(out.rule_coverage.begin(), out.rule_coverage.end()),
                            out.rule_coverage.end());
    return out;
}

DerivedProgram derive(const Grammar& grammar, Level level, SplitMix64& rng,
                      const DerivationConfig& config) {
    return Deriver(grammar, config).derive(level, rng);
}

SententialForm expand_once(const Grammar& grammar, SententialForm form, SplitMix64& rng,
                           DeriveState& state, const DerivationConfig& config,
                           std::vector<RuleFire>* coverage) {
    return Deriver(grammar, config).expand_once(std::move(form), rng, state, coverage);
}

}  // namespace tinypy
