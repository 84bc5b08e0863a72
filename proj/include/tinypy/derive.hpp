#ifndef TINYPY_DERIVE_HPP
#define TINYPY_DERIVE_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tinypy/grammar.hpp"
#include "tinypy/rng.hpp"

namespace tinypy {

// Fixed default seed so plain invocations are reproducible; pass your own (or
// --seed random on the CLI) for varied corpora.
constexpr uint64_t kDefaultSeed = 42;

// The six complexity levels, one per alternative of the start symbol.
enum class Level : uint8_t { L1_1, L1_2, L2_1, L2_2, L3_1, L3_2 };
constexpr size_t kLevelCount = 6;
constexpr std::array<Level, kLevelCount> kAllLevels = {Level::L1_1, Level::L1_2, Level::L2_1,
                                                       Level::L2_2, Level::L3_1, Level::L3_2};

std::string_view to_string(Level level);               // "1.1" ... "3.2"
std::optional<Level> parse_level(std::string_view s);  // inverse of to_string
constexpr size_t level_index(Level level) { return static_cast<size_t>(level); }

struct DerivationConfig {
    // Relative selection weight per level, indexed by level_index.
    std::array<double, kLevelCount> level_weights{1, 1, 1, 1, 1, 1};
    uint64_t seed = kDefaultSeed;
    // A self-recursive alternative's weight is halved per re-entry and the
    // alternative is excluded entirely at this depth, so expression and
    // condition chains stay short and derivation always terminates.
    int max_chain_depth = 3;
    // Number of leading initialization lines, drawn uniformly (inclusive).
    int init_count_min = 1;
    int init_count_max = 3;

    void check() const;  // throws std::invalid_argument on a bad field
};

// Variables visible to hook resolution at the current point of derivation.
// loop_variable is set by the for-header and is never one of the initialized
// names.
struct ScopeContext {
    std::vector<char> initialized;  // insertion order, distinct
    std::optional<char> loop_variable;

    bool contains(char v) const;
};

struct RuleFire {
    uint32_t production;   // index into Grammar::productions
    uint32_t alternative;

    friend auto operator<=>(const RuleFire&, const RuleFire&) = default;
};

struct DerivedProgram {
    std::string code;  // terminal-only, ends with exactly one newline
    Level level;
    std::vector<RuleFire> rule_coverage;  // sorted, unique
};

class DerivationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
// No variable is in scope for a hook to resolve against.
class EmptyScopeError : public DerivationError {
public:
    using DerivationError::DerivationError;
};
// A self-recursive rule hit max_chain_depth with no non-recursive alternative.
class DepthExhaustedError : public DerivationError {
public:
    using DerivationError::DerivationError;
};
class AllWeightsZeroError : public DerivationError {
public:
    using DerivationError::DerivationError;
};

// Picks a level with probability proportional to its weight.
Level select_level(const DerivationConfig& config, SplitMix64& rng);

// One symbol of a sentential form. depth counts re-entries of a
// self-recursive production; the ScopeCommit marker ends an assignment
// statement and moves its target variable into scope (so the statement's own
// right-hand side cannot reference it).
struct FormSym {
    enum class Marker : uint8_t { None, ScopeCommit };
    Symbol sym;
    int depth = 0;
    Marker marker = Marker::None;
};
using SententialForm = std::vector<FormSym>;

// Engine bookkeeping threaded through expansion steps.
struct DeriveState {
    ScopeContext scope;
    uint32_t used_letters = 0;          // bitmask over 'a'..'z', reserves pending names
    std::optional<char> pending_target; // assignment target awaiting ScopeCommit
};

bool is_finished(const SententialForm& form);

// Resolves a hook to a terminal.
//   expression_identifier: uniform over initialized plus the loop variable.
//   display_identifier: the loop variable with probability 1/2 when one is
//   bound, otherwise uniform over the initialized set.
// Throws EmptyScopeError when no variable is available.
std::string resolve_hook(std::string_view hook, const ScopeContext& context, SplitMix64& rng);

// The computed for-loop bound: range(initial, final, step) then iterates
// exactly execution_count times.
int64_t compute_final(int64_t initial, int64_t step, int64_t execution_count);

// Grammar prepared for repeated derivation. Construction validates the
// grammar (zero errors required) and freezes the lookup tables; a Deriver is
// immutable afterwards and safe to share across threads, with all
// per-derivation state local to each call.
class Deriver {
public:
    Deriver(const Grammar& grammar, const DerivationConfig& config);

    const Grammar& grammar() const { return grammar_; }

    // Leftmost random derivation of the start symbol, with the start
    // alternative forced to the given level.
    DerivedProgram derive(Level level, SplitMix64& rng) const;

    // Replaces exactly the leftmost unresolved symbol of the form; everything
    // to its left is terminal and untouched. Exposed for testing.
    SententialForm expand_once(SententialForm form, SplitMix64& rng, DeriveState& state,
                               std::vector<RuleFire>* coverage = nullptr) const;

private:
    struct AltInfo {
        bool self_recursive = false;
        // Assignment form: alternative starts with the <variable> token class
        // followed by `=`; the target is drawn by policy, not by expanding
        // <variable>.
        bool binds_target = false;
        // For-header form: alternative contains the computed <final> bound.
        bool loop_header = false;
    };
    struct ProdInfo {
        std::vector<AltInfo> alts;
    };

    size_t expand_at(SententialForm& form, size_t at, SplitMix64& rng, DeriveState& state,
                     std::vector<RuleFire>* coverage) const;
    size_t choose_alternative(size_t prod, int depth, SplitMix64& rng) const;
    char draw_fresh_letter(DeriveState& state, SplitMix64& rng) const;
    char draw_assignment_target(bool always_fresh, DeriveState& state, SplitMix64& rng,
                                std::vector<RuleFire>* coverage) const;
    int64_t draw_token_int(size_t prod, SplitMix64& rng, std::vector<RuleFire>* coverage) const;

    const Grammar& grammar_;
    DerivationConfig config_;
    std::unordered_map<std::string_view, size_t> index_;
    std::vector<ProdInfo> info_;
    size_t start_ = Grammar::npos;
    size_t variable_ = Grammar::npos;
    size_t initial_ = Grammar::npos;
    size_t step_ = Grammar::npos;
    size_t execution_count_ = Grammar::npos;
    size_t initialization_ = Grammar::npos;
    size_t identifier_initialization_ = Grammar::npos;
};

// Convenience wrapper constructing a one-shot Deriver.
DerivedProgram derive(const Grammar& grammar, Level level, SplitMix64& rng,
                      const DerivationConfig& config);

// Free-function form of Deriver::expand_once for spec-level tests.
SententialForm expand_once(const Grammar& grammar, SententialForm form, SplitMix64& rng,
                           DeriveState& state, const DerivationConfig& config,
                           std::vector<RuleFire>* coverage = nullptr);

}  // namespace tinypy

#endif  // TINYPY_DERIVE_HPP
