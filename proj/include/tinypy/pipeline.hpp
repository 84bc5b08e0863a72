#ifndef TINYPY_PIPELINE_HPP
#define TINYPY_PIPELINE_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tinypy/derive.hpp"
#include "tinypy/fingerprint.hpp"
#include "tinypy/grammar.hpp"
#include "tinypy/interp.hpp"

namespace tinypy {

struct PipelineConfig {
    uint64_t target_count = 1;  // unique snippets to write
    DerivationConfig derivation{};
    Limits limits{};
    // Give up once this many attempts in a row produce no new unique snippet
    // (the requested corpus is larger than the derivable program space).
    uint64_t max_consecutive_rejections = 100000;
    std::string output_path;
    bool emit_stats = false;    // also write <output_path>.stats.json
    bool deduplicate = true;
    unsigned workers = 1;       // attempt fan-out; output is identical for any value
    const Grammar* grammar = nullptr;  // null means the builtin grammar
};

struct Record {
    std::string code;
    std::string output;  // run(code) output
    Level level;
};

enum class Construct : uint8_t { Assignments, Conditionals, Loops };
std::string_view to_string(Construct c);

// Level 1.x writes assignments, 2.x conditionals, 3.x loops.
Construct classify_construct(Level level);

struct ConstructFractions {
    double assignments = 0;
    double conditionals = 0;
    double loops = 0;
};

struct CorpusReport {
    uint64_t attempts = 0;
    uint64_t unique_written = 0;
    uint64_t duplicates_discarded = 0;
    std::array<uint64_t, kRunErrorCount> errors_discarded{};  // indexed by RunError
    std::array<uint64_t, kLevelCount> per_level{};            // written records per level
    ConstructFractions construct_frequencies{};
    double wall_time_seconds = 0;
    uint64_t dedup_state_bytes = 0;       // peak digest-set storage (16 bytes/slot)
    uint64_t peak_working_set_bytes = 0;  // best-effort process peak RSS

    uint64_t total_errors() const;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyCorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when max_consecutive_rejections is hit; whatever was written so far
// stays in the output file and `partial` describes it.
class AttemptsExhaustedError : public std::runtime_error {
public:
    AttemptsExhaustedError(const std::string& msg, CorpusReport report)
        : std::runtime_error(msg), partial(std::move(report)) {}
    CorpusReport partial;
};

// Appends one record in the corpus file format:
//   <code lines>           (each code line already ends with \n)
//   # output
//   # <output line>        (one per captured output line)
//   <blank line>
void write_record(std::ostream& out, const Record& record);

// Re-reads a corpus file written by write_record. Levels are not stored in
// the file, so entries carry code and output only.
struct CorpusEntry {
    std::string code;
    std::string output;
};
std::vector<CorpusEntry> read_corpus(std::istream& in);

// Construct fractions over a record stream; throws EmptyCorpusError when it
// is empty.
ConstructFractions compute_stats(std::span<const Record> records);

// Runs the generate -> execute -> deduplicate -> write loop until
// target_count unique snippets are on disk. Attempt i always draws from the
// rng stream split(seed, i) and results are committed in attempt order, so a
// given config produces a byte-identical file for any worker count.
CorpusReport generate_corpus(const PipelineConfig& config);

// The stats sidecar document for --stats runs.
std::string stats_json(const CorpusReport& report);

}  // namespace tinypy

#endif  // TINYPY_PIPELINE_HPP
