// Command-line front end: corpus generation, grammar validation and dumping,
// and single-snippet execution.
//
// Exit codes: 0 success, 1 usage error, 2 grammar validation errors,
// 3 attempts exhausted, 4 I/O error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "tinypy/derive.hpp"
#include "tinypy/grammar.hpp"
#include "tinypy/interp.hpp"
#include "tinypy/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitExhausted = 3;
constexpr int kExitIo = 4;

std::string read_file(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw tinypy::IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --level accepts "all", one level ("3.1"), or a comma list ("3.1,3.2").
std::array<double, tinypy::kLevelCount> parse_level_weights(const std::string& spec) {
    std::array<double, tinypy::kLevelCount> weights{};
    if (spec == "all") {
        weights.fill(1.0);
        return weights;
    }
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto level = tinypy::parse_level(item);
        if (!level)
            throw CLI::ValidationError("--level", "unknown level '" + item +
                                                      "' (expected all, 1.1, 1.2, 2.1, 2.2, 3.1 or 3.2)");
        weights[tinypy::level_index(*level)] = 1.0;
    }
    bool any = false;
    for (double w : weights) any |= w > 0;
    if (!any) throw CLI::ValidationError("--level", "no levels selected");
    return weights;
}

uint64_t parse_seed(const std::string& spec) {
    if (spec == "random") {
        std::random_device rd;
        return (static_cast<uint64_t>(rd()) << 32) ^ rd();
    }
    try {
        size_t used = 0;
        uint64_t seed = std::stoull(spec, &used, 0);
        if (used != spec.size()) throw std::invalid_argument(spec);
        return seed;
    } catch (const std::exception&) {
        throw CLI::ValidationError("--seed", "expected an unsigned integer or 'random'");
    }
}

void print_validation(const tinypy::ValidationReport& report) {
    for (const auto& e : report.errors) std::cout << "error: " << e.kind << "(" << e.symbol << ")\n";
    for (const auto& w : report.warnings)
        std::cout << "warning: " << w.kind << "(" << w.symbol << ")\n";
    std::cout << (report.ok() ? "grammar OK" : "grammar has errors") << "\n";
}

std::string human_bytes(uint64_t bytes) {
    char buf[64];
    if (bytes >= 1024 * 1024)
        std::snprintf(buf, sizeof buf, "%.1f MiB", static_cast<double>(bytes) / (1024.0 * 1024.0));
    else
        std::snprintf(buf, sizeof buf, "%.1f KiB", static_cast<double>(bytes) / 1024.0);
    return buf;
}

void print_report(const tinypy::CorpusReport& report, bool timing, bool stats) {
    if (timing) {
        std::printf("programs     %llu\n", static_cast<unsigned long long>(report.unique_written));
        std::printf("time         %.2fs\n", report.wall_time_seconds);
        std::printf("dedup state  %s\n", human_bytes(report.dedup_state_bytes).c_str());
        std::printf("peak rss     %s\n", human_bytes(report.peak_working_set_bytes).c_str());
    }
    if (stats) {
        std::printf("attempts     %llu\n", static_cast<unsigned long long>(report.attempts));
        std::printf("unique       %llu\n", static_cast<unsigned long long>(report.unique_written));
        std::printf("duplicates   %llu\n", static_cast<unsigned long long>(report.duplicates_discarded));
        for (size_t i = 0; i < tinypy::kRunErrorCount; ++i)
            if (report.errors_discarded[i])
                std::printf("errors[%s]  %llu\n",
                            std::string(tinypy::to_string(static_cast<tinypy::RunError>(i))).c_str(),
                            static_cast<unsigned long long>(report.errors_discarded[i]));
        for (size_t i = 0; i < tinypy::kLevelCount; ++i)
            std::printf("level %s    %llu\n", std::string(tinypy::to_string(tinypy::kAllLevels[i])).c_str(),
                        static_cast<unsigned long long>(report.per_level[i]));
        std::printf("assignments  %.4f\n", report.construct_frequencies.assignments);
        std::printf("conditionals %.4f\n", report.construct_frequencies.conditionals);
        std::printf("loops        %.4f\n", report.construct_frequencies.loops);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grammar-driven generator of tiny, runnable Python snippets"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Generate a deduplicated code+output corpus");
    uint64_t num_programs = 0;
    std::string output;
    std::string level_spec = "all";
    std::string seed_spec = std::to_string(tinypy::kDefaultSeed);
    std::string grammar_path;
    uint64_t max_attempts = 100000;
    uint64_t max_steps = 100000;
    unsigned workers = 1;
    bool no_dedup = false, stats = false, timing = false;
    gen->add_option("-n,--num-programs", num_programs, "Number of unique snippets to generate")
        ->required();
    gen->add_option("-o,--output", output, "Corpus output path")->required();
    gen->add_option("--level", level_spec, "Level selection: all, one level, or a comma list");
    gen->add_option("--seed", seed_spec, "64-bit seed, or 'random'");
    gen->add_option("--grammar", grammar_path, "Grammar file (default: builtin)");
    gen->add_option("--max-attempts", max_attempts,
                    "Consecutive fruitless attempts before giving up");
    gen->add_option("--max-steps", max_steps, "Interpreter statement budget per snippet");
    gen->add_option("--workers", workers, "Worker threads (output is identical for any value)");
    gen->add_flag("--no-dedup", no_dedup, "Keep duplicate snippets");
    gen->add_flag("--stats", stats, "Print corpus statistics and write <output>.stats.json");
    gen->add_flag("--timing", timing, "Print wall time and memory");

    // validate-grammar
    auto* val = app.add_subcommand("validate-grammar", "Validate a grammar file");
    std::string val_path;
    val->add_option("grammar", val_path, "Grammar file (default: builtin)");

    // dump-grammar
    auto* dump = app.add_subcommand("dump-grammar", "Write the builtin grammar file");
    std::string dump_output = "-";
    dump->add_option("-o,--output", dump_output, "Destination (default: stdout)");

    // run-snippet
    auto* runcmd = app.add_subcommand("run-snippet", "Execute one snippet and print its output");
    std::string snippet_path;
    uint64_t snippet_steps = 100000;
    runcmd->add_option("file", snippet_path, "Snippet file, or - for stdin")->required();
    runcmd->add_option("--max-steps", snippet_steps, "Interpreter statement budget");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            tinypy::Grammar custom;
            tinypy::PipelineConfig config;
            config.target_count = num_programs;
            config.output_path = output;
            config.max_consecutive_rejections = max_attempts;
            config.limits.max_steps = max_steps;
            config.deduplicate = !no_dedup;
            config.emit_stats = stats;
            config.workers = workers;
            config.derivation.seed = parse_seed(seed_spec);
            config.derivation.level_weights = parse_level_weights(level_spec);
            if (!grammar_path.empty()) {
                custom = tinypy::parse_grammar(read_file(grammar_path));
                tinypy::ValidationReport report = tinypy::validate(custom);
                if (!report.ok()) {
                    print_validation(report);
                    return kExitValidation;
                }
                config.grammar = &custom;
                // A custom start symbol may define fewer alternatives than
                // there are level slots; drop the selection weight of the rest.
                size_t arity = custom.find(custom.start)->alternatives.size();
                bool any = false;
                for (size_t i = 0; i < tinypy::kLevelCount; ++i) {
                    if (i >= arity) config.derivation.level_weights[i] = 0;
                    any |= config.derivation.level_weights[i] > 0;
                }
                if (!any) {
                    std::cerr << "error: selected levels exceed the grammar's start alternatives\n";
                    return kExitUsage;
                }
            }
            tinypy::CorpusReport report = tinypy::generate_corpus(config);
            print_report(report, timing, stats);
            return kExitOk;
        }

        if (val->parsed()) {
            tinypy::ValidationReport report;
            if (val_path.empty()) {
                report = tinypy::validate(tinypy::builtin_tinypy());
            } else {
                tinypy::Grammar g = tinypy::parse_grammar(read_file(val_path));
                report = tinypy::validate(g);
            }
            print_validation(report);
            return report.ok() ? kExitOk : kExitValidation;
        }

        if (dump->parsed()) {
            std::string_view text = tinypy::builtin_tinypy_text();
            if (dump_output == "-") {
                std::cout << text;
            } else {
                std::ofstream out(dump_output, std::ios::binary | std::ios::trunc);
                if (!out) throw tinypy::IoError("cannot open " + dump_output);
                out << text;
                if (!out) throw tinypy::IoError("write failed: " + dump_output);
            }
            return kExitOk;
        }

        if (runcmd->parsed()) {
            std::string source = read_file(snippet_path);
            tinypy::RunResult result = tinypy::run(source, {snippet_steps});
            if (result.ok())
                std::cout << result.output;
            else
                std::cout << "error: " << tinypy::to_string(*result.error) << " at line "
                          << result.error_line << "\n";
            return kExitOk;
        }
    } catch (const tinypy::GrammarError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const tinypy::AttemptsExhaustedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        print_report(e.partial, timing, stats);
        return kExitExhausted;
    } catch (const tinypy::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitOk;
}
