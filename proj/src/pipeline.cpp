#include "tinypy/pipeline.hpp"

#include <sys/resource.h>

#include <chrono>
#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "nlohmann/json.hpp"

namespace tinypy {

std::string_view to_string(Construct c) {
    switch (c) {
        case Construct::Assignments: return "Assignments";
        case Construct::Conditionals: return "Conditionals";
        case Construct::Loops: return "Loops";
    }
    return "?";
}

Construct classify_construct(Level level) {
    switch (level) {
        case Level::L1_1:
        case Level::L1_2: return Construct::Assignments;
        case Level::L2_1:
        case Level::L2_2: return Construct::Conditionals;
        case Level::L3_1:
        case Level::L3_2: return Construct::Loops;
    }
    return Construct::Assignments;
}

uint64_t CorpusReport::total_errors() const {
    uint64_t n = 0;
    for (uint64_t e : errors_discarded) n += e;
    return n;
}

void write_record(std::ostream& out, const Record& record) {
    out << record.code;
    out << "# output\n";
    size_t pos = 0;
    while (pos < record.output.size()) {
        size_t eol = record.output.find('\n', pos);
        if (eol == std::string::npos) eol = record.output.size();  // defensive; outputs end with \n
        out << "# ";
        out.write(record.output.data() + pos, static_cast<std::streamsize>(eol - pos));
        out << "\n";
        pos = eol + 1;
    }
    out << "\n";
}

std::vector<CorpusEntry> read_corpus(std::istream& in) {
    std::vector<CorpusEntry> entries;
    CorpusEntry cur;
    bool in_output = false;
    bool any = false;
    std::string line;
    while (std::getline(in, line)) {
        if (!in_output) {
            if (line == "# output") {
                in_output = true;
                any = true;
            } else {
                cur.code += line;
                cur.code += '\n';
                any = true;
            }
        } else {
            if (line.empty()) {
                entries.push_back(std::move(cur));
                cur = {};
                in_output = false;
                any = false;
            } else if (line.rfind("# ", 0) == 0) {
                cur.output += line.substr(2);
                cur.output += '\n';
            } else {
                throw IoError("malformed corpus: expected '# ' output line or blank separator");
            }
        }
    }
    if (any) throw IoError("malformed corpus: truncated final record");
    return entries;
}

namespace {

ConstructFractions fractions_from_counts(const std::array<uint64_t, kLevelCount>& per_level) {
    uint64_t total = 0;
    for (uint64_t c : per_level) total += c;
    ConstructFractions f;
    if (total == 0) return f;
    std::array<uint64_t, 3> by_construct{};
    for (size_t i = 0; i < kLevelCount; ++i)
        by_construct[static_cast<size_t>(classify_construct(kAllLevels[i]))] += per_level[i];
    f.assignments = static_cast<double>(by_construct[0]) / static_cast<double>(total);
    f.conditionals = static_cast<double>(by_construct[1]) / static_cast<double>(total);
    f.loops = static_cast<double>(by_construct[2]) / static_cast<double>(total);
    return f;
}

uint64_t peak_rss_bytes() {
    rusage usage{};
    if (getrusage(RUSAGE_SELF, &usage) != 0) return 0;
    return static_cast<uint64_t>(usage.ru_maxrss) * 1024;  // ru_maxrss is in KiB on Linux
}

struct Attempt {
    std::string code;
    Level level;
    RunResult result;
};

}  // namespace

ConstructFractions compute_stats(std::span<const Record> records) {
    if (records.empty()) throw EmptyCorpusError("no records to compute statistics over");
    std::array<uint64_t, kLevelCount> per_level{};
    for (const Record& r : records) ++per_level[level_index(r.level)];
    return fractions_from_counts(per_level);
}

CorpusReport generate_corpus(const PipelineConfig& config) {
    if (config.target_count < 1) throw std::invalid_argument("target_count must be >= 1");
    if (config.max_consecutive_rejections < 1)
        throw std::invalid_argument("max_consecutive_rejections must be >= 1");
    const Grammar& grammar = config.grammar ? *config.grammar : builtin_tinypy();
    const Deriver deriver(grammar, config.derivation);

    std::ofstream out(config.output_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file: " + config.output_path);

    auto t0 = std::chrono::steady_clock::now();
    const uint64_t seed = config.derivation.seed;

    auto make_attempt = [&](uint64_t index) {
        SplitMix64 rng = SplitMix64::split(seed, index);
        Level level = select_level(config.derivation, rng);
        DerivedProgram prog = deriver.derive(level, rng);
        RunResult result = run(prog.code, config.limits);
        return Attempt{std::move(prog.code), level, std::move(result)};
    };

    CorpusReport report;
    FingerprintSet seen;
    uint64_t consecutive_rejections = 0;
    bool done = false;

    auto finish_report = [&] {
        report.construct_frequencies = fractions_from_counts(report.per_level);
        report.wall_time_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.dedup_state_bytes = config.deduplicate ? seen.capacity_bytes() : 0;
        report.peak_working_set_bytes = peak_rss_bytes();
    };
    auto exhaust = [&] {
        out.flush();
        finish_report();
        throw AttemptsExhaustedError(
            "no new unique snippet in " + std::to_string(config.max_consecutive_rejections) +
                " consecutive attempts (" + std::to_string(report.unique_written) + " written)",
            report);
    };

    // Commits one attempt's outcome; attempts must arrive in index order.
    auto commit = [&](Attempt&& a) {
        ++report.attempts;
        if (!a.result.ok()) {
            ++report.errors_discarded[static_cast<size_t>(*a.result.error)];
            if (++consecutive_rejections >= config.max_consecutive_rejections) exhaust();
            return;
        }
        if (config.deduplicate && !seen.insert(fingerprint(a.code))) {
            ++report.duplicates_discarded;
            if (++consecutive_rejections >= config.max_consecutive_rejections) exhaust();
            return;
        }
        Record record{std::move(a.code), std::move(a.result.output), a.level};
        write_record(out, record);
        if (!out) throw IoError("write failed: " + config.output_path);
        ++report.unique_written;
        ++report.per_level[level_index(a.level)];
        consecutive_rejections = 0;
        if (report.unique_written >= config.target_count) done = true;
    };

    if (config.workers <= 1) {
        for (uint64_t index = 0; !done; ++index) commit(make_attempt(index));
    } else {
        // Workers race ahead within a bounded window; the main thread commits
        // strictly in index order so the file matches a sequential run.
        std::mutex mu;
        std::condition_variable room_cv, ready_cv;
        std::map<uint64_t, Attempt> ready;
        uint64_t next_index = 0;
        uint64_t commit_index = 0;
        bool stop = false;
        const uint64_t window = static_cast<uint64_t>(config.workers) * 64;

        auto worker = [&] {
            while (true) {
                uint64_t index;
                {
                    std::unique_lock lock(mu);
                    room_cv.wait(lock, [&] { return stop || next_index < commit_index + window; });
                    if (stop) return;
                    index = next_index++;
                }
                Attempt a = make_attempt(index);
                {
                    std::lock_guard lock(mu);
                    ready.emplace(index, std::move(a));
                }
                ready_cv.notify_one();
            }
        };
        std::vector<std::thread> threads;
        threads.reserve(config.workers);
        for (unsigned i = 0; i < config.workers; ++i) threads.emplace_back(worker);

        auto shutdown = [&] {
            {
                std::lock_guard lock(mu);
                stop = true;
            }
            room_cv.notify_all();
            for (std::thread& t : threads) t.join();
        };
        try {
            while (!done) {
                Attempt a;
                {
                    std::unique_lock lock(mu);
                    ready_cv.wait(lock, [&] { return ready.count(commit_index) != 0; });
                    auto it = ready.find(commit_index);
                    a = std::move(it->second);
                    ready.erase(it);
                    ++commit_index;
                }
                room_cv.notify_all();
                commit(std::move(a));
            }
        } catch (...) {
            shutdown();
            throw;
        }
        shutdown();
    }

    out.flush();
    if (!out) throw IoError("write failed: " + config.output_path);
    out.close();
    finish_report();

    if (config.emit_stats) {
        std::string path = config.output_path + ".stats.json";
        std::ofstream stats(path, std::ios::binary | std::ios::trunc);
        if (!stats) throw IoError("cannot open stats file: " + path);
        stats << stats_json(report) << "\n";
        if (!stats) throw IoError("write failed: " + path);
    }
    return report;
}

std::string stats_json(const CorpusReport& report) {
    nlohmann::json j;
    j["attempts"] = report.attempts;
    j["unique_written"] = report.unique_written;
    j["duplicates_discarded"] = report.duplicates_discarded;
    nlohmann::json errors = nlohmann::json::object();
    for (size_t i = 0; i < kRunErrorCount; ++i)
        errors[std::string(to_string(static_cast<RunError>(i)))] = report.errors_discarded[i];
    j["errors_discarded"] = errors;
    nlohmann::json per_level = nlohmann::json::object();
    for (size_t i = 0; i < kLevelCount; ++i)
        per_level[std::string(to_string(kAllLevels[i]))] = report.per_level[i];
    j["per_level"] = per_level;
    j["construct_frequencies"] = {
        {"Assignments", report.construct_frequencies.assignments},
        {"Conditionals", report.construct_frequencies.conditionals},
        {"Loops", report.construct_frequencies.loops},
    };
    j["wall_time_seconds"] = report.wall_time_seconds;
    j["dedup_state_bytes"] = report.dedup_state_bytes;
    j["peak_working_set_bytes"] = report.peak_working_set_bytes;
    return j.dump(2);
}

}  // namespace tinypy
