#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chisme/engine.hpp"

namespace chisme::config {

// Raised for malformed or schema-violating config files; carries the line
// the problem came from (0 when no line applies).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string message, int line)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " +
                                            message
                                      : std::move(message)),
          line_(line) {}

    int line() const { return line_; }

private:
    int line_ = 0;
};

// Flat `key = value` file: one assignment per line, `#` starts a comment,
// blank lines ignored. Keys are validated against the experiment schema and
// unknown keys are rejected with their line number.
struct ConfigFile {
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool consumed = false;
    };
    std::map<std::string, Entry> entries;

    static ConfigFile parse_text(const std::string& text);
    static ConfigFile parse_file(const std::string& path);

    bool has(const std::string& key) const;
    // Accessors mark the key consumed; unknown-key rejection happens in
    // reject_unconsumed once every schema key has been pulled.
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    void reject_unconsumed() const;
    int line_of(const std::string& key) const;
};

// Experiment settings beyond the engine config proper.
struct RunSettings {
    engine::ExperimentConfig experiment;
    std::string out_dir = "out";
    double loss_threshold = 0.5;
};

struct NetworkCondition {
    double connectivity = 1.0;
    double reliability = 1.0;
};

// Comparative sweep: cross product of paradigms, seeds, and network
// conditions over one base experiment.
struct SweepSpec {
    RunSettings base;
    std::vector<engine::Paradigm> paradigms;
    std::vector<std::uint64_t> seeds;
    std::vector<NetworkCondition> conditions;
};

// Build the fully-defaulted experiment (2-group label-swap classification,
// 20 clients, 30 rounds, complete lossless topology).
RunSettings default_run_settings();

RunSettings parse_run_settings(const ConfigFile& file);
SweepSpec parse_sweep_spec(const ConfigFile& file);

RunSettings load_run_settings(const std::string& path);
SweepSpec load_sweep_spec(const std::string& path);

}  // namespace chisme::config
