#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "chisme/config.hpp"

namespace chisme::cli {

// Command-line overrides applied on top of the config file.
struct Overrides {
    std::optional<std::string> paradigm;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<double> loss_threshold;
};

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitBadConfig = 2;

// `<out>/<paradigm>_<seed>.csv`
std::string run_csv_path(const std::string& out_dir, engine::Paradigm paradigm,
                         std::uint64_t seed);

// First 1-based round with mean loss below the threshold, or -1.
int rounds_to_threshold(const engine::MetricsTable& table, double threshold);

// Run one experiment, write its per-round CSV, print a one-line summary.
// Empty config path runs the fully-defaulted experiment.
int cmd_run(const std::string& config_path, const Overrides& overrides,
            std::ostream& out, std::ostream& err);

// Run the sweep cross product (paradigm x seed x condition) and write
// per-run CSVs plus `<out>/summary.csv`. `jobs` sizes the worker pool.
int cmd_compare(const std::string& config_path, const Overrides& overrides,
                int jobs, std::ostream& out, std::ostream& err);

// Write the configured topology's edge list as CSV.
int cmd_dump_topology(const std::string& config_path, const Overrides& overrides,
                      std::ostream& out, std::ostream& err);

}  // namespace chisme::cli
