#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "chisme/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"chisme: decentralized differentiated learning simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed_flag = 0;
    std::string paradigm_flag;
    std::string out_flag;
    double threshold_flag = 0.0;
    int jobs = 1;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config file");
        cmd->add_option("--seed", seed_flag, "override the run seed");
        cmd->add_option("--paradigm", paradigm_flag, "override the paradigm");
        cmd->add_option("--out", out_flag, "output directory");
        cmd->add_option("--loss-threshold", threshold_flag,
                        "mean-loss threshold for rounds_to_threshold");
    };

    auto* run = app.add_subcommand("run", "run one experiment, write metrics CSV");
    add_common(run);

    auto* compare = app.add_subcommand(
        "compare", "run a paradigm/seed/condition sweep, write summary.csv");
    add_common(compare);
    compare->add_option("--jobs", jobs, "parallel sweep workers");

    auto* dump = app.add_subcommand("dump-topology",
                                    "write the configured topology edge list");
    add_common(dump);

    CLI11_PARSE(app, argc, argv);

    CLI::App* active = run->parsed() ? run
                       : compare->parsed() ? static_cast<CLI::App*>(compare)
                                           : dump;
    chisme::cli::Overrides overrides;
    if (active->count("--seed") > 0) overrides.seed = seed_flag;
    if (active->count("--paradigm") > 0) overrides.paradigm = paradigm_flag;
    if (active->count("--out") > 0) overrides.out_dir = out_flag;
    if (active->count("--loss-threshold") > 0) {
        overrides.loss_threshold = threshold_flag;
    }

    if (run->parsed()) {
        return chisme::cli::cmd_run(config_path, overrides, std::cout, std::cerr);
    }
    if (compare->parsed()) {
        return chisme::cli::cmd_compare(config_path, overrides, jobs, std::cout,
                                        std::cerr);
    }
    return chisme::cli::cmd_dump_topology(config_path, overrides, std::cout,
                                          std::cerr);
}
