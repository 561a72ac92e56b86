#include "chisme/cli.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

#include "chisme/csv.hpp"
#include "chisme/rng.hpp"

namespace chisme::cli {

namespace {

config::RunSettings load_settings(const std::string& config_path,
                                  const Overrides& overrides) {
    config::RunSettings settings =
        config_path.empty() ? config::default_run_settings()
                            : config::load_run_settings(config_path);
    if (overrides.paradigm) {
        settings.experiment.paradigm =
            engine::paradigm_from_name(*overrides.paradigm);
    }
    if (overrides.seed) {
        settings.experiment.seed = *overrides.seed;
        settings.experiment.scenario.seed = *overrides.seed;
    }
    if (overrides.out_dir) {
        settings.out_dir = *overrides.out_dir;
    }
    if (overrides.loss_threshold) {
        settings.loss_threshold = *overrides.loss_threshold;
    }
    settings.experiment.validate();
    return settings;
}

int classify_exception(const std::exception& err, std::ostream& log) {
    log << "error: " << err.what() << '\n';
    return kExitRuntime;
}

}  // namespace

std::string run_csv_path(const std::string& out_dir, engine::Paradigm paradigm,
                         std::uint64_t seed) {
    return out_dir + "/" + engine::paradigm_name(paradigm) + "_" +
           std::to_string(seed) + ".csv";
}

int rounds_to_threshold(const engine::MetricsTable& table, double threshold) {
    for (const auto& row : table.rounds) {
        if (row.mean_loss < threshold) {
            return row.round;
        }
    }
    return -1;
}

int cmd_run(const std::string& config_path, const Overrides& overrides,
            std::ostream& out, std::ostream& err) {
    config::RunSettings settings;
    try {
        settings = load_settings(config_path, overrides);
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << '\n';
        return kExitBadConfig;
    }
    try {
        const auto table = engine::run_experiment(settings.experiment);
        const std::string path = run_csv_path(
            settings.out_dir, settings.experiment.paradigm,
            settings.experiment.seed);
        csv::write_atomic(path, csv::render_metrics(table));
        const auto& last = table.final_round();
        out << engine::paradigm_name(settings.experiment.paradigm) << " seed "
            << settings.experiment.seed << ": final mean loss "
            << csv::format_double(last.mean_loss) << ", final std loss "
            << csv::format_double(last.std_loss) << ", "
            << last.messages_attempted << " messages -> " << path << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        return classify_exception(e, err);
    }
}

namespace {

struct SweepRun {
    engine::Paradigm paradigm;
    std::uint64_t seed = 0;
    config::NetworkCondition condition;
};

struct SweepResult {
    engine::MetricsTable table;
    std::string csv_path;
    std::string error;
};

std::string condition_dir(const std::string& out_dir,
                          const config::NetworkCondition& cond) {
    return out_dir + "/c" + csv::format_double(cond.connectivity) + "_r" +
           csv::format_double(cond.reliability);
}

}  // namespace

int cmd_compare(const std::string& config_path, const Overrides& overrides,
                int jobs, std::ostream& out, std::ostream& err) {
    config::SweepSpec spec;
    try {
        spec = config_path.empty()
                   ? config::parse_sweep_spec(config::ConfigFile::parse_text(""))
                   : config::load_sweep_spec(config_path);
        if (overrides.out_dir) {
            spec.base.out_dir = *overrides.out_dir;
        }
        if (overrides.loss_threshold) {
            spec.base.loss_threshold = *overrides.loss_threshold;
        }
        if (jobs < 1) {
            throw config::ConfigError("--jobs must be >= 1", 0);
        }
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << '\n';
        return kExitBadConfig;
    }

    std::vector<SweepRun> runs;
    for (const auto& condition : spec.conditions) {
        for (const auto paradigm : spec.paradigms) {
            for (const auto seed : spec.seeds) {
                runs.push_back({paradigm, seed, condition});
            }
        }
    }

    std::vector<SweepResult> results(runs.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&]() {
        while (true) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= runs.size()) {
                return;
            }
            const auto& run = runs[idx];
            auto& result = results[idx];
            try {
                engine::ExperimentConfig exp = spec.base.experiment;
                exp.paradigm = run.paradigm;
                exp.seed = run.seed;
                exp.scenario.seed = run.seed;
                exp.connectivity = run.condition.connectivity;
                exp.reliability = run.condition.reliability;
                result.table = engine::run_experiment(exp);
                result.csv_path =
                    run_csv_path(condition_dir(spec.base.out_dir, run.condition),
                                 run.paradigm, run.seed);
                csv::write_atomic(result.csv_path,
                                  csv::render_metrics(result.table));
            } catch (const std::exception& e) {
                result.error = e.what();
            }
        }
    };

    const std::size_t n_workers = std::min<std::size_t>(
        static_cast<std::size_t>(jobs), std::max<std::size_t>(1, runs.size()));
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }

    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (!results[i].error.empty()) {
            err << "error: run " << engine::paradigm_name(runs[i].paradigm)
                << " seed " << runs[i].seed << " failed: " << results[i].error
                << '\n';
            return kExitRuntime;
        }
    }

    std::string summary =
        "paradigm,connectivity,reliability,seed,final_mean_loss,"
        "final_std_loss,rounds_to_threshold,total_messages,dataset_digest\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& run = runs[i];
        const auto& table = results[i].table;
        const auto& last = table.final_round();
        summary += engine::paradigm_name(run.paradigm);
        summary += ',';
        summary += csv::format_double(run.condition.connectivity);
        summary += ',';
        summary += csv::format_double(run.condition.reliability);
        summary += ',';
        summary += std::to_string(run.seed);
        summary += ',';
        summary += csv::format_double(last.mean_loss);
        summary += ',';
        summary += csv::format_double(last.std_loss);
        summary += ',';
        summary +=
            std::to_string(rounds_to_threshold(table, spec.base.loss_threshold));
        summary += ',';
        summary += std::to_string(last.messages_attempted);
        summary += ',';
        summary += std::to_string(table.dataset_digest);
        summary += '\n';
    }
    const std::string summary_path = spec.base.out_dir + "/summary.csv";
    try {
        csv::write_atomic(summary_path, summary);
    } catch (const std::exception& e) {
        return classify_exception(e, err);
    }
    out << runs.size() << " runs -> " << summary_path << '\n';
    return kExitOk;
}

int cmd_dump_topology(const std::string& config_path, const Overrides& overrides,
                      std::ostream& out, std::ostream& err) {
    config::RunSettings settings;
    try {
        settings = load_settings(config_path, overrides);
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << '\n';
        return kExitBadConfig;
    }
    try {
        const auto& exp = settings.experiment;
        const auto topo = net::build_watts_strogatz(
            exp.scenario.n_clients, exp.connectivity, exp.rewire_prob,
            rng::derive_seed(exp.seed, "topology"));
        const std::string path = settings.out_dir + "/topology_" +
                                 std::to_string(exp.seed) + ".csv";
        csv::write_atomic(path, csv::render_topology(topo));
        out << topo.n_nodes << " nodes, " << topo.edge_count() << " edges -> "
            << path << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        return classify_exception(e, err);
    }
}

}  // namespace chisme::cli
