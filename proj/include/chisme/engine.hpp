#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chisme/datagen.hpp"
#include "chisme/models.hpp"
#include "chisme/network.hpp"
#include "chisme/protocol.hpp"

namespace chisme::engine {

enum class Paradigm { Chisme, Gossip, Dfl, CosSimDfl, FedAvg, Local };

Paradigm paradigm_from_name(const std::string& name);
std::string paradigm_name(Paradigm paradigm);

// Event schedule within a round. Interleaved walks the round's client
// permutation once, training each client and delivering its message before
// the next client acts, so later clients merge earlier messages before
// training. Phased trains everyone first, then delivers in permutation
// order. Buffered paradigms behave identically under both.
enum class Schedule { Interleaved, Phased };

Schedule schedule_from_name(const std::string& name);
std::string schedule_name(Schedule schedule);

struct ExperimentConfig {
    Paradigm paradigm = Paradigm::Chisme;
    datagen::ScenarioConfig scenario;
    models::ModelSpec model;
    models::Hyperparams hyper;
    double connectivity = 1.0;
    double rewire_prob = 0.1;
    double reliability = 1.0;
    int rounds = 30;
    std::uint64_t seed = 0;
    Schedule schedule = Schedule::Interleaved;
    protocol::ExperienceMode experience_mode =
        protocol::ExperienceMode::SamplesTimesEpochs;

    void validate() const;
    std::string canonical_string() const;
    std::uint64_t digest() const;
};

struct RoundMetrics {
    int round = 0;  // 1-based
    std::vector<double> client_loss;
    double mean_loss = 0.0;
    double std_loss = 0.0;
    // cumulative counters
    long messages_attempted = 0;
    long messages_delivered = 0;
    long merges_applied = 0;
    // mean pairwise scaled similarity of this round's training deltas,
    // within and across data groups; NaN when the grouping is degenerate
    double intra_sim = 0.0;
    double inter_sim = 0.0;
};

struct MetricsTable {
    std::uint64_t config_digest = 0;
    std::uint64_t dataset_digest = 0;
    std::vector<RoundMetrics> rounds;
    // largest round buffer any client held (buffered paradigms only)
    std::size_t max_buffered_updates = 0;

    const RoundMetrics& final_round() const { return rounds.back(); }
};

// Runs the configured paradigm for `rounds` rounds and reports per-round
// metrics. Deterministic: the result is a pure function of the config.
MetricsTable run_experiment(const ExperimentConfig& config);

// Exact number of attempted transmissions over a full run: T * sum of node
// degrees for the decentralized paradigms, T * 2N for the server paradigm,
// 0 for local-only.
long message_budget(const ExperimentConfig& config);

// Mean scaled similarity over client pairs of one round's training deltas,
// split into same-group and cross-group pairs. Requires at least two groups
// with at least two clients each.
std::pair<double, double> affinity_audit(
    const std::vector<std::vector<double>>& training_deltas,
    const std::vector<int>& group_ids);

}  // namespace chisme::engine
