#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "chisme/models.hpp"

namespace chisme::datagen {

enum class TaskKind { Classification, Regression };

struct LabelPair {
    int a = 0;
    int b = 0;
};

// Synthetic heterogeneity scenario. Clients are assigned to groups round
// robin; classification groups relabel their samples by swapping label
// pairs, regression groups perturb the ground-truth weights. Base feature
// draws depend only on (seed, client), so two configs that differ only in
// group structure produce the same feature locations with different labels.
struct ScenarioConfig {
    TaskKind task = TaskKind::Classification;
    int n_clients = 0;
    int n_groups = 1;
    int samples_mean = 100;
    double samples_spread = 0.0;  // sizes uniform in mean*[1-s, 1+s]
    int input_dim = 2;
    int n_classes = 0;   // classification
    int output_dim = 0;  // regression
    // Per-group label pairs to swap; empty means the default pattern where
    // group g swaps (2g, 2g+1).
    std::vector<std::vector<LabelPair>> swap_pairs;
    double group_shift = 0.0;  // regression: |w_g - w_base|
    double noise_std = 0.1;    // regression target noise
    double eval_fraction = 0.25;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ClientDataset {
    int client_id = 0;
    int group_id = 0;
    models::Dataset train;
    models::Dataset eval;
};

// Default swap structure: group g swaps the label pair (2g, 2g+1).
std::vector<std::vector<LabelPair>> default_swap_pairs(int n_groups,
                                                       int n_classes);

// Gaussian-blob classification shared by all clients, with per-group label
// swaps. Class c is centered on a circle of radius 3 in the first two input
// dimensions with isotropic unit variance.
std::vector<ClientDataset> generate_label_swap_scenario(
    const ScenarioConfig& config);

// Linear regression with per-group ground-truth weights
// w_g = w_base + shift_g, |shift_g| = group_shift.
std::vector<ClientDataset> generate_regression_scenario(
    const ScenarioConfig& config);

// Disjoint deterministic split into (train, eval) of sizes
// (ceil((1-f)*n), remainder).
std::pair<models::Dataset, models::Dataset> split_train_eval(
    const models::Dataset& data, double eval_fraction, std::uint64_t seed);

std::vector<ClientDataset> generate_scenario(const ScenarioConfig& config);

// FNV-1a digest over every sample of every client; equal configs hash equal.
std::uint64_t dataset_digest(const std::vector<ClientDataset>& clients);

}  // namespace chisme::datagen
