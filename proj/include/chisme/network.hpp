#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "chisme/rng.hpp"

namespace chisme::net {

// Static undirected topology. Connectivity interpolates between a ring
// (0) and the complete graph (1); the generated graph is always connected,
// symmetric and loop-free.
struct Topology {
    int n_nodes = 0;
    double connectivity = 1.0;
    double rewire_prob = 0.1;
    std::vector<std::vector<int>> adjacency;  // sorted neighbor lists

    const std::vector<int>& neighbors(int node) const;
    std::size_t edge_count() const;
    std::size_t degree_sum() const;  // 2 * edge_count
    std::vector<std::pair<int, int>> edges() const;  // sorted, u < v
};

// Per-message independent delivery probability.
struct ReliabilityModel {
    double delivery_prob = 1.0;

    void validate() const;
};

// Watts-Strogatz generator. The ring lattice degree is
// k = 2 + round(connectivity * (n - 3)) rounded down to even; connectivity 1
// short-circuits to the complete graph. Each lattice edge is rewired with
// probability rewire_prob (no duplicates, no self-loops). Disconnected
// draws are regenerated with an incremented sub-seed.
Topology build_watts_strogatz(int n, double connectivity, double rewire_prob,
                              std::uint64_t seed);

// Each neighbor of `node` is included independently with the model's
// delivery probability, drawing from `stream` in neighbor order.
std::vector<int> sample_reachable(const Topology& topo,
                                  const ReliabilityModel& rel, int node,
                                  rng::Stream& stream);

bool is_connected(const Topology& topo);

}  // namespace chisme::net
