#include "chisme/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace chisme::net {

const std::vector<int>& Topology::neighbors(int node) const {
    if (node < 0 || node >= n_nodes) {
        throw std::invalid_argument("unknown node id " + std::to_string(node));
    }
    return adjacency[static_cast<std::size_t>(node)];
}

std::size_t Topology::edge_count() const { return degree_sum() / 2; }

std::size_t Topology::degree_sum() const {
    std::size_t total = 0;
    for (const auto& row : adjacency) {
        total += row.size();
    }
    return total;
}

std::vector<std::pair<int, int>> Topology::edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(edge_count());
    for (int u = 0; u < n_nodes; ++u) {
        for (const int v : adjacency[static_cast<std::size_t>(u)]) {
            if (u < v) {
                out.emplace_back(u, v);
            }
        }
    }
    return out;
}

void ReliabilityModel::validate() const {
    if (!(delivery_prob >= 0.0 && delivery_prob <= 1.0)) {
        throw std::invalid_argument("reliability must lie in [0, 1]");
    }
}

namespace {

Topology complete_graph(int n, double connectivity, double rewire_prob) {
    Topology topo;
    topo.n_nodes = n;
    topo.connectivity = connectivity;
    topo.rewire_prob = rewire_prob;
    topo.adjacency.assign(static_cast<std::size_t>(n), {});
    for (int u = 0; u < n; ++u) {
        auto& row = topo.adjacency[static_cast<std::size_t>(u)];
        row.reserve(static_cast<std::size_t>(n - 1));
        for (int v = 0; v < n; ++v) {
            if (v != u) {
                row.push_back(v);
            }
        }
    }
    return topo;
}

int lattice_degree(int n, double connectivity) {
    int k = 2 + static_cast<int>(std::llround(connectivity * (n - 3)));
    if (k % 2 != 0) {
        --k;
    }
    return std::clamp(k, 2, n - 1 - (n % 2 == 0 ? 1 : 0));
}

Topology attempt_build(int n, double connectivity, double rewire_prob,
                       std::uint64_t seed) {
    const int k = lattice_degree(n, connectivity);
    // edge set as ordered pairs (u < v) for dedup during rewiring
    std::set<std::pair<int, int>> edge_set;
    auto canon = [](int a, int b) {
        return a < b ? std::pair{a, b} : std::pair{b, a};
    };
    for (int u = 0; u < n; ++u) {
        for (int j = 1; j <= k / 2; ++j) {
            edge_set.insert(canon(u, (u + j) % n));
        }
    }

    rng::Stream stream(seed);
    for (int u = 0; u < n; ++u) {
        for (int j = 1; j <= k / 2; ++j) {
            const auto original = canon(u, (u + j) % n);
            if (!edge_set.contains(original)) {
                continue;  // already rewired away
            }
            if (stream.uniform() >= rewire_prob) {
                continue;
            }
            // pick a fresh endpoint for u, keeping the graph simple
            std::vector<int> candidates;
            candidates.reserve(static_cast<std::size_t>(n));
            for (int w = 0; w < n; ++w) {
                if (w != u && !edge_set.contains(canon(u, w))) {
                    candidates.push_back(w);
                }
            }
            if (candidates.empty()) {
                continue;  // u already connected to everyone
            }
            const auto pick = static_cast<std::size_t>(stream.uniform_int(
                0, static_cast<std::int64_t>(candidates.size()) - 1));
            edge_set.erase(original);
            edge_set.insert(canon(u, candidates[pick]));
        }
    }

    Topology topo;
    topo.n_nodes = n;
    topo.connectivity = connectivity;
    topo.rewire_prob = rewire_prob;
    topo.adjacency.assign(static_cast<std::size_t>(n), {});
    for (const auto& [u, v] : edge_set) {
        topo.adjacency[static_cast<std::size_t>(u)].push_back(v);
        topo.adjacency[static_cast<std::size_t>(v)].push_back(u);
    }
    for (auto& row : topo.adjacency) {
        std::sort(row.begin(), row.end());
    }
    return topo;
}

}  // namespace

bool is_connected(const Topology& topo) {
    if (topo.n_nodes <= 0) {
        return false;
    }
    std::vector<bool> seen(static_cast<std::size_t>(topo.n_nodes), false);
    std::vector<int> stack{0};
    seen[0] = true;
    int visited = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (const int v : topo.adjacency[static_cast<std::size_t>(u)]) {
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = true;
                ++visited;
                stack.push_back(v);
            }
        }
    }
    return visited == topo.n_nodes;
}

Topology build_watts_strogatz(int n, double connectivity, double rewire_prob,
                              std::uint64_t seed) {
    if (n < 3) {
        throw std::invalid_argument("Watts-Strogatz topology needs n >= 3");
    }
    if (!(connectivity >= 0.0 && connectivity <= 1.0)) {
        throw std::invalid_argument("connectivity must lie in [0, 1]");
    }
    if (!(rewire_prob >= 0.0 && rewire_prob <= 1.0)) {
        throw std::invalid_argument("rewire_prob must lie in [0, 1]");
    }
    if (connectivity >= 1.0) {
        return complete_graph(n, connectivity, rewire_prob);
    }
    for (std::uint64_t attempt = 0;; ++attempt) {
        Topology topo = attempt_build(
            n, connectivity, rewire_prob,
            rng::derive_seed(seed, "watts-strogatz", attempt));
        if (is_connected(topo)) {
            return topo;
        }
    }
}

std::vector<int> sample_reachable(const Topology& topo,
                                  const ReliabilityModel& rel, int node,
                                  rng::Stream& stream) {
    rel.validate();
    std::vector<int> reached;
    const auto& nbrs = topo.neighbors(node);
    reached.reserve(nbrs.size());
    for (const int v : nbrs) {
        if (stream.uniform() < rel.delivery_prob) {
            reached.push_back(v);
        }
    }
    return reached;
}

}  // namespace chisme::net
