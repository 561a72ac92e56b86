#pragma once

#include <string>

#include "chisme/engine.hpp"
#include "chisme/network.hpp"

namespace chisme::csv {

// 17-significant-digit decimal rendering, locale-independent, "nan"/"inf"
// spelled out. Used for every float the tool writes so repeated runs are
// byte-identical.
std::string format_double(double value);

// One row per round:
// round,mean_loss,std_loss,messages_sent,merges_applied,intra_sim,inter_sim
std::string render_metrics(const engine::MetricsTable& table);

// Edge list: u,v with u < v, sorted.
std::string render_topology(const net::Topology& topo);

// Writes content via a temp file in the target directory, then renames it
// into place. Creates parent directories.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace chisme::csv
