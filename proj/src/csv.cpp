#include "chisme/csv.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace chisme::csv {

std::string format_double(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                         std::chars_format::general, 17);
    if (ec != std::errc{}) {
        throw std::runtime_error("failed to format double");
    }
    return std::string(buffer, ptr);
}

std::string render_metrics(const engine::MetricsTable& table) {
    std::string out =
        "round,mean_loss,std_loss,messages_sent,merges_applied,intra_sim,"
        "inter_sim\n";
    for (const auto& row : table.rounds) {
        out += std::to_string(row.round);
        out += ',';
        out += format_double(row.mean_loss);
        out += ',';
        out += format_double(row.std_loss);
        out += ',';
        out += std::to_string(row.messages_attempted);
        out += ',';
        out += std::to_string(row.merges_applied);
        out += ',';
        out += format_double(row.intra_sim);
        out += ',';
        out += format_double(row.inter_sim);
        out += '\n';
    }
    return out;
}

std::string render_topology(const net::Topology& topo) {
    std::string out = "u,v\n";
    for (const auto& [u, v] : topo.edges()) {
        out += std::to_string(u);
        out += ',';
        out += std::to_string(v);
        out += '\n';
    }
    return out;
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path());
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
        out.write(content.data(),
                  static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw std::runtime_error("short write to " + tmp.string());
        }
    }
    fs::rename(tmp, target);
}

}  // namespace chisme::csv
