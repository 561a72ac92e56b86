#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "chisme/cli.hpp"
#include "chisme/csv.hpp"

namespace fs = std::filesystem;
using namespace chisme;

namespace {

const fs::path kWork = fs::temp_directory_path() / "chisme_cli_test";

struct Workspace {
    Workspace() {
        fs::remove_all(kWork);
        fs::create_directories(kWork);
    }
};

std::string write_config(const std::string& name, const std::string& text) {
    const fs::path path = kWork / name;
    std::ofstream out(path);
    out << text;
    return path.string();
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(CHISME_CLI_BIN) + " " + args +
                            " > /dev/null 2> /dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

const std::string kFastConfig =
    "n_clients = 6\n"
    "samples_mean = 30\n"
    "n_classes = 4\n"
    "rounds = 5\n"
    "epochs = 1\n"
    "batch_size = 16\n";

}  // namespace

TEST_CASE("cmd_run writes one CSV row per round and a summary line") {
    Workspace ws;
    const auto config = write_config("run.conf", kFastConfig);
    std::ostringstream out, err;
    cli::Overrides overrides;
    overrides.out_dir = (kWork / "out").string();
    CHECK(cli::cmd_run(config, overrides, out, err) == cli::kExitOk);
    CHECK(err.str().empty());
    CHECK(out.str().find("final mean loss") != std::string::npos);

    const std::string csv = slurp(kWork / "out" / "chisme_1.csv");
    CHECK(csv.starts_with(
        "round,mean_loss,std_loss,messages_sent,merges_applied,intra_sim,"
        "inter_sim\n"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);  // header + 5 rounds
    CHECK(csv.find("\r") == std::string::npos);
}

TEST_CASE("seed override changes output; same seed reproduces bytes") {
    Workspace ws;
    const auto config = write_config("run.conf", kFastConfig);
    cli::Overrides seven;
    seven.seed = 7;
    seven.out_dir = (kWork / "a").string();
    std::ostringstream out, err;
    CHECK(cli::cmd_run(config, seven, out, err) == cli::kExitOk);

    cli::Overrides seven2 = seven;
    seven2.out_dir = (kWork / "b").string();
    CHECK(cli::cmd_run(config, seven2, out, err) == cli::kExitOk);

    cli::Overrides three = seven;
    three.seed = 3;
    three.out_dir = (kWork / "c").string();
    CHECK(cli::cmd_run(config, three, out, err) == cli::kExitOk);

    CHECK(slurp(kWork / "a" / "chisme_7.csv") ==
          slurp(kWork / "b" / "chisme_7.csv"));
    CHECK(slurp(kWork / "a" / "chisme_7.csv") !=
          slurp(kWork / "c" / "chisme_3.csv"));
}

TEST_CASE("bad configs exit 2 through the library entry points") {
    Workspace ws;
    std::ostringstream out, err;
    const auto unknown = write_config("bad.conf", "paradigm = warpdrive\n");
    CHECK(cli::cmd_run(unknown, {}, out, err) == cli::kExitBadConfig);
    CHECK(err.str().find("error") != std::string::npos);

    const auto typo = write_config("typo.conf", "rouds = 5\n");
    CHECK(cli::cmd_run(typo, {}, out, err) == cli::kExitBadConfig);
    CHECK(cli::cmd_run("/missing.conf", {}, out, err) == cli::kExitBadConfig);
}

TEST_CASE("compare runs the cross product and writes summary.csv") {
    Workspace ws;
    const auto config = write_config(
        "sweep.conf", kFastConfig +
                          "paradigms = gossip,local\n"
                          "seeds = 1,2\n"
                          "conditions = 1:1\n");
    cli::Overrides overrides;
    overrides.out_dir = (kWork / "sweep").string();
    std::ostringstream out, err;
    CHECK(cli::cmd_compare(config, overrides, 2, out, err) == cli::kExitOk);

    CHECK(fs::exists(kWork / "sweep" / "c1_r1" / "gossip_1.csv"));
    CHECK(fs::exists(kWork / "sweep" / "c1_r1" / "gossip_2.csv"));
    CHECK(fs::exists(kWork / "sweep" / "c1_r1" / "local_1.csv"));
    CHECK(fs::exists(kWork / "sweep" / "c1_r1" / "local_2.csv"));

    const std::string summary = slurp(kWork / "sweep" / "summary.csv");
    CHECK(summary.starts_with(
        "paradigm,connectivity,reliability,seed,final_mean_loss,"
        "final_std_loss,rounds_to_threshold,total_messages,dataset_digest\n"));
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 5);

    // identical seeds share identical datasets across paradigms
    std::istringstream rows(summary);
    std::string line;
    std::getline(rows, line);
    std::map<std::string, std::string> digest_by_seed_gossip, digest_by_seed_local;
    while (std::getline(rows, line)) {
        std::istringstream cells(line);
        std::string paradigm, conn, rel, seed, skip, digest;
        std::getline(cells, paradigm, ',');
        std::getline(cells, conn, ',');
        std::getline(cells, rel, ',');
        std::getline(cells, seed, ',');
        for (int i = 0; i < 4; ++i) std::getline(cells, skip, ',');
        std::getline(cells, digest, ',');
        if (paradigm == "gossip") digest_by_seed_gossip[seed] = digest;
        if (paradigm == "local") digest_by_seed_local[seed] = digest;
    }
    CHECK(digest_by_seed_gossip == digest_by_seed_local);
    CHECK(digest_by_seed_gossip.at("1") != digest_by_seed_gossip.at("2"));
}

TEST_CASE("compare output is byte-identical across reruns and job counts") {
    Workspace ws;
    const auto config = write_config(
        "sweep.conf", kFastConfig +
                          "paradigms = gossip,dfl\n"
                          "seeds = 1,2\n"
                          "conditions = 1:1,0.5:0.5\n");
    std::ostringstream out, err;
    cli::Overrides a;
    a.out_dir = (kWork / "s1").string();
    CHECK(cli::cmd_compare(config, a, 1, out, err) == cli::kExitOk);
    cli::Overrides b;
    b.out_dir = (kWork / "s4").string();
    CHECK(cli::cmd_compare(config, b, 4, out, err) == cli::kExitOk);
    CHECK(slurp(kWork / "s1" / "summary.csv") == slurp(kWork / "s4" / "summary.csv"));
    CHECK(slurp(kWork / "s1" / "c0.5_r0.5" / "dfl_2.csv") ==
          slurp(kWork / "s4" / "c0.5_r0.5" / "dfl_2.csv"));
}

TEST_CASE("floats render with 17 significant digits, locale-free") {
    CHECK(csv::format_double(0.1) == "0.10000000000000001");
    CHECK(csv::format_double(1.0) == "1");
    CHECK(csv::format_double(-0.5) == "-0.5");
    CHECK(csv::format_double(1.0 / 3.0) == "0.33333333333333331");
    CHECK(csv::format_double(std::nan("")) == "nan");
}

TEST_CASE("single-group runs report the audit columns as nan") {
    Workspace ws;
    const auto config = write_config(
        "one_group.conf", kFastConfig + "n_groups = 1\nswap_pairs =\n");
    cli::Overrides overrides;
    overrides.out_dir = (kWork / "one").string();
    std::ostringstream out, err;
    CHECK(cli::cmd_run(config, overrides, out, err) == cli::kExitOk);
    const std::string csv = slurp(kWork / "one" / "chisme_1.csv");
    CHECK(csv.find(",nan,nan\n") != std::string::npos);
}

TEST_CASE("rounds_to_threshold picks the first qualifying round") {
    engine::MetricsTable table;
    for (int r = 1; r <= 4; ++r) {
        engine::RoundMetrics row;
        row.round = r;
        row.mean_loss = 1.0 / r;  // 1, 0.5, 0.333, 0.25
        table.rounds.push_back(row);
    }
    CHECK(cli::rounds_to_threshold(table, 0.4) == 3);
    CHECK(cli::rounds_to_threshold(table, 2.0) == 1);
    CHECK(cli::rounds_to_threshold(table, 0.01) == -1);
}

TEST_CASE("dump-topology writes the edge list") {
    Workspace ws;
    const auto config = write_config("topo.conf", kFastConfig + "connectivity = 0\nrewire_prob = 0\n");
    cli::Overrides overrides;
    overrides.out_dir = (kWork / "topo").string();
    std::ostringstream out, err;
    CHECK(cli::cmd_dump_topology(config, overrides, out, err) == cli::kExitOk);
    const std::string csv = slurp(kWork / "topo" / "topology_1.csv");
    CHECK(csv.starts_with("u,v\n"));
    // 6-node ring: 6 edges
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    CHECK(csv.find("0,1\n") != std::string::npos);
    CHECK(csv.find("0,5\n") != std::string::npos);
}

TEST_CASE("the installed binary maps errors to exit codes") {
    Workspace ws;
    const auto good = write_config("ok.conf", kFastConfig);
    const auto bad = write_config("bad.conf", "paradigm = warpdrive\n");
    CHECK(run_binary("run --config " + good + " --out " +
                     (kWork / "bin_out").string()) == 0);
    CHECK(run_binary("run --config " + bad) == 2);
    CHECK(run_binary("run --config /definitely/missing.conf") == 2);
    CHECK(run_binary("dump-topology --config " + good + " --out " +
                     (kWork / "bin_out").string()) == 0);
    CHECK(run_binary("definitely-not-a-verb") != 0);
}
