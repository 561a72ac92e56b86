#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chisme/cli.hpp"
#include "chisme/config.hpp"
#include "chisme/csv.hpp"
#include "chisme/engine.hpp"
#include "chisme/network.hpp"
#include "chisme/param_vector.hpp"
#include "chisme/protocol.hpp"
#include "chisme/rng.hpp"

namespace py = pybind11;
using namespace chisme;

namespace {

engine::ExperimentConfig config_from_text(const std::string& text) {
    return config::parse_run_settings(config::ConfigFile::parse_text(text))
        .experiment;
}

ParamVector to_pv(const std::vector<double>& v) {
    return ParamVector(v);
}

std::vector<double> from_pv(const ParamVector& v) {
    return {v.values().begin(), v.values().end()};
}

}  // namespace

PYBIND11_MODULE(_chisme, m) {
    m.doc() =
        "Gossip-based decentralized differentiated learning simulator: "
        "parameter-vector algebra, merge protocols, and the experiment engine.";

    // parameter-vector algebra
    m.def(
        "delta",
        [](const std::vector<double>& current, const std::vector<double>& prior) {
            return from_pv(delta(to_pv(current), to_pv(prior)));
        },
        py::arg("current"), py::arg("prior"),
        "Elementwise current - prior.");
    m.def(
        "cosine_similarity",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            return cosine_similarity(to_pv(a), to_pv(b));
        },
        py::arg("a"), py::arg("b"),
        "Cosine similarity in [-1, 1]; zero-norm inputs return 0.");
    m.def(
        "scaled_similarity",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            return scaled_similarity(to_pv(a), to_pv(b));
        },
        py::arg("a"), py::arg("b"),
        "Cosine similarity mapped onto [0, 1]; zero-norm inputs return 0.5.");
    m.def(
        "interpolate",
        [](const std::vector<double>& local, const std::vector<double>& remote,
           double weight) {
            return from_pv(interpolate(to_pv(local), to_pv(remote), weight));
        },
        py::arg("local"), py::arg("remote"), py::arg("weight"),
        "(1-weight)*local + weight*remote, clamped to the coordinate hull.");

    // merge influence pipeline
    m.def("experience_influence", &protocol::experience_influence,
          py::arg("experience_map"), py::arg("incoming_experience"),
          "Incoming experience over the sum of all mapped experiences.");
    m.def("similarity_heuristic", &protocol::similarity_heuristic,
          py::arg("scaled_sim"), "omega = S' / (1 + S').");
    m.def("combined_influence", &protocol::combined_influence, py::arg("alpha"),
          py::arg("scaled_sim"),
          "eta = alpha*omega / ((1-alpha)(1-omega) + alpha*omega).");

    // topology
    m.def(
        "watts_strogatz_edges",
        [](int n, double connectivity, double rewire_prob, std::uint64_t seed) {
            return net::build_watts_strogatz(n, connectivity, rewire_prob,
                                             rng::derive_seed(seed, "topology"))
                .edges();
        },
        py::arg("n"), py::arg("connectivity"), py::arg("rewire_prob") = 0.1,
        py::arg("seed") = 1,
        "Edge list of the generated small-world topology (u < v). Matches the "
        "topology an experiment with the same seed uses.");

    // experiment engine
    py::class_<engine::RoundMetrics>(m, "RoundMetrics")
        .def_readonly("round", &engine::RoundMetrics::round)
        .def_readonly("client_loss", &engine::RoundMetrics::client_loss)
        .def_readonly("mean_loss", &engine::RoundMetrics::mean_loss)
        .def_readonly("std_loss", &engine::RoundMetrics::std_loss)
        .def_readonly("messages_sent", &engine::RoundMetrics::messages_attempted)
        .def_readonly("messages_delivered",
                      &engine::RoundMetrics::messages_delivered)
        .def_readonly("merges_applied", &engine::RoundMetrics::merges_applied)
        .def_readonly("intra_sim", &engine::RoundMetrics::intra_sim)
        .def_readonly("inter_sim", &engine::RoundMetrics::inter_sim);

    py::class_<engine::MetricsTable>(m, "MetricsTable")
        .def_readonly("config_digest", &engine::MetricsTable::config_digest)
        .def_readonly("dataset_digest", &engine::MetricsTable::dataset_digest)
        .def_readonly("rounds", &engine::MetricsTable::rounds)
        .def_readonly("max_buffered_updates",
                      &engine::MetricsTable::max_buffered_updates)
        .def("csv", [](const engine::MetricsTable& table) {
            return csv::render_metrics(table);
        });

    m.def(
        "run_experiment",
        [](const std::string& config_text) {
            return engine::run_experiment(config_from_text(config_text));
        },
        py::arg("config_text") = "",
        "Run one experiment from config text (same `key = value` format as "
        "the CLI); empty text runs the defaults.");
    m.def(
        "message_budget",
        [](const std::string& config_text) {
            return engine::message_budget(config_from_text(config_text));
        },
        py::arg("config_text") = "",
        "Exact number of attempted transmissions for the configured run.");
    m.def(
        "default_config",
        []() {
            return config::default_run_settings().experiment.canonical_string();
        },
        "Canonical rendering of the fully-defaulted experiment.");
}
