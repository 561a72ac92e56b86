#include "chisme/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "chisme/rng.hpp"

namespace chisme::engine {

Paradigm paradigm_from_name(const std::string& name) {
    if (name == "chisme") return Paradigm::Chisme;
    if (name == "gossip") return Paradigm::Gossip;
    if (name == "dfl") return Paradigm::Dfl;
    if (name == "cossimdfl") return Paradigm::CosSimDfl;
    if (name == "fedavg") return Paradigm::FedAvg;
    if (name == "local") return Paradigm::Local;
    throw std::invalid_argument("unknown paradigm: " + name);
}

std::string paradigm_name(Paradigm paradigm) {
    switch (paradigm) {
        case Paradigm::Chisme: return "chisme";
        case Paradigm::Gossip: return "gossip";
        case Paradigm::Dfl: return "dfl";
        case Paradigm::CosSimDfl: return "cossimdfl";
        case Paradigm::FedAvg: return "fedavg";
        case Paradigm::Local: return "local";
    }
    throw std::invalid_argument("unknown paradigm");
}

Schedule schedule_from_name(const std::string& name) {
    if (name == "interleaved") return Schedule::Interleaved;
    if (name == "phased") return Schedule::Phased;
    throw std::invalid_argument("unknown schedule: " + name);
}

std::string schedule_name(Schedule schedule) {
    return schedule == Schedule::Interleaved ? "interleaved" : "phased";
}

void ExperimentConfig::validate() const {
    scenario.validate();
    model.validate();
    hyper.validate();
    if (rounds < 1) {
        throw std::invalid_argument("rounds must be >= 1");
    }
    if (scenario.n_clients < 3) {
        throw std::invalid_argument("experiments need at least 3 clients");
    }
    if (!(connectivity >= 0.0 && connectivity <= 1.0)) {
        throw std::invalid_argument("connectivity must lie in [0, 1]");
    }
    if (!(rewire_prob >= 0.0 && rewire_prob <= 1.0)) {
        throw std::invalid_argument("rewire_prob must lie in [0, 1]");
    }
    if (!(reliability >= 0.0 && reliability <= 1.0)) {
        throw std::invalid_argument("reliability must lie in [0, 1]");
    }
    if (model.input_dim != scenario.input_dim) {
        throw std::invalid_argument("model input_dim must match scenario input_dim");
    }
    const bool classification = scenario.task == datagen::TaskKind::Classification;
    const bool classifier = model.kind != models::ModelKind::LinearRegression;
    if (classification != classifier) {
        throw std::invalid_argument("model kind does not match scenario task");
    }
    const int expected_out =
        classification ? scenario.n_classes : scenario.output_dim;
    if (model.output_dim != expected_out) {
        throw std::invalid_argument(
            "model output_dim must match scenario classes/outputs");
    }
}

std::string ExperimentConfig::canonical_string() const {
    std::ostringstream out;
    out << "paradigm=" << paradigm_name(paradigm) << ';'
        << "task="
        << (scenario.task == datagen::TaskKind::Classification ? "classification"
                                                               : "regression")
        << ';' << "n_clients=" << scenario.n_clients << ';'
        << "n_groups=" << scenario.n_groups << ';'
        << "samples_mean=" << scenario.samples_mean << ';'
        << "samples_spread=" << scenario.samples_spread << ';'
        << "input_dim=" << scenario.input_dim << ';'
        << "n_classes=" << scenario.n_classes << ';'
        << "output_dim=" << scenario.output_dim << ';' << "swaps=";
    const auto swaps = scenario.swap_pairs;
    for (const auto& group : swaps) {
        for (const auto& [a, b] : group) {
            out << a << '-' << b << ',';
        }
        out << '|';
    }
    out << ';' << "group_shift=" << scenario.group_shift << ';'
        << "noise_std=" << scenario.noise_std << ';'
        << "eval_fraction=" << scenario.eval_fraction << ';'
        << "model=" << models::model_kind_name(model.kind) << ';'
        << "hidden_dim=" << model.hidden_dim << ';'
        << "learning_rate=" << hyper.learning_rate << ';'
        << "batch_size=" << hyper.batch_size << ';'
        << "epochs=" << hyper.epochs << ';'
        << "connectivity=" << connectivity << ';'
        << "rewire_prob=" << rewire_prob << ';'
        << "reliability=" << reliability << ';' << "rounds=" << rounds << ';'
        << "seed=" << seed << ';' << "schedule=" << schedule_name(schedule)
        << ';' << "experience_mode="
        << (experience_mode == protocol::ExperienceMode::SamplesTimesEpochs
                ? "samples-times-epochs"
                : "samples-per-round");
    return out.str();
}

std::uint64_t ExperimentConfig::digest() const {
    const std::string canon = canonical_string();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : canon) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 0x100000001b3ULL;
    }
    return h;
}

long message_budget(const ExperimentConfig& config) {
    config.validate();
    switch (config.paradigm) {
        case Paradigm::Local:
            return 0;
        case Paradigm::FedAvg:
            return static_cast<long>(config.rounds) * 2 * config.scenario.n_clients;
        default: {
            const auto topo = net::build_watts_strogatz(
                config.scenario.n_clients, config.connectivity,
                config.rewire_prob, rng::derive_seed(config.seed, "topology"));
            return static_cast<long>(config.rounds) *
                   static_cast<long>(topo.degree_sum());
        }
    }
}

std::pair<double, double> affinity_audit(
    const std::vector<std::vector<double>>& training_deltas,
    const std::vector<int>& group_ids) {
    if (training_deltas.size() != group_ids.size()) {
        throw std::invalid_argument("audit inputs must align");
    }
    std::map<int, int> group_sizes;
    for (const int g : group_ids) {
        ++group_sizes[g];
    }
    if (group_sizes.size() < 2) {
        throw std::invalid_argument("affinity audit needs at least two groups");
    }
    for (const auto& [g, count] : group_sizes) {
        if (count < 2) {
            throw std::invalid_argument(
                "affinity audit needs at least two clients per group");
        }
    }

    double intra_sum = 0.0;
    double inter_sum = 0.0;
    long intra_count = 0;
    long inter_count = 0;
    for (std::size_t i = 0; i < training_deltas.size(); ++i) {
        for (std::size_t j = i + 1; j < training_deltas.size(); ++j) {
            const double sim =
                scaled_similarity(training_deltas[i], training_deltas[j]);
            if (group_ids[i] == group_ids[j]) {
                intra_sum += sim;
                ++intra_count;
            } else {
                inter_sum += sim;
                ++inter_count;
            }
        }
    }
    return {intra_sum / static_cast<double>(intra_count),
            inter_sum / static_cast<double>(inter_count)};
}

namespace {

using protocol::UpdateMessage;

// Shared run state: datasets, topology, counters, per-round audit buffers.
class Runner {
public:
    explicit Runner(const ExperimentConfig& config)
        : config_(config),
          clients_(datagen::generate_scenario(config.scenario)),
          n_(config.scenario.n_clients) {
        if (config.paradigm != Paradigm::Local &&
            config.paradigm != Paradigm::FedAvg) {
            topology_ = net::build_watts_strogatz(
                n_, config.connectivity, config.rewire_prob,
                rng::derive_seed(config.seed, "topology"));
        }
        group_ids_.reserve(clients_.size());
        for (const auto& client : clients_) {
            group_ids_.push_back(client.group_id);
        }
        table_.config_digest = config.digest();
        table_.dataset_digest = datagen::dataset_digest(clients_);
        deltas_.assign(static_cast<std::size_t>(n_), {});
        audit_possible_ = audit_applicable();
    }

    MetricsTable run() {
        switch (config_.paradigm) {
            case Paradigm::Chisme:
                run_gossip_like(/*differentiated=*/true);
                break;
            case Paradigm::Gossip:
                run_gossip_like(/*differentiated=*/false);
                break;
            case Paradigm::Local:
                run_local();
                break;
            case Paradigm::Dfl:
                run_dfl(/*cossim=*/false);
                break;
            case Paradigm::CosSimDfl:
                run_dfl(/*cossim=*/true);
                break;
            case Paradigm::FedAvg:
                run_fedavg();
                break;
        }
        return std::move(table_);
    }

private:
    bool audit_applicable() const {
        std::map<int, int> sizes;
        for (const int g : group_ids_) {
            ++sizes[g];
        }
        if (sizes.size() < 2) {
            return false;
        }
        return std::all_of(sizes.begin(), sizes.end(),
                           [](const auto& kv) { return kv.second >= 2; });
    }

    std::vector<int> round_order(int round) {
        std::vector<int> order(static_cast<std::size_t>(n_));
        std::iota(order.begin(), order.end(), 0);
        rng::Stream stream(rng::derive_seed(config_.seed, "round-order",
                                            static_cast<std::uint64_t>(round)));
        stream.shuffle(order);
        return order;
    }

    std::uint64_t train_seed(int client, int round) const {
        return rng::derive_seed(config_.seed, "train",
                                static_cast<std::uint64_t>(client),
                                static_cast<std::uint64_t>(round));
    }

    rng::Stream delivery_stream(int sender, int round) const {
        return rng::Stream(rng::derive_seed(config_.seed, "delivery",
                                            static_cast<std::uint64_t>(sender),
                                            static_cast<std::uint64_t>(round)));
    }

    // Records the training delta of one client for the affinity audit.
    void record_delta(int client, const ParamVector& before,
                      const ParamVector& after) {
        auto& d = deltas_[static_cast<std::size_t>(client)];
        d.resize(before.size());
        for (std::size_t j = 0; j < d.size(); ++j) {
            d[j] = after[j] - before[j];
        }
    }

    template <typename GetParams>
    void finish_round(int round, GetParams&& params_of) {
        RoundMetrics metrics;
        metrics.round = round;
        metrics.client_loss.reserve(static_cast<std::size_t>(n_));
        double sum = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double loss = models::evaluate(
                config_.model, params_of(i),
                clients_[static_cast<std::size_t>(i)].eval);
            metrics.client_loss.push_back(loss);
            sum += loss;
        }
        metrics.mean_loss = sum / static_cast<double>(n_);
        double var = 0.0;
        for (const double loss : metrics.client_loss) {
            const double d = loss - metrics.mean_loss;
            var += d * d;
        }
        metrics.std_loss = std::sqrt(var / static_cast<double>(n_));
        metrics.messages_attempted = attempted_;
        metrics.messages_delivered = delivered_;
        metrics.merges_applied = merges_;
        if (audit_possible_) {
            const auto [intra, inter] = affinity_audit(deltas_, group_ids_);
            metrics.intra_sim = intra;
            metrics.inter_sim = inter;
        } else {
            metrics.intra_sim = std::numeric_limits<double>::quiet_NaN();
            metrics.inter_sim = std::numeric_limits<double>::quiet_NaN();
        }
        table_.rounds.push_back(std::move(metrics));
    }

    void run_gossip_like(bool differentiated) {
        std::vector<protocol::ChismeState> chisme_states;
        std::vector<protocol::GossipState> gossip_states;
        {
            const ParamVector initial = models::init_params(
                config_.model, rng::derive_seed(config_.seed, "init"));
            for (int i = 0; i < n_; ++i) {
                if (differentiated) {
                    chisme_states.push_back(protocol::ChismeState::init(i, initial));
                } else {
                    gossip_states.push_back(protocol::GossipState::init(i, initial));
                }
            }
        }

        auto params_of = [&](int i) -> const ParamVector& {
            return differentiated ? chisme_states[static_cast<std::size_t>(i)].params
                                  : gossip_states[static_cast<std::size_t>(i)].params;
        };

        auto train_client = [&](int i, int round) {
            const auto& data = clients_[static_cast<std::size_t>(i)].train;
            const auto seed = train_seed(i, round);
            if (differentiated) {
                auto& state = chisme_states[static_cast<std::size_t>(i)];
                protocol::chisme_on_train(state, config_.model, data,
                                          config_.hyper, seed,
                                          config_.experience_mode);
                record_delta(i, state.checkpoint, state.params);
            } else {
                auto& state = gossip_states[static_cast<std::size_t>(i)];
                const ParamVector before = state.params;
                protocol::gossip_on_train(state, config_.model, data,
                                          config_.hyper, seed,
                                          config_.experience_mode);
                record_delta(i, before, state.params);
            }
        };

        auto build_message = [&](int i) {
            return differentiated
                       ? protocol::chisme_build_message(
                             chisme_states[static_cast<std::size_t>(i)])
                       : protocol::gossip_build_message(
                             gossip_states[static_cast<std::size_t>(i)]);
        };

        auto deliver = [&](const UpdateMessage& msg, int round) {
            const int i = msg.sender;
            auto stream = delivery_stream(i, round);
            for (const int j : topology_.neighbors(i)) {
                ++attempted_;
                if (stream.uniform() < config_.reliability) {
                    ++delivered_;
                    if (differentiated) {
                        protocol::chisme_on_receive(
                            chisme_states[static_cast<std::size_t>(j)], msg);
                    } else {
                        protocol::gossip_on_receive(
                            gossip_states[static_cast<std::size_t>(j)], msg);
                    }
                    ++merges_;
                }
            }
        };

        for (int round = 1; round <= config_.rounds; ++round) {
            const auto order = round_order(round);
            if (config_.schedule == Schedule::Phased) {
                // messages snapshot each client's post-train state before
                // any of the round's merges land
                for (const int i : order) {
                    train_client(i, round);
                }
                std::vector<UpdateMessage> outbox;
                outbox.reserve(static_cast<std::size_t>(n_));
                for (int i = 0; i < n_; ++i) {
                    outbox.push_back(build_message(i));
                }
                for (const int i : order) {
                    deliver(outbox[static_cast<std::size_t>(i)], round);
                }
            } else {
                for (const int i : order) {
                    train_client(i, round);
                    deliver(build_message(i), round);
                }
            }
            finish_round(round, params_of);
        }
    }

    void run_local() {
        std::vector<protocol::ChismeState> states;
        {
            const ParamVector initial = models::init_params(
                config_.model, rng::derive_seed(config_.seed, "init"));
            for (int i = 0; i < n_; ++i) {
                states.push_back(protocol::ChismeState::init(i, initial));
            }
        }
        for (int round = 1; round <= config_.rounds; ++round) {
            for (const int i : round_order(round)) {
                auto& state = states[static_cast<std::size_t>(i)];
                protocol::chisme_on_train(
                    state, config_.model, clients_[static_cast<std::size_t>(i)].train,
                    config_.hyper, train_seed(i, round), config_.experience_mode);
                record_delta(i, state.checkpoint, state.params);
            }
            finish_round(round, [&](int i) -> const ParamVector& {
                return states[static_cast<std::size_t>(i)].params;
            });
        }
    }

    void run_dfl(bool cossim) {
        std::vector<protocol::DflState> states;
        {
            const ParamVector initial = models::init_params(
                config_.model, rng::derive_seed(config_.seed, "init"));
            for (int i = 0; i < n_; ++i) {
                states.push_back(protocol::DflState::init(
                    i, initial, clients_[static_cast<std::size_t>(i)].train.size()));
            }
        }

        for (int round = 1; round <= config_.rounds; ++round) {
            const auto order = round_order(round);
            for (const int i : order) {
                auto& state = states[static_cast<std::size_t>(i)];
                state.round_checkpoint = state.params;
                state.params = models::train(
                    config_.model, state.params,
                    clients_[static_cast<std::size_t>(i)].train, config_.hyper,
                    train_seed(i, round));
                record_delta(i, state.round_checkpoint, state.params);
            }
            for (const int i : order) {
                auto& sender = states[static_cast<std::size_t>(i)];
                const UpdateMessage msg{
                    i, sender.params, static_cast<double>(sender.data_size)};
                auto stream = delivery_stream(i, round);
                for (const int j : topology_.neighbors(i)) {
                    ++attempted_;
                    if (stream.uniform() < config_.reliability) {
                        ++delivered_;
                        states[static_cast<std::size_t>(j)].round_buffer.push_back(msg);
                    }
                }
            }
            for (int i = 0; i < n_; ++i) {
                auto& state = states[static_cast<std::size_t>(i)];
                table_.max_buffered_updates = std::max(
                    table_.max_buffered_updates, state.round_buffer.size());
                const auto own_weight = static_cast<double>(state.data_size);
                state.params =
                    cossim ? protocol::cossim_dfl_aggregate(
                                 state.round_checkpoint, state.params, own_weight,
                                 state.round_buffer)
                           : protocol::dfl_aggregate(state.params, own_weight,
                                                     state.round_buffer);
                merges_ += static_cast<long>(state.round_buffer.size());
                state.round_buffer.clear();
            }
            finish_round(round, [&](int i) -> const ParamVector& {
                return states[static_cast<std::size_t>(i)].params;
            });
        }
    }

    void run_fedavg() {
        ParamVector global = models::init_params(
            config_.model, rng::derive_seed(config_.seed, "init"));
        struct FedClient {
            ParamVector params;
            std::size_t data_size = 0;
        };
        std::vector<FedClient> fed_clients;
        fed_clients.reserve(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i) {
            fed_clients.push_back(
                {global, clients_[static_cast<std::size_t>(i)].train.size()});
        }
        std::vector<UpdateMessage> uplink_buffer;

        for (int round = 1; round <= config_.rounds; ++round) {
            // downlink: clients that miss it keep their stale model
            for (int i = 0; i < n_; ++i) {
                ++attempted_;
                rng::Stream stream(rng::derive_seed(
                    config_.seed, "downlink", static_cast<std::uint64_t>(i),
                    static_cast<std::uint64_t>(round)));
                if (stream.uniform() < config_.reliability) {
                    ++delivered_;
                    fed_clients[static_cast<std::size_t>(i)].params = global;
                    ++merges_;
                }
            }
            for (const int i : round_order(round)) {
                auto& client = fed_clients[static_cast<std::size_t>(i)];
                const ParamVector before = client.params;
                client.params = models::train(
                    config_.model, client.params,
                    clients_[static_cast<std::size_t>(i)].train, config_.hyper,
                    train_seed(i, round));
                record_delta(i, before, client.params);
            }
            for (int i = 0; i < n_; ++i) {
                ++attempted_;
                rng::Stream stream(rng::derive_seed(
                    config_.seed, "uplink", static_cast<std::uint64_t>(i),
                    static_cast<std::uint64_t>(round)));
                if (stream.uniform() < config_.reliability) {
                    ++delivered_;
                    uplink_buffer.push_back(
                        {i, fed_clients[static_cast<std::size_t>(i)].params,
                         static_cast<double>(
                             fed_clients[static_cast<std::size_t>(i)].data_size)});
                }
            }
            table_.max_buffered_updates =
                std::max(table_.max_buffered_updates, uplink_buffer.size());
            if (auto aggregated = protocol::fedavg_server_aggregate(uplink_buffer)) {
                global = std::move(*aggregated);
                merges_ += static_cast<long>(uplink_buffer.size());
            }
            uplink_buffer.clear();
            finish_round(round, [&](int i) -> const ParamVector& {
                return fed_clients[static_cast<std::size_t>(i)].params;
            });
        }
    }

    const ExperimentConfig& config_;
    std::vector<datagen::ClientDataset> clients_;
    int n_;
    net::Topology topology_;
    std::vector<int> group_ids_;
    std::vector<std::vector<double>> deltas_;
    bool audit_possible_ = false;
    long attempted_ = 0;
    long delivered_ = 0;
    long merges_ = 0;
    MetricsTable table_;
};

}  // namespace

MetricsTable run_experiment(const ExperimentConfig& config) {
    config.validate();
    Runner runner(config);
    return runner.run();
}

}  // namespace chisme::engine
