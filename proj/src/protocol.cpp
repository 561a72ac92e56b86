#include "chisme/protocol.hpp"

#include <stdexcept>

namespace chisme::protocol {

double experience_influence(const std::map<int, double>& experience_map,
                            double incoming_experience) {
    if (incoming_experience < 0.0) {
        throw std::invalid_argument("experience must be non-negative");
    }
    double total = 0.0;
    for (const auto& [id, exp] : experience_map) {
        if (exp < 0.0) {
            throw std::invalid_argument("experience must be non-negative");
        }
        total += exp;
    }
    if (total <= 0.0) {
        return 0.0;
    }
    return incoming_experience / total;
}

double similarity_heuristic(double scaled_sim) {
    if (!(scaled_sim >= 0.0 && scaled_sim <= 1.0)) {
        throw std::invalid_argument("scaled similarity must lie in [0, 1]");
    }
    return scaled_sim / (1.0 + scaled_sim);
}

double combined_influence(double alpha, double scaled_sim) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("alpha must lie in [0, 1]");
    }
    const double omega = similarity_heuristic(scaled_sim);
    const double numerator = alpha * omega;
    const double denominator = (1.0 - alpha) * (1.0 - omega) + alpha * omega;
    if (numerator == 0.0) {
        return 0.0;  // covers the 0/0 corner as well
    }
    return numerator / denominator;
}

ChismeState ChismeState::init(int id, const ParamVector& initial) {
    ChismeState state;
    state.id = id;
    state.params = initial;
    state.checkpoint = initial;
    state.experience = 0.0;
    state.experience_map[id] = 0.0;
    return state;
}

namespace {

double experience_increment(const models::Dataset& data,
                            const models::Hyperparams& hyper,
                            ExperienceMode mode) {
    const auto samples = static_cast<double>(data.size());
    return mode == ExperienceMode::SamplesTimesEpochs
               ? samples * static_cast<double>(hyper.epochs)
               : samples;
}

}  // namespace

void chisme_on_train(ChismeState& state, const models::ModelSpec& spec,
                     const models::Dataset& data,
                     const models::Hyperparams& hyper, std::uint64_t seed,
                     ExperienceMode mode) {
    state.checkpoint = state.params;
    state.params = models::train(spec, state.params, data, hyper, seed);
    state.experience += experience_increment(data, hyper, mode);
    state.experience_map[state.id] = state.experience;
}

UpdateMessage chisme_build_message(const ChismeState& state) {
    return {state.id, state.params, state.experience};
}

MergeTrace chisme_on_receive(ChismeState& state, const UpdateMessage& msg) {
    if (msg.params.size() != state.params.size()) {
        throw std::invalid_argument("received parameter vector length mismatch");
    }
    if (msg.experience < 0.0) {
        throw std::invalid_argument("experience must be non-negative");
    }

    // The sender's experience enters the map before the influence is
    // computed, so it contributes to its own denominator.
    state.experience_map[msg.sender] = msg.experience;

    MergeTrace trace;
    trace.alpha = experience_influence(state.experience_map, msg.experience);
    trace.scaled_sim =
        delta_scaled_similarity(state.params, msg.params, state.checkpoint);
    trace.omega = similarity_heuristic(trace.scaled_sim);
    trace.eta = combined_influence(trace.alpha, trace.scaled_sim);

    interpolate_into(state.params, msg.params, trace.eta);
    state.experience =
        (1.0 - trace.eta) * state.experience + trace.eta * msg.experience;
    state.experience_map[state.id] = state.experience;
    return trace;
}

GossipState GossipState::init(int id, const ParamVector& initial) {
    return {id, initial, 0.0};
}

void gossip_on_train(GossipState& state, const models::ModelSpec& spec,
                     const models::Dataset& data,
                     const models::Hyperparams& hyper, std::uint64_t seed,
                     ExperienceMode mode) {
    state.params = models::train(spec, state.params, data, hyper, seed);
    state.experience += experience_increment(data, hyper, mode);
}

UpdateMessage gossip_build_message(const GossipState& state) {
    return {state.id, state.params, state.experience};
}

double gossip_on_receive(GossipState& state, const UpdateMessage& msg) {
    if (msg.params.size() != state.params.size()) {
        throw std::invalid_argument("received parameter vector length mismatch");
    }
    if (msg.experience < 0.0) {
        throw std::invalid_argument("experience must be non-negative");
    }
    const double total = state.experience + msg.experience;
    const double alpha = total > 0.0 ? msg.experience / total : 0.0;
    interpolate_into(state.params, msg.params, alpha);
    state.experience = std::max(state.experience, msg.experience);
    return alpha;
}

DflState DflState::init(int id, const ParamVector& initial,
                        std::size_t data_size) {
    DflState state;
    state.id = id;
    state.params = initial;
    state.round_checkpoint = initial;
    state.data_size = data_size;
    return state;
}

namespace {

ParamVector weighted_average(const ParamVector& own_update, double own_weight,
                             const std::vector<UpdateMessage>& received,
                             std::span<const double> weights) {
    double total = own_weight;
    for (const double w : weights) {
        total += w;
    }
    if (total <= 0.0) {
        throw std::invalid_argument("aggregation weights sum to zero");
    }
    std::vector<double> acc(own_update.size(), 0.0);
    for (std::size_t j = 0; j < acc.size(); ++j) {
        acc[j] = own_weight * own_update[j];
    }
    for (std::size_t k = 0; k < received.size(); ++k) {
        const auto& update = received[k].params;
        if (update.size() != own_update.size()) {
            throw std::invalid_argument("aggregation length mismatch");
        }
        for (std::size_t j = 0; j < acc.size(); ++j) {
            acc[j] += weights[k] * update[j];
        }
    }
    for (auto& v : acc) {
        v /= total;
    }
    return ParamVector(std::move(acc));
}

}  // namespace

ParamVector dfl_aggregate(const ParamVector& own_update, double own_weight,
                          const std::vector<UpdateMessage>& received) {
    std::vector<double> weights;
    weights.reserve(received.size());
    for (const auto& msg : received) {
        weights.push_back(msg.experience);
    }
    return weighted_average(own_update, own_weight, received, weights);
}

ParamVector cossim_dfl_aggregate(const ParamVector& round_checkpoint,
                                 const ParamVector& own_update,
                                 double own_weight,
                                 const std::vector<UpdateMessage>& received) {
    std::vector<double> weights;
    weights.reserve(received.size());
    double remote_total = 0.0;
    for (const auto& msg : received) {
        const double sim =
            delta_scaled_similarity(own_update, msg.params, round_checkpoint);
        weights.push_back(msg.experience * sim);
        remote_total += weights.back();
    }
    // own update participates with similarity 1 by definition
    if (own_weight <= 0.0 && remote_total <= 0.0) {
        return own_update;
    }
    return weighted_average(own_update, own_weight, received, weights);
}

std::optional<ParamVector> fedavg_server_aggregate(
    const std::vector<UpdateMessage>& received) {
    if (received.empty()) {
        return std::nullopt;
    }
    double total = 0.0;
    for (const auto& msg : received) {
        if (msg.experience < 0.0) {
            throw std::invalid_argument("update weights must be non-negative");
        }
        total += msg.experience;
    }
    if (total <= 0.0) {
        throw std::invalid_argument("aggregation weights sum to zero");
    }
    std::vector<double> acc(received.front().params.size(), 0.0);
    for (const auto& msg : received) {
        if (msg.params.size() != acc.size()) {
            throw std::invalid_argument("aggregation length mismatch");
        }
        for (std::size_t j = 0; j < acc.size(); ++j) {
            acc[j] += msg.experience * msg.params[j];
        }
    }
    for (auto& v : acc) {
        v /= total;
    }
    return ParamVector(std::move(acc));
}

}  // namespace chisme::protocol
