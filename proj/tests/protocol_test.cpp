#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "chisme/protocol.hpp"
#include "chisme/rng.hpp"

using namespace chisme;
using protocol::ChismeState;
using protocol::GossipState;
using protocol::UpdateMessage;

namespace {

// Straight-line scalar re-implementation of one receive event, written
// against the merge rules directly, independent of the library code paths.
struct OracleResult {
    double alpha, sprime, omega, eta, mu;
    std::vector<double> theta;
};

OracleResult oracle_receive(std::vector<double> theta_i,
                            const std::vector<double>& checkpoint,
                            double mu_i, std::map<int, double> exp_map,
                            int self_id, int sender,
                            const std::vector<double>& theta_k, double mu_k) {
    exp_map[self_id] = mu_i;
    exp_map[sender] = mu_k;
    double denom = 0.0;
    for (const auto& [id, mu] : exp_map) denom += mu;
    const double alpha = denom > 0.0 ? mu_k / denom : 0.0;

    double dot = 0.0, nii = 0.0, nki = 0.0;
    for (std::size_t j = 0; j < theta_i.size(); ++j) {
        const double dii = theta_i[j] - checkpoint[j];
        const double dki = theta_k[j] - checkpoint[j];
        dot += dii * dki;
        nii += dii * dii;
        nki += dki * dki;
    }
    double s = 0.0;
    if (nii > 0.0 && nki > 0.0) {
        s = dot / std::sqrt(nii * nki);
        if (s > 1.0) s = 1.0;
        if (s < -1.0) s = -1.0;
    }
    const double sprime = (s + 1.0) / 2.0;
    const double omega = sprime / (1.0 + sprime);
    const double num = alpha * omega;
    const double den = (1.0 - alpha) * (1.0 - omega) + alpha * omega;
    const double eta = num == 0.0 ? 0.0 : num / den;

    for (std::size_t j = 0; j < theta_i.size(); ++j) {
        theta_i[j] = (1.0 - eta) * theta_i[j] + eta * theta_k[j];
    }
    const double mu = (1.0 - eta) * mu_i + eta * mu_k;
    return {alpha, sprime, omega, eta, mu, theta_i};
}

ParamVector random_vector(rng::Stream& stream, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = stream.uniform(-2.0, 2.0);
    return ParamVector(std::move(v));
}

}  // namespace

TEST_CASE("experience influence examples") {
    CHECK(protocol::experience_influence({{0, 100.0}, {1, 100.0}}, 100.0) == 0.5);
    CHECK(protocol::experience_influence({{0, 300.0}, {1, 100.0}}, 100.0) == 0.25);
    CHECK(protocol::experience_influence({{0, 300.0}, {1, 0.0}}, 0.0) == 0.0);
    CHECK(protocol::experience_influence({{0, 0.0}}, 0.0) == 0.0);
    CHECK_THROWS_AS(protocol::experience_influence({{0, 1.0}}, -1.0),
                    std::invalid_argument);
}

TEST_CASE("combined influence identities") {
    // perfectly aligned: omega = 1/2, eta collapses to alpha
    for (int i = 0; i <= 100; ++i) {
        const double alpha = static_cast<double>(i) / 100.0;
        CHECK(std::abs(protocol::combined_influence(alpha, 1.0) - alpha) <= 1e-12);
    }
    // opposed: omega = 0, eta = 0 below alpha 1
    for (const double alpha : {0.0, 0.2, 0.5, 0.99, 1.0}) {
        CHECK(protocol::combined_influence(alpha, 0.0) == 0.0);
    }
    // hand-evaluated midpoint
    CHECK(protocol::combined_influence(0.5, 0.5) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("combined influence range and monotonicity") {
    const std::vector<double> grid = {0.0,  0.05, 0.2, 0.35, 0.5,
                                      0.65, 0.8,  0.95, 1.0};
    for (const double alpha : grid) {
        double prev = -1.0;
        for (const double sp : grid) {
            const double eta = protocol::combined_influence(alpha, sp);
            CHECK(eta >= 0.0);
            CHECK(eta <= 1.0);
            if (alpha > 0.0 && alpha < 1.0 && prev >= 0.0) {
                CHECK(eta > prev);  // strictly increasing in similarity
            }
            prev = eta;
        }
    }
    for (const double sp : {0.1, 0.5, 1.0}) {
        double prev = -1.0;
        for (const double alpha : grid) {
            const double eta = protocol::combined_influence(alpha, sp);
            if (prev >= 0.0) {
                CHECK(eta > prev);  // strictly increasing in alpha
            }
            prev = eta;
        }
    }
}

TEST_CASE("training snapshots the checkpoint and bumps experience") {
    const models::ModelSpec spec{models::ModelKind::LinearRegression, 1, 1, 0};
    models::Dataset data;
    data.input_dim = 1;
    data.target_dim = 1;
    for (int i = 0; i < 10; ++i) {
        data.inputs.push_back(0.1 * i);
        data.targets.push_back(0.2 * i);
    }
    const models::Hyperparams hyper{0.05, 4, 3};

    ChismeState state = ChismeState::init(0, ParamVector{0.0, 0.0});
    const ParamVector before = state.params;
    protocol::chisme_on_train(state, spec, data, hyper, 7);
    CHECK(state.checkpoint == before);
    CHECK(state.params != before);
    CHECK(state.experience == 30.0);  // 10 samples x 3 epochs
    CHECK(state.experience_map.at(0) == 30.0);

    // literal per-round counting drops the epochs factor
    ChismeState literal = ChismeState::init(0, ParamVector{0.0, 0.0});
    protocol::chisme_on_train(literal, spec, data, hyper, 7,
                              protocol::ExperienceMode::SamplesPerRound);
    CHECK(literal.experience == 10.0);

    // identical inputs produce identical post-states
    ChismeState twin = ChismeState::init(0, ParamVector{0.0, 0.0});
    protocol::chisme_on_train(twin, spec, data, hyper, 7);
    CHECK(twin.params == state.params);
}

TEST_CASE("messages are value snapshots") {
    ChismeState state = ChismeState::init(3, ParamVector{1.0, 2.0});
    state.experience = 50.0;
    state.experience_map[3] = 50.0;
    const UpdateMessage msg = protocol::chisme_build_message(state);
    CHECK(msg.sender == 3);
    CHECK(msg.experience == 50.0);
    CHECK(msg.params == state.params);
    state.params[0] = -9.0;
    state.experience = 0.0;
    CHECK(msg.params == ParamVector{1.0, 2.0});
    CHECK(msg.experience == 50.0);
}

TEST_CASE("receive fixed point: identical params and experience") {
    ChismeState state = ChismeState::init(0, ParamVector{1.0, -1.0});
    state.params = ParamVector{1.5, -0.5};
    state.experience = 40.0;
    state.experience_map[0] = 40.0;

    const UpdateMessage msg{1, state.params, 40.0};
    const auto trace = protocol::chisme_on_receive(state, msg);
    CHECK(trace.scaled_sim == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(trace.eta == doctest::Approx(trace.alpha).epsilon(1e-12));
    CHECK(state.params == ParamVector{1.5, -0.5});
    CHECK(state.experience == 40.0);
    CHECK(state.experience_map.at(1) == 40.0);
}

TEST_CASE("receive from an opposed direction leaves the model untouched") {
    ChismeState state = ChismeState::init(0, ParamVector{0.0, 0.0});
    state.params = ParamVector{1.0, 1.0};
    state.experience = 10.0;
    state.experience_map[0] = 10.0;

    const UpdateMessage msg{2, ParamVector{-2.0, -2.0}, 10.0};
    const auto trace = protocol::chisme_on_receive(state, msg);
    CHECK(trace.scaled_sim == doctest::Approx(0.0));
    CHECK(trace.eta == 0.0);
    CHECK(state.params == ParamVector{1.0, 1.0});
    CHECK(state.experience == 10.0);
    CHECK(state.experience_map.at(2) == 10.0);  // map still updated
}

TEST_CASE("scripted two-client exchange matches the scalar oracle") {
    // two-parameter model, fully scripted numbers
    ChismeState state = ChismeState::init(0, ParamVector{1.0, 2.0});
    state.checkpoint = ParamVector{1.0, 2.0};
    state.params = ParamVector{1.4, 2.2};  // local delta (0.4, 0.2)
    state.experience = 60.0;
    state.experience_map[0] = 60.0;
    state.experience_map[5] = 20.0;  // stale entry from an earlier exchange

    const std::vector<double> remote{1.5, 1.9};  // remote delta (0.5, -0.1)
    const double remote_exp = 45.0;

    const auto expected = oracle_receive(
        {1.4, 2.2}, {1.0, 2.0}, 60.0, {{0, 60.0}, {5, 20.0}}, 0, 7, remote,
        remote_exp);

    const UpdateMessage msg{7, ParamVector(remote), remote_exp};
    const auto trace = protocol::chisme_on_receive(state, msg);

    CHECK(std::abs(trace.alpha - expected.alpha) <= 1e-12);
    CHECK(std::abs(trace.scaled_sim - expected.sprime) <= 1e-12);
    CHECK(std::abs(trace.omega - expected.omega) <= 1e-12);
    CHECK(std::abs(trace.eta - expected.eta) <= 1e-12);
    CHECK(std::abs(state.experience - expected.mu) <= 1e-12);
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(std::abs(state.params[j] - expected.theta[j]) <= 1e-12);
    }
    CHECK(state.experience_map.at(0) == state.experience);
    CHECK(state.experience_map.at(7) == remote_exp);
}

TEST_CASE("randomized receives match the scalar oracle") {
    rng::Stream stream(314);
    for (int trial = 0; trial < 500; ++trial) {
        const auto n = static_cast<std::size_t>(stream.uniform_int(1, 6));
        ChismeState state = ChismeState::init(0, random_vector(stream, n));
        state.params = random_vector(stream, n);
        state.experience = stream.uniform(0.0, 100.0);
        state.experience_map[0] = state.experience;
        std::map<int, double> plain{{0, state.experience}};
        const auto extra_peers = stream.uniform_int(0, 3);
        for (int k = 1; k <= extra_peers; ++k) {
            const double mu = stream.uniform(0.0, 100.0);
            state.experience_map[k] = mu;
            plain[k] = mu;
        }

        const ParamVector remote = random_vector(stream, n);
        const double remote_exp = stream.uniform(0.0, 100.0);

        const auto expected = oracle_receive(
            {state.params.values().begin(), state.params.values().end()},
            {state.checkpoint.values().begin(), state.checkpoint.values().end()},
            state.experience, plain, 0, 9,
            {remote.values().begin(), remote.values().end()}, remote_exp);

        const auto trace =
            protocol::chisme_on_receive(state, UpdateMessage{9, remote, remote_exp});
        CHECK(std::abs(trace.eta - expected.eta) <= 1e-12);
        CHECK(std::abs(state.experience - expected.mu) <= 1e-12);
        for (std::size_t j = 0; j < n; ++j) {
            CHECK(std::abs(state.params[j] - expected.theta[j]) <= 1e-12);
        }
    }
}

TEST_CASE("merge convexity") {
    rng::Stream stream(271);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = static_cast<std::size_t>(stream.uniform_int(1, 8));
        ChismeState state = ChismeState::init(0, random_vector(stream, n));
        state.params = random_vector(stream, n);
        state.experience = stream.uniform(0.0, 50.0);
        state.experience_map[0] = state.experience;
        const ParamVector local_before = state.params;
        const double exp_before = state.experience;
        const ParamVector remote = random_vector(stream, n);
        const double exp_remote = stream.uniform(0.0, 50.0);
        protocol::chisme_on_receive(state, UpdateMessage{1, remote, exp_remote});
        for (std::size_t j = 0; j < n; ++j) {
            CHECK(state.params[j] >= std::min(local_before[j], remote[j]));
            CHECK(state.params[j] <= std::max(local_before[j], remote[j]));
        }
        // experience mixes convexly too: never negative, never above the
        // largest value observed
        CHECK(state.experience >= 0.0);
        CHECK(state.experience <= std::max(exp_before, exp_remote));
    }
}

TEST_CASE("receive length mismatch is a usage error") {
    ChismeState state = ChismeState::init(0, ParamVector{1.0, 2.0});
    CHECK_THROWS_AS(
        protocol::chisme_on_receive(state, UpdateMessage{1, ParamVector{1.0}, 5.0}),
        std::invalid_argument);
}

TEST_CASE("chisme state persists exactly two vectors; receive allocates none") {
    const long baseline = ParamVector::live_instances();
    ChismeState state = ChismeState::init(0, ParamVector{1.0, 2.0, 3.0});
    state.experience = 5.0;
    state.experience_map[0] = 5.0;
    CHECK(ParamVector::live_instances() == baseline + 2);

    const UpdateMessage msg{1, ParamVector{2.0, 2.0, 2.0}, 9.0};
    CHECK(ParamVector::live_instances() == baseline + 3);  // state + message

    ParamVector::reset_peak();
    protocol::chisme_on_receive(state, msg);
    // the merge works in place against the incoming message: no new vectors
    CHECK(ParamVector::peak_instances() == ParamVector::live_instances());
    CHECK(ParamVector::live_instances() == baseline + 3);
}

TEST_CASE("gossip merge examples") {
    GossipState state = GossipState::init(0, ParamVector{0.0, 4.0});
    state.experience = 100.0;
    const double alpha =
        protocol::gossip_on_receive(state, {1, ParamVector{4.0, 0.0}, 300.0});
    CHECK(alpha == 0.75);
    CHECK(state.params == ParamVector{3.0, 1.0});
    CHECK(state.experience == 300.0);

    // zero-experience sender is a no-op
    GossipState fresh = GossipState::init(0, ParamVector{1.0, 1.0});
    fresh.experience = 10.0;
    CHECK(protocol::gossip_on_receive(fresh, {1, ParamVector{5.0, 5.0}, 0.0}) ==
          0.0);
    CHECK(fresh.params == ParamVector{1.0, 1.0});
    CHECK(fresh.experience == 10.0);

    // both zero: defined as a no-op
    GossipState cold = GossipState::init(0, ParamVector{1.0, 1.0});
    CHECK(protocol::gossip_on_receive(cold, {1, ParamVector{5.0, 5.0}, 0.0}) == 0.0);
    CHECK(cold.params == ParamVector{1.0, 1.0});

    // equal experience lands at the midpoint
    GossipState mid = GossipState::init(0, ParamVector{0.0, 2.0});
    mid.experience = 50.0;
    protocol::gossip_on_receive(mid, {1, ParamVector{2.0, 0.0}, 50.0});
    CHECK(mid.params == ParamVector{1.0, 1.0});
}

TEST_CASE("dfl aggregation examples") {
    const ParamVector own{1.0, 1.0};
    // equal weights: arithmetic mean
    const ParamVector mean = protocol::dfl_aggregate(
        own, 10.0, {{1, ParamVector{3.0, 5.0}, 10.0}});
    CHECK(mean == ParamVector{2.0, 3.0});

    // weights 1 vs 3 -> 0.25/0.75
    const ParamVector weighted = protocol::dfl_aggregate(
        own, 1.0, {{1, ParamVector{5.0, 5.0}, 3.0}});
    CHECK(weighted[0] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(weighted[1] == doctest::Approx(4.0).epsilon(1e-12));

    // nothing received: own update stands
    CHECK(protocol::dfl_aggregate(own, 7.0, {}) == own);

    CHECK_THROWS_AS(protocol::dfl_aggregate(own, 0.0, {}), std::invalid_argument);
}

TEST_CASE("cossim aggregation reduces to plain weighting when omegas equal") {
    rng::Stream stream(21);
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = static_cast<std::size_t>(stream.uniform_int(2, 6));
        const ParamVector checkpoint = random_vector(stream, n);
        const ParamVector own = random_vector(stream, n);

        // remote updates with deltas parallel to the local delta all score
        // scaled similarity 1, the same as the local update
        std::vector<UpdateMessage> received;
        for (int k = 0; k < 3; ++k) {
            const double stretch = stream.uniform(0.2, 3.0);
            std::vector<double> v(n);
            for (std::size_t j = 0; j < n; ++j) {
                v[j] = checkpoint[j] + stretch * (own[j] - checkpoint[j]);
            }
            received.push_back(
                {k + 1, ParamVector(std::move(v)), stream.uniform(1.0, 20.0)});
        }
        const ParamVector plain = protocol::dfl_aggregate(own, 5.0, received);
        const ParamVector cossim =
            protocol::cossim_dfl_aggregate(checkpoint, own, 5.0, received);
        for (std::size_t j = 0; j < n; ++j) {
            CHECK(std::abs(plain[j] - cossim[j]) <= 1e-12);
        }
    }
}

TEST_CASE("cossim aggregation drops opposed updates") {
    const ParamVector checkpoint{0.0, 0.0};
    const ParamVector own{1.0, 1.0};
    // remote delta exactly opposite: omega 0, contributes nothing
    const std::vector<UpdateMessage> received{
        {1, ParamVector{-1.0, -1.0}, 100.0}};
    const ParamVector out =
        protocol::cossim_dfl_aggregate(checkpoint, own, 3.0, received);
    CHECK(out == own);

    // self-only falls back to the own update
    CHECK(protocol::cossim_dfl_aggregate(checkpoint, own, 3.0, {}) == own);
}

TEST_CASE("fedavg server aggregation") {
    CHECK(!protocol::fedavg_server_aggregate({}).has_value());

    const auto single = protocol::fedavg_server_aggregate(
        {{0, ParamVector{2.0, 4.0}, 17.0}});
    CHECK(single.value() == ParamVector{2.0, 4.0});

    const auto mean = protocol::fedavg_server_aggregate(
        {{0, ParamVector{1.0, 0.0}, 5.0}, {1, ParamVector{3.0, 2.0}, 5.0}});
    CHECK(mean.value() == ParamVector{2.0, 1.0});

    const auto weighted = protocol::fedavg_server_aggregate(
        {{0, ParamVector{1.0, 0.0}, 10.0},
         {1, ParamVector{0.0, 1.0}, 30.0},
         {2, ParamVector{0.0, 0.0}, 60.0}});
    CHECK(weighted.value()[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(weighted.value()[1] == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("homogeneous-direction sanity: identical clients stay identical") {
    const models::ModelSpec spec{models::ModelKind::SoftmaxClassifier, 2, 3, 0};
    models::Dataset data;
    data.input_dim = 2;
    data.target_dim = 0;
    rng::Stream stream(17);
    for (int i = 0; i < 12; ++i) {
        data.inputs.push_back(stream.uniform(-1.0, 1.0));
        data.inputs.push_back(stream.uniform(-1.0, 1.0));
        data.labels.push_back(static_cast<int>(stream.uniform_int(0, 2)));
    }
    const models::Hyperparams hyper{0.1, 4, 2};
    const ParamVector initial = models::init_params(spec, 1);

    ChismeState a = ChismeState::init(0, initial);
    ChismeState b = ChismeState::init(1, initial);
    protocol::chisme_on_train(a, spec, data, hyper, 42);
    protocol::chisme_on_train(b, spec, data, hyper, 42);
    CHECK(a.params == b.params);

    const ParamVector before = a.params;
    protocol::chisme_on_receive(a, protocol::chisme_build_message(b));
    protocol::chisme_on_receive(b, protocol::chisme_build_message(a));
    CHECK(a.params == before);
    CHECK(a.params == b.params);
    CHECK(a.experience == b.experience);
}

TEST_CASE("unknown senders grow the experience map") {
    ChismeState state = ChismeState::init(0, ParamVector{1.0});
    state.experience = 10.0;
    state.experience_map[0] = 10.0;
    CHECK(state.experience_map.size() == 1);
    protocol::chisme_on_receive(state, {42, ParamVector{2.0}, 5.0});
    CHECK(state.experience_map.size() == 2);
    CHECK(state.experience_map.at(42) == 5.0);
}
