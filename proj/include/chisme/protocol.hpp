#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "chisme/models.hpp"
#include "chisme/param_vector.hpp"

namespace chisme::protocol {

// Gossip payload: a snapshot of the sender's parameters and experience.
struct UpdateMessage {
    int sender = -1;
    ParamVector params;
    double experience = 0.0;
};

// Whether a training round adds |D| * epochs to the experience counter or
// just |D| (one count per round regardless of epochs).
enum class ExperienceMode { SamplesTimesEpochs, SamplesPerRound };

// Experience-based influence: incoming experience divided by the sum of all
// experiences in the map. The incoming value must already be stored under
// the sender's key. Returns 0 when the map sums to 0.
double experience_influence(const std::map<int, double>& experience_map,
                            double incoming_experience);

// Similarity heuristic omega = S' / (1 + S') followed by the combined
// influence eta = alpha*omega / ((1-alpha)(1-omega) + alpha*omega).
// Returns 0 when both numerator and denominator vanish.
double similarity_heuristic(double scaled_sim);
double combined_influence(double alpha, double scaled_sim);

// Differentiated gossip client. Persists exactly two parameter vectors
// (active model and checkpoint); a receive event touches one extra
// ephemeral vector, the incoming message.
struct ChismeState {
    int id = 0;
    ParamVector params;
    ParamVector checkpoint;
    double experience = 0.0;
    std::map<int, double> experience_map;  // always holds the self entry

    static ChismeState init(int id, const ParamVector& initial);
};

// Per-merge trace of the influence pipeline, for instrumentation.
struct MergeTrace {
    double alpha = 0.0;
    double scaled_sim = 0.0;
    double omega = 0.0;
    double eta = 0.0;
};

// Snapshot the checkpoint, train, bump experience, refresh the self entry.
void chisme_on_train(ChismeState& state, const models::ModelSpec& spec,
                     const models::Dataset& data,
                     const models::Hyperparams& hyper, std::uint64_t seed,
                     ExperienceMode mode = ExperienceMode::SamplesTimesEpochs);

UpdateMessage chisme_build_message(const ChismeState& state);

// Record the sender's experience, derive the combined influence from
// experience share and delta similarity against the local checkpoint, then
// merge parameters and experience in place. The checkpoint only moves on
// training, never here.
MergeTrace chisme_on_receive(ChismeState& state, const UpdateMessage& msg);

// Vanilla gossip client: experience-weighted pairwise merge.
struct GossipState {
    int id = 0;
    ParamVector params;
    double experience = 0.0;

    static GossipState init(int id, const ParamVector& initial);
};

void gossip_on_train(GossipState& state, const models::ModelSpec& spec,
                     const models::Dataset& data,
                     const models::Hyperparams& hyper, std::uint64_t seed,
                     ExperienceMode mode = ExperienceMode::SamplesTimesEpochs);

UpdateMessage gossip_build_message(const GossipState& state);

// alpha = mu_k / (mu_i + mu_k); params move to the weighted mix; experience
// becomes the max of the two. Both experiences zero is a no-op.
double gossip_on_receive(GossipState& state, const UpdateMessage& msg);

// Synchronous decentralized round client: buffers the round's received
// updates and aggregates once per round. CosSim weighting additionally
// keeps the round-start checkpoint.
struct DflState {
    int id = 0;
    ParamVector params;
    ParamVector round_checkpoint;  // used by cosine-similarity weighting
    std::size_t data_size = 0;
    std::vector<UpdateMessage> round_buffer;

    static DflState init(int id, const ParamVector& initial,
                         std::size_t data_size);
};

// Data-size-weighted average over {own update} union received.
ParamVector dfl_aggregate(const ParamVector& own_update, double own_weight,
                          const std::vector<UpdateMessage>& received);

// Like dfl_aggregate but each participant's weight is scaled by the scaled
// cosine similarity of its delta from the shared round checkpoint against
// the local delta; the local update itself counts with similarity 1. Falls
// back to the own update when the total weight is zero.
ParamVector cossim_dfl_aggregate(const ParamVector& round_checkpoint,
                                 const ParamVector& own_update,
                                 double own_weight,
                                 const std::vector<UpdateMessage>& received);

// Central server: data-size-weighted mean of the round's uplinks. Empty
// round means the previous global model stands.
std::optional<ParamVector> fedavg_server_aggregate(
    const std::vector<UpdateMessage>& received);

}  // namespace chisme::protocol
