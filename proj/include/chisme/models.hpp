#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chisme/param_vector.hpp"

namespace chisme::models {

enum class ModelKind {
    LinearRegression,   // y = Wx + b, squared-error loss
    SoftmaxClassifier,  // p = softmax(Wx + b), cross-entropy loss
    MlpClassifier,      // one tanh hidden layer, softmax head
};

ModelKind model_kind_from_name(const std::string& name);
std::string model_kind_name(ModelKind kind);

struct ModelSpec {
    ModelKind kind = ModelKind::SoftmaxClassifier;
    int input_dim = 0;
    int output_dim = 0;
    int hidden_dim = 0;  // MLP only

    // Flattening order: layer by layer, weights (row-major, one row per
    // output unit) before biases.
    std::size_t param_count() const;
    void validate() const;
};

struct Hyperparams {
    double learning_rate = 0.05;
    int batch_size = 10;
    int epochs = 1;  // passes over the local data per training round

    void validate() const;
};

// Row-major flattened samples. Classification tasks fill `labels`,
// regression tasks fill `targets` (size * target_dim).
struct Dataset {
    int input_dim = 0;
    int target_dim = 0;  // 0 for classification
    std::vector<double> inputs;
    std::vector<double> targets;
    std::vector<int> labels;

    std::size_t size() const;
    bool classification() const { return target_dim == 0; }
    std::span<const double> input_row(std::size_t i) const;
    std::span<const double> target_row(std::size_t i) const;
    void validate(int n_classes = -1) const;
};

// Deterministic initialization: weights uniform in
// [-1/sqrt(fan_in), +1/sqrt(fan_in)] per block, biases zero.
ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);

// Mini-batch SGD for `hyper.epochs` passes, shuffling once per epoch with a
// stream derived from (seed, epoch). Returns the updated parameters; the
// input vector is untouched.
ParamVector train(const ModelSpec& spec, const ParamVector& params,
                  const Dataset& data, const Hyperparams& hyper,
                  std::uint64_t seed);

// Mean per-sample loss over the dataset.
double evaluate(const ModelSpec& spec, const ParamVector& params,
                const Dataset& data);

// Mean loss and gradient over the given sample indices (all samples when
// `batch` is empty). Gradient is written into `grad`, resized as needed.
double loss_and_gradient(const ModelSpec& spec, const ParamVector& params,
                         const Dataset& data, std::span<const std::size_t> batch,
                         std::vector<double>& grad);

}  // namespace chisme::models
