#include "chisme/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "chisme/rng.hpp"

namespace chisme::models {

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "linear-regression") return ModelKind::LinearRegression;
    if (name == "softmax-classifier") return ModelKind::SoftmaxClassifier;
    if (name == "mlp-1hidden") return ModelKind::MlpClassifier;
    throw std::invalid_argument("unknown model kind: " + name);
}

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::LinearRegression: return "linear-regression";
        case ModelKind::SoftmaxClassifier: return "softmax-classifier";
        case ModelKind::MlpClassifier: return "mlp-1hidden";
    }
    throw std::invalid_argument("unknown model kind");
}

std::size_t ModelSpec::param_count() const {
    const auto in = static_cast<std::size_t>(input_dim);
    const auto out = static_cast<std::size_t>(output_dim);
    const auto hid = static_cast<std::size_t>(hidden_dim);
    switch (kind) {
        case ModelKind::LinearRegression:
        case ModelKind::SoftmaxClassifier:
            return out * in + out;
        case ModelKind::MlpClassifier:
            return hid * in + hid + out * hid + out;
    }
    throw std::invalid_argument("unknown model kind");
}

void ModelSpec::validate() const {
    if (input_dim <= 0 || output_dim <= 0) {
        throw std::invalid_argument("model dimensions must be positive");
    }
    if (kind == ModelKind::MlpClassifier && hidden_dim <= 0) {
        throw std::invalid_argument("mlp-1hidden requires hidden_dim > 0");
    }
    if ((kind == ModelKind::SoftmaxClassifier ||
         kind == ModelKind::MlpClassifier) &&
        output_dim < 2) {
        throw std::invalid_argument("classifiers need at least 2 classes");
    }
}

void Hyperparams::validate() const {
    if (!(learning_rate >= 0.0) || batch_size <= 0 || epochs <= 0) {
        throw std::invalid_argument(
            "hyperparameters must be positive (learning_rate may be 0)");
    }
}

std::size_t Dataset::size() const {
    return input_dim > 0 ? inputs.size() / static_cast<std::size_t>(input_dim)
                         : 0;
}

std::span<const double> Dataset::input_row(std::size_t i) const {
    return {inputs.data() + i * static_cast<std::size_t>(input_dim),
            static_cast<std::size_t>(input_dim)};
}

std::span<const double> Dataset::target_row(std::size_t i) const {
    return {targets.data() + i * static_cast<std::size_t>(target_dim),
            static_cast<std::size_t>(target_dim)};
}

void Dataset::validate(int n_classes) const {
    if (input_dim <= 0) {
        throw std::invalid_argument("dataset input_dim must be positive");
    }
    if (inputs.size() % static_cast<std::size_t>(input_dim) != 0) {
        throw std::invalid_argument("dataset inputs not a multiple of input_dim");
    }
    const std::size_t n = size();
    if (classification()) {
        if (labels.size() != n) {
            throw std::invalid_argument("dataset labels/input count mismatch");
        }
        for (const int y : labels) {
            if (y < 0 || (n_classes > 0 && y >= n_classes)) {
                throw std::invalid_argument("dataset label out of range");
            }
        }
    } else {
        if (targets.size() != n * static_cast<std::size_t>(target_dim)) {
            throw std::invalid_argument("dataset targets/input count mismatch");
        }
    }
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::vector<double> values(spec.param_count(), 0.0);
    rng::Stream stream(rng::derive_seed(seed, "model-init"));

    auto fill_block = [&](std::size_t offset, int rows, int cols) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
        for (int i = 0; i < rows * cols; ++i) {
            values[offset + static_cast<std::size_t>(i)] =
                stream.uniform(-bound, bound);
        }
        // biases after the weight block stay zero
    };

    if (spec.kind == ModelKind::MlpClassifier) {
        const auto w1 = static_cast<std::size_t>(spec.hidden_dim * spec.input_dim);
        const auto b1 = static_cast<std::size_t>(spec.hidden_dim);
        fill_block(0, spec.hidden_dim, spec.input_dim);
        fill_block(w1 + b1, spec.output_dim, spec.hidden_dim);
    } else {
        fill_block(0, spec.output_dim, spec.input_dim);
    }
    return ParamVector(std::move(values));
}

namespace {

// Evaluates one sample; when `grad` is non-null accumulates d(loss)/d(params)
// into it. `scratch` holds MLP activations to avoid per-sample allocation.
struct Workspace {
    std::vector<double> hidden;
    std::vector<double> act;  // output activations (logits / predictions)
};

double sample_loss(const ModelSpec& spec, std::span<const double> p,
                   const Dataset& data, std::size_t idx, Workspace& ws,
                   std::vector<double>* grad) {
    const auto x = data.input_row(idx);
    const int in = spec.input_dim;
    const int out = spec.output_dim;

    switch (spec.kind) {
        case ModelKind::LinearRegression: {
            const auto y = data.target_row(idx);
            const std::size_t w0 = 0;
            const std::size_t b0 = static_cast<std::size_t>(out) * in;
            double loss = 0.0;
            for (int j = 0; j < out; ++j) {
                double pred = p[b0 + static_cast<std::size_t>(j)];
                const std::size_t row = w0 + static_cast<std::size_t>(j) * in;
                for (int k = 0; k < in; ++k) {
                    pred += p[row + static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
                }
                const double err = pred - y[static_cast<std::size_t>(j)];
                loss += err * err;
                if (grad) {
                    const double d = 2.0 * err;
                    auto& g = *grad;
                    for (int k = 0; k < in; ++k) {
                        g[row + static_cast<std::size_t>(k)] += d * x[static_cast<std::size_t>(k)];
                    }
                    g[b0 + static_cast<std::size_t>(j)] += d;
                }
            }
            return loss;
        }
        case ModelKind::SoftmaxClassifier: {
            const int y = data.labels[idx];
            const std::size_t w0 = 0;
            const std::size_t b0 = static_cast<std::size_t>(out) * in;
            auto& z = ws.act;
            z.assign(static_cast<std::size_t>(out), 0.0);
            for (int j = 0; j < out; ++j) {
                double v = p[b0 + static_cast<std::size_t>(j)];
                const std::size_t row = w0 + static_cast<std::size_t>(j) * in;
                for (int k = 0; k < in; ++k) {
                    v += p[row + static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
                }
                z[static_cast<std::size_t>(j)] = v;
            }
            const double zmax = *std::max_element(z.begin(), z.end());
            double denom = 0.0;
            for (auto& v : z) {
                v = std::exp(v - zmax);
                denom += v;
            }
            const double logp = std::log(z[static_cast<std::size_t>(y)] / denom);
            if (grad) {
                auto& g = *grad;
                for (int j = 0; j < out; ++j) {
                    const double pj = z[static_cast<std::size_t>(j)] / denom;
                    const double d = pj - (j == y ? 1.0 : 0.0);
                    const std::size_t row = w0 + static_cast<std::size_t>(j) * in;
                    for (int k = 0; k < in; ++k) {
                        g[row + static_cast<std::size_t>(k)] += d * x[static_cast<std::size_t>(k)];
                    }
                    g[b0 + static_cast<std::size_t>(j)] += d;
                }
            }
            return -logp;
        }
        case ModelKind::MlpClassifier: {
            const int y = data.labels[idx];
            const int hid = spec.hidden_dim;
            const std::size_t w1 = 0;
            const std::size_t b1 = static_cast<std::size_t>(hid) * in;
            const std::size_t w2 = b1 + static_cast<std::size_t>(hid);
            const std::size_t b2 = w2 + static_cast<std::size_t>(out) * hid;

            auto& h = ws.hidden;
            h.assign(static_cast<std::size_t>(hid), 0.0);
            for (int j = 0; j < hid; ++j) {
                double v = p[b1 + static_cast<std::size_t>(j)];
                const std::size_t row = w1 + static_cast<std::size_t>(j) * in;
                for (int k = 0; k < in; ++k) {
                    v += p[row + static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
                }
                h[static_cast<std::size_t>(j)] = std::tanh(v);
            }
            auto& z = ws.act;
            z.assign(static_cast<std::size_t>(out), 0.0);
            for (int j = 0; j < out; ++j) {
                double v = p[b2 + static_cast<std::size_t>(j)];
                const std::size_t row = w2 + static_cast<std::size_t>(j) * hid;
                for (int k = 0; k < hid; ++k) {
                    v += p[row + static_cast<std::size_t>(k)] * h[static_cast<std::size_t>(k)];
                }
                z[static_cast<std::size_t>(j)] = v;
            }
            const double zmax = *std::max_element(z.begin(), z.end());
            double denom = 0.0;
            for (auto& v : z) {
                v = std::exp(v - zmax);
                denom += v;
            }
            const double logp = std::log(z[static_cast<std::size_t>(y)] / denom);
            if (grad) {
                auto& g = *grad;
                for (int j = 0; j < hid; ++j) {
                    // dL/dh_j = sum_m dz_m * W2[m][j]
                    double dh = 0.0;
                    for (int m = 0; m < out; ++m) {
                        const double pm = z[static_cast<std::size_t>(m)] / denom;
                        const double dz = pm - (m == y ? 1.0 : 0.0);
                        dh += dz * p[w2 + static_cast<std::size_t>(m) * hid +
                                     static_cast<std::size_t>(j)];
                    }
                    const double hj = h[static_cast<std::size_t>(j)];
                    const double da = (1.0 - hj * hj) * dh;
                    const std::size_t row = w1 + static_cast<std::size_t>(j) * in;
                    for (int k = 0; k < in; ++k) {
                        g[row + static_cast<std::size_t>(k)] += da * x[static_cast<std::size_t>(k)];
                    }
                    g[b1 + static_cast<std::size_t>(j)] += da;
                }
                for (int m = 0; m < out; ++m) {
                    const double pm = z[static_cast<std::size_t>(m)] / denom;
                    const double dz = pm - (m == y ? 1.0 : 0.0);
                    const std::size_t row = w2 + static_cast<std::size_t>(m) * hid;
                    for (int k = 0; k < hid; ++k) {
                        g[row + static_cast<std::size_t>(k)] += dz * h[static_cast<std::size_t>(k)];
                    }
                    g[b2 + static_cast<std::size_t>(m)] += dz;
                }
            }
            return -logp;
        }
    }
    throw std::invalid_argument("unknown model kind");
}

void check_shapes(const ModelSpec& spec, const ParamVector& params,
                  const Dataset& data) {
    spec.validate();
    if (params.size() != spec.param_count()) {
        throw std::invalid_argument("parameter vector does not match model spec");
    }
    if (data.input_dim != spec.input_dim) {
        throw std::invalid_argument("dataset input_dim does not match model spec");
    }
    const bool needs_labels = spec.kind != ModelKind::LinearRegression;
    if (needs_labels != data.classification()) {
        throw std::invalid_argument("dataset task does not match model kind");
    }
    if (!needs_labels && data.target_dim != spec.output_dim) {
        throw std::invalid_argument("dataset target_dim does not match model spec");
    }
    data.validate(needs_labels ? spec.output_dim : -1);
}

}  // namespace

double loss_and_gradient(const ModelSpec& spec, const ParamVector& params,
                         const Dataset& data, std::span<const std::size_t> batch,
                         std::vector<double>& grad) {
    check_shapes(spec, params, data);
    if (data.size() == 0) {
        throw std::invalid_argument("dataset is empty");
    }
    grad.assign(params.size(), 0.0);
    Workspace ws;
    double loss = 0.0;
    const auto p = params.values();
    if (batch.empty()) {
        for (std::size_t i = 0; i < data.size(); ++i) {
            loss += sample_loss(spec, p, data, i, ws, &grad);
        }
        const double inv = 1.0 / static_cast<double>(data.size());
        for (auto& g : grad) g *= inv;
        return loss * inv;
    }
    for (const std::size_t i : batch) {
        loss += sample_loss(spec, p, data, i, ws, &grad);
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (auto& g : grad) g *= inv;
    return loss * inv;
}

ParamVector train(const ModelSpec& spec, const ParamVector& params,
                  const Dataset& data, const Hyperparams& hyper,
                  std::uint64_t seed) {
    check_shapes(spec, params, data);
    hyper.validate();
    const std::size_t n = data.size();
    if (n == 0) {
        throw std::invalid_argument("cannot train on an empty dataset");
    }

    ParamVector out = params;
    std::vector<double> grad(out.size(), 0.0);
    std::vector<std::size_t> order(n);
    Workspace ws;
    const double lr = hyper.learning_rate;
    const auto batch_size = static_cast<std::size_t>(hyper.batch_size);

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng::Stream stream(
            rng::derive_seed(seed, "sgd-epoch", static_cast<std::uint64_t>(epoch)));
        stream.shuffle(order);

        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t stop = std::min(n, start + batch_size);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t i = start; i < stop; ++i) {
                sample_loss(spec, out.values(), data, order[i], ws, &grad);
            }
            const double scale = lr / static_cast<double>(stop - start);
            for (std::size_t j = 0; j < out.size(); ++j) {
                out[j] -= scale * grad[j];
            }
        }
    }

    for (std::size_t j = 0; j < out.size(); ++j) {
        if (!std::isfinite(out[j])) {
            throw std::runtime_error(
                "training diverged to non-finite parameters; lower the learning rate");
        }
    }
    return out;
}

double evaluate(const ModelSpec& spec, const ParamVector& params,
                const Dataset& data) {
    check_shapes(spec, params, data);
    const std::size_t n = data.size();
    if (n == 0) {
        throw std::invalid_argument("cannot evaluate on an empty dataset");
    }
    Workspace ws;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        loss += sample_loss(spec, params.values(), data, i, ws, nullptr);
    }
    return loss / static_cast<double>(n);
}

}  // namespace chisme::models
