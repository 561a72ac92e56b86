#include "chisme/datagen.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "chisme/rng.hpp"

namespace chisme::datagen {

namespace {

constexpr double kBlobRadius = 3.0;

std::vector<std::vector<LabelPair>> effective_swaps(const ScenarioConfig& c) {
    if (c.task != TaskKind::Classification) {
        return {};
    }
    if (!c.swap_pairs.empty()) {
        return c.swap_pairs;
    }
    return default_swap_pairs(c.n_groups, c.n_classes);
}

int apply_swaps(int label, const std::vector<LabelPair>& swaps) {
    for (const auto& [a, b] : swaps) {
        if (label == a) return b;
        if (label == b) return a;
    }
    return label;
}

int client_sample_count(const ScenarioConfig& c, rng::Stream& stream) {
    const double lo = c.samples_mean * (1.0 - c.samples_spread);
    const double hi = c.samples_mean * (1.0 + c.samples_spread);
    const auto lo_i = static_cast<std::int64_t>(std::llround(lo));
    const auto hi_i = static_cast<std::int64_t>(std::llround(hi));
    return static_cast<int>(std::max<std::int64_t>(1, stream.uniform_int(lo_i, hi_i)));
}

void hash_doubles(std::uint64_t& h, std::span<const double> values) {
    constexpr std::uint64_t prime = 0x100000001b3ULL;
    for (const double v : values) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) {
            h ^= bits & 0xff;
            h *= prime;
            bits >>= 8;
        }
    }
}

void hash_int(std::uint64_t& h, std::int64_t value) {
    constexpr std::uint64_t prime = 0x100000001b3ULL;
    auto bits = static_cast<std::uint64_t>(value);
    for (int i = 0; i < 8; ++i) {
        h ^= bits & 0xff;
        h *= prime;
        bits >>= 8;
    }
}

}  // namespace

void ScenarioConfig::validate() const {
    if (n_clients <= 0) {
        throw std::invalid_argument("scenario needs at least one client");
    }
    if (n_groups <= 0 || n_groups > n_clients) {
        throw std::invalid_argument("scenario needs 1 <= n_groups <= n_clients");
    }
    if (samples_mean <= 0) {
        throw std::invalid_argument("samples_mean must be positive");
    }
    if (!(samples_spread >= 0.0 && samples_spread < 1.0)) {
        throw std::invalid_argument("samples_spread must lie in [0, 1)");
    }
    if (std::llround(samples_mean * (1.0 - samples_spread)) < 2) {
        throw std::invalid_argument(
            "per-client sample counts must be >= 2 to allow a train/eval split");
    }
    if (input_dim < 2) {
        throw std::invalid_argument("scenario input_dim must be >= 2");
    }
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) {
        throw std::invalid_argument("eval_fraction must lie in (0, 1)");
    }
    if (task == TaskKind::Classification) {
        if (n_classes < 2) {
            throw std::invalid_argument("classification needs n_classes >= 2");
        }
        const auto swaps = swap_pairs.empty()
                               ? default_swap_pairs(n_groups, n_classes)
                               : swap_pairs;
        if (swaps.size() != static_cast<std::size_t>(n_groups)) {
            throw std::invalid_argument("swap_pairs must list every group");
        }
        for (const auto& group : swaps) {
            for (const auto& [a, b] : group) {
                if (a < 0 || b < 0 || a >= n_classes || b >= n_classes || a == b) {
                    throw std::invalid_argument("swap pair references invalid class index");
                }
            }
        }
    } else {
        if (output_dim <= 0) {
            throw std::invalid_argument("regression needs output_dim >= 1");
        }
        if (group_shift < 0.0 || noise_std < 0.0) {
            throw std::invalid_argument("group_shift and noise_std must be non-negative");
        }
    }
}

std::vector<std::vector<LabelPair>> default_swap_pairs(int n_groups,
                                                       int n_classes) {
    std::vector<std::vector<LabelPair>> swaps(static_cast<std::size_t>(n_groups));
    for (int g = 0; g < n_groups; ++g) {
        const int a = 2 * g;
        const int b = 2 * g + 1;
        if (b < n_classes) {
            swaps[static_cast<std::size_t>(g)].push_back({a, b});
        }
    }
    return swaps;
}

std::vector<ClientDataset> generate_label_swap_scenario(
    const ScenarioConfig& config) {
    config.validate();
    if (config.task != TaskKind::Classification) {
        throw std::invalid_argument("label-swap scenario requires a classification config");
    }
    const auto swaps = effective_swaps(config);

    std::vector<ClientDataset> clients;
    clients.reserve(static_cast<std::size_t>(config.n_clients));
    for (int c = 0; c < config.n_clients; ++c) {
        const int group = c % config.n_groups;
        rng::Stream stream(rng::derive_seed(config.seed, "client-data",
                                            static_cast<std::uint64_t>(c)));
        const int count = client_sample_count(config, stream);

        models::Dataset data;
        data.input_dim = config.input_dim;
        data.target_dim = 0;
        data.inputs.reserve(static_cast<std::size_t>(count) *
                            static_cast<std::size_t>(config.input_dim));
        data.labels.reserve(static_cast<std::size_t>(count));

        for (int s = 0; s < count; ++s) {
            const int base_label =
                static_cast<int>(stream.uniform_int(0, config.n_classes - 1));
            const double angle = 2.0 * std::numbers::pi *
                                 static_cast<double>(base_label) /
                                 static_cast<double>(config.n_classes);
            for (int d = 0; d < config.input_dim; ++d) {
                double center = 0.0;
                if (d == 0) center = kBlobRadius * std::cos(angle);
                if (d == 1) center = kBlobRadius * std::sin(angle);
                data.inputs.push_back(center + stream.normal());
            }
            data.labels.push_back(
                apply_swaps(base_label, swaps[static_cast<std::size_t>(group)]));
        }

        auto [train, eval] = split_train_eval(
            data, config.eval_fraction,
            rng::derive_seed(config.seed, "split", static_cast<std::uint64_t>(c)));
        clients.push_back({c, group, std::move(train), std::move(eval)});
    }
    return clients;
}

std::vector<ClientDataset> generate_regression_scenario(
    const ScenarioConfig& config) {
    config.validate();
    if (config.task != TaskKind::Regression) {
        throw std::invalid_argument("regression scenario requires a regression config");
    }

    const auto rows = static_cast<std::size_t>(config.output_dim);
    const auto cols = static_cast<std::size_t>(config.input_dim);

    rng::Stream base_stream(rng::derive_seed(config.seed, "w-base"));
    std::vector<double> w_base(rows * cols);
    for (auto& w : w_base) {
        w = base_stream.uniform(-1.0, 1.0);
    }

    // w_g = w_base + group_shift * (random unit direction per group)
    std::vector<std::vector<double>> w_group(
        static_cast<std::size_t>(config.n_groups), w_base);
    if (config.group_shift > 0.0) {
        for (int g = 0; g < config.n_groups; ++g) {
            rng::Stream shift_stream(rng::derive_seed(
                config.seed, "group-shift", static_cast<std::uint64_t>(g)));
            std::vector<double> dir(rows * cols);
            double norm_sq = 0.0;
            for (auto& d : dir) {
                d = shift_stream.normal();
                norm_sq += d * d;
            }
            const double scale = config.group_shift / std::sqrt(norm_sq);
            auto& w = w_group[static_cast<std::size_t>(g)];
            for (std::size_t i = 0; i < w.size(); ++i) {
                w[i] += scale * dir[i];
            }
        }
    }

    std::vector<ClientDataset> clients;
    clients.reserve(static_cast<std::size_t>(config.n_clients));
    for (int c = 0; c < config.n_clients; ++c) {
        const int group = c % config.n_groups;
        const auto& w = w_group[static_cast<std::size_t>(group)];
        rng::Stream stream(rng::derive_seed(config.seed, "client-data",
                                            static_cast<std::uint64_t>(c)));
        const int count = client_sample_count(config, stream);

        models::Dataset data;
        data.input_dim = config.input_dim;
        data.target_dim = config.output_dim;
        data.inputs.reserve(static_cast<std::size_t>(count) * cols);
        data.targets.reserve(static_cast<std::size_t>(count) * rows);

        std::vector<double> x(cols);
        for (int s = 0; s < count; ++s) {
            for (auto& xi : x) {
                xi = stream.normal();
            }
            data.inputs.insert(data.inputs.end(), x.begin(), x.end());
            for (std::size_t j = 0; j < rows; ++j) {
                double y = 0.0;
                for (std::size_t k = 0; k < cols; ++k) {
                    y += w[j * cols + k] * x[k];
                }
                if (config.noise_std > 0.0) {
                    y += config.noise_std * stream.normal();
                }
                data.targets.push_back(y);
            }
        }

        auto [train, eval] = split_train_eval(
            data, config.eval_fraction,
            rng::derive_seed(config.seed, "split", static_cast<std::uint64_t>(c)));
        clients.push_back({c, group, std::move(train), std::move(eval)});
    }
    return clients;
}

std::vector<ClientDataset> generate_scenario(const ScenarioConfig& config) {
    return config.task == TaskKind::Classification
               ? generate_label_swap_scenario(config)
               : generate_regression_scenario(config);
}

std::pair<models::Dataset, models::Dataset> split_train_eval(
    const models::Dataset& data, double eval_fraction, std::uint64_t seed) {
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) {
        throw std::invalid_argument("eval_fraction must lie in (0, 1)");
    }
    const std::size_t n = data.size();
    if (n < 2) {
        throw std::invalid_argument("need at least 2 samples to split");
    }
    const auto train_size = static_cast<std::size_t>(
        std::ceil((1.0 - eval_fraction) * static_cast<double>(n)));
    if (train_size == 0 || train_size == n) {
        throw std::invalid_argument("split would leave an empty partition");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng::Stream stream(rng::derive_seed(seed, "train-eval-split"));
    stream.shuffle(order);

    auto take = [&](std::size_t begin, std::size_t end) {
        models::Dataset part;
        part.input_dim = data.input_dim;
        part.target_dim = data.target_dim;
        for (std::size_t i = begin; i < end; ++i) {
            const auto row = data.input_row(order[i]);
            part.inputs.insert(part.inputs.end(), row.begin(), row.end());
            if (data.classification()) {
                part.labels.push_back(data.labels[order[i]]);
            } else {
                const auto t = data.target_row(order[i]);
                part.targets.insert(part.targets.end(), t.begin(), t.end());
            }
        }
        return part;
    };

    return {take(0, train_size), take(train_size, n)};
}

std::uint64_t dataset_digest(const std::vector<ClientDataset>& clients) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    hash_int(h, static_cast<std::int64_t>(clients.size()));
    for (const auto& client : clients) {
        hash_int(h, client.client_id);
        hash_int(h, client.group_id);
        for (const auto* part : {&client.train, &client.eval}) {
            hash_int(h, static_cast<std::int64_t>(part->size()));
            hash_doubles(h, part->inputs);
            hash_doubles(h, part->targets);
            for (const int y : part->labels) {
                hash_int(h, y);
            }
        }
    }
    return h;
}

}  // namespace chisme::datagen
