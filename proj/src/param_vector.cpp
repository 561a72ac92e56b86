#include "chisme/param_vector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace chisme {

std::atomic<long> ParamVector::live_{0};
std::atomic<long> ParamVector::peak_{0};

namespace {

void require_finite(std::span<const double> values) {
    for (const double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(
                "ParamVector entries must be finite");
        }
    }
}

void require_same_size(std::size_t a, std::size_t b) {
    if (a != b) {
        throw std::invalid_argument("ParamVector length mismatch: " +
                                    std::to_string(a) + " vs " +
                                    std::to_string(b));
    }
}

// Neumaier-compensated sum accumulator.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double value) {
        const double t = sum + value;
        if (std::abs(sum) >= std::abs(value)) {
            comp += (sum - t) + value;
        } else {
            comp += (value - t) + sum;
        }
        sum = t;
    }

    double value() const { return sum + comp; }
};

}  // namespace

ParamVector::ParamVector(std::vector<double> values)
    : values_(std::move(values)) {
    require_finite(values_);
    track_alloc();
}

ParamVector::ParamVector(std::initializer_list<double> values)
    : ParamVector(std::vector<double>(values)) {}

ParamVector ParamVector::zeros(std::size_t n) {
    return ParamVector(std::vector<double>(n, 0.0));
}

ParamVector::ParamVector(const ParamVector& other) : values_(other.values_) {
    track_alloc();
}

ParamVector::ParamVector(ParamVector&& other) noexcept
    : values_(std::move(other.values_)) {
    other.values_.clear();
    // ownership moved: live count unchanged
}

ParamVector& ParamVector::operator=(const ParamVector& other) {
    if (this == &other) {
        return *this;
    }
    track_free();
    values_ = other.values_;
    track_alloc();
    return *this;
}

ParamVector& ParamVector::operator=(ParamVector&& other) noexcept {
    if (this == &other) {
        return *this;
    }
    track_free();
    values_ = std::move(other.values_);
    other.values_.clear();
    return *this;
}

ParamVector::~ParamVector() { track_free(); }

long ParamVector::live_instances() noexcept { return live_.load(); }
long ParamVector::peak_instances() noexcept { return peak_.load(); }

void ParamVector::reset_peak() noexcept { peak_.store(live_.load()); }

void ParamVector::track_alloc() noexcept {
    if (values_.empty()) {
        return;
    }
    const long now = live_.fetch_add(1) + 1;
    long prev = peak_.load();
    while (prev < now && !peak_.compare_exchange_weak(prev, now)) {
    }
}

void ParamVector::track_free() noexcept {
    if (!values_.empty()) {
        live_.fetch_sub(1);
    }
}

ParamVector delta(const ParamVector& current, const ParamVector& prior) {
    require_same_size(current.size(), prior.size());
    std::vector<double> out(current.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = current[i] - prior[i];
    }
    return ParamVector(std::move(out));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    require_same_size(a.size(), b.size());
    CompensatedSum dot;
    CompensatedSum na;
    CompensatedSum nb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot.add(a[i] * b[i]);
        na.add(a[i] * a[i]);
        nb.add(b[i] * b[i]);
    }
    const double norm_a = na.value();
    const double norm_b = nb.value();
    if (norm_a <= 0.0 || norm_b <= 0.0) {
        return 0.0;
    }
    // single square root of the product keeps exactly (anti)parallel inputs
    // at exactly +/-1
    const double s = dot.value() / std::sqrt(norm_a * norm_b);
    return std::clamp(s, -1.0, 1.0);
}

double cosine_similarity(const ParamVector& a, const ParamVector& b) {
    return cosine_similarity(a.values(), b.values());
}

double scaled_similarity(std::span<const double> a, std::span<const double> b) {
    return (cosine_similarity(a, b) + 1.0) / 2.0;
}

double scaled_similarity(const ParamVector& a, const ParamVector& b) {
    return scaled_similarity(a.values(), b.values());
}

double delta_cosine_similarity(const ParamVector& current,
                               const ParamVector& remote,
                               const ParamVector& base) {
    require_same_size(current.size(), base.size());
    require_same_size(remote.size(), base.size());
    CompensatedSum dot;
    CompensatedSum na;
    CompensatedSum nb;
    for (std::size_t i = 0; i < base.size(); ++i) {
        const double da = current[i] - base[i];
        const double db = remote[i] - base[i];
        dot.add(da * db);
        na.add(da * da);
        nb.add(db * db);
    }
    const double norm_a = na.value();
    const double norm_b = nb.value();
    if (norm_a <= 0.0 || norm_b <= 0.0) {
        return 0.0;
    }
    const double s = dot.value() / std::sqrt(norm_a * norm_b);
    return std::clamp(s, -1.0, 1.0);
}

double delta_scaled_similarity(const ParamVector& current,
                               const ParamVector& remote,
                               const ParamVector& base) {
    return (delta_cosine_similarity(current, remote, base) + 1.0) / 2.0;
}

namespace {

void require_weight(double weight) {
    if (!(weight >= 0.0 && weight <= 1.0)) {
        throw std::invalid_argument("interpolation weight must lie in [0, 1]");
    }
}

double lerp_clamped(double local, double remote, double weight) {
    const double lo = std::min(local, remote);
    const double hi = std::max(local, remote);
    return std::clamp((1.0 - weight) * local + weight * remote, lo, hi);
}

}  // namespace

ParamVector interpolate(const ParamVector& local, const ParamVector& remote,
                        double weight) {
    require_same_size(local.size(), remote.size());
    require_weight(weight);
    std::vector<double> out(local.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = lerp_clamped(local[i], remote[i], weight);
    }
    return ParamVector(std::move(out));
}

void interpolate_into(ParamVector& local, const ParamVector& remote,
                      double weight) {
    require_same_size(local.size(), remote.size());
    require_weight(weight);
    for (std::size_t i = 0; i < local.size(); ++i) {
        local[i] = lerp_clamped(local[i], remote[i], weight);
    }
}

}  // namespace chisme
