#pragma once

#include <atomic>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace chisme {

// Flat model parameter vector. Length is fixed at construction; entries stay
// finite through every operation. Multi-block models are flattened layer by
// layer, weights before biases, so vectors from different clients line up
// coordinate for coordinate.
//
// Instances are counted while they hold data. The counters let tests measure
// how many full parameter vectors a protocol keeps live at any point, which
// is the quantity the memory-bound checks pin down.
class ParamVector {
public:
    ParamVector() noexcept = default;
    explicit ParamVector(std::vector<double> values);
    ParamVector(std::initializer_list<double> values);
    static ParamVector zeros(std::size_t n);

    ParamVector(const ParamVector& other);
    ParamVector(ParamVector&& other) noexcept;
    ParamVector& operator=(const ParamVector& other);
    ParamVector& operator=(ParamVector&& other) noexcept;
    ~ParamVector();

    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    bool operator==(const ParamVector& other) const = default;

    // Live-instance accounting (vectors currently holding data, and the
    // high-water mark since the last reset).
    static long live_instances() noexcept;
    static long peak_instances() noexcept;
    static void reset_peak() noexcept;

private:
    void track_alloc() noexcept;
    void track_free() noexcept;

    std::vector<double> values_;

    static std::atomic<long> live_;
    static std::atomic<long> peak_;
};

// current - prior, elementwise. Lengths must match.
ParamVector delta(const ParamVector& current, const ParamVector& prior);

// (a.b)/(|a||b|), clamped to [-1, 1]. Zero-norm input yields 0: a vector
// with no direction carries no alignment information, and 0 is the neutral
// value of the [-1, 1] range. Accumulation is Neumaier-compensated so that
// vectors of 1e5+ coordinates do not drift.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_similarity(const ParamVector& a, const ParamVector& b);

// Affine map of cosine similarity onto [0, 1]; zero-norm inputs land on the
// 0.5 midpoint.
double scaled_similarity(std::span<const double> a, std::span<const double> b);
double scaled_similarity(const ParamVector& a, const ParamVector& b);

// Cosine similarity of (current - base) and (remote - base) computed in one
// streaming pass, without materializing the difference vectors.
double delta_cosine_similarity(const ParamVector& current,
                               const ParamVector& remote,
                               const ParamVector& base);
double delta_scaled_similarity(const ParamVector& current,
                               const ParamVector& remote,
                               const ParamVector& base);

// (1-weight)*local + weight*remote, clamped per coordinate to the convex
// hull of the two inputs. Exact at weight 0, weight 1, and wherever the
// inputs agree. Weight must lie in [0, 1].
ParamVector interpolate(const ParamVector& local, const ParamVector& remote,
                        double weight);

// In-place variant: local becomes the interpolated vector.
void interpolate_into(ParamVector& local, const ParamVector& remote,
                      double weight);

}  // namespace chisme
