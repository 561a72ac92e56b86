#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace chisme::rng {

// Stable 64-bit mixing for deriving named sub-stream seeds. Everything in the
// simulator draws from streams keyed by (master seed, purpose tag, a, b) so
// that adding a consumer in one place never shifts the draws of another.
std::uint64_t splitmix64(std::uint64_t& state);

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t a = 0, std::uint64_t b = 0);

// xoshiro256** with a splitmix64-filled state. Self-contained so sequences
// are identical across platforms and standard libraries.
class Stream {
public:
    explicit Stream(std::uint64_t seed);

    std::uint64_t next_u64();

    // uniform in [0, 1)
    double uniform();
    double uniform(double lo, double hi);

    // uniform integer in [lo, hi], inclusive, rejection-sampled
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    // standard normal via Box-Muller (one value per call, no cached state)
    double normal();

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(
                uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t s_[4];
};

}  // namespace chisme::rng
