#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace bobgmm {

/// Stafford "mix13" finalizer used by SplitMix64.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Namespaces for independent random streams. Two streams with different
/// (tag, major, minor) triples never share a key in practice.
enum class StreamTag : std::uint64_t {
    simulate = 1,
    weights = 2,
    objective = 3,
    oracle = 4,
    predictive = 5,
    bayes_opt = 6,
    init = 7,
    cross_validation = 8,
    overdispersion = 9,
};

constexpr std::uint64_t stream_id(StreamTag tag, std::uint64_t major, std::uint64_t minor = 0) noexcept {
    std::uint64_t h = mix64(static_cast<std::uint64_t>(tag) + 0x9E3779B97F4A7C15ULL);
    h = mix64(h ^ (major + 0x632BE59BD9B4E019ULL));
    h = mix64(h ^ (minor + 0x85157AF5ULL));
    return h;
}

/// Counter-based generator: output j of stream (seed, stream) is a pure
/// function of (seed, stream, j). Satisfies UniformRandomBitGenerator so it
/// can drive the <random> distributions.
class StreamRng {
public:
    using result_type = std::uint64_t;

    StreamRng(std::uint64_t master_seed, std::uint64_t stream) noexcept
        : key_(mix64(master_seed ^ mix64(stream + 0xD1B54A32D192ED03ULL))) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Exponential(1) by inverse CDF.
    double exponential() noexcept { return -std::log1p(-uniform()); }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace bobgmm
