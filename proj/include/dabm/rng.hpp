#pragma once

// Counter-keyed random streams.
//
// Every consumer of randomness asks for a stream by (master seed, stream id).
// The pair is hashed with splitmix64 into the state of a xoshiro256** engine,
// so stream k can be regenerated in isolation and two ids never share state.

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace dabm {

/// Purposes used to build stream ids; one per independent source of randomness.
enum class StreamPurpose : std::uint64_t {
    simulation = 1,
    pruning = 2,
    structure = 3,
    fd_plus = 4,
    fd_minus = 5,
    variational = 6,
    validation = 7,
    observation = 8,
    estimator = 9,
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t mix64(std::uint64_t x);

/// Stream id for (replicate, purpose, sub-index).
std::uint64_t stream_id(std::uint64_t replicate, StreamPurpose purpose, std::uint64_t sub = 0);

class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return next(); }

    std::uint64_t next();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on the open interval (0, 1).
    double uniform_open();
    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n);
    double normal();
    /// Gumbel(0, 1) via -log(-log(U)), U clamped to [1e-12, 1 - 1e-12].
    double gumbel();

    template <class T>
    void shuffle(std::span<T> v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(index(i));
            std::swap(v[i - 1], v[j]);
        }
    }
    std::vector<std::size_t> permutation(std::size_t n);

private:
    std::array<std::uint64_t, 4> s_{};
};

/// Independent stream for (master_seed, stream_id).
Rng seed_split(std::uint64_t master_seed, std::uint64_t stream);

/// Seed derived for a stream, for callers that need to re-key sub-streams.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream);

}  // namespace dabm
