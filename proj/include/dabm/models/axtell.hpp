#pragma once

// Axtell's model of firms.
//
// Agents split their time between work and leisure, share firm output
// equally, and each step move to the firm (among their own, their friends'
// and a fresh singleton) offering the highest attainable utility.  The
// argmax is kept on the primal; on the tangent it is replaced by a tempered
// softmax that feeds firm sizes and the next effort level.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dabm/ad/dual.hpp"
#include "dabm/rng.hpp"

namespace dabm::models::axtell {

inline constexpr std::size_t kNumParams = 8;

/// Beta shapes in the order theta_a, theta_b, e_a, e_b, a_a, a_b, b_a, b_b.
template <class T>
using Params = std::array<T, kNumParams>;

const std::array<std::string, kNumParams>& param_names();
Params<double> default_params();  // (1, 3), (2, 1), (2, 5), (5, 2)

struct SimConfig {
    std::size_t agents = 200;
    int steps = 30;
    double tau = 1.0;  // firm-choice softmax temperature
    bool relax_choice = true;  // false: the tangent ignores the discrete choice
    bool full_effort_mixture = false;  // differentiate every candidate's optimum in the effort mixture
    int min_friends = 1;
    int max_friends = 4;
};

template <class T>
struct Trajectory {
    std::vector<T> mean_effort;
    std::vector<T> mean_size;
    std::vector<T> mean_output;
    std::vector<double> total_size;  // primal sum of firm sizes (conservation check)
    std::vector<double> active_firms;
};

/// a E + b E^2
template <class T>
T production(const T& E, const T& a, const T& b) {
    return a * E + b * E * E;
}

/// (O(e + E_minus) / n)^theta * (1 - e)^(1 - theta), with 0^x = 0 for x > 0.
template <class T>
T utility(const T& e, const T& theta, const T& E_minus, const T& a, const T& b, const T& n);

/// Effort in [0, 1] maximizing utility; closed form from the first-order condition
/// b(1+theta) E^2 + (a - 2 theta b K) E - theta a K = 0 with E = e + E_minus, K = 1 + E_minus.
template <class T>
T optimal_effort(const T& theta, const T& E_minus, const T& a, const T& b);

struct Choice {
    std::size_t index = 0;  // primal argmax (ties to the first candidate)
};

/// Primal argmax and softmax(U / tau) weights over candidate utilities.
template <class T>
Choice select_firm(std::span<const T> utilities, double tau, std::vector<T>& soft_weights);

template <class T>
Trajectory<T> simulate(const Params<T>& params, const SimConfig& cfg, Rng& rng);

/// Friendship lists as built by simulate (exposed for tests).
std::vector<std::vector<std::uint32_t>> friendship_network(std::size_t n, int min_friends, int max_friends, Rng& rng);

}  // namespace dabm::models::axtell
