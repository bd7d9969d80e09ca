#pragma once

// Stochastic triples (delta, weight, alternative) for smoothed perturbation
// analysis of programs with Bernoulli randomness.
//
// For a discrete output X(p) the triple obeys
//     d/dp E[X(p)] = E[delta + weight * (alternative - X(p))].

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "dabm/rng.hpp"

namespace dabm::spa {

enum class PerturbationSide { right, left };

struct StochasticTriple {
    double delta = 0.0;
    double weight = 0.0;       // jump density per unit epsilon, >= 0
    double alternative = 0.0;  // value after the jump; unused when weight == 0
    std::uint64_t tag = 0;     // originating random draw
};

struct BernoulliDraw {
    int sample = 0;
    StochasticTriple triple;
};

/// Bernoulli(p) sample from uniform u (sample = 1 iff u < p) with its triple.
/// Right side flips 0 -> 1 with weight 1/(1-p); left side flips 1 -> 0 with weight 1/p.
/// Throws std::domain_error when p is not strictly inside (0, 1).
BernoulliDraw bernoulli_triple(double p, double u, PerturbationSide side, std::uint64_t tag = 0);

/// Chain rule for a = f(p) followed by X = g(a).  `inner` is the triple of f,
/// `outer` the triple of g at a (outer.delta is g'(a)).  Returns the
/// single-jump candidates; simultaneous jumps are second order and dropped.
std::vector<StochasticTriple> compose(const StochasticTriple& inner, double a,
                                      const std::function<double(double)>& g,
                                      const StochasticTriple& outer);

/// Keeps one candidate with probability w_i / W and rescales its weight to W.
/// An empty or all-zero list yields the zero triple.
StochasticTriple prune(std::span<const StochasticTriple> candidates, Rng& rng);

/// Selection probabilities used by prune (w_i / W), for exact expectation checks.
std::vector<double> prune_probabilities(std::span<const StochasticTriple> candidates);

/// delta + weight * (alternative - x): the jump folded into an ordinary tangent.
double smooth_triple(const StochasticTriple& triple, double x);

/// The derivative contribution of a triple at realized value x.
inline double derivative_estimate(const StochasticTriple& triple, double x) { return smooth_triple(triple, x); }

}  // namespace dabm::spa
