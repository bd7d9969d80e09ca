#pragma once

// Gradient estimators for discrete draws.
//
// Every estimator consumes exactly one frozen uniform per Bernoulli draw and
// produces the sample 1[u < p], so switching estimators never changes the
// primal path.  They differ only in the tangent they attach.

#include <span>
#include <string>
#include <vector>

#include "dabm/ad/dual.hpp"
#include "dabm/rng.hpp"
#include "dabm/spa/stochastic_value.hpp"
#include "dabm/spa/triple.hpp"

namespace dabm::est {

enum class EstimatorType { hard, straight_through, gumbel_softmax, spa_pruned, spa_smoothed };

struct EstimatorKind {
    EstimatorType type = EstimatorType::straight_through;
    double tau = 0.1;      // gumbel-softmax temperature
    int samples = 10;      // spa-pruned inner samples per estimate
    spa::PerturbationSide side = spa::PerturbationSide::right;
    bool both_sides = false;  // average right and left perturbations (SPA only)

    void validate() const;
    std::string label() const;
};

std::string to_string(EstimatorType t);
EstimatorType estimator_type_from_string(const std::string& name);

/// X = sample + p - stop(p).
ad::Dual st_bernoulli(const ad::Dual& p, double u);
ad::Dual st_bernoulli(const ad::Dual& p, Rng& rng);

/// Two-category straight-through Gumbel-softmax driven by the single uniform u.
/// The logistic difference of two Gumbels is logit(u), so the soft sample is
/// sigmoid((logit p - logit u) / tau) and the hard sample is 1[u < p].
ad::Dual gs_bernoulli(const ad::Dual& p, double u, double tau);

/// Straight-through Gumbel-softmax over K categories; returns a one-hot vector.
std::vector<ad::Dual> gs_categorical(std::span<const ad::Dual> pi, double tau, Rng& rng);

/// Smoothed SPA: the right/left jump folded into the tangent per direction.
ad::Dual spa_smoothed_bernoulli(const ad::Dual& p, double u, spa::PerturbationSide side);

/// Estimator dispatch for one Bernoulli draw.
inline double bernoulli(double p, double u, const EstimatorKind&) { return u < p ? 1.0 : 0.0; }
ad::Dual bernoulli(const ad::Dual& p, double u, const EstimatorKind& kind);
inline spa::StochasticValue bernoulli(const spa::StochasticValue& p, double u, const EstimatorKind& kind) {
    return spa::bernoulli(p, u, kind.side);
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

/// Gradient of E[X_t] for the walk X_t = sum_{s<=t} (2 B_s - 1), B_s ~ Bern(p).
/// Returns entries for t = 0..T; the exact answer is 2t.
std::vector<MeanSe> random_walk_gradient(double p, int T, const EstimatorKind& kind, int replicates,
                                         std::uint64_t master_seed);

/// One replicate of the walk gradient (used by the aggregate above and by tests).
std::vector<double> random_walk_replicate(double p, int T, const EstimatorKind& kind, std::uint64_t master_seed,
                                          std::uint64_t replicate);

}  // namespace dabm::est
