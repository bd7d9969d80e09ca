#pragma once

// Reparameterized continuous draws used by the models.

#include "dabm/ad/dual.hpp"

namespace dabm {

/// Beta(alpha, beta) quantile at u (inverse-CDF sampling with a frozen uniform).
double beta_quantile(double alpha, double beta, double u);

/// Same draw with tangents: dx/dalpha and dx/dbeta follow from implicit
/// differentiation of I_x(alpha, beta) = u, where the shape partials of the
/// regularized incomplete beta are taken by central differences.
ad::Dual beta_quantile(const ad::Dual& alpha, const ad::Dual& beta, double u);

/// Categorical draw by inverse CDF on a probability vector (need not be normalized).
std::size_t categorical_index(const double* probs, std::size_t k, double u);

}  // namespace dabm
