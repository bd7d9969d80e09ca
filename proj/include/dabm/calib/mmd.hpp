#pragma once

// Squared maximum mean discrepancy with an RBF kernel (V-statistic).

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dabm/ad/dual.hpp"

namespace dabm::calib {

template <class S>
using PointSet = std::vector<std::vector<S>>;

/// Median pairwise Euclidean distance within `obs` (distinct pairs); 1 if degenerate.
double median_heuristic(const PointSet<double>& obs);

/// k(x, y) = exp(-|x - y|^2 / (2 h^2))
template <class S, class U>
S rbf(const std::vector<S>& x, const std::vector<U>& y, double bandwidth) {
    using ad::exp;
    using std::exp;
    S d2(0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const S d = x[i] - y[i];
        d2 += d * d;
    }
    return exp(d2 * (-0.5 / (bandwidth * bandwidth)));
}

/// mean k(sim, sim) - 2 mean k(sim, obs) + mean k(obs, obs), all pairs included.
template <class S>
S mmd_squared(const PointSet<S>& sim, const PointSet<double>& obs, double bandwidth) {
    if (sim.empty() || obs.empty()) throw std::invalid_argument("mmd: empty sample set");
    if (!(bandwidth > 0.0)) throw std::invalid_argument("mmd: bandwidth must be positive");
    const std::size_t d = obs.front().size();
    for (const auto& x : sim) {
        if (x.size() != d) throw std::invalid_argument("mmd: dimension mismatch");
    }
    for (const auto& y : obs) {
        if (y.size() != d) throw std::invalid_argument("mmd: dimension mismatch");
    }
    const double n = static_cast<double>(sim.size());
    const double m = static_cast<double>(obs.size());
    S kxx(0.0), kxy(0.0);
    double kyy = 0.0;
    for (std::size_t i = 0; i < sim.size(); ++i) {
        kxx += 1.0;  // k(x, x)
        for (std::size_t j = i + 1; j < sim.size(); ++j) kxx += 2.0 * rbf(sim[i], sim[j], bandwidth);
        for (const auto& y : obs) kxy += rbf(sim[i], y, bandwidth);
    }
    for (std::size_t i = 0; i < obs.size(); ++i) {
        kyy += 1.0;
        for (std::size_t j = i + 1; j < obs.size(); ++j) kyy += 2.0 * rbf(obs[i], obs[j], bandwidth);
    }
    return kxx / (n * n) - 2.0 * kxy / (n * m) + kyy / (m * m);
}

}  // namespace dabm::calib
