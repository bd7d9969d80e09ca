#pragma once

// Smooth-surrogate vocabulary shared by the models: step smoothers,
// tempered softmax, masked conditionals and the surrogate combinator that
// keeps the hard primal while borrowing the tangent of a smooth stand-in.

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dabm/ad/dual.hpp"

namespace dabm::ad {

enum class SmootherKind { gaussian_cdf, sigmoid, piecewise_linear };

struct SmootherConfig {
    SmootherKind kind = SmootherKind::gaussian_cdf;
    double scale = 1.0;  // sigma for gaussian-cdf, steepness k for sigmoid
    double lower = 1.0;  // a: piecewise-linear ramp starts at -a
    double upper = 1.0;  // b: piecewise-linear ramp ends at +b

    void validate() const;
};

std::string to_string(SmootherKind kind);
SmootherKind smoother_kind_from_string(const std::string& name);

/// Primal value and derivative of the chosen smoother at x.
struct SmoothPoint {
    double value;
    double slope;
};
SmoothPoint smooth_step_point(double x, const SmootherConfig& cfg);

inline double smooth_step(double x, const SmootherConfig& cfg) { return smooth_step_point(x, cfg).value; }
inline Dual smooth_step(const Dual& x, const SmootherConfig& cfg) {
    const auto p = smooth_step_point(x.value(), cfg);
    return x.apply(p.value, p.slope);
}

/// Hard step(x) = 1 if x >= 0 else 0.
inline double hard_step(double x) { return x >= 0.0 ? 1.0 : 0.0; }

/// h + (h_smooth - stop(h_smooth)): primal of h_primal, tangent of h_smooth.
inline Dual surrogate_combine(const Dual& h_primal, const Dual& h_smooth) {
    return Dual(h_primal.value(), h_smooth.tangent());
}
inline double surrogate_combine(double h_primal, double /*h_smooth*/) { return h_primal; }

/// softmax(v / tau) with the maximum subtracted before exponentiation.
template <class T>
std::vector<T> tempered_softmax(std::span<const T> v, double tau) {
    if (v.empty()) throw std::invalid_argument("tempered_softmax: empty input");
    if (!(tau > 0.0)) throw std::invalid_argument("tempered_softmax: temperature must be positive");
    using std::exp;
    double vmax = value(v[0]);
    for (const auto& x : v) vmax = std::max(vmax, value(x));
    std::vector<T> out;
    out.reserve(v.size());
    T total = T(0.0);
    for (const auto& x : v) {
        out.push_back(exp((x - vmax) / tau));
        total += out.back();
    }
    for (auto& o : out) o = o / total;
    return out;
}
template <class T>
std::vector<T> tempered_softmax(const std::vector<T>& v, double tau) {
    return tempered_softmax(std::span<const T>(v), tau);
}

/// <pi, branches>.  Every branch is evaluated; pi selects or blends.
template <class W, class T>
T masked_cond(std::span<const W> pi, std::span<const T> branches) {
    if (pi.size() != branches.size() || pi.empty()) {
        throw std::invalid_argument("masked_cond: " + std::to_string(pi.size()) + " weights for " +
                                    std::to_string(branches.size()) + " branches");
    }
    T out = T(0.0);
    for (std::size_t i = 0; i < pi.size(); ++i) out += pi[i] * branches[i];
    return out;
}

/// Checked variant for plain weights: entries non-negative and summing to one.
template <class T>
T masked_cond_checked(std::span<const double> pi, std::span<const T> branches) {
    double s = 0.0;
    for (double p : pi) {
        if (p < 0.0) throw std::invalid_argument("masked_cond: negative weight");
        s += p;
    }
    if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("masked_cond: weights do not sum to one");
    return masked_cond(pi, branches);
}

/// Binary masking form: pi * v1 + (1 - pi) * v0.
template <class W, class T>
T ifelse(const W& pi, const T& v1, const T& v0) {
    return pi * v1 + (W(1.0) - pi) * v0;
}

}  // namespace dabm::ad
