#pragma once

// Independent per-parameter priors and the bijectors that map the flow's
// unconstrained space onto each prior's support.
//
//   uniform(a, b)        theta = a + (b - a) sigmoid(u)
//   exponential(a, rate) theta = a + exp(u)          support (a, inf)
//   normal(mean, sd)     theta = u

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "dabm/ad/dual.hpp"
#include "dabm/calib/tape.hpp"
#include "dabm/rng.hpp"

namespace dabm::calib {

enum class PriorKind { uniform, exponential, normal };

std::string to_string(PriorKind k);
PriorKind prior_kind_from_string(const std::string& s);

namespace detail {
inline double sigmoid_(double x) { return ad::sigmoid(x); }
template <class S>
S softplus_(const S& x) {
    using ad::softplus;
    return softplus(x);
}
template <class S>
S sigmoid_(const S& x) {
    using ad::sigmoid;
    return sigmoid(x);
}
}  // namespace detail

struct ParamPrior {
    std::string name;
    PriorKind kind = PriorKind::uniform;
    double a = 0.0;  // uniform lower / exponential offset / normal mean
    double b = 1.0;  // uniform upper / exponential rate / normal sd

    void validate() const;
    bool in_support(double theta) const;
    double sample(Rng& rng) const;
    double inverse(double theta) const;  // support -> unconstrained

    template <class S>
    S forward(const S& u) const {
        using std::exp;
        switch (kind) {
            case PriorKind::uniform: return a + (b - a) * detail::sigmoid_(u);
            case PriorKind::exponential: return a + exp(u);
            case PriorKind::normal: return u;
        }
        return u;
    }

    /// log |d forward / du|
    template <class S>
    S log_abs_det(const S& u) const {
        switch (kind) {
            case PriorKind::uniform: return std::log(b - a) - detail::softplus_(u) - detail::softplus_(S(0.0) - u);
            case PriorKind::exponential: return u;
            case PriorKind::normal: return S(0.0);
        }
        return S(0.0);
    }

    template <class S>
    S log_prob(const S& theta) const {
        switch (kind) {
            case PriorKind::uniform: return S(-std::log(b - a));
            case PriorKind::exponential: return std::log(b) - b * (theta - a);
            case PriorKind::normal: {
                const S z = (theta - a) / b;
                return -0.5 * z * z - std::log(b) - 0.5 * std::log(2.0 * std::numbers::pi);
            }
        }
        return S(0.0);
    }
};

using Prior = std::vector<ParamPrior>;

template <class S>
S prior_log_prob(const Prior& prior, const std::vector<S>& theta) {
    S lp(0.0);
    for (std::size_t i = 0; i < prior.size(); ++i) lp += prior[i].log_prob(theta[i]);
    return lp;
}

}  // namespace dabm::calib
