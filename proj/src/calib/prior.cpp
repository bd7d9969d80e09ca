#include "dabm/calib/prior.hpp"

#include <stdexcept>

namespace dabm::calib {

std::string to_string(PriorKind k) {
    switch (k) {
        case PriorKind::uniform: return "uniform";
        case PriorKind::exponential: return "exponential";
        case PriorKind::normal: return "normal";
    }
    return "unknown";
}

PriorKind prior_kind_from_string(const std::string& s) {
    if (s == "uniform") return PriorKind::uniform;
    if (s == "exponential") return PriorKind::exponential;
    if (s == "normal") return PriorKind::normal;
    throw std::invalid_argument("unknown prior kind '" + s + "'");
}

void ParamPrior::validate() const {
    switch (kind) {
        case PriorKind::uniform:
            if (!(b > a)) throw std::invalid_argument("prior " + name + ": uniform needs upper > lower");
            break;
        case PriorKind::exponential:
        case PriorKind::normal:
            if (!(b > 0.0)) throw std::invalid_argument("prior " + name + ": rate/sd must be positive");
            break;
    }
}

bool ParamPrior::in_support(double theta) const {
    switch (kind) {
        case PriorKind::uniform: return theta > a && theta < b;
        case PriorKind::exponential: return theta > a;
        case PriorKind::normal: return std::isfinite(theta);
    }
    return false;
}

double ParamPrior::sample(Rng& rng) const {
    switch (kind) {
        case PriorKind::uniform: return a + (b - a) * rng.uniform_open();
        case PriorKind::exponential: return a - std::log(rng.uniform_open()) / b;
        case PriorKind::normal: return a + b * rng.normal();
    }
    return a;
}

double ParamPrior::inverse(double theta) const {
    if (!in_support(theta)) throw std::domain_error("prior " + name + ": value outside the support");
    switch (kind) {
        case PriorKind::uniform: {
            const double p = (theta - a) / (b - a);
            return std::log(p) - std::log1p(-p);
        }
        case PriorKind::exponential: return std::log(theta - a);
        case PriorKind::normal: return theta;
    }
    return theta;
}

}  // namespace dabm::calib
