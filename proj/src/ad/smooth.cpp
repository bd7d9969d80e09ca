#include "dabm/ad/smooth.hpp"

#include <numbers>

namespace dabm::ad {

void SmootherConfig::validate() const {
    switch (kind) {
        case SmootherKind::gaussian_cdf:
        case SmootherKind::sigmoid:
            if (!(scale > 0.0)) throw std::invalid_argument("smoother scale must be positive");
            break;
        case SmootherKind::piecewise_linear:
            if (!(lower > 0.0) || !(upper > 0.0)) {
                throw std::invalid_argument("piecewise-linear smoother needs positive (a, b)");
            }
            break;
    }
}

std::string to_string(SmootherKind kind) {
    switch (kind) {
        case SmootherKind::gaussian_cdf: return "gaussian-cdf";
        case SmootherKind::sigmoid: return "sigmoid";
        case SmootherKind::piecewise_linear: return "piecewise-linear";
    }
    return "?";
}

SmootherKind smoother_kind_from_string(const std::string& name) {
    if (name == "gaussian-cdf") return SmootherKind::gaussian_cdf;
    if (name == "sigmoid") return SmootherKind::sigmoid;
    if (name == "piecewise-linear") return SmootherKind::piecewise_linear;
    throw std::invalid_argument("unknown smoother kind '" + name + "'");
}

SmoothPoint smooth_step_point(double x, const SmootherConfig& cfg) {
    cfg.validate();
    switch (cfg.kind) {
        case SmootherKind::gaussian_cdf: {
            const double z = x / cfg.scale;
            const double v = 0.5 * std::erfc(-z / std::numbers::sqrt2);
            const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
            return {v, pdf / cfg.scale};
        }
        case SmootherKind::sigmoid: {
            const double s = sigmoid(cfg.scale * x);
            return {s, cfg.scale * s * (1.0 - s)};
        }
        case SmootherKind::piecewise_linear: {
            const double a = cfg.lower;
            const double b = cfg.upper;
            if (x <= -a) return {0.0, 0.0};
            if (x >= b) return {1.0, 0.0};
            return {(x + a) / (a + b), 1.0 / (a + b)};
        }
    }
    return {0.0, 0.0};
}

}  // namespace dabm::ad
