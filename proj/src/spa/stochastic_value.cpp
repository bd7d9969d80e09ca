#include "dabm/spa/stochastic_value.hpp"

#include <cmath>
#include <stdexcept>

namespace dabm::spa {

std::uint32_t PruningContext::new_tag(double signed_weight) {
    tags_.push_back({signed_weight, signed_weight != 0.0});
    return static_cast<std::uint32_t>(tags_.size() - 1);
}

std::uint32_t PruningContext::merge(std::uint32_t a, std::uint32_t b) {
    if (a == b) return a;
    const bool la = alive(a);
    const bool lb = alive(b);
    if (!la) return lb ? b : 0;
    if (!lb) return a;
    const double wa = std::abs(tags_[a].weight);
    const double wb = std::abs(tags_[b].weight);
    const double total = wa + wb;
    const bool keep_a = rng_.uniform() * total < wa;
    const std::uint32_t keep = keep_a ? a : b;
    const std::uint32_t drop = keep_a ? b : a;
    tags_[keep].weight = std::copysign(total, tags_[keep].weight);
    tags_[drop].alive = false;
    return keep;
}

StochasticValue operator/(const StochasticValue& a, const StochasticValue& b) {
    if (b.x_ == 0.0) throw std::domain_error("StochasticValue: division by zero");
    return StochasticValue::combine(
        a, b, [](double u, double v) { return u / v; }, 1.0 / b.x_, -a.x_ / (b.x_ * b.x_));
}

StochasticValue exp(const StochasticValue& v) {
    const double e = std::exp(v.value());
    return v.map([](double u) { return std::exp(u); }, e);
}

StochasticValue log(const StochasticValue& v) {
    return v.map([](double u) { return std::log(u); }, 1.0 / v.value());
}

StochasticValue expm1(const StochasticValue& v) {
    return v.map([](double u) { return std::expm1(u); }, std::exp(v.value()));
}

StochasticValue log1p(const StochasticValue& v) {
    return v.map([](double u) { return std::log1p(u); }, 1.0 / (1.0 + v.value()));
}

StochasticValue sqrt(const StochasticValue& v) {
    const double s = std::sqrt(v.value());
    return v.map([](double u) { return std::sqrt(u); }, s > 0.0 ? 0.5 / s : 0.0);
}

StochasticValue pow(const StochasticValue& v, double p) {
    return v.map([p](double u) { return std::pow(u, p); }, p * std::pow(v.value(), p - 1.0));
}

StochasticValue min(const StochasticValue& a, const StochasticValue& b) {
    const bool first = !(b.value() < a.value());
    return StochasticValue::combine(
        a, b, [](double u, double v) { return v < u ? v : u; }, first ? 1.0 : 0.0, first ? 0.0 : 1.0);
}

StochasticValue max(const StochasticValue& a, const StochasticValue& b) {
    const bool first = !(b.value() > a.value());
    return StochasticValue::combine(
        a, b, [](double u, double v) { return v > u ? v : u; }, first ? 1.0 : 0.0, first ? 0.0 : 1.0);
}

StochasticValue bernoulli(const StochasticValue& p, double u, PerturbationSide side) {
    const double pv = p.value();
    if (!(pv >= 0.0 && pv <= 1.0)) throw std::domain_error("bernoulli: probability outside [0, 1]");
    const double x = u < pv ? 1.0 : 0.0;
    PruningContext* ctx = p.context();

    // Jump inherited from the input probability under its own tag.
    double carried = 0.0;
    std::uint32_t carried_tag = 0;
    if (p.perturbed()) {
        const double alt = u < pv + p.jump() ? 1.0 : 0.0;
        carried = alt - x;
        carried_tag = p.tag();
    }

    // Fresh jump from the infinitesimal change of p.
    const double dp = p.delta();
    double weight = 0.0;
    double own = 0.0;
    if (dp != 0.0 && ctx != nullptr) {
        if (side == PerturbationSide::right) {
            if (dp > 0.0 && x == 0.0) {
                weight = dp / (1.0 - pv);
                own = 1.0;
            } else if (dp < 0.0 && x == 1.0) {
                weight = -dp / pv;
                own = -1.0;
            }
        } else {
            // theta - eps: contribution is -w * (Y - x), stored as a negative weight.
            if (dp > 0.0 && x == 1.0) {
                weight = -dp / pv;
                own = -1.0;
            } else if (dp < 0.0 && x == 0.0) {
                weight = dp / (1.0 - pv);
                own = 1.0;
            }
        }
    }

    if (own == 0.0) return {x, 0.0, carried, carried_tag, ctx};
    const std::uint32_t fresh = ctx->new_tag(weight);
    if (carried == 0.0) return {x, 0.0, own, fresh, ctx};
    const std::uint32_t keep = ctx->merge(carried_tag, fresh);
    return {x, 0.0, keep == fresh ? own : carried, keep, ctx};
}

}  // namespace dabm::spa
