#include "dabm/spa/triple.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dabm::spa {

BernoulliDraw bernoulli_triple(double p, double u, PerturbationSide side, std::uint64_t tag) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("bernoulli_triple: degenerate probability " + std::to_string(p));
    }
    BernoulliDraw out;
    out.sample = u < p ? 1 : 0;
    out.triple.tag = tag;
    if (side == PerturbationSide::right) {
        if (out.sample == 0) {
            out.triple.weight = 1.0 / (1.0 - p);
            out.triple.alternative = 1.0;
        }
    } else {
        if (out.sample == 1) {
            out.triple.weight = 1.0 / p;
            out.triple.alternative = 0.0;
        }
    }
    return out;
}

std::vector<StochasticTriple> compose(const StochasticTriple& inner, double a,
                                      const std::function<double(double)>& g,
                                      const StochasticTriple& outer) {
    const double chain = inner.delta * outer.delta;
    std::vector<StochasticTriple> out;
    if (inner.weight == 0.0 && outer.weight == 0.0) {
        out.push_back({chain, 0.0, g(a), 0});
        return out;
    }
    if (outer.weight > 0.0) {
        double d = chain;
        if (inner.weight > 0.0) d += inner.weight * (g(inner.alternative) - g(a));
        out.push_back({d, outer.weight, outer.alternative, outer.tag});
    }
    if (inner.weight > 0.0) {
        out.push_back({chain, inner.weight, g(inner.alternative), inner.tag});
    }
    return out;
}

std::vector<double> prune_probabilities(std::span<const StochasticTriple> candidates) {
    double total = 0.0;
    for (const auto& c : candidates) {
        if (c.weight < 0.0) throw std::invalid_argument("prune: negative weight");
        total += c.weight;
    }
    std::vector<double> probs(candidates.size(), 0.0);
    if (total == 0.0) return probs;
    for (std::size_t i = 0; i < candidates.size(); ++i) probs[i] = candidates[i].weight / total;
    return probs;
}

StochasticTriple prune(std::span<const StochasticTriple> candidates, Rng& rng) {
    const auto probs = prune_probabilities(candidates);
    double total = 0.0;
    for (const auto& c : candidates) total += c.weight;
    if (total == 0.0) return {};
    if (candidates.size() == 1) return candidates[0];
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t pick = candidates.size() - 1;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        acc += probs[i];
        if (u < acc) {
            pick = i;
            break;
        }
    }
    while (candidates[pick].weight == 0.0) --pick;  // rounding at the top edge
    StochasticTriple kept = candidates[pick];
    kept.weight = total;
    return kept;
}

double smooth_triple(const StochasticTriple& triple, double x) {
    if (triple.weight == 0.0) return triple.delta;
    return triple.delta + triple.weight * (triple.alternative - x);
}

}  // namespace dabm::spa
