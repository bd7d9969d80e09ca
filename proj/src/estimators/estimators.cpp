#include "dabm/estimators/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dabm/ad/smooth.hpp"

namespace dabm::est {

using ad::Dual;

void EstimatorKind::validate() const {
    if (type == EstimatorType::gumbel_softmax && !(tau > 0.0)) {
        throw std::invalid_argument("gumbel-softmax temperature must be positive");
    }
    if (type == EstimatorType::spa_pruned && samples < 1) {
        throw std::invalid_argument("spa-pruned needs at least one sample");
    }
}

std::string to_string(EstimatorType t) {
    switch (t) {
        case EstimatorType::hard: return "hard";
        case EstimatorType::straight_through: return "straight-through";
        case EstimatorType::gumbel_softmax: return "gumbel-softmax";
        case EstimatorType::spa_pruned: return "spa-pruned";
        case EstimatorType::spa_smoothed: return "spa-smoothed";
    }
    return "unknown";
}

EstimatorType estimator_type_from_string(const std::string& name) {
    for (auto t : {EstimatorType::hard, EstimatorType::straight_through, EstimatorType::gumbel_softmax,
                   EstimatorType::spa_pruned, EstimatorType::spa_smoothed}) {
        if (to_string(t) == name) return t;
    }
    if (name == "st") return EstimatorType::straight_through;
    if (name == "gs") return EstimatorType::gumbel_softmax;
    throw std::invalid_argument("unknown estimator '" + name + "'");
}

std::string EstimatorKind::label() const {
    switch (type) {
        case EstimatorType::gumbel_softmax: return "gumbel-softmax(tau=" + std::to_string(tau) + ")";
        case EstimatorType::spa_pruned: return "spa-pruned(samples=" + std::to_string(samples) + ")";
        default: return to_string(type);
    }
}

Dual st_bernoulli(const Dual& p, double u) {
    const double x = u < p.value() ? 1.0 : 0.0;
    return Dual(x, p.tangent());
}

Dual st_bernoulli(const Dual& p, Rng& rng) { return st_bernoulli(p, rng.uniform()); }

Dual gs_bernoulli(const Dual& p, double u, double tau) {
    const double pv = p.value();
    const double x = u < pv ? 1.0 : 0.0;
    if (!(pv > 0.0 && pv < 1.0) || p.dim() == 0) return Dual::zeros(x, p.dim());
    const double uc = std::clamp(u, 1e-12, 1.0 - 1e-12);
    const double logit_u = std::log(uc) - std::log1p(-uc);
    const Dual z = (ad::log(p) - ad::log1p(-p) - logit_u) / tau;
    return ad::surrogate_combine(Dual(x), ad::sigmoid(z));
}

std::vector<Dual> gs_categorical(std::span<const Dual> pi, double tau, Rng& rng) {
    if (pi.empty()) throw std::invalid_argument("gs_categorical: empty probability vector");
    if (!(tau > 0.0)) throw std::invalid_argument("gs_categorical: temperature must be positive");
    const std::size_t k = pi.size();
    std::vector<Dual> logits(k);
    std::size_t best = 0;
    double best_score = -INFINITY;
    for (std::size_t i = 0; i < k; ++i) {
        const double g = rng.gumbel();
        if (pi[i].value() > 0.0) {
            logits[i] = ad::log(pi[i]) + g;
        } else {
            logits[i] = Dual(-1e300);  // unreachable category
        }
        if (logits[i].value() > best_score) {
            best_score = logits[i].value();
            best = i;
        }
    }
    const auto soft = ad::tempered_softmax(std::span<const Dual>(logits), tau);
    std::vector<Dual> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = ad::surrogate_combine(Dual(i == best ? 1.0 : 0.0), soft[i]);
    return out;
}

namespace {
double smoothed_component(double pv, double dp, double x, spa::PerturbationSide side) {
    if (dp == 0.0) return 0.0;
    if (side == spa::PerturbationSide::right) {
        if (dp > 0.0) return x == 0.0 ? dp / (1.0 - pv) : 0.0;
        return x == 1.0 ? dp / pv : 0.0;
    }
    if (dp > 0.0) return x == 1.0 ? dp / pv : 0.0;
    return x == 0.0 ? dp / (1.0 - pv) : 0.0;
}
}  // namespace

Dual spa_smoothed_bernoulli(const Dual& p, double u, spa::PerturbationSide side) {
    const double pv = p.value();
    const double x = u < pv ? 1.0 : 0.0;
    Dual out = Dual::zeros(x, p.dim());
    for (std::size_t i = 0; i < p.dim(); ++i) out.set_d(i, smoothed_component(pv, p.d(i), x, side));
    return out;
}

Dual bernoulli(const Dual& p, double u, const EstimatorKind& kind) {
    switch (kind.type) {
        case EstimatorType::hard: return Dual::zeros(u < p.value() ? 1.0 : 0.0, p.dim());
        case EstimatorType::straight_through: return st_bernoulli(p, u);
        case EstimatorType::gumbel_softmax: return gs_bernoulli(p, u, kind.tau);
        case EstimatorType::spa_smoothed:
            if (kind.both_sides) {
                const Dual r = spa_smoothed_bernoulli(p, u, spa::PerturbationSide::right);
                const Dual l = spa_smoothed_bernoulli(p, u, spa::PerturbationSide::left);
                Dual out = Dual::zeros(r.value(), p.dim());
                for (std::size_t i = 0; i < p.dim(); ++i) out.set_d(i, 0.5 * (r.d(i) + l.d(i)));
                return out;
            }
            return spa_smoothed_bernoulli(p, u, kind.side);
        case EstimatorType::spa_pruned:
            throw std::logic_error("spa-pruned draws need StochasticValue inputs");
    }
    return Dual(u < p.value() ? 1.0 : 0.0);
}

std::vector<double> random_walk_replicate(double p, int T, const EstimatorKind& kind, std::uint64_t master_seed,
                                          std::uint64_t replicate) {
    std::vector<double> grad(static_cast<std::size_t>(T) + 1, 0.0);
    if (kind.type == EstimatorType::spa_pruned) {
        const auto sides = kind.both_sides
                               ? std::vector<spa::PerturbationSide>{spa::PerturbationSide::right,
                                                                    spa::PerturbationSide::left}
                               : std::vector<spa::PerturbationSide>{kind.side};
        const double scale = 1.0 / (static_cast<double>(kind.samples) * static_cast<double>(sides.size()));
        for (int k = 0; k < kind.samples; ++k) {
            for (std::size_t s = 0; s < sides.size(); ++s) {
                Rng rng = seed_split(master_seed, stream_id(replicate, StreamPurpose::simulation,
                                                            static_cast<std::uint64_t>(k)));
                spa::PruningContext ctx(seed_split(
                    master_seed, stream_id(replicate, StreamPurpose::pruning, static_cast<std::uint64_t>(k) * 2 + s)));
                const auto pp = spa::StochasticValue::variable(p, 1.0, &ctx);
                spa::StochasticValue x(0.0);
                for (int t = 1; t <= T; ++t) {
                    const auto b = spa::bernoulli(pp, rng.uniform(), sides[s]);
                    x = x + 2.0 * b - 1.0;
                    grad[static_cast<std::size_t>(t)] += scale * x.derivative();
                }
            }
        }
        return grad;
    }
    Rng rng = seed_split(master_seed, stream_id(replicate, StreamPurpose::simulation, 0));
    const Dual pp = Dual::variable(p, 1, 0);
    Dual x(0.0);
    for (int t = 1; t <= T; ++t) {
        const Dual b = bernoulli(pp, rng.uniform(), kind);
        x = x + 2.0 * b - 1.0;
        grad[static_cast<std::size_t>(t)] = x.d(0);
    }
    return grad;
}

std::vector<MeanSe> random_walk_gradient(double p, int T, const EstimatorKind& kind, int replicates,
                                         std::uint64_t master_seed) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("random_walk_gradient: p must lie in (0, 1)");
    if (T < 1) throw std::invalid_argument("random_walk_gradient: T must be positive");
    if (replicates < 1) throw std::invalid_argument("random_walk_gradient: need at least one replicate");
    kind.validate();
    const std::size_t n = static_cast<std::size_t>(T) + 1;
    std::vector<double> sum(n, 0.0), sum2(n, 0.0);
    for (int r = 0; r < replicates; ++r) {
        const auto g = random_walk_replicate(p, T, kind, master_seed, static_cast<std::uint64_t>(r));
        for (std::size_t t = 0; t < n; ++t) {
            sum[t] += g[t];
            sum2[t] += g[t] * g[t];
        }
    }
    std::vector<MeanSe> out(n);
    const double R = replicates;
    for (std::size_t t = 0; t < n; ++t) {
        out[t].mean = sum[t] / R;
        if (replicates > 1) {
            const double var = std::max(0.0, (sum2[t] - R * out[t].mean * out[t].mean) / (R - 1.0));
            out[t].se = std::sqrt(var / R);
        }
    }
    return out;
}

}  // namespace dabm::est
