#include "dabm/calib/models.hpp"

#include <memory>
#include <stdexcept>

namespace dabm::calib {

using ad::Dual;

namespace {

template <class T, std::size_t N>
std::array<T, N> fill(const std::array<double, N>& base, const std::vector<std::size_t>& free,
                      std::span<const T> theta) {
    if (theta.size() != free.size()) throw std::invalid_argument("calibration model: wrong number of parameters");
    std::array<T, N> p;
    for (std::size_t i = 0; i < N; ++i) p[i] = T(base[i]);
    for (std::size_t k = 0; k < free.size(); ++k) p[free[k]] = theta[k];
    return p;
}

template <class T>
PointSet<T> rows(const std::vector<const std::vector<T>*>& cols) {
    PointSet<T> out(cols.front()->size());
    for (std::size_t t = 0; t < out.size(); ++t) {
        for (const auto* c : cols) out[t].push_back((*c)[t]);
    }
    return out;
}

template <std::size_t N>
std::vector<std::string> names_of(const std::vector<std::size_t>& free, const std::vector<std::string>& all) {
    std::vector<std::string> out;
    for (std::size_t i : free) {
        if (i >= N) throw std::invalid_argument("calibration model: parameter index out of range");
        out.push_back(all[i]);
    }
    return out;
}

}  // namespace

CalibModel sir_calib_model(const models::sir::Params<double>& base, const std::vector<models::sir::Param>& free,
                           models::sir::ContactGraph graph, const models::sir::SimConfig& cfg,
                           const est::EstimatorKind& kind) {
    namespace sir = models::sir;
    if (kind.type == est::EstimatorType::spa_pruned) {
        throw std::invalid_argument("sir calibration: the pruned estimator does not carry a Dual tangent");
    }
    std::vector<std::size_t> idx;
    for (auto p : free) idx.push_back(static_cast<std::size_t>(p));
    const auto& all = sir::param_names();
    CalibModel m;
    m.names = names_of<sir::kNumParams>(idx, {all.begin(), all.end()});
    auto g = std::make_shared<const sir::ContactGraph>(std::move(graph));
    m.simulate = [=](std::span<const double> theta, std::uint64_t seed) {
        Rng rng(seed);
        const auto tr = sir::simulate(fill<double>(base, idx, theta), *g, cfg, est::EstimatorKind{est::EstimatorType::hard}, rng);
        return rows<double>({&tr.infections, &tr.recoveries});
    };
    m.simulate_dual = [=](std::span<const Dual> theta, std::uint64_t seed) {
        Rng rng(seed);
        const auto tr = sir::simulate(fill<Dual>(base, idx, theta), *g, cfg, kind, rng);
        return rows<Dual>({&tr.infections, &tr.recoveries});
    };
    return m;
}

CalibModel axtell_calib_model(const models::axtell::Params<double>& base, const std::vector<std::size_t>& free,
                              const models::axtell::SimConfig& cfg) {
    namespace ax = models::axtell;
    const auto& all = ax::param_names();
    CalibModel m;
    m.names = names_of<ax::kNumParams>(free, {all.begin(), all.end()});
    m.simulate = [=](std::span<const double> theta, std::uint64_t seed) {
        Rng rng(seed);
        const auto tr = ax::simulate(fill<double>(base, free, theta), cfg, rng);
        return rows<double>({&tr.mean_effort, &tr.mean_size, &tr.mean_output});
    };
    m.simulate_dual = [=](std::span<const Dual> theta, std::uint64_t seed) {
        Rng rng(seed);
        const auto tr = ax::simulate(fill<Dual>(base, free, theta), cfg, rng);
        return rows<Dual>({&tr.mean_effort, &tr.mean_size, &tr.mean_output});
    };
    return m;
}

CalibModel sugarscape_calib_model(const models::sugarscape::Params<double>& base,
                                  const std::vector<std::size_t>& free, const models::sugarscape::SimConfig& cfg) {
    namespace ss = models::sugarscape;
    CalibModel m;
    m.names = names_of<ss::kNumParams>(free, ss::param_names(cfg));
    m.simulate = [=](std::span<const double> theta, std::uint64_t seed) {
        Rng rng(seed);
        const auto tr = ss::simulate(fill<double>(base, free, theta), cfg, rng);
        return rows<double>({&tr.mean_holdings, &tr.fraction_alive});
    };
    m.simulate_dual = [=](std::span<const Dual> theta, std::uint64_t seed) {
        Rng rng(seed);
        const auto tr = ss::simulate(fill<Dual>(base, free, theta), cfg, rng);
        return rows<Dual>({&tr.mean_holdings, &tr.fraction_alive});
    };
    return m;
}

}  // namespace dabm::calib
