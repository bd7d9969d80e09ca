#include "dabm/gradval/probes.hpp"

#include <cmath>
#include <stdexcept>

namespace dabm::gradval {

using ad::Dual;

namespace {

constexpr double kInf = INFINITY;

template <std::size_t N>
std::array<double, N> to_array(std::span<const double> theta) {
    if (theta.size() != N) throw std::invalid_argument("expected " + std::to_string(N) + " parameters");
    std::array<double, N> a{};
    std::copy(theta.begin(), theta.end(), a.begin());
    return a;
}

template <std::size_t N>
std::array<Dual, N> seed_duals(std::span<const double> theta, std::span<const std::size_t> active) {
    auto th = to_array<N>(theta);
    std::array<Dual, N> d;
    for (std::size_t i = 0; i < N; ++i) d[i] = Dual::zeros(th[i], active.size());
    for (std::size_t a = 0; a < active.size(); ++a) d[active[a]] = Dual::variable(th[active[a]], active.size(), a);
    return d;
}

std::vector<Series> tangents(const std::vector<Dual>& series, std::size_t dims) {
    std::vector<Series> out(dims, Series(series.size()));
    for (std::size_t t = 0; t < series.size(); ++t) {
        for (std::size_t a = 0; a < dims; ++a) out[a][t] = series[t].d(a);
    }
    return out;
}

Series primals(const std::vector<double>& s) { return s; }

}  // namespace

ModelProbe sir_probe(const models::sir::SimConfig& cfg, const models::sir::ContactGraph& graph,
                     const est::EstimatorKind& kind, const std::string& observable) {
    namespace sir = models::sir;
    if (observable != "infections" && observable != "recoveries") {
        throw std::invalid_argument("sir observable must be infections or recoveries, got '" + observable + "'");
    }
    kind.validate();
    const bool infections = observable == "infections";
    ModelProbe p;
    p.name = "sir";
    for (const auto& n : sir::param_names()) p.param_names.push_back(n);
    using PC = ParamClass;
    p.classes = {PC::log10_rate, PC::log10_rate, PC::log10_rate, PC::timing,     PC::timing,
                 PC::probability, PC::timing,    PC::timing,     PC::probability};
    p.lower = {-kInf, -kInf, -kInf, -kInf, -kInf, 0.0, -kInf, -kInf, 0.0};
    p.upper = {0.0, kInf, kInf, kInf, kInf, 1.0, kInf, kInf, 1.0};
    p.primal = [cfg, graph, infections](std::span<const double> theta, std::uint64_t seed) {
        est::EstimatorKind hard;
        hard.type = est::EstimatorType::hard;
        Rng rng(seed);
        const auto tr = sir::simulate(to_array<sir::kNumParams>(theta), graph, cfg, hard, rng);
        return primals(infections ? tr.infections : tr.recoveries);
    };
    p.ad = [cfg, graph, kind, infections](std::span<const double> theta, std::span<const std::size_t> active,
                                          std::uint64_t master, std::uint64_t rep) {
        std::vector<sir::Param> which;
        for (auto i : active) which.push_back(static_cast<sir::Param>(i));
        auto run = sir::gradient_run(to_array<sir::kNumParams>(theta), which, graph, cfg, kind, master, rep);
        return infections ? std::move(run.d_infections) : std::move(run.d_recoveries);
    };
    return p;
}

ModelProbe axtell_probe(const models::axtell::SimConfig& cfg, const std::string& observable) {
    namespace ax = models::axtell;
    int which = 0;
    if (observable == "mean_output") which = 0;
    else if (observable == "mean_size") which = 1;
    else if (observable == "mean_effort") which = 2;
    else throw std::invalid_argument("axtell observable must be mean_output, mean_size or mean_effort");
    ModelProbe p;
    p.name = "axtell";
    for (const auto& n : ax::param_names()) p.param_names.push_back(n);
    p.classes.assign(ax::kNumParams, ParamClass::beta_shape);
    p.lower.assign(ax::kNumParams, 0.0);
    p.upper.assign(ax::kNumParams, kInf);
    auto pick = [which](const auto& tr) -> const auto& {
        return which == 0 ? tr.mean_output : which == 1 ? tr.mean_size : tr.mean_effort;
    };
    p.primal = [cfg, pick](std::span<const double> theta, std::uint64_t seed) {
        Rng rng(seed);
        const auto tr = ax::simulate(to_array<ax::kNumParams>(theta), cfg, rng);
        return primals(pick(tr));
    };
    p.ad = [cfg, pick](std::span<const double> theta, std::span<const std::size_t> active, std::uint64_t master,
                       std::uint64_t rep) {
        Rng rng = seed_split(master, stream_id(rep, StreamPurpose::simulation, 0));
        const auto tr = ax::simulate(seed_duals<ax::kNumParams>(theta, active), cfg, rng);
        return tangents(pick(tr), active.size());
    };
    return p;
}

ModelProbe sugarscape_probe(const models::sugarscape::SimConfig& cfg, const std::string& observable) {
    namespace sg = models::sugarscape;
    bool holdings = true;
    if (observable == "fraction_alive") holdings = false;
    else if (observable != "mean_holdings") {
        throw std::invalid_argument("sugarscape observable must be mean_holdings or fraction_alive");
    }
    ModelProbe p;
    p.name = "sugarscape";
    p.param_names = sg::param_names(cfg);
    using PC = ParamClass;
    p.classes = {PC::beta_shape, PC::beta_shape, PC::beta_shape, PC::beta_shape, PC::probability, PC::probability};
    p.lower.assign(sg::kNumParams, 0.0);
    p.upper = {kInf, kInf, kInf, kInf, 1.0, 1.0};
    p.primal = [cfg, holdings](std::span<const double> theta, std::uint64_t seed) {
        Rng rng(seed);
        const auto tr = sg::simulate(to_array<sg::kNumParams>(theta), cfg, rng);
        return primals(holdings ? tr.mean_holdings : tr.fraction_alive);
    };
    p.ad = [cfg, holdings](std::span<const double> theta, std::span<const std::size_t> active, std::uint64_t master,
                           std::uint64_t rep) {
        Rng rng = seed_split(master, stream_id(rep, StreamPurpose::simulation, 0));
        const auto tr = sg::simulate(seed_duals<sg::kNumParams>(theta, active), cfg, rng);
        return tangents(holdings ? tr.mean_holdings : tr.fraction_alive, active.size());
    };
    return p;
}

}  // namespace dabm::gradval
