#include "dabm/models/sir.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dabm::models::sir {

using ad::Dual;
using spa::StochasticValue;
using ad::value;

const std::array<std::string, kNumParams>& param_names() {
    static const std::array<std::string, kNumParams> names = {
        "log10_I0", "log10_beta", "log10_gamma", "q_start", "q_end", "p_q", "d_start", "d_end", "alpha_d"};
    return names;
}

Param param_from_string(const std::string& name) {
    const auto& names = param_names();
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (names[i] == name) return static_cast<Param>(i);
    }
    throw std::invalid_argument("unknown SIR parameter '" + name + "'");
}

Params<double> default_params() {
    return {-2.0, std::log10(0.4), std::log10(0.05), 20.0, 35.0, 0.7, 10.0, 45.0, 0.3};
}

ContactGraph ContactGraph::complete(std::size_t n) {
    ContactGraph g;
    g.kind = Kind::complete;
    g.n = n;
    g.p_edge = 1.0;
    return g;
}

ContactGraph ContactGraph::erdos_renyi(std::size_t n, double p_edge, Rng& rng) {
    if (!(p_edge >= 0.0 && p_edge <= 1.0)) throw std::invalid_argument("erdos_renyi: p_edge outside [0, 1]");
    ContactGraph g;
    g.kind = Kind::erdos_renyi;
    g.n = n;
    g.p_edge = p_edge;
    std::vector<std::vector<std::uint32_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (rng.uniform() < p_edge) {
                adj[i].push_back(static_cast<std::uint32_t>(j));
                adj[j].push_back(static_cast<std::uint32_t>(i));
            }
        }
    }
    g.offsets.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) g.offsets[i + 1] = g.offsets[i] + static_cast<std::uint32_t>(adj[i].size());
    g.neighbors.reserve(g.offsets[n]);
    for (const auto& row : adj) g.neighbors.insert(g.neighbors.end(), row.begin(), row.end());
    return g;
}

std::size_t ContactGraph::degree(std::size_t i) const {
    if (kind == Kind::complete) return n > 0 ? n - 1 : 0;
    return offsets[i + 1] - offsets[i];
}

double ContactGraph::mean_degree() const {
    if (n == 0) return 0.0;
    if (kind == Kind::complete) return static_cast<double>(n - 1);
    return static_cast<double>(neighbors.size()) / static_cast<double>(n);
}

double force_of_infection(double beta, double infected_nonq, double nonq, bool self_quarantined,
                          double distancing_factor) {
    if (self_quarantined || nonq == 0.0) return 0.0;
    return beta * infected_nonq / nonq * distancing_factor;
}

namespace {

// Scalar-specific glue: smoothing and the surrogate combinator.
double smooth(double x, const ad::SmootherConfig& c) { return ad::smooth_step(x, c); }
Dual smooth(const Dual& x, const ad::SmootherConfig& c) { return ad::smooth_step(x, c); }
StochasticValue smooth(const StochasticValue& x, const ad::SmootherConfig& c) {
    const auto p = ad::smooth_step_point(x.value(), c);
    return x.map([&c](double u) { return ad::smooth_step(u, c); }, p.slope);
}

double surrogate(double h, double) { return h; }
Dual surrogate(const Dual& h, const Dual& s) { return ad::surrogate_combine(h, s); }
StochasticValue surrogate(const StochasticValue& h, const StochasticValue& s) {
    return {h.value(), s.delta(), h.jump(), h.tag(), h.context() ? h.context() : s.context()};
}

template <class T>
T exp10(const T& x) {
    using std::exp;
    return exp(x * std::numbers::ln10);
}

}  // namespace

template <class T>
Trajectory<T> simulate(const Params<T>& theta, const ContactGraph& graph, const SimConfig& cfg,
                       const est::EstimatorKind& kind, Rng& rng) {
    using std::expm1;
    const std::size_t n = graph.n;
    if (n == 0) throw std::invalid_argument("sir: empty population");
    if (cfg.steps < 1) throw std::invalid_argument("sir: steps must be positive");
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("sir: dt must be positive");

    const T& q_start = theta[static_cast<std::size_t>(Param::q_start)];
    const T& q_end = theta[static_cast<std::size_t>(Param::q_end)];
    const T& p_q = theta[static_cast<std::size_t>(Param::p_q)];
    const T& d_start = theta[static_cast<std::size_t>(Param::d_start)];
    const T& d_end = theta[static_cast<std::size_t>(Param::d_end)];
    const T& alpha_d = theta[static_cast<std::size_t>(Param::alpha_d)];

    const T i0 = exp10(theta[static_cast<std::size_t>(Param::log10_I0)]);
    const T beta = exp10(theta[static_cast<std::size_t>(Param::log10_beta)]);
    const T gamma = exp10(theta[static_cast<std::size_t>(Param::log10_gamma)]);
    const T p_rec = -expm1(-gamma * cfg.dt);

    std::vector<T> S(n), I(n), R(n, T(0.0)), Q(n, T(0.0));
    Trajectory<T> out;
    out.infections.reserve(static_cast<std::size_t>(cfg.steps));
    out.recoveries.reserve(static_cast<std::size_t>(cfg.steps));

    auto record_counts = [&]() {
        double s = 0, i = 0, r = 0;
        for (std::size_t k = 0; k < n; ++k) {
            s += value(S[k]);
            i += value(I[k]);
            r += value(R[k]);
        }
        out.susceptible.push_back(s);
        out.infected.push_back(i);
        out.recovered.push_back(r);
    };

    T initial(0.0);
    for (std::size_t k = 0; k < n; ++k) {
        I[k] = est::bernoulli(i0, rng.uniform(), kind);
        S[k] = 1.0 - I[k];
        initial += I[k];
    }
    out.infections.push_back(initial);
    out.recoveries.push_back(T(0.0));
    record_counts();

    std::vector<T> inf_draw(n), rec_draw(n), nonq(n), infected_nonq(n);
    for (int step = 1; step < cfg.steps; ++step) {
        const double t = step;

        // Compliance probability and distancing factor for this step.
        T pq_t(0.0);
        if (cfg.policies.quarantine) {
            const bool on = value(q_start) <= t && t <= value(q_end);
            const T gate = smooth(t - q_start, cfg.smoother) * smooth(q_end - t, cfg.smoother);
            pq_t = surrogate(on ? p_q : T(0.0), p_q * gate);
        }
        T distancing(1.0);
        if (cfg.policies.distancing) {
            const bool on = value(d_start) <= t && t <= value(d_end);
            const T gate = smooth(t - d_start, cfg.smoother) * smooth(d_end - t, cfg.smoother);
            distancing = surrogate(on ? alpha_d : T(1.0), 1.0 - (1.0 - alpha_d) * gate);
        }

        for (std::size_t k = 0; k < n; ++k) {
            const double u = rng.uniform();
            Q[k] = cfg.policies.quarantine ? est::bernoulli(pq_t, u, kind) : T(0.0);
        }
        for (std::size_t k = 0; k < n; ++k) {
            nonq[k] = 1.0 - Q[k];
            infected_nonq[k] = nonq[k] * I[k];
        }

        // Neighbourhood sums of non-quarantining agents and of infected ones among them.
        std::vector<T> lambda(n);
        if (graph.kind == ContactGraph::Kind::complete) {
            T total_nonq(0.0), total_inf(0.0);
            for (std::size_t k = 0; k < n; ++k) {
                total_nonq += nonq[k];
                total_inf += infected_nonq[k];
            }
            for (std::size_t k = 0; k < n; ++k) {
                const T b = total_nonq - nonq[k];
                const T a = total_inf - infected_nonq[k];
                lambda[k] = value(b) == 0.0 ? T(0.0) : beta * (a / b) * nonq[k] * distancing;
            }
        } else {
            for (std::size_t k = 0; k < n; ++k) {
                T a(0.0), b(0.0);
                for (auto idx = graph.offsets[k]; idx < graph.offsets[k + 1]; ++idx) {
                    const auto j = graph.neighbors[idx];
                    b += nonq[j];
                    a += infected_nonq[j];
                }
                lambda[k] = value(b) == 0.0 ? T(0.0) : beta * (a / b) * nonq[k] * distancing;
            }
        }

        for (std::size_t k = 0; k < n; ++k) {
            const T p_inf = -expm1(-lambda[k] * cfg.dt);
            inf_draw[k] = est::bernoulli(p_inf, rng.uniform(), kind);
        }
        for (std::size_t k = 0; k < n; ++k) rec_draw[k] = est::bernoulli(p_rec, rng.uniform(), kind);

        T new_inf_total(0.0), new_rec_total(0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const T new_inf = S[k] * inf_draw[k];
            const T new_rec = I[k] * rec_draw[k];
            S[k] = S[k] - new_inf;
            I[k] = I[k] + new_inf - new_rec;
            R[k] = R[k] + new_rec;
            new_inf_total += new_inf;
            new_rec_total += new_rec;
        }
        out.infections.push_back(new_inf_total);
        out.recoveries.push_back(new_rec_total);
        record_counts();
    }
    return out;
}

template Trajectory<double> simulate(const Params<double>&, const ContactGraph&, const SimConfig&,
                                     const est::EstimatorKind&, Rng&);
template Trajectory<Dual> simulate(const Params<Dual>&, const ContactGraph&, const SimConfig&,
                                   const est::EstimatorKind&, Rng&);
template Trajectory<StochasticValue> simulate(const Params<StochasticValue>&, const ContactGraph&, const SimConfig&,
                                              const est::EstimatorKind&, Rng&);

Trajectory<double> primal_run(const Params<double>& theta, const ContactGraph& graph, const SimConfig& cfg,
                              std::uint64_t master_seed, std::uint64_t replicate) {
    Rng rng = seed_split(master_seed, stream_id(replicate, StreamPurpose::simulation, 0));
    est::EstimatorKind hard;
    hard.type = est::EstimatorType::hard;
    return simulate(theta, graph, cfg, hard, rng);
}

GradientRun gradient_run(const Params<double>& theta, const std::vector<Param>& active, const ContactGraph& graph,
                         const SimConfig& cfg, const est::EstimatorKind& kind, std::uint64_t master_seed,
                         std::uint64_t replicate) {
    kind.validate();
    const std::size_t steps = static_cast<std::size_t>(cfg.steps);
    GradientRun out;
    out.d_infections.assign(active.size(), std::vector<double>(steps, 0.0));
    out.d_recoveries.assign(active.size(), std::vector<double>(steps, 0.0));

    if (kind.type != est::EstimatorType::spa_pruned) {
        Params<Dual> th;
        for (std::size_t i = 0; i < kNumParams; ++i) th[i] = Dual::zeros(theta[i], active.size());
        for (std::size_t a = 0; a < active.size(); ++a) {
            const auto idx = static_cast<std::size_t>(active[a]);
            th[idx] = Dual::variable(theta[idx], active.size(), a);
        }
        Rng rng = seed_split(master_seed, stream_id(replicate, StreamPurpose::simulation, 0));
        const auto traj = simulate(th, graph, cfg, kind, rng);
        for (std::size_t t = 0; t < steps; ++t) {
            out.infections.push_back(traj.infections[t].value());
            out.recoveries.push_back(traj.recoveries[t].value());
            for (std::size_t a = 0; a < active.size(); ++a) {
                out.d_infections[a][t] = traj.infections[t].d(a);
                out.d_recoveries[a][t] = traj.recoveries[t].d(a);
            }
        }
        return out;
    }

    std::vector<spa::PerturbationSide> sides{kind.side};
    if (kind.both_sides) sides = {spa::PerturbationSide::right, spa::PerturbationSide::left};
    const double scale = 1.0 / (static_cast<double>(kind.samples) * static_cast<double>(sides.size()));
    for (std::size_t a = 0; a < active.size(); ++a) {
        for (int k = 0; k < kind.samples; ++k) {
            for (std::size_t s = 0; s < sides.size(); ++s) {
                est::EstimatorKind inner = kind;
                inner.side = sides[s];
                const std::uint64_t sub = (static_cast<std::uint64_t>(active[a]) << 32) |
                                          (static_cast<std::uint64_t>(k) << 1) | s;
                spa::PruningContext ctx(seed_split(master_seed, stream_id(replicate, StreamPurpose::pruning, sub)));
                Params<StochasticValue> th;
                for (std::size_t i = 0; i < kNumParams; ++i) th[i] = StochasticValue(theta[i]);
                const auto idx = static_cast<std::size_t>(active[a]);
                th[idx] = StochasticValue::variable(theta[idx], 1.0, &ctx);
                Rng rng = seed_split(master_seed,
                                     stream_id(replicate, StreamPurpose::simulation, static_cast<std::uint64_t>(k)));
                const auto traj = simulate(th, graph, cfg, inner, rng);
                for (std::size_t t = 0; t < steps; ++t) {
                    out.d_infections[a][t] += scale * traj.infections[t].derivative();
                    out.d_recoveries[a][t] += scale * traj.recoveries[t].derivative();
                }
                if (a == 0 && k == 0 && s == 0) {
                    for (std::size_t t = 0; t < steps; ++t) {
                        out.infections.push_back(traj.infections[t].value());
                        out.recoveries.push_back(traj.recoveries[t].value());
                    }
                }
            }
        }
    }
    if (active.empty()) {
        const auto traj = primal_run(theta, graph, cfg, master_seed, replicate);
        out.infections = traj.infections;
        out.recoveries = traj.recoveries;
    }
    return out;
}

template <class T>
OdeTrajectory<T> ode_reference(const T& log10_I0, const T& log10_beta, const T& log10_gamma, double n, int steps,
                               double dt, OdeScheme scheme) {
    using std::exp;
    using std::expm1;
    if (steps < 1) throw std::invalid_argument("ode_reference: steps must be positive");
    if (!(n > 0.0) || !(dt > 0.0)) throw std::invalid_argument("ode_reference: n and dt must be positive");
    const T i0 = exp10(log10_I0);
    const T beta = exp10(log10_beta);
    const T gamma = exp10(log10_gamma);
    OdeTrajectory<T> out;
    T I = i0 * n;
    T S = n - I;
    T R(0.0);
    out.infections.push_back(I);
    out.recoveries.push_back(T(0.0));
    out.s.push_back(S);
    out.i.push_back(I);
    out.r.push_back(R);
    for (int step = 1; step < steps; ++step) {
        T inf, rec;
        if (scheme == OdeScheme::euler) {
            inf = beta * S * I / n * dt;
            rec = gamma * I * dt;
        } else {
            inf = S * -expm1(-beta * I / n * dt);
            rec = I * -expm1(-gamma * dt);
        }
        S = S - inf;
        I = I + inf - rec;
        R = R + rec;
        if (value(S) < 0.0 || value(I) < 0.0) out.nonnegative = false;
        out.infections.push_back(inf);
        out.recoveries.push_back(rec);
        out.s.push_back(S);
        out.i.push_back(I);
        out.r.push_back(R);
    }
    return out;
}

template OdeTrajectory<double> ode_reference(const double&, const double&, const double&, double, int, double,
                                             OdeScheme);
template OdeTrajectory<Dual> ode_reference(const Dual&, const Dual&, const Dual&, double, int, double, OdeScheme);

}  // namespace dabm::models::sir
