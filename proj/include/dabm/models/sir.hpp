#pragma once

// Network SIR with quarantine and social distancing.
//
// Every Bernoulli draw (initial infection, compliance, infection, recovery)
// goes through the configured estimator.  Policy windows are hard on the
// primal and smoothed by a product of two step smoothers on the tangent.
// The scalar type selects the derivative machinery: double (plain run),
// ad::Dual (forward-mode surrogates) or spa::StochasticValue (pruned SPA).

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dabm/ad/dual.hpp"
#include "dabm/ad/smooth.hpp"
#include "dabm/estimators/estimators.hpp"
#include "dabm/rng.hpp"
#include "dabm/spa/stochastic_value.hpp"

namespace dabm::models::sir {

inline constexpr std::size_t kNumParams = 9;

enum class Param : std::size_t {
    log10_I0 = 0,
    log10_beta,
    log10_gamma,
    q_start,
    q_end,
    p_q,
    d_start,
    d_end,
    alpha_d,
};

const std::array<std::string, kNumParams>& param_names();
Param param_from_string(const std::string& name);

/// All nine free parameters, in Param order.
template <class T>
using Params = std::array<T, kNumParams>;

/// Appendix ground truth: I0 = 1e-2, beta = 0.4, gamma = 0.05, D = [10, 45],
/// alpha_D = 0.3, Q = [20, 35], p_Q = 0.7.
Params<double> default_params();

struct Policies {
    bool quarantine = true;
    bool distancing = true;
};

struct ContactGraph {
    enum class Kind { complete, erdos_renyi };
    Kind kind = Kind::complete;
    std::size_t n = 0;
    double p_edge = 0.0;
    std::vector<std::uint32_t> offsets;    // CSR row offsets (erdos-renyi only)
    std::vector<std::uint32_t> neighbors;  // CSR column indices

    static ContactGraph complete(std::size_t n);
    static ContactGraph erdos_renyi(std::size_t n, double p_edge, Rng& rng);
    std::size_t degree(std::size_t i) const;
    double mean_degree() const;
};

struct SimConfig {
    int steps = 60;  // rows in the trajectory; row 0 holds the initial infections
    double dt = 1.0;
    Policies policies;
    ad::SmootherConfig smoother;
};

template <class T>
struct Trajectory {
    std::vector<T> infections;
    std::vector<T> recoveries;
    std::vector<double> susceptible;  // primal compartment counts, for conservation checks
    std::vector<double> infected;
    std::vector<double> recovered;
};

/// One simulation.  Consumes from `rng` exactly N uniforms for the initial
/// state and 3N per transition (compliance, infection, recovery), regardless of
/// the scalar type or estimator.
template <class T>
Trajectory<T> simulate(const Params<T>& theta, const ContactGraph& graph, const SimConfig& cfg,
                       const est::EstimatorKind& kind, Rng& rng);

/// Force of infection on a single agent (exposed for tests).
double force_of_infection(double beta, double infected_nonq, double nonq, bool self_quarantined,
                          double distancing_factor);

/// Per-step derivatives of daily infections and recoveries for the chosen parameters.
struct GradientRun {
    std::vector<double> infections;                     // primal
    std::vector<double> recoveries;                     // primal
    std::vector<std::vector<double>> d_infections;      // [param][t]
    std::vector<std::vector<double>> d_recoveries;      // [param][t]
};

/// Runs one replicate with any estimator.  For spa-pruned the estimate
/// averages `kind.samples` independent inner runs per parameter direction;
/// inner run 0 reuses the replicate's primal stream.
GradientRun gradient_run(const Params<double>& theta, const std::vector<Param>& active, const ContactGraph& graph,
                         const SimConfig& cfg, const est::EstimatorKind& kind, std::uint64_t master_seed,
                         std::uint64_t replicate);

/// Primal-only run for replicate `replicate` (same stream as gradient_run).
Trajectory<double> primal_run(const Params<double>& theta, const ContactGraph& graph, const SimConfig& cfg,
                              std::uint64_t master_seed, std::uint64_t replicate);

// ---------------------------------------------------------------------------
// Deterministic mean-field reference on the complete graph, policies off.

enum class OdeScheme {
    euler,   // S' = S - beta S I dt / N,  I' = I + beta S I dt / N - gamma I dt
    hazard,  // S' = S exp(-beta I dt / N), recoveries I (1 - exp(-gamma dt))
};

template <class T>
struct OdeTrajectory {
    std::vector<T> infections;
    std::vector<T> recoveries;
    std::vector<T> s, i, r;
    bool nonnegative = true;  // false if any compartment went negative (step too large)
};

template <class T>
OdeTrajectory<T> ode_reference(const T& log10_I0, const T& log10_beta, const T& log10_gamma, double n, int steps,
                               double dt, OdeScheme scheme = OdeScheme::euler);

}  // namespace dabm::models::sir
