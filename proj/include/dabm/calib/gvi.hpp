#pragma once

// Generalised variational inference for simulators.
//
// Objective: L(phi) = E_{theta ~ q_phi}[ l(theta, y) + log q_phi(theta) - log p(theta) ],
// l(theta, y) = E_x[ MMD^2(x, y) ] estimated from `mmd_samples` simulations.
//
// The pathwise gradient combines reverse mode through the family (the
// Jacobian of theta = g(phi, z) and the log-ratio term, recorded on a
// Tape) with forward mode through the simulator (eta = d l / d theta as a
// Dual tangent): per sample we backpropagate
//   sum_i theta_i(phi) * stop(eta_i) + log q_phi(theta(phi)) - log p(theta(phi)).

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dabm/ad/dual.hpp"
#include "dabm/calib/flow.hpp"
#include "dabm/calib/mmd.hpp"
#include "dabm/calib/prior.hpp"
#include "dabm/rng.hpp"

namespace dabm::calib {

/// A simulator seen as theta -> trajectory (rows = time steps, columns = observables).
struct CalibModel {
    std::vector<std::string> names;
    std::function<PointSet<double>(std::span<const double> theta, std::uint64_t seed)> simulate;
    /// Same run with theta carrying forward tangents (one direction per parameter).
    std::function<PointSet<ad::Dual>(std::span<const ad::Dual> theta, std::uint64_t seed)> simulate_dual;
};

/// h(x, y): MMD^2 between the per-time-step vectors of simulated and observed
/// trajectories.  Each vector is (w t, x_t) with every coordinate divided by its
/// standard deviation over the observed data (w = time_weight, 0 drops the
/// time coordinate); the RBF bandwidth is the median heuristic on the embedded
/// observations, fixed once.
class MmdLoss {
public:
    explicit MmdLoss(const std::vector<PointSet<double>>& observed, double time_weight = 1.0);

    template <class S>
    S operator()(const std::vector<PointSet<S>>& simulated) const;

    double bandwidth() const { return bandwidth_; }
    const PointSet<double>& observed_points() const { return obs_; }

private:
    template <class S>
    void embed(const PointSet<S>& traj, PointSet<S>& out) const;

    double time_weight_;
    double time_scale_ = 1.0;
    std::vector<double> scale_;
    std::size_t steps_ = 0;
    PointSet<double> obs_;
    double bandwidth_ = 1.0;
};

struct Posterior {
    VariationalFamily family;
    Prior prior;
    std::vector<double> phi;

    Posterior(VariationalFamily f, Prior p, std::vector<double> params);

    std::size_t dim() const { return prior.size(); }
    std::vector<double> sample(Rng& rng) const;
    std::vector<std::vector<double>> sample(std::size_t n, Rng& rng) const;
    double log_density(std::span<const double> theta) const;
};

/// Prior-matched initial posterior: family initialized from `seed`.
Posterior make_posterior(const FamilySpec& spec, const Prior& prior, std::uint64_t seed);

struct GviConfig {
    int batch = 5;        // B Monte Carlo samples of theta per step
    int mmd_samples = 2;  // simulations per theta
    double loss_weight = 1.0;  // w in exp(-w l) p; scales l in the objective
    int threads = 1;
};

struct GradEstimate {
    double objective = 0.0;  // mean over the batch of l + log q - log p
    double surrogate = 0.0;  // quantity actually differentiated (VarGrad: variance of the weights)
    double mean_loss = 0.0;  // mean l (unweighted)
    std::vector<double> grad;
};

/// theta = g(phi, z) for each z (and matching log q(theta), log p(theta)).
struct ThetaDraw {
    std::vector<double> theta;
    double log_q = 0.0;
    double log_p = 0.0;
};
ThetaDraw draw_theta(const Posterior& post, std::span<const double> z);

/// Monte Carlo estimate of the objective at phi (no gradient).
double gvi_objective(const Posterior& post, const CalibModel& model, const MmdLoss& loss, const GviConfig& cfg,
                     std::uint64_t master_seed, std::uint64_t step, StreamPurpose purpose = StreamPurpose::validation);

/// Pathwise estimator; `loss_override` (tests) replaces simulate+MMD with a differentiable l(theta).
using ThetaLoss = std::function<ad::Dual(std::span<const ad::Dual> theta)>;
GradEstimate pathwise_grad(const Posterior& post, const CalibModel& model, const MmdLoss& loss, const GviConfig& cfg,
                           std::uint64_t master_seed, std::uint64_t step);
GradEstimate pathwise_grad(const Posterior& post, const ThetaLoss& loss, const GviConfig& cfg,
                           std::uint64_t master_seed, std::uint64_t step);

/// VarGrad: gradient of the empirical variance of w_b = l + log q - log p with
/// the sampling path detached.  Needs batch >= 2.
GradEstimate vargrad(const Posterior& post, const CalibModel& model, const MmdLoss& loss, const GviConfig& cfg,
                     std::uint64_t master_seed, std::uint64_t step);
GradEstimate vargrad(const Posterior& post, const std::function<double(std::span<const double>)>& loss,
                     const GviConfig& cfg, std::uint64_t master_seed, std::uint64_t step);

struct AdamWConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double eps = 1e-8;
    double weight_decay = 0.0;
    bool clip_unit_norm = true;  // rescale the gradient to norm <= 1 before the update
};

class AdamW {
public:
    explicit AdamW(AdamWConfig cfg, std::size_t n);
    void step(std::vector<double>& params, std::vector<double> grad);
    const AdamWConfig& config() const { return cfg_; }

private:
    AdamWConfig cfg_;
    std::vector<double> m_, v_;
    long t_ = 0;
};

enum class GradientEstimator { pathwise, vargrad };
std::string to_string(GradientEstimator e);
GradientEstimator gradient_estimator_from_string(const std::string& s);

struct TrainConfig {
    int epochs = 500;
    GviConfig gvi;
    AdamWConfig optimizer;
    GradientEstimator estimator = GradientEstimator::pathwise;
    std::uint64_t seed = 0;
};

struct HistoryRow {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    Posterior posterior;   // parameters with the lowest validation loss
    int best_epoch = -1;   // -1: no training happened
    std::vector<HistoryRow> history;
};

/// Trains from `init`.  Validation loss each epoch is the objective on a
/// fresh validation-stream batch.  Non-finite losses abort with a runtime_error.
TrainResult train(const TrainConfig& cfg, const Posterior& init, const CalibModel& model, const MmdLoss& loss,
                  const std::function<void(const HistoryRow&)>& on_epoch = {});

void save_checkpoint(std::ostream& os, const Posterior& post);
Posterior load_checkpoint(std::istream& is);

}  // namespace dabm::calib
