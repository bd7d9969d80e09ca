#include "dabm/calib/gvi.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dabm/calib/tape.hpp"
#include "dabm/parallel.hpp"

namespace dabm::calib {

using ad::Dual;

// ---------------------------------------------------------------------------
// Loss

MmdLoss::MmdLoss(const std::vector<PointSet<double>>& observed, double time_weight) : time_weight_(time_weight) {
    if (!(time_weight >= 0.0)) throw std::invalid_argument("mmd loss: time weight must be non-negative");
    if (observed.empty() || observed.front().empty()) throw std::invalid_argument("mmd loss: no observed data");
    steps_ = observed.front().size();
    const std::size_t d = observed.front().front().size();
    if (d == 0) throw std::invalid_argument("mmd loss: observed vectors are empty");
    std::vector<double> sum(d, 0.0), sum2(d, 0.0);
    double count = 0.0;
    for (const auto& traj : observed) {
        if (traj.size() != steps_) throw std::invalid_argument("mmd loss: observed trajectories differ in length");
        for (const auto& x : traj) {
            if (x.size() != d) throw std::invalid_argument("mmd loss: dimension mismatch in observed data");
            for (std::size_t k = 0; k < d; ++k) {
                sum[k] += x[k];
                sum2[k] += x[k] * x[k];
            }
            count += 1.0;
        }
    }
    scale_.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
        const double mean = sum[k] / count;
        const double var = std::max(0.0, sum2[k] / count - mean * mean);
        scale_[k] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    if (steps_ > 1) {
        const double T = static_cast<double>(steps_);
        time_scale_ = std::sqrt((T * T - 1.0) / 12.0);  // sd of 0..T-1
    }
    for (const auto& traj : observed) embed(traj, obs_);
    bandwidth_ = median_heuristic(obs_);
}

template <class S>
void MmdLoss::embed(const PointSet<S>& traj, PointSet<S>& out) const {
    if (traj.size() != steps_) throw std::invalid_argument("mmd loss: simulated trajectory has the wrong length");
    for (std::size_t t = 0; t < traj.size(); ++t) {
        if (traj[t].size() != scale_.size()) throw std::invalid_argument("mmd loss: dimension mismatch");
        std::vector<S> p;
        p.reserve(scale_.size() + 1);
        if (time_weight_ > 0.0) p.push_back(S(time_weight_ * static_cast<double>(t) / time_scale_));
        for (std::size_t k = 0; k < scale_.size(); ++k) p.push_back(traj[t][k] / scale_[k]);
        out.push_back(std::move(p));
    }
}

template <class S>
S MmdLoss::operator()(const std::vector<PointSet<S>>& simulated) const {
    PointSet<S> pts;
    for (const auto& traj : simulated) embed(traj, pts);
    return mmd_squared(pts, obs_, bandwidth_);
}

template double MmdLoss::operator()(const std::vector<PointSet<double>>&) const;
template Dual MmdLoss::operator()(const std::vector<PointSet<Dual>>&) const;

// ---------------------------------------------------------------------------
// Posterior

Posterior::Posterior(VariationalFamily f, Prior p, std::vector<double> params)
    : family(std::move(f)), prior(std::move(p)), phi(std::move(params)) {
    if (family.dim() != prior.size()) throw std::invalid_argument("posterior: family and prior dimensions differ");
    if (phi.size() != family.num_params()) throw std::invalid_argument("posterior: wrong parameter count");
    for (const auto& pr : prior) pr.validate();
}

ThetaDraw draw_theta(const Posterior& post, std::span<const double> z) {
    const auto s = post.family.sample(std::span<const double>(post.phi), z);
    ThetaDraw d;
    d.log_q = s.log_q;
    d.theta.resize(post.dim());
    for (std::size_t i = 0; i < post.dim(); ++i) {
        d.theta[i] = post.prior[i].forward(s.u[i]);
        d.log_q -= post.prior[i].log_abs_det(s.u[i]);
        d.log_p += post.prior[i].log_prob(d.theta[i]);
    }
    return d;
}

std::vector<double> Posterior::sample(Rng& rng) const {
    std::vector<double> z(dim());
    for (auto& v : z) v = rng.normal();
    return draw_theta(*this, z).theta;
}

std::vector<std::vector<double>> Posterior::sample(std::size_t n, Rng& rng) const {
    std::vector<std::vector<double>> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) out.push_back(sample(rng));
    return out;
}

double Posterior::log_density(std::span<const double> theta) const {
    if (theta.size() != dim()) throw std::invalid_argument("posterior: point has the wrong dimension");
    std::vector<double> u(dim());
    double corr = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) {
        u[i] = prior[i].inverse(theta[i]);
        corr += prior[i].log_abs_det(u[i]);
    }
    return family.log_density(std::span<const double>(phi), std::span<const double>(u)) - corr;
}

Posterior make_posterior(const FamilySpec& spec, const Prior& prior, std::uint64_t seed) {
    FamilySpec s = spec;
    s.dim = prior.size();
    VariationalFamily fam(s);
    Rng rng = seed_split(seed, stream_id(0, StreamPurpose::variational, 0xF10));
    return Posterior(fam, prior, fam.init(rng));
}

// ---------------------------------------------------------------------------
// Estimators

namespace {

struct BatchSeeds {
    std::uint64_t master;
    std::uint64_t step;
    StreamPurpose z_purpose;
    StreamPurpose sim_purpose;
    std::uint64_t sim_offset;

    std::vector<double> z(std::size_t b, std::size_t dim) const {
        Rng rng = seed_split(master, stream_id(step, z_purpose, b));
        std::vector<double> out(dim);
        for (auto& v : out) v = rng.normal();
        return out;
    }
    std::uint64_t sim(std::size_t b, int k, int per) const {
        return derive_seed(master, stream_id(step, sim_purpose,
                                             sim_offset + b * static_cast<std::uint64_t>(per) +
                                                 static_cast<std::uint64_t>(k)));
    }
};

constexpr BatchSeeds training_seeds(std::uint64_t master, std::uint64_t step) {
    return {master, step, StreamPurpose::variational, StreamPurpose::simulation, 0};
}

void check_batch(const GviConfig& cfg) {
    if (!(cfg.loss_weight >= 0.0)) throw std::invalid_argument("gvi: loss weight must be non-negative");
    if (cfg.batch < 1) throw std::invalid_argument("gvi: batch must be at least 1");
    if (cfg.mmd_samples < 1) throw std::invalid_argument("gvi: mmd_samples must be at least 1");
}

struct LossGrad {
    double value = 0.0;
    std::vector<double> eta;
};

using LossWithGrad = std::function<LossGrad(std::span<const double> theta, std::size_t b)>;

GradEstimate pathwise_core(const Posterior& post, const LossWithGrad& fn, const GviConfig& cfg, const BatchSeeds& seeds) {
    check_batch(cfg);
    const std::size_t B = static_cast<std::size_t>(cfg.batch);
    const std::size_t D = post.dim();
    const std::size_t P = post.phi.size();
    std::vector<std::vector<double>> grads(B);
    std::vector<double> objective(B), losses(B);
    parallel_for(B, cfg.threads, [&](std::size_t b) {
        const auto z = seeds.z(b, D);
        Tape tape;
        std::vector<Var> phi;
        phi.reserve(P);
        for (double v : post.phi) phi.push_back(tape.variable(v));
        const auto s = post.family.sample(std::span<const Var>(phi), std::span<const double>(z));
        Var log_ratio = s.log_q;
        std::vector<Var> theta(D);
        std::vector<double> theta_v(D);
        for (std::size_t i = 0; i < D; ++i) {
            theta[i] = post.prior[i].forward(s.u[i]);
            log_ratio = log_ratio - post.prior[i].log_abs_det(s.u[i]) - post.prior[i].log_prob(theta[i]);
            theta_v[i] = theta[i].value();
        }
        const LossGrad lg = fn(theta_v, b);
        Var surrogate = log_ratio;
        for (std::size_t i = 0; i < D; ++i) surrogate = surrogate + theta[i] * (cfg.loss_weight * lg.eta[i]);
        grads[b] = tape.gradient(surrogate, phi);
        objective[b] = cfg.loss_weight * lg.value + log_ratio.value();
        losses[b] = lg.value;
    });
    GradEstimate est;
    est.grad.assign(P, 0.0);
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t k = 0; k < P; ++k) est.grad[k] += grads[b][k] / static_cast<double>(B);
        est.objective += objective[b] / static_cast<double>(B);
        est.mean_loss += losses[b] / static_cast<double>(B);
    }
    est.surrogate = est.objective;
    return est;
}

GradEstimate vargrad_core(const Posterior& post, const std::function<double(std::span<const double>, std::size_t)>& fn,
                          const GviConfig& cfg, const BatchSeeds& seeds) {
    check_batch(cfg);
    if (cfg.batch < 2) throw std::invalid_argument("vargrad: batch must be at least 2");
    const std::size_t B = static_cast<std::size_t>(cfg.batch);
    const std::size_t D = post.dim();
    const std::size_t P = post.phi.size();
    std::vector<std::vector<double>> score(B);
    std::vector<double> w(B), losses(B);
    parallel_for(B, cfg.threads, [&](std::size_t b) {
        const auto z = seeds.z(b, D);
        const auto s = post.family.sample(std::span<const double>(post.phi), std::span<const double>(z));
        std::vector<double> theta(D);
        double log_p = 0.0, corr = 0.0;
        for (std::size_t i = 0; i < D; ++i) {
            theta[i] = post.prior[i].forward(s.u[i]);
            corr += post.prior[i].log_abs_det(s.u[i]);
            log_p += post.prior[i].log_prob(theta[i]);
        }
        // Score of log q_phi at the detached sample.
        Tape tape;
        std::vector<Var> phi;
        phi.reserve(P);
        for (double v : post.phi) phi.push_back(tape.variable(v));
        std::vector<Var> u(s.u.begin(), s.u.end());
        const Var lq = post.family.log_density(std::span<const Var>(phi), std::span<const Var>(u));
        score[b] = tape.gradient(lq, phi);
        losses[b] = fn(theta, b);
        w[b] = cfg.loss_weight * losses[b] + (lq.value() - corr) - log_p;
    });
    GradEstimate est;
    double mean = 0.0;
    for (double x : w) mean += x / static_cast<double>(B);
    double var = 0.0;
    for (double x : w) var += (x - mean) * (x - mean);
    var /= static_cast<double>(B - 1);
    est.grad.assign(P, 0.0);
    for (std::size_t b = 0; b < B; ++b) {
        const double c = 2.0 * (w[b] - mean) / static_cast<double>(B - 1);
        for (std::size_t k = 0; k < P; ++k) est.grad[k] += c * score[b][k];
        est.mean_loss += losses[b] / static_cast<double>(B);
    }
    est.objective = mean;
    est.surrogate = var;
    return est;
}

LossGrad simulate_loss_grad(const CalibModel& model, const MmdLoss& loss, std::span<const double> theta,
                            const BatchSeeds& seeds, std::size_t b, int per) {
    const std::size_t D = theta.size();
    if (D > ad::kMaxTangent) throw std::invalid_argument("pathwise: too many parameters for forward mode");
    std::vector<Dual> th(D);
    for (std::size_t i = 0; i < D; ++i) th[i] = Dual::variable(theta[i], D, i);
    std::vector<PointSet<Dual>> sims;
    for (int k = 0; k < per; ++k) sims.push_back(model.simulate_dual(th, seeds.sim(b, k, per)));
    const Dual l = loss(sims);
    LossGrad out;
    out.value = l.value();
    out.eta.resize(D);
    for (std::size_t i = 0; i < D; ++i) out.eta[i] = l.d(i);
    return out;
}

double simulate_loss(const CalibModel& model, const MmdLoss& loss, std::span<const double> theta,
                     const BatchSeeds& seeds, std::size_t b, int per) {
    std::vector<PointSet<double>> sims;
    for (int k = 0; k < per; ++k) sims.push_back(model.simulate(theta, seeds.sim(b, k, per)));
    return loss(sims);
}

}  // namespace

GradEstimate pathwise_grad(const Posterior& post, const CalibModel& model, const MmdLoss& loss, const GviConfig& cfg,
                           std::uint64_t master_seed, std::uint64_t step) {
    const auto seeds = training_seeds(master_seed, step);
    return pathwise_core(
        post,
        [&](std::span<const double> theta, std::size_t b) {
            return simulate_loss_grad(model, loss, theta, seeds, b, cfg.mmd_samples);
        },
        cfg, seeds);
}

GradEstimate pathwise_grad(const Posterior& post, const ThetaLoss& loss, const GviConfig& cfg,
                           std::uint64_t master_seed, std::uint64_t step) {
    return pathwise_core(
        post,
        [&](std::span<const double> theta, std::size_t) {
            const std::size_t D = theta.size();
            std::vector<Dual> th(D);
            for (std::size_t i = 0; i < D; ++i) th[i] = Dual::variable(theta[i], D, i);
            const Dual l = loss(th);
            LossGrad out{l.value(), std::vector<double>(D)};
            for (std::size_t i = 0; i < D; ++i) out.eta[i] = l.d(i);
            return out;
        },
        cfg, training_seeds(master_seed, step));
}

GradEstimate vargrad(const Posterior& post, const CalibModel& model, const MmdLoss& loss, const GviConfig& cfg,
                     std::uint64_t master_seed, std::uint64_t step) {
    const auto seeds = training_seeds(master_seed, step);
    return vargrad_core(
        post,
        [&](std::span<const double> theta, std::size_t b) {
            return simulate_loss(model, loss, theta, seeds, b, cfg.mmd_samples);
        },
        cfg, seeds);
}

GradEstimate vargrad(const Posterior& post, const std::function<double(std::span<const double>)>& loss,
                     const GviConfig& cfg, std::uint64_t master_seed, std::uint64_t step) {
    return vargrad_core(
        post, [&](std::span<const double> theta, std::size_t) { return loss(theta); }, cfg,
        training_seeds(master_seed, step));
}

double gvi_objective(const Posterior& post, const CalibModel& model, const MmdLoss& loss, const GviConfig& cfg,
                     std::uint64_t master_seed, std::uint64_t step, StreamPurpose purpose) {
    check_batch(cfg);
    const BatchSeeds seeds{master_seed, step, purpose, purpose, 1u << 20};
    const std::size_t B = static_cast<std::size_t>(cfg.batch);
    std::vector<double> vals(B);
    parallel_for(B, cfg.threads, [&](std::size_t b) {
        const auto z = seeds.z(b, post.dim());
        const auto d = draw_theta(post, z);
        vals[b] = cfg.loss_weight * simulate_loss(model, loss, d.theta, seeds, b, cfg.mmd_samples) + d.log_q - d.log_p;
    });
    double s = 0.0;
    for (double v : vals) s += v / static_cast<double>(B);
    return s;
}

// ---------------------------------------------------------------------------
// Optimizer and training

AdamW::AdamW(AdamWConfig cfg, std::size_t n) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {
    if (!(cfg_.lr > 0.0)) throw std::invalid_argument("adamw: learning rate must be positive");
    if (!(cfg_.beta1 >= 0.0 && cfg_.beta1 < 1.0 && cfg_.beta2 >= 0.0 && cfg_.beta2 < 1.0)) {
        throw std::invalid_argument("adamw: betas must lie in [0, 1)");
    }
    if (cfg_.weight_decay < 0.0) throw std::invalid_argument("adamw: weight decay must be non-negative");
}

void AdamW::step(std::vector<double>& params, std::vector<double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) throw std::invalid_argument("adamw: size mismatch");
    if (cfg_.clip_unit_norm) {
        double norm = 0.0;
        for (double g : grad) norm += g * g;
        norm = std::sqrt(norm);
        if (norm > 1.0) {
            for (double& g : grad) g /= norm;
        }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        params[k] -= cfg_.lr * cfg_.weight_decay * params[k];
        m_[k] = cfg_.beta1 * m_[k] + (1.0 - cfg_.beta1) * grad[k];
        v_[k] = cfg_.beta2 * v_[k] + (1.0 - cfg_.beta2) * grad[k] * grad[k];
        const double mhat = m_[k] / bc1;
        const double vhat = v_[k] / bc2;
        params[k] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
}

std::string to_string(GradientEstimator e) { return e == GradientEstimator::pathwise ? "pathwise" : "vargrad"; }

GradientEstimator gradient_estimator_from_string(const std::string& s) {
    if (s == "pathwise") return GradientEstimator::pathwise;
    if (s == "vargrad") return GradientEstimator::vargrad;
    throw std::invalid_argument("unknown gradient estimator '" + s + "'");
}

TrainResult train(const TrainConfig& cfg, const Posterior& init, const CalibModel& model, const MmdLoss& loss,
                  const std::function<void(const HistoryRow&)>& on_epoch) {
    if (cfg.epochs < 0) throw std::invalid_argument("train: epochs must be non-negative");
    check_batch(cfg.gvi);
    TrainResult res{init, -1, {}};
    Posterior cur = init;
    AdamW opt(cfg.optimizer, cur.phi.size());
    double best = std::numeric_limits<double>::infinity();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto step = static_cast<std::uint64_t>(epoch);
        const GradEstimate est = cfg.estimator == GradientEstimator::pathwise
                                     ? pathwise_grad(cur, model, loss, cfg.gvi, cfg.seed, step)
                                     : vargrad(cur, model, loss, cfg.gvi, cfg.seed, step);
        bool finite = std::isfinite(est.objective) && std::isfinite(est.surrogate);
        for (double g : est.grad) finite = finite && std::isfinite(g);
        if (!finite) {
            std::ostringstream msg;
            msg << "train: non-finite loss or gradient at epoch " << epoch << " (objective " << est.objective
                << ", mean simulator loss " << est.mean_loss << ")";
            throw std::runtime_error(msg.str());
        }
        opt.step(cur.phi, est.grad);
        const double val = gvi_objective(cur, model, loss, cfg.gvi, cfg.seed, step);
        if (!std::isfinite(val)) {
            throw std::runtime_error("train: non-finite validation loss at epoch " + std::to_string(epoch));
        }
        HistoryRow row{epoch, est.objective, val};
        res.history.push_back(row);
        if (on_epoch) on_epoch(row);
        if (val < best) {
            best = val;
            res.best_epoch = epoch;
            res.posterior.phi = cur.phi;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Checkpoints

void save_checkpoint(std::ostream& os, const Posterior& post) {
    const auto& s = post.family.spec();
    os << "dabm-checkpoint 1\n";
    os << "family " << to_string(s.kind) << " dim " << s.dim << " layers " << s.layers << " hidden " << s.hidden
       << " blocks " << s.blocks << "\n";
    for (const auto& p : post.prior) {
        os.precision(17);
        os << "prior " << p.name << ' ' << to_string(p.kind) << ' ' << p.a << ' ' << p.b << "\n";
    }
    os << "phi " << post.phi.size() << "\n";
    os.precision(17);
    for (double v : post.phi) os << v << "\n";
}

Posterior load_checkpoint(std::istream& is) {
    std::string tag;
    int version = 0;
    if (!(is >> tag >> version) || tag != "dabm-checkpoint") throw std::runtime_error("checkpoint: missing header");
    if (version != 1) throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    FamilySpec spec;
    std::string kw, kind;
    is >> kw >> kind;
    if (kw != "family") throw std::runtime_error("checkpoint: expected 'family'");
    spec.kind = family_kind_from_string(kind);
    for (int k = 0; k < 4; ++k) {
        std::string key;
        long value = 0;
        is >> key >> value;
        if (key == "dim") spec.dim = static_cast<std::size_t>(value);
        else if (key == "layers") spec.layers = static_cast<int>(value);
        else if (key == "hidden") spec.hidden = static_cast<int>(value);
        else if (key == "blocks") spec.blocks = static_cast<int>(value);
        else throw std::runtime_error("checkpoint: unexpected key '" + key + "'");
    }
    Prior prior;
    for (std::size_t i = 0; i < spec.dim; ++i) {
        ParamPrior p;
        std::string pk;
        is >> kw >> p.name >> pk >> p.a >> p.b;
        if (kw != "prior") throw std::runtime_error("checkpoint: expected 'prior'");
        p.kind = prior_kind_from_string(pk);
        prior.push_back(p);
    }
    std::size_t n = 0;
    is >> kw >> n;
    if (kw != "phi") throw std::runtime_error("checkpoint: expected 'phi'");
    std::vector<double> phi(n);
    for (auto& v : phi) {
        if (!(is >> v)) throw std::runtime_error("checkpoint: truncated parameter block");
    }
    return Posterior(VariationalFamily(spec), prior, phi);
}

}  // namespace dabm::calib
