#include "dabm/gradval/gradval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "dabm/parallel.hpp"
#include "dabm/rng.hpp"

namespace dabm::gradval {

double default_epsilon(ParamClass c) {
    switch (c) {
        case ParamClass::log10_rate: return 1e-2;
        case ParamClass::timing: return 0.5;
        case ParamClass::beta_shape: return 1e-2;
        case ParamClass::probability: return 1e-2;
    }
    return 1e-2;
}

FdConfig default_fd(const ModelProbe& model, int n_fd) {
    FdConfig cfg;
    for (auto c : model.classes) cfg.epsilon.push_back(default_epsilon(c));
    cfg.lower = model.lower;
    cfg.upper = model.upper;
    cfg.n_fd = n_fd;
    return cfg;
}

SeriesStats summarize(const std::vector<Series>& replicates) {
    SeriesStats s;
    if (replicates.empty()) return s;
    const std::size_t T = replicates.front().size();
    const double R = static_cast<double>(replicates.size());
    s.mean.assign(T, 0.0);
    s.se.assign(T, 0.0);
    for (const auto& r : replicates) {
        if (r.size() != T) throw std::invalid_argument("summarize: replicate series differ in length");
        for (std::size_t t = 0; t < T; ++t) s.mean[t] += r[t] / R;
    }
    if (replicates.size() < 2) return s;
    for (std::size_t t = 0; t < T; ++t) {
        double ss = 0.0;
        for (const auto& r : replicates) ss += (r[t] - s.mean[t]) * (r[t] - s.mean[t]);
        s.se[t] = std::sqrt(ss / (R - 1.0) / R);
    }
    return s;
}

namespace {

void check_support(std::span<const double> theta, std::size_t i, double eps, const FdConfig& cfg) {
    if (!(eps > 0.0)) throw std::invalid_argument("central_diff: epsilon must be positive");
    const double lo = theta[i] - eps;
    const double hi = theta[i] + eps;
    if ((!cfg.lower.empty() && !(lo > cfg.lower[i])) || (!cfg.upper.empty() && !(hi < cfg.upper[i]))) {
        throw std::domain_error("central_diff: theta[" + std::to_string(i) + "] +/- " + std::to_string(eps) +
                                " leaves the parameter support");
    }
}

}  // namespace

SeriesStats central_diff(const PrimalFn& run, std::span<const double> theta, std::size_t i, const FdConfig& cfg,
                         std::uint64_t master_seed) {
    if (i >= theta.size()) throw std::out_of_range("central_diff: parameter index out of range");
    if (cfg.n_fd < 1) throw std::invalid_argument("central_diff: n_fd must be positive");
    const double eps = cfg.epsilon.empty() ? 1e-2 : cfg.epsilon.at(i);
    check_support(theta, i, eps, cfg);

    std::vector<double> plus(theta.begin(), theta.end()), minus = plus;
    plus[i] += eps;
    minus[i] -= eps;
    std::vector<Series> diffs(static_cast<std::size_t>(cfg.n_fd));
    parallel_for(diffs.size(), cfg.threads, [&](std::size_t r) {
        const auto seed_p = derive_seed(master_seed, stream_id(r, StreamPurpose::fd_plus, i));
        const auto seed_m =
            cfg.common_random ? seed_p : derive_seed(master_seed, stream_id(r, StreamPurpose::fd_minus, i));
        const Series a = run(plus, seed_p);
        const Series b = run(minus, seed_m);
        if (a.size() != b.size()) throw std::runtime_error("central_diff: series lengths differ between sides");
        Series d(a.size());
        for (std::size_t t = 0; t < a.size(); ++t) d[t] = (a[t] - b[t]) / (2.0 * eps);
        diffs[r] = std::move(d);
    });
    return summarize(diffs);
}

namespace {

std::vector<SeriesStats> ad_stats(const ModelProbe& model, std::span<const double> theta,
                                  std::span<const std::size_t> active, int replicates, std::uint64_t master_seed,
                                  int threads) {
    if (replicates < 1) throw std::invalid_argument("need at least one replicate");
    std::vector<std::vector<Series>> runs(static_cast<std::size_t>(replicates));
    parallel_for(runs.size(), threads, [&](std::size_t r) {
        runs[r] = model.ad(theta, active, master_seed, r);
        if (runs[r].size() != active.size()) throw std::runtime_error("AD run returned the wrong parameter count");
    });
    std::vector<SeriesStats> out;
    for (std::size_t k = 0; k < active.size(); ++k) {
        std::vector<Series> col;
        col.reserve(runs.size());
        for (auto& r : runs) col.push_back(std::move(r[k]));
        out.push_back(summarize(col));
    }
    return out;
}

template <class Pred>
std::vector<const GradRow*> pick(const std::vector<GradRow>& rows, const std::string& param, Pred keep) {
    std::vector<const GradRow*> out;
    for (const auto& r : rows) {
        if (r.noise_floor || (!param.empty() && r.param != param)) continue;
        if (keep(r)) out.push_back(&r);
    }
    return out;
}

}  // namespace

std::vector<SeriesStats> fd_reference(const ModelProbe& model, std::span<const double> theta,
                                      std::span<const std::size_t> active, const FdConfig& fd,
                                      std::uint64_t master_seed) {
    std::vector<SeriesStats> out;
    for (auto i : active) {
        if (i >= theta.size()) throw std::out_of_range("fd_reference: parameter index out of range");
        out.push_back(central_diff(model.primal, theta, i, fd, master_seed));
    }
    return out;
}

GradReport compare(const ModelProbe& model, std::span<const double> theta, std::span<const std::size_t> active,
                   const FdConfig& fd, const std::vector<SeriesStats>& reference, int replicates,
                   std::uint64_t master_seed) {
    if (reference.size() != active.size()) throw std::invalid_argument("compare: one FD series per parameter");
    for (auto i : active) {
        if (i >= theta.size()) throw std::out_of_range("compare: parameter index out of range");
    }
    const auto ad = ad_stats(model, theta, active, replicates, master_seed, fd.threads);
    GradReport rep;
    for (std::size_t k = 0; k < active.size(); ++k) {
        const std::size_t i = active[k];
        const auto& f = reference[k];
        const std::string name = i < model.param_names.size() ? model.param_names[i] : std::to_string(i);
        rep.params.push_back(name);
        rep.epsilon.push_back(fd.epsilon.empty() ? 1e-2 : fd.epsilon.at(i));
        const std::size_t T = std::min(f.mean.size(), ad[k].mean.size());
        for (std::size_t t = 0; t < T; ++t) {
            GradRow row;
            row.model = model.name;
            row.param = name;
            row.t = t;
            row.ad_mean = ad[k].mean[t];
            row.ad_se = ad[k].se[t];
            row.fd_mean = f.mean[t];
            row.fd_se = f.se[t];
            row.noise_floor = !(std::abs(f.mean[t]) > 3.0 * f.se[t]);
            row.rel_err = f.mean[t] != 0.0 ? std::abs(row.ad_mean - f.mean[t]) / std::abs(f.mean[t])
                                           : (row.ad_mean == 0.0 ? 0.0 : INFINITY);
            rep.rows.push_back(row);
        }
    }
    return rep;
}

GradReport compare(const ModelProbe& model, std::span<const double> theta, std::span<const std::size_t> active,
                   const FdConfig& fd, int replicates, std::uint64_t master_seed) {
    return compare(model, theta, active, fd, fd_reference(model, theta, active, fd, master_seed), replicates,
                   master_seed);
}

double GradReport::median_rel_error(const std::string& param) const {
    std::vector<double> e;
    for (const auto* r : pick(rows, param, [](const GradRow&) { return true; })) e.push_back(r->rel_err);
    if (e.empty()) return NAN;
    const auto mid = e.begin() + static_cast<std::ptrdiff_t>(e.size() / 2);
    std::nth_element(e.begin(), mid, e.end());
    if (e.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(e.begin(), mid);
    return 0.5 * (lower + upper);
}

double GradReport::median_abs_error(const std::string& param) const {
    std::vector<double> e;
    for (const auto* r : pick(rows, param, [](const GradRow&) { return true; })) e.push_back(std::abs(r->ad_mean - r->fd_mean));
    if (e.empty()) return NAN;
    const auto mid = e.begin() + static_cast<std::ptrdiff_t>(e.size() / 2);
    std::nth_element(e.begin(), mid, e.end());
    if (e.size() % 2 == 1) return *mid;
    return 0.5 * (*std::max_element(e.begin(), mid) + *mid);
}

std::size_t GradReport::significant_rows(const std::string& param) const {
    return pick(rows, param, [](const GradRow&) { return true; }).size();
}

double GradReport::sign_agreement(const std::string& param) const {
    const auto n = significant_rows(param);
    if (n == 0) return NAN;
    const auto ok = pick(rows, param, [](const GradRow& r) { return r.ad_mean * r.fd_mean > 0.0; }).size();
    return static_cast<double>(ok) / static_cast<double>(n);
}

double GradReport::within_factor(double factor, const std::string& param) const {
    const auto n = significant_rows(param);
    if (n == 0) return NAN;
    const auto ok = pick(rows, param, [factor](const GradRow& r) {
                        const double q = r.ad_mean / r.fd_mean;
                        return q >= 1.0 / factor && q <= factor;
                    }).size();
    return static_cast<double>(ok) / static_cast<double>(n);
}

void GradReport::write_csv(std::ostream& os) const {
    os << "model,param,t,ad_mean,ad_se,fd_mean,fd_se,rel_err,noise_floor_flag\n";
    os.precision(10);
    for (const auto& r : rows) {
        os << r.model << ',' << r.param << ',' << r.t << ',' << r.ad_mean << ',' << r.ad_se << ',' << r.fd_mean << ','
           << r.fd_se << ',' << r.rel_err << ',' << (r.noise_floor ? 1 : 0) << '\n';
    }
}

SensitivityTable sensitivity(const ModelProbe& model, std::span<const double> theta,
                             std::span<const std::size_t> active, int replicates, std::uint64_t master_seed,
                             int threads) {
    SensitivityTable tab;
    for (auto i : active) {
        if (i >= theta.size()) throw std::out_of_range("sensitivity: parameter index out of range");
        tab.params.push_back(i < model.param_names.size() ? model.param_names[i] : std::to_string(i));
    }
    tab.grads = ad_stats(model, theta, active, replicates, master_seed, threads);
    return tab;
}

void SensitivityTable::write_csv(std::ostream& os, const std::string& model) const {
    os << "model,param,t,grad_mean,grad_se\n";
    os.precision(10);
    for (std::size_t k = 0; k < params.size(); ++k) {
        for (std::size_t t = 0; t < grads[k].mean.size(); ++t) {
            os << model << ',' << params[k] << ',' << t << ',' << grads[k].mean[t] << ',' << grads[k].se[t] << '\n';
        }
    }
}

}  // namespace dabm::gradval
