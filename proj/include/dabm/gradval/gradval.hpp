#pragma once

// Finite-difference oracle and AD-vs-FD comparison.
//
// Models are seen through two callbacks: a primal run returning one
// observable series for a parameter vector and a seed, and an AD run
// returning d(series)/d(theta_i) for a subset of parameters.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dabm::gradval {

using Series = std::vector<double>;

/// Primal observable for parameters `theta`, driven by an Rng seeded with `seed`.
using PrimalFn = std::function<Series(std::span<const double> theta, std::uint64_t seed)>;

/// d(observable)/d(theta_i) for each i in `active`, as [active][t], for one replicate.
using AdFn = std::function<std::vector<Series>(std::span<const double> theta, std::span<const std::size_t> active,
                                               std::uint64_t master_seed, std::uint64_t replicate)>;

enum class ParamClass { log10_rate, timing, beta_shape, probability };

/// Default central-difference step for a parameter class.
double default_epsilon(ParamClass c);

struct FdConfig {
    std::vector<double> epsilon;  // per parameter (full theta length)
    int n_fd = 100;               // replicate pairs
    bool common_random = true;    // x+ and x- share a seed
    std::vector<double> lower;    // optional support bounds (exclusive), empty = unbounded
    std::vector<double> upper;
    int threads = 1;
};

struct SeriesStats {
    Series mean;
    Series se;  // standard error of the mean over replicates
};

/// Accumulates replicate series into mean and standard error.
SeriesStats summarize(const std::vector<Series>& replicates);

/// Mean over n_fd pairs of (Phi(theta + eps e_i) - Phi(theta - eps e_i)) / (2 eps).
SeriesStats central_diff(const PrimalFn& run, std::span<const double> theta, std::size_t i, const FdConfig& cfg,
                         std::uint64_t master_seed);

struct GradRow {
    std::string model;
    std::string param;
    std::size_t t = 0;
    double ad_mean = 0.0, ad_se = 0.0;
    double fd_mean = 0.0, fd_se = 0.0;
    double rel_err = 0.0;     // |ad - fd| / |fd|
    bool noise_floor = false; // |fd| <= 3 se(fd): excluded from aggregates
};

struct GradReport {
    std::vector<GradRow> rows;
    std::vector<std::string> params;
    std::vector<double> epsilon;  // step used per reported parameter

    /// Aggregates over non-noise-floor rows, optionally for one parameter ("" = all).
    double median_rel_error(const std::string& param = "") const;
    double median_abs_error(const std::string& param = "") const;
    double sign_agreement(const std::string& param = "") const;
    double within_factor(double factor, const std::string& param = "") const;
    std::size_t significant_rows(const std::string& param = "") const;

    void write_csv(std::ostream& os) const;
};

struct ModelProbe {
    std::string name;
    std::vector<std::string> param_names;  // full theta
    std::vector<ParamClass> classes;       // drives the default FD step
    std::vector<double> lower, upper;      // open support bounds
    PrimalFn primal;
    AdFn ad;
};

/// FD settings with the class-default epsilon and the model's support bounds.
FdConfig default_fd(const ModelProbe& model, int n_fd = 100);

/// AD over `replicates` runs against central differences for each active parameter.
GradReport compare(const ModelProbe& model, std::span<const double> theta, std::span<const std::size_t> active,
                   const FdConfig& fd, int replicates, std::uint64_t master_seed);

/// Central-difference series for each active parameter (the FD side of compare).
std::vector<SeriesStats> fd_reference(const ModelProbe& model, std::span<const double> theta,
                                      std::span<const std::size_t> active, const FdConfig& fd,
                                      std::uint64_t master_seed);

/// compare against a precomputed reference, e.g. one FD run shared by several estimators.
GradReport compare(const ModelProbe& model, std::span<const double> theta, std::span<const std::size_t> active,
                   const FdConfig& fd, const std::vector<SeriesStats>& reference, int replicates,
                   std::uint64_t master_seed);

struct SensitivityTable {
    std::vector<std::string> params;
    std::vector<SeriesStats> grads;  // per active parameter

    void write_csv(std::ostream& os, const std::string& model) const;
};

/// Jacobian of the observable from AD runs only: one run per replicate covers all parameters.
SensitivityTable sensitivity(const ModelProbe& model, std::span<const double> theta,
                             std::span<const std::size_t> active, int replicates, std::uint64_t master_seed,
                             int threads = 1);

}  // namespace dabm::gradval
