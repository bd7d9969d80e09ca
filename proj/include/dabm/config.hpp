#pragma once

// Experiment configuration: a YAML document validated against a fixed schema.
// Unknown keys, wrong types and out-of-range values are reported with the
// line and column of the offending node.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dabm/ad/smooth.hpp"
#include "dabm/calib/flow.hpp"
#include "dabm/calib/gvi.hpp"
#include "dabm/calib/prior.hpp"
#include "dabm/estimators/estimators.hpp"
#include "dabm/models/axtell.hpp"
#include "dabm/models/sir.hpp"
#include "dabm/models/sugarscape.hpp"

namespace dabm::config {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, int line, int column, const std::string& msg);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_, column_;
};

enum class ModelName { axtell, sugarscape, sir };
enum class Command { simulate, gradcheck, sensitivity, calibrate, benchmark_estimators };

std::string to_string(ModelName m);
std::string to_string(Command c);

struct SirBlock {
    std::size_t agents = 2000;
    std::string graph = "erdos-renyi";  // or "complete"
    double p_edge = 0.01;
    std::uint64_t graph_seed = 1;  // structure seed, independent of the master seed
    models::sir::SimConfig sim;
    models::sir::Params<double> params = models::sir::default_params();
    std::string observable = "infections";
};

struct AxtellBlock {
    models::axtell::SimConfig sim;
    models::axtell::Params<double> params = models::axtell::default_params();
    std::string observable = "mean_output";
};

struct SugarscapeBlock {
    models::sugarscape::SimConfig sim;
    models::sugarscape::Params<double> params = models::sugarscape::default_params();
    std::string observable = "mean_holdings";
};

struct FdBlock {
    int n_fd = 100;
    bool common_random = true;
    std::map<std::string, double> epsilon;  // overrides of the per-class defaults
};

struct CalibrateBlock {
    std::vector<std::string> free;
    calib::Prior priors;  // one per free parameter, same order
    calib::FamilySpec family;
    calib::TrainConfig train;
    double time_weight = 1.0;
    int posterior_samples = 200;
    int predictive_samples = 50;
};

struct ExperimentConfig {
    std::string source = "<config>";
    ModelName model = ModelName::sir;
    Command command = Command::simulate;
    std::uint64_t master_seed = 0;
    int replicates = 10;
    int threads = 1;
    std::string output_dir = "out";

    std::vector<std::string> params;  // active parameters for gradcheck / sensitivity; empty = all
    est::EstimatorKind estimator;
    std::vector<est::EstimatorKind> benchmark;  // estimators compared by benchmark-estimators

    SirBlock sir;
    AxtellBlock axtell;
    SugarscapeBlock sugarscape;
    FdBlock fd;
    CalibrateBlock calibrate;

    /// Parameter names of the selected model, in theta order.
    std::vector<std::string> param_names() const;
    std::vector<double> theta() const;
};

ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Resolved configuration as JSON text (every field, defaults included).
std::string to_json(const ExperimentConfig& cfg);

}  // namespace dabm::config
