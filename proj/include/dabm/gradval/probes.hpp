#pragma once

// ModelProbe adapters for the three reference models.

#include <string>

#include "dabm/estimators/estimators.hpp"
#include "dabm/gradval/gradval.hpp"
#include "dabm/models/axtell.hpp"
#include "dabm/models/sir.hpp"
#include "dabm/models/sugarscape.hpp"

namespace dabm::gradval {

/// Observable: "infections" or "recoveries".  The graph is shared by every run.
ModelProbe sir_probe(const models::sir::SimConfig& cfg, const models::sir::ContactGraph& graph,
                     const est::EstimatorKind& kind, const std::string& observable = "infections");

/// Observable: "mean_output", "mean_size" or "mean_effort".
ModelProbe axtell_probe(const models::axtell::SimConfig& cfg, const std::string& observable = "mean_output");

/// Observable: "mean_holdings" or "fraction_alive".
ModelProbe sugarscape_probe(const models::sugarscape::SimConfig& cfg,
                            const std::string& observable = "mean_holdings");

}  // namespace dabm::gradval
