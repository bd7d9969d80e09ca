#pragma once

// The three models wrapped as calibration simulators: a subset of the
// parameters is free, the rest stay at `base`.

#include <cstddef>
#include <vector>

#include "dabm/calib/gvi.hpp"
#include "dabm/estimators/estimators.hpp"
#include "dabm/models/axtell.hpp"
#include "dabm/models/sir.hpp"
#include "dabm/models/sugarscape.hpp"

namespace dabm::calib {

/// Rows: (daily infections, daily recoveries).  `kind` drives the Dual pass.
CalibModel sir_calib_model(const models::sir::Params<double>& base, const std::vector<models::sir::Param>& free,
                           models::sir::ContactGraph graph, const models::sir::SimConfig& cfg,
                           const est::EstimatorKind& kind);

/// Rows: (mean effort, mean size, mean output).
CalibModel axtell_calib_model(const models::axtell::Params<double>& base, const std::vector<std::size_t>& free,
                              const models::axtell::SimConfig& cfg);

/// Rows: (mean holdings, fraction alive).
CalibModel sugarscape_calib_model(const models::sugarscape::Params<double>& base,
                                  const std::vector<std::size_t>& free, const models::sugarscape::SimConfig& cfg);

}  // namespace dabm::calib
