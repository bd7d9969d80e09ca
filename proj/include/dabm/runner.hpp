#pragma once

// Executes one experiment configuration and writes its artifacts.
//
// Every CSV starts with a comment line "# manifest=manifest.json run_id=<id>"
// pointing at the manifest written alongside (resolved config, seeds,
// versions, file list).  run_id hashes the resolved config without the
// output directory and thread count, which do not affect results.

#include <iosfwd>
#include <string>
#include <vector>

#include "dabm/config.hpp"
#include "dabm/models/sir.hpp"

namespace dabm::runner {

struct RunResult {
    std::string run_id;
    std::vector<std::string> files;  // relative to the output directory
};

/// Throws ConfigError for semantic problems found late, std::runtime_error for divergence.
RunResult run(const config::ExperimentConfig& cfg, std::ostream& log);

/// 16-hex-digit FNV-1a hash of the result-relevant part of the configuration.
std::string run_id(const config::ExperimentConfig& cfg);

/// The contact graph described by the sir block (structure seed only).
models::sir::ContactGraph build_graph(const config::SirBlock& sir);

}  // namespace dabm::runner
