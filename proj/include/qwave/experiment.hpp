#pragma once

// Subcommand orchestration: builds data from an ExperimentConfig, runs the
// requested computation and writes its artifacts into one directory.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "qwave/config.hpp"
#include "qwave/functionals.hpp"
#include "qwave/model.hpp"

namespace qwave::experiment {

enum ExitCode : int {
    exit_ok = 0,
    exit_config = 2,
    exit_guard = 3,
    exit_saturation = 4,
    exit_io = 5,
};

/// run, verify, linear-check, stability, convergence, maximal-selftest
const std::vector<std::string>& subcommands();

/// Bump data of amplitude epsilon on the configured grid, mollified when
/// mollify_n > 0.
std::pair<model::RadialProfile, model::RadialProfile> initial_data(const config::ExperimentConfig& cfg);

/// JSON text of run_manifest.json: the canonical config plus a typed copy of
/// every parameter. Contains no timestamps.
std::string manifest_json(const config::ExperimentConfig& cfg, const std::string& subcommand);

/// Config recorded in a run_manifest.json.
config::ExperimentConfig load_manifest(const std::filesystem::path& manifest);

void write_series_csv(std::ostream& os, const std::vector<functionals::SeriesRow>& rows);

/// `r,v,w,u,ut,ur` for one archived level.
void write_state_csv(std::ostream& os, const evolve::ArchivedLevel& level);

/// `state_<t>.csv` with t printed to three decimals.
std::string state_file_name(double t);

/// Runs the subcommand and returns its exit code; errors are reported on
/// `log` and mapped to the code table instead of propagating.
int execute(const config::ExperimentConfig& cfg, const std::string& subcommand,
            const std::filesystem::path& out_dir, std::ostream& log);

} // namespace qwave::experiment
