#pragma once

// Flat `key = value` experiment configuration with `#` comments.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwave/evolve.hpp"
#include "qwave/model.hpp"

namespace qwave::config {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::size_t line)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    /// 0 for errors not tied to a line (overrides, cross-field checks)
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct ExperimentConfig {
    // coefficient
    std::string model = "one_plus_u";
    double model_k = 1.0;
    double a_min = 0.1;
    // data
    double epsilon = 0.01;
    std::string bump = "displacement";
    int mollify_n = 0;
    // theorem parameter; may be infinite
    double K = 3.0;
    // grid and time stepping
    std::size_t N = 4096;
    double R_max = 64.0;
    double cfl = 0.9;
    double T = 50.0;
    double sample_dt = 0.25;
    double u_guard = 0.2;
    std::size_t dense_stride = 4;
    // run artifacts
    std::size_t snapshots = 5;
    std::size_t fan = 6;
    // verify
    bool refine = true;
    std::size_t radii = 64;
    int substeps = 1;
    double local_horizon = 1.0;
    // linear-check
    double delta = 0.75;
    std::vector<double> scales = {0.2, 0.4, 0.6, 0.8, 1.0};
    // stability
    double perturbation = 1.05;
    std::vector<double> lambdas = {0.0, 0.5, 1.0};
    // convergence
    std::vector<std::size_t> resolutions = {1024, 2048, 4096};
    // maximal-selftest
    unsigned seed = 20240601;
    std::size_t selftest_N = 512;
    std::size_t selftest_cases = 100;

    model::CoefficientModel coefficient() const;
    evolve::RunOptions run_options() const;
    model::Grid grid() const;

    /// Canonical `key = value` listing; parse_config(to_text()) round-trips.
    std::string to_text() const;
};

/// Parses and validates; unknown keys, malformed values and violated
/// constraints raise ConfigError carrying the line number.
ExperimentConfig parse_config(const std::string& text);

/// Applies one `key=value` override and re-validates.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

/// Cross-field validation (also run by parse_config and apply_override).
void validate(const ExperimentConfig& cfg);

/// Keys accepted by parse_config, in canonical order.
const std::vector<std::string>& known_keys();

} // namespace qwave::config
