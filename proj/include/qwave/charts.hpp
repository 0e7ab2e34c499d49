#pragma once

// Plus/minus characteristics dr/dtau = +-a(u(tau, r)) traced through a
// computed run, the coordinate maps (t, r) -> (alpha | gamma, beta) and the
// diagnostics built on them.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qwave/evolve.hpp"

namespace qwave::charts {

using evolve::RunHistory;

enum class Family { plus, minus };
/// alpha: (alpha, 0) on the t-axis; beta, gamma: (0, value) on the r-axis.
enum class SeedKind { alpha, beta, gamma };

struct Seed {
    SeedKind kind = SeedKind::beta;
    double value = 0.0;
};

std::string to_string(Family f);
std::string to_string(SeedKind k);

class Characteristic {
public:
    Family family = Family::plus;
    Seed seed;
    std::vector<double> tau;
    std::vector<double> r;
    /// dr/dtau at each sample
    std::vector<double> slope;

    double tau_begin() const { return tau.front(); }
    double tau_end() const { return tau.back(); }
    /// Cubic Hermite interpolation through the samples.
    double r_at(double t) const;
};

/// Membership in the cone r <= t/4 + 1 (ties included).
struct ConeLocator {
    static double boundary(double t) { return 0.25 * t + 1.0; }
    bool contains(double t, double r) const { return r <= boundary(t); }
};

struct TraceLimit {
    /// defaults to the history's final time
    std::optional<double> until_time;
    /// stop where r crosses this radius
    std::optional<double> until_radius;
};

/// RK4 integration with the history's step sizes (each split into
/// `substeps`). Stops at the limit, at r = 0 (minus family) or at r_max.
Characteristic trace(const RunHistory& history, Family family, Seed seed, TraceLimit limit = {},
                     int substeps = 1);

struct Coordinates {
    double beta = 0.0;
    std::optional<double> alpha;
    std::optional<double> gamma;
};

/// Backward traces through (t, r): beta from the minus family; alpha when the
/// plus family reaches r = 0 at a time >= 0, gamma = r_+(0) otherwise.
Coordinates invert_coords(const RunHistory& history, double t, double r, int substeps = 1);

/// beta(t, r) alone (one backward trace).
double beta_of(const RunHistory& history, double t, double r, int substeps = 1);

/// d r / d seed along c at tau, by quadrature of a'(u) u_r:
///   minus from beta:  exp(-int_0^tau a_r)
///   plus from gamma:  exp( int_0^tau a_r)
///   plus from alpha:  -a(u(alpha, 0)) exp(int_alpha^tau a_r)
double jacobian_factor(const RunHistory& history, const Characteristic& c, double tau);

struct DeviationRow {
    double t = 0.0, r = 0.0;
    Coordinates coords;
    double dev_beta = 0.0;   // |(t + r) - beta|
    double dev_other = 0.0;  // |(t - r) - alpha| or |(r - t) - gamma|
    double bound_time = 0.0;     // eps * t
    double bound_k = 0.0;        // eps * K^2 (1 + t)^(2/K)
    double bound_beta = 0.0;     // eps * (beta - r)
    /// smallest C with max(dev) <= C * max(bounds); 0 when nothing deviates
    double implied_c = 0.0;
};

std::vector<DeviationRow> deviation_report(const RunHistory& history,
                                           std::span<const std::pair<double, double>> points,
                                           double eps, double K, int substeps = 1);

/// int_lo^hi (1 + coord(tau))^(-p) dtau along c, where coord is beta for the
/// plus family and alpha (or gamma) for the minus family.
double accumulation_integral(const RunHistory& history, const Characteristic& c, double p,
                             double lo, double hi, int substeps = 1);

/// d beta(t, 0) / dt by a centered difference with delta = 4 dt.
double beta_slope(const RunHistory& history, double t, int substeps = 1);

/// a(u(t, 0)) exp(int_0^t a'(u) u_r) along the minus characteristic ending at
/// (t, 0); the value beta_slope approximates.
double beta_slope_reference(const RunHistory& history, double t, int substeps = 1);

/// `family,seed_kind,seed,tau,r`, one sample per line.
void write_characteristics_csv(std::ostream& os, std::span<const Characteristic> chars);

} // namespace qwave::charts
