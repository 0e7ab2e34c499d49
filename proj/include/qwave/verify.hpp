#pragma once

// Verdicts on computed runs: fitted constants for the decay, derivative and
// integral bounds, the energy growth exponent, linear Strichartz ratios, the
// two-run stability experiment and the short-time checks.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qwave/evolve.hpp"
#include "qwave/functionals.hpp"

namespace qwave::verify {

using evolve::RunHistory;
using evolve::RunOptions;
using model::CoefficientModel;
using model::RadialProfile;

struct BoundRecord {
    std::string id;
    /// sup of the bound's ratio over the lattice; empty when uncomputed
    std::optional<double> fitted_constant;
    double sup_t = 0.0;
    double sup_r = 0.0;
    bool saturated = false;
    std::optional<double> refinement_ratio;
    /// fitted exponent where the bound has one (A7)
    std::optional<double> exponent;
    std::size_t points = 0;
    std::string note;
};

struct VerificationReport {
    double K = 0.0;
    double eps = 0.0;
    /// K^4 eps <= 1
    bool regime_ok = true;
    std::string model;
    std::size_t N = 0;
    double h = 0.0;
    double T = 0.0;
    double theta = 0.0;
    std::vector<BoundRecord> bounds;
    std::vector<std::string> warnings;

    const BoundRecord& find(const std::string& id) const;
    BoundRecord& find(const std::string& id);
    bool any_saturated() const;
};

struct VerifyOptions {
    std::size_t radii_per_snapshot = 64;
    int substeps = 1;
    /// horizon for the short-time bounds G5-G7
    double local_horizon = 1.0;
};

/// Evaluates every bound on the sample lattice of `history`; with `refined`
/// (same data at h/2) also records C(h)/C(h/2).
VerificationReport verify_theorem21(const RunHistory& history, double K, double eps,
                                    const RunHistory* refined = nullptr,
                                    const VerifyOptions& options = {});

/// Least-squares slope of log E against log(1 + t) over t >= t_start.
double fit_growth_exponent(const std::vector<double>& t, const std::vector<double>& E,
                           double t_start);
/// Window start max(1, T/2).
double fit_growth_exponent(const std::vector<double>& t, const std::vector<double>& E);

void write_report_json(std::ostream& os, const VerificationReport& report);
void write_report_csv(std::ostream& os, const VerificationReport& report);

// linear Strichartz ------------------------------------------------------------

struct StrichartzRow {
    double support = 0.0;
    double numerator = 0.0;    // (int_0^T ||phi_t||_inf^2 dt)^(1/2)
    double denominator = 0.0;  // (int_0^inf phi0'^2 + (lambda phi0'')^2)^(1/2)
    std::optional<double> ratio;
    double in_cone = 0.0;           // (int_0^T sup_{r<=t/4+1} |phi_t|^2)^(1/2)
    double in_cone_weighted = 0.0;  // same with weight (1+t)^delta inside
    /// in-cone integrals restricted to t > 8/3 (zero for unit support)
    double in_cone_tail = 0.0;
    double in_cone_weighted_tail = 0.0;
};

struct StrichartzTable {
    std::vector<StrichartzRow> rows;
    std::optional<double> max_ratio;
    std::optional<double> min_ratio;
    /// max/min over non-degenerate rows
    std::optional<double> spread() const;
};

StrichartzTable linear_strichartz_check(const std::vector<RadialProfile>& family, double T,
                                        double delta);

/// (1 - (r/s)^2)^4 on r <= s, sampled with `cells_per_support` cells per s.
RadialProfile scaled_bump(double s, double r_max, std::size_t cells_per_support = 512);

// stability ---------------------------------------------------------------------

struct HomotopyFamily {
    RadialProfile f1, g1, f2, g2;
    std::vector<double> lambdas;

    /// ((1 - l) f1 + l f2, (1 - l) g1 + l g2); exact endpoints.
    std::pair<RadialProfile, RadialProfile> member(double lambda) const;
};

struct GapReading {
    double t = 0.0;
    double gap = 0.0;
    double grad_l2 = 0.0;
    double ut_l2 = 0.0;
};

/// ||grad(u1 - u2)||_L2 + ||u1_t - u2_t||_L2 at the snapshot nearest t.
GapReading stability_gap(const RunHistory& run1, const RunHistory& run2, double t);

/// The same distance between two archived levels.
GapReading level_gap(const evolve::ArchivedLevel& a, const evolve::ArchivedLevel& b);

struct LambdaRow {
    double lambda = 0.0;
    double sup_u = 0.0;
    double final_E1 = 0.0;
    /// gap(T) to the first endpoint divided by lambda * kappa
    std::optional<double> gap_ratio;
};

struct StabilityResult {
    double kappa = 0.0;
    double sup_ratio = 0.0;
    double sup_ratio_t = 0.0;
    std::vector<GapReading> gaps;
    std::vector<LambdaRow> lambda_rows;
};

StabilityResult stability_check(const HomotopyFamily& family, const CoefficientModel& model,
                                const RunOptions& options);

// short-time bounds ---------------------------------------------------------------

struct LocalReport {
    double horizon = 0.0;
    double sup_u = 0.0;
    double two_f_inf = 0.0;
    bool doubling_holds = true;  // sup|u| <= 2 ||f||_inf
    double sup_lplus_v = 0.0;
    double sup_lminus_v = 0.0;
    double du_squared_integral = 0.0;
    std::vector<BoundRecord> records;  // G5, G6, G7
};

LocalReport local_theorem71_check(const RunHistory& history, double T_small);

// maximal operator self-test ------------------------------------------------------

struct MaximalCase {
    std::string name;
    double p = 0.0;
    double norm_ratio = 0.0;
    bool pass = false;
};

/// Random dyadic step functions at N and 2N cells: oracle equality, sup
/// bound and the fitted strong-(2,2) constant.
std::vector<MaximalCase> maximal_selftest(unsigned seed, std::size_t N, std::size_t cases);

void write_maximal_csv(std::ostream& os, const std::vector<MaximalCase>& rows);

} // namespace qwave::verify
