#pragma once

// Pointwise derivative fields of an archived level and the functionals built
// from them: L+-/M+- fields, energies, cone-restricted sup norms, the
// weighted Strichartz and dispersion integrals, vector-field energies and the
// one-dimensional maximal function.

#include <cstddef>
#include <span>
#include <vector>

#include "qwave/evolve.hpp"

namespace qwave::functionals {

using evolve::ArchivedLevel;
using evolve::RunHistory;
using model::CoefficientModel;
using model::Grid;

struct FieldDerivatives {
    double t = 0.0;
    Grid grid;
    std::vector<double> v, w;
    std::vector<double> u, ut, ur, urr, utr;
};

/// u = v/r, u_t = w/r (origin by one-sided slopes); r-derivatives by centered
/// differences with the even reflection across r = 0.
FieldDerivatives field_derivatives(const ArchivedLevel& level);

struct CharacteristicFields {
    std::vector<double> plus_v, minus_v, plus_u, minus_u;
};

/// L+- = a^(-1/2) d_t +- a^(1/2) d_r applied to v and u.
CharacteristicFields lpm_fields(const FieldDerivatives& d, const CoefficientModel& model);
/// M+- = a^(-1) d_t +- d_r applied to v and u.
CharacteristicFields mpm_fields(const FieldDerivatives& d, const CoefficientModel& model);

/// u_tt = a^2 (u_rr + 2 u_r / r), with 2 u_r / r -> 2 u_rr at the origin.
std::vector<double> utt_from_equation(const FieldDerivatives& d, const CoefficientModel& model);

/// Standard energy E_1 or E_2 (s in {1, 2}).
double energy(const FieldDerivatives& d, int s, const CoefficientModel& model);

/// max(|u_t|, |u_r|) over nodes with r <= t/4 + 1 (inside) or r > t/4 + 1.
double cone_sup(const FieldDerivatives& d, bool inside);

/// Trapezoid of [(1 + t)^(1 - 4/K) cone_sup_inside(t)]^2 over samples with
/// t <= T. K may be infinite.
double weighted_strichartz(std::span<const double> times, std::span<const double> sup_inside,
                           double K, double T);
double weighted_strichartz(const RunHistory& history, double K, double T);

/// Trapezoid of ||du||_inf over samples with t <= T.
double dispersion_integral(std::span<const double> times, std::span<const double> sup_du, double T);
double dispersion_integral(const RunHistory& history, double T);
/// Trapezoid of ||du||_inf^2.
double dispersion_integral_squared(const RunHistory& history, double T);

struct VectorFieldEnergy {
    /// 4 pi int_{r <= t/4+1} (u_rr^2 + u_tr^2 + u_tt^2) r^2 dr
    double interior_second = 0.0;
    /// L2 norms of G1 du and G2 du, G1 = (t+r)(d_t+d_r), G2 = (t-r)(d_t-d_r)
    double gamma1_l2 = 0.0;
    double gamma2_l2 = 0.0;
    /// sup norms of G1 u, G2 u, and of G0 u = (G1 u - G2 u)/2 = r u_t + t u_r
    double gamma1_sup = 0.0;
    double gamma2_sup = 0.0;
    double gamma0_sup = 0.0;
    double scaling_sup = 0.0;  // S u = t u_t + r u_r
};

VectorFieldEnergy vectorfield_energy(const FieldDerivatives& d, const CoefficientModel& model);

/// Grid function on cells [origin + i h, origin + (i+1) h).
struct MaximalInput {
    double origin = 0.0;
    double h = 1.0;
    std::vector<double> values;
};

/// (Mf)_i = max over cell ranges [a, b) containing i of the mean of |f|.
MaximalInput maximal_function(const MaximalInput& f);

/// Discrete Lp norm (h sum |f|^p)^(1/p).
double lp_norm(const MaximalInput& f, double p);

struct SeriesRow {
    double t = 0.0;
    double sup_u = 0.0;
    double sup_du_in_cone = 0.0;
    double sup_du_out_cone = 0.0;
    double E1 = 0.0;
    double E2 = 0.0;
    double W_K_partial = 0.0;
    double log_disp_partial = 0.0;
};

/// One row per archived sample; partial integrals are running trapezoids.
std::vector<SeriesRow> compute_series(const RunHistory& history, double K);

} // namespace qwave::functionals
