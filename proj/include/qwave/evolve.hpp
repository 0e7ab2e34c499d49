#pragma once

// Time evolution of v = r*u under v_tt = a^2(v/r) v_rr on the half line.
//
// With v = r u the radial wave operator reduces exactly:
//   r (u_tt - a^2 (u_rr + 2 u_r / r)) = v_tt - a^2 v_rr,
// so the three-dimensional problem becomes a one-dimensional one with the
// Dirichlet condition v(t, 0) = 0. The stepper is the explicit three-level
// leapfrog scheme with a(u) frozen at the current level.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qwave/model.hpp"

namespace qwave::evolve {

using model::CoefficientModel;
using model::Grid;
using model::RadialProfile;

/// The pair (v, v_t) at time t on the radial grid.
struct WaveState {
    double t = 0.0;
    Grid grid;
    std::vector<double> v;
    std::vector<double> w;

    /// v = r f, w = r g.
    static WaveState from_data(const RadialProfile& f, const RadialProfile& g);

    /// u = v / r; at the origin the one-sided second order slope v_r(0).
    double u_at(std::size_t i) const;
    std::vector<double> u() const;
    /// u_t = w / r with the same origin rule.
    std::vector<double> ut() const;
};

/// cfl * h / max_i a(u_i).
double cfl_dt(const WaveState& state, const CoefficientModel& model, double cfl);

/// One uniform leapfrog step from (prev, cur) with cur.t - prev.t == dt.
/// The returned w is the one-sided second order difference at the new level.
WaveState step(const WaveState& prev, const WaveState& cur, const CoefficientModel& model,
               double dt);

/// Leapfrog step with unequal spacing: prev -> cur took dt_prev, the new step
/// takes dt. Reduces to step() when dt_prev == dt.
WaveState advance(const WaveState& prev, const WaveState& cur, const CoefficientModel& model,
                  double dt_prev, double dt);

/// An archived sample: the state plus the solver levels on either side, so
/// time differences at solver resolution remain available afterwards.
struct ArchivedLevel {
    WaveState state;
    std::vector<double> v_before;  // empty at t = 0
    std::vector<double> v_after;
    double dt_before = 0.0;
    double dt_after = 0.0;

    bool has_neighbors() const { return !v_before.empty() && !v_after.empty(); }
};

struct RunOptions {
    double T = 10.0;
    double cfl = 0.9;
    double sample_dt = 0.1;
    /// sup |u| allowed before the blow-up guard trips.
    double u_guard = 0.2;
    /// spatial stride of the per-step a(u) record
    std::size_t dense_stride = 4;
};

/// Archived samples plus the per-step a(u) record used for characteristic
/// tracing. Immutable once returned from run().
class RunHistory {
public:
    const Grid& grid() const { return grid_; }
    const CoefficientModel& model() const { return *model_; }
    const RunOptions& options() const { return options_; }
    const RadialProfile& initial_displacement() const { return f_; }
    const RadialProfile& initial_velocity() const { return g_; }

    double t_final() const { return options_.T; }

    std::span<const ArchivedLevel> samples() const { return samples_; }
    std::vector<double> sample_times() const;
    /// Archived level whose time is closest to t.
    const ArchivedLevel& nearest_sample(double t) const;

    // per-step record -------------------------------------------------------
    std::size_t step_count() const { return step_times_.size(); }
    std::span<const double> step_times() const { return step_times_; }
    std::span<const double> step_sizes() const { return step_sizes_; }
    std::span<const double> step_sup_u() const { return step_sup_u_; }
    std::size_t dense_stride() const { return options_.dense_stride; }
    std::size_t dense_nodes() const { return dense_nodes_; }
    double dense_h() const { return grid_.h * static_cast<double>(options_.dense_stride); }

    /// a(u) at level k and radius r (cubic in r, even across r = 0).
    double a_level(std::size_t k, double r) const;
    /// d/dr a(u) = a'(u) u_r at level k and radius r.
    double a_r_level(std::size_t k, double r) const;
    /// Level index k with step_times[k] <= t < step_times[k+1] (clamped).
    std::size_t level_index(double t) const;
    /// a(u) at (t, r): cubic in r, linear in t between stored levels.
    double a_at(double t, double r) const;
    double a_r_at(double t, double r) const;
    /// d/dt a(u) = a'(u) u_t, piecewise constant in t between levels.
    double a_t_at(double t, double r) const;

    /// Dense record covers [0, covered_time()] x [0, r_max].
    double covered_time() const { return step_times_.empty() ? 0.0 : step_times_.back(); }

private:
    friend RunHistory run(const RadialProfile&, const RadialProfile&, const CoefficientModel&,
                          const RunOptions&);
    friend RunHistory make_synthetic_history(Grid, const CoefficientModel&, const RunOptions&,
                                             std::vector<ArchivedLevel>);

    RunHistory(Grid grid, const CoefficientModel& model, RunOptions options,
               RadialProfile f, RadialProfile g);

    void record_level(double t, double sup_u, const WaveState& s);

    Grid grid_;
    std::optional<CoefficientModel> model_;
    RunOptions options_;
    RadialProfile f_, g_;

    std::vector<ArchivedLevel> samples_;
    std::vector<double> step_times_;
    std::vector<double> step_sizes_;
    std::vector<double> step_sup_u_;
    std::size_t dense_nodes_ = 0;
    std::vector<double> dense_a_;  // step-major, dense_nodes_ per level
};

/// Evolves (f, g) to time T. Throws DomainTooSmall if the support could reach
/// the outer boundary, GuardTrip subclasses when the solution leaves the
/// admissible regime, ArgumentError on bad options.
RunHistory run(const RadialProfile& f, const RadialProfile& g, const CoefficientModel& model,
               const RunOptions& options);

/// A history built from given archived levels without time stepping (no
/// per-step record). Used to feed synthetic series into the functionals.
RunHistory make_synthetic_history(Grid grid, const CoefficientModel& model,
                                  const RunOptions& options, std::vector<ArchivedLevel> levels);

struct DalembertValue {
    double phi = 0.0;
    double phi_t = 0.0;
};

/// Closed-form solution of the linear problem phi_tt = Laplace phi with
/// phi(0) = phi0 (radial), phi_t(0) = 0.
DalembertValue dalembert_reference(const RadialProfile& phi0, double t, double r);

/// max |v_tt - a^2 v_rr| over interior nodes at the archived levels nearest
/// each requested time. v_tt uses the archived solver levels; v_rr uses a
/// centered difference of spacing stride*h (stride 1 reproduces the scheme).
double pde_residual(const RunHistory& history, std::span<const double> times,
                    std::size_t stride);

struct ConvergenceResult {
    /// empty when every difference is exactly zero
    std::optional<double> order;
    std::vector<double> differences;
    std::vector<std::size_t> resolutions;

    bool exact() const { return !order.has_value(); }
};

/// Richardson order estimate from runs at resolutions N, 2N, 4N, ... on
/// [0, r_max]; uses the finest three.
ConvergenceResult convergence_order(const std::function<double(double)>& f,
                                    const std::function<double(double)>& g,
                                    const CoefficientModel& model, double r_max,
                                    std::span<const std::size_t> resolutions,
                                    const RunOptions& options);

} // namespace qwave::evolve
