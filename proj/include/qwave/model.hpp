#pragma once

// Coefficient models a(u), radially symmetric grid profiles, mollification,
// the H^2 x H^1 data norm and compactly supported bump data.

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qwave::model {

/// Uniform radial grid r_i = i*h, i = 0..n.
struct Grid {
    double h = 0.0;
    std::size_t n = 0;

    static Grid over(double r_max, std::size_t n);

    std::size_t nodes() const { return n + 1; }
    double r(std::size_t i) const { return static_cast<double>(i) * h; }
    double r_max() const { return static_cast<double>(n) * h; }

    bool operator==(const Grid&) const = default;
};

/// Wave speed a(u) with its derivative and the half-line (u_floor, inf) on
/// which a stays above a_min. a(0) = 1 is enforced at construction.
class CoefficientModel {
public:
    using Fn = std::function<double(double)>;

    CoefficientModel(std::string label, Fn a, Fn da, double u_floor, double a_min);

    /// a == 1.
    static CoefficientModel linear();
    /// a(u) = 1 + k*u, admissible for u > (a_min - 1)/k (k > 0).
    static CoefficientModel one_plus_u(double k = 1.0, double a_min = 0.1);
    /// a(u) = exp(k*u); positive everywhere.
    static CoefficientModel exponential(double k = 1.0);

    double operator()(double u) const { return a_(u); }
    double deriv(double u) const { return da_(u); }
    double u_floor() const { return u_floor_; }
    double a_min() const { return a_min_; }
    const std::string& label() const { return label_; }

    bool admissible(double u) const;

    /// Largest a over |u| <= bound (sampled; the models here are monotone).
    double max_speed(double u_bound) const;

private:
    std::string label_;
    Fn a_, da_;
    double u_floor_;
    double a_min_;
};

/// A radial function sampled on a uniform grid. Off-node values use the
/// four-point Lagrange interpolant; the profile is extended evenly across
/// r = 0 and by its last value beyond r_max.
class RadialProfile {
public:
    RadialProfile(Grid grid, std::vector<double> values);

    static RadialProfile zero(Grid grid);

    template <class F>
    static RadialProfile sample(Grid grid, F&& f) {
        std::vector<double> v(grid.nodes());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.r(i));
        return RadialProfile(grid, std::move(v));
    }

    const Grid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Smallest node radius R with values == 0 at all nodes r >= R.
    double support_radius() const;

    double eval(double r) const;
    double deriv(double r) const;
    double deriv2(double r) const;

    RadialProfile scaled(double c) const;
    RadialProfile operator+(const RadialProfile& other) const;
    RadialProfile operator-(const RadialProfile& other) const;

    void write_csv(std::ostream& os) const;
    std::string descriptor_json() const;

private:
    struct Stencil {
        std::array<double, 4> v;
        double s;
    };
    Stencil stencil(double r) const;

    Grid grid_;
    std::vector<double> values_;
    double support_ = 0.0;
};

/// Smooth radial mollifier supported in |x| < 2 with unit mass in R^3.
class MollifierKernel {
public:
    /// rho(|x|) proportional to exp(-1 / (1 - (|x|/2)^2)).
    static MollifierKernel standard();

    /// Normalized kernel value at radius x.
    double operator()(double x) const;
    double normalization() const { return norm_; }

    /// int_0^min(y,2) rho(x) x dx.
    double first_moment(double y) const;

private:
    MollifierKernel() = default;

    double norm_ = 1.0;
    // cumulative first moment on a uniform table over [0, 2]
    std::vector<double> moment_;
    double table_h_ = 0.0;
};

/// J_n f = n^3 int rho(n(x - y)) f(y) dy for radial f, sampled on f's grid.
RadialProfile mollify(const RadialProfile& f, int n, const MollifierKernel& kernel);

/// ||grad f||_{H^1(R^3)} + ||g||_{H^1(R^3)} through radial reductions.
double h2h1_norm(const RadialProfile& f, const RadialProfile& g);

enum class BumpKind { displacement, velocity, mixed };

/// (1 - r^2)^4 on r <= 1, the base of every generated data set.
double bump_base(double r);

/// Data pair built from bump_base in the active slot(s), scaled so that
/// h2h1_norm(f, g) == eps.
std::pair<RadialProfile, RadialProfile> make_bump(double eps, BumpKind kind, Grid grid);

/// Scale factor c such that make_bump uses c * bump_base.
double bump_scale(double eps, BumpKind kind, Grid grid);

BumpKind parse_bump_kind(const std::string& name);
std::string to_string(BumpKind kind);

} // namespace qwave::model
