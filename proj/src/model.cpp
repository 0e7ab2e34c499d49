#include "qwave/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "qwave/errors.hpp"
#include "qwave/io.hpp"
#include "qwave/numerics.hpp"
#include "qwave/parallel.hpp"

namespace qwave::model {

namespace {
constexpr double kPi = std::numbers::pi;
} // namespace

Grid Grid::over(double r_max, std::size_t n) {
    if (!(r_max > 0.0) || n < 3) throw ArgumentError("grid needs r_max > 0 and n >= 3");
    return Grid{r_max / static_cast<double>(n), n};
}

// ---------------------------------------------------------------------------
// CoefficientModel

CoefficientModel::CoefficientModel(std::string label, Fn a, Fn da, double u_floor, double a_min)
    : label_(std::move(label)), a_(std::move(a)), da_(std::move(da)), u_floor_(u_floor),
      a_min_(a_min) {
    if (!a_ || !da_) throw ArgumentError("coefficient model needs a and a'");
    if (!(a_min_ > 0.0)) throw ArgumentError("coefficient model needs a_min > 0");
    if (a_(0.0) != 1.0) throw ArgumentError("coefficient model must satisfy a(0) = 1");
}

CoefficientModel CoefficientModel::linear() {
    return {"linear", [](double) { return 1.0; }, [](double) { return 0.0; },
            -std::numeric_limits<double>::infinity(), 1.0};
}

CoefficientModel CoefficientModel::one_plus_u(double k, double a_min) {
    if (!(k > 0.0)) throw ArgumentError("one_plus_u needs k > 0");
    if (!(a_min > 0.0 && a_min < 1.0)) throw ArgumentError("one_plus_u needs 0 < a_min < 1");
    std::string label = k == 1.0 ? "one_plus_u" : "one_plus_u(k=" + io::format_double(k) + ")";
    return {std::move(label), [k](double u) { return 1.0 + k * u; }, [k](double) { return k; },
            (a_min - 1.0) / k, a_min};
}

CoefficientModel CoefficientModel::exponential(double k) {
    if (!(k > 0.0)) throw ArgumentError("exponential needs k > 0");
    constexpr double a_min = 0.1;
    std::string label = k == 1.0 ? "exponential" : "exponential(k=" + io::format_double(k) + ")";
    return {std::move(label), [k](double u) { return std::exp(k * u); },
            [k](double u) { return k * std::exp(k * u); }, std::log(a_min) / k, a_min};
}

bool CoefficientModel::admissible(double u) const {
    return std::isfinite(u) && u > u_floor_;
}

double CoefficientModel::max_speed(double u_bound) const {
    const double lo = std::max(-u_bound, std::nextafter(u_floor_, 0.0));
    const double hi = u_bound;
    double best = a_(0.0);
    constexpr int samples = 200;
    for (int k = 0; k <= samples; ++k) {
        const double u = lo + (hi - lo) * k / samples;
        best = std::max(best, a_(u));
    }
    return best;
}

// ---------------------------------------------------------------------------
// RadialProfile

RadialProfile::RadialProfile(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (!(grid_.h > 0.0) || grid_.n < 3) throw ArgumentError("profile grid needs h > 0, n >= 3");
    if (values_.size() != grid_.nodes())
        throw ArgumentError("profile has " + std::to_string(values_.size()) + " values for " +
                            std::to_string(grid_.nodes()) + " nodes");
    if (!numerics::all_finite(values_)) throw ArgumentError("profile values must be finite");
    for (std::size_t i = values_.size(); i-- > 0;) {
        if (values_[i] != 0.0) {
            support_ = grid_.r(std::min(i + 1, grid_.n));
            break;
        }
    }
}

RadialProfile RadialProfile::zero(Grid grid) {
    return RadialProfile(grid, std::vector<double>(grid.nodes(), 0.0));
}

double RadialProfile::support_radius() const { return support_; }

RadialProfile::Stencil RadialProfile::stencil(double r) const {
    const double x = std::abs(r) / grid_.h;
    const auto n = static_cast<long>(grid_.n);
    long i = static_cast<long>(std::floor(x));
    i = std::clamp(i, 0L, n - 1);
    Stencil st{};
    st.s = x - static_cast<double>(i);
    for (long k = 0; k < 4; ++k) {
        long j = i - 1 + k;
        if (j < 0) j = -j;  // even extension across the origin
        if (j > n) j = n;   // constant extension past r_max
        st.v[static_cast<std::size_t>(k)] = values_[static_cast<std::size_t>(j)];
    }
    return st;
}

double RadialProfile::eval(double r) const {
    if (std::abs(r) >= grid_.r_max()) return values_.back();
    const auto st = stencil(r);
    const auto lw = numerics::cubic_weights(st.s);
    double s = 0.0;
    for (std::size_t k = 0; k < 4; ++k) s += lw.w[k] * st.v[k];
    return s;
}

double RadialProfile::deriv(double r) const {
    if (std::abs(r) >= grid_.r_max()) return 0.0;
    const auto st = stencil(r);
    const auto lw = numerics::cubic_weights(st.s);
    double s = 0.0;
    for (std::size_t k = 0; k < 4; ++k) s += lw.dw[k] * st.v[k];
    return (r < 0.0 ? -s : s) / grid_.h;
}

double RadialProfile::deriv2(double r) const {
    if (std::abs(r) >= grid_.r_max()) return 0.0;
    const auto st = stencil(r);
    const auto lw = numerics::cubic_weights(st.s);
    double s = 0.0;
    for (std::size_t k = 0; k < 4; ++k) s += lw.d2w[k] * st.v[k];
    return s / (grid_.h * grid_.h);
}

RadialProfile RadialProfile::scaled(double c) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= c;
    return RadialProfile(grid_, std::move(v));
}

RadialProfile RadialProfile::operator+(const RadialProfile& other) const {
    if (!(grid_ == other.grid_)) throw ArgumentError("profiles live on different grids");
    std::vector<double> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += other.values_[i];
    return RadialProfile(grid_, std::move(v));
}

RadialProfile RadialProfile::operator-(const RadialProfile& other) const {
    if (!(grid_ == other.grid_)) throw ArgumentError("profiles live on different grids");
    std::vector<double> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= other.values_[i];
    return RadialProfile(grid_, std::move(v));
}

void RadialProfile::write_csv(std::ostream& os) const {
    os << "r,value\n";
    for (std::size_t i = 0; i < values_.size(); ++i)
        os << io::format_double(grid_.r(i)) << ',' << io::format_double(values_[i]) << '\n';
}

std::string RadialProfile::descriptor_json() const {
    std::ostringstream os;
    os << "{\"h\": " << io::format_double(grid_.h) << ", \"N\": " << grid_.n
       << ", \"support_radius\": " << io::format_double(support_radius()) << "}";
    return os.str();
}

// ---------------------------------------------------------------------------
// MollifierKernel

namespace {
double raw_kernel(double x) {
    if (x >= 2.0) return 0.0;
    const double q = x / 2.0;
    return std::exp(-1.0 / (1.0 - q * q));
}
} // namespace

MollifierKernel MollifierKernel::standard() {
    MollifierKernel k;
    const double mass = 4.0 * kPi *
                        numerics::gauss_composite([](double x) { return raw_kernel(x) * x * x; },
                                                  0.0, 2.0, 2048);
    k.norm_ = 1.0 / mass;

    constexpr std::size_t cells = 4096;
    k.table_h_ = 2.0 / static_cast<double>(cells);
    k.moment_.assign(cells + 1, 0.0);
    for (std::size_t c = 0; c < cells; ++c) {
        const double lo = k.table_h_ * static_cast<double>(c);
        k.moment_[c + 1] =
            k.moment_[c] + k.norm_ * numerics::GaussLegendre8::integrate(
                                         [](double x) { return raw_kernel(x) * x; }, lo,
                                         lo + k.table_h_);
    }
    return k;
}

double MollifierKernel::operator()(double x) const { return norm_ * raw_kernel(std::abs(x)); }

double MollifierKernel::first_moment(double y) const {
    if (y <= 0.0) return 0.0;
    if (y >= 2.0) return moment_.back();
    const double x = y / table_h_;
    const auto c = std::min(static_cast<std::size_t>(x), moment_.size() - 2);
    const double s = x - static_cast<double>(c);
    // cubic Hermite with the exact slope rho(x)*x at the table nodes
    const double x0 = table_h_ * static_cast<double>(c), x1 = x0 + table_h_;
    const double m0 = (*this)(x0) * x0 * table_h_, m1 = (*this)(x1) * x1 * table_h_;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * moment_[c] + (s3 - 2 * s2 + s) * m0 +
           (-2 * s3 + 3 * s2) * moment_[c + 1] + (s3 - s2) * m1;
}

// ---------------------------------------------------------------------------
// mollify

RadialProfile mollify(const RadialProfile& f, int n, const MollifierKernel& kernel) {
    if (n < 1) throw ArgumentError("mollify needs n >= 1, got " + std::to_string(n));
    const Grid grid = f.grid();
    const double nn = static_cast<double>(n);
    const double reach = 2.0 / nn;
    const double tail = f.values().back();
    const double support = f.support_radius() + 2.0 * grid.h;

    // sub-panel length: resolve the kernel even when the grid is coarse
    const double panel = std::min(grid.h, 0.25 / nn);

    auto integrate_window = [&](double lo, double hi, auto&& integrand) {
        double total = 0.0;
        double a = lo;
        while (a < hi) {
            // next break: grid node (the interpolant is piecewise cubic)
            double next_node = (std::floor(a / grid.h + 1e-12) + 1.0) * grid.h;
            double b = std::min({hi, next_node, a + panel});
            if (b <= a) b = std::min(hi, a + panel);
            total += numerics::GaussLegendre8::integrate(integrand, a, b);
            a = b;
        }
        return total;
    };

    std::vector<double> out(grid.nodes(), 0.0);
    parallel_for(grid.nodes(), [&](std::size_t i) {
        const double r = grid.r(i);
        if (tail == 0.0 && r - reach > support) return;
        if (i == 0) {
            const double n3 = nn * nn * nn;
            out[i] = 4.0 * kPi * integrate_window(0.0, reach, [&](double s) {
                         return n3 * kernel(nn * s) * f.eval(s) * s * s;
                     });
            return;
        }
        auto G = [&](double q) { return nn * kernel.first_moment(nn * q); };
        const double lo = std::max(0.0, r - reach);
        const double hi = r + reach;
        const double sum = integrate_window(lo, hi, [&](double s) {
            return f.eval(s) * s * (G(r + s) - G(std::abs(r - s)));
        });
        out[i] = 2.0 * kPi * sum / r;
    });
    return RadialProfile(grid, std::move(out));
}

// ---------------------------------------------------------------------------
// norms and data

double h2h1_norm(const RadialProfile& f, const RadialProfile& g) {
    if (!(f.grid() == g.grid())) throw ArgumentError("h2h1_norm: f and g on different grids");
    const Grid grid = f.grid();
    const double h = grid.h;
    const auto fr = numerics::first_derivative(f.values(), h);
    const auto frr = numerics::second_derivative(f.values(), h);
    const auto gr = numerics::first_derivative(g.values(), h);

    std::vector<double> grad(grid.nodes()), hess(grid.nodes()), g0(grid.nodes()), g1(grid.nodes());
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
        const double r = grid.r(i);
        const double r2 = r * r;
        grad[i] = fr[i] * fr[i] * r2;
        // at the origin f_r -> 0 and 2 f_r^2 / r^2 -> 2 f_rr^2
        const double angular = i == 0 ? 2.0 * frr[0] * frr[0] : 2.0 * fr[i] * fr[i] / r2;
        hess[i] = (frr[i] * frr[i] + angular) * r2;
        g0[i] = g[i] * g[i] * r2;
        g1[i] = gr[i] * gr[i] * r2;
    }
    const double c = 4.0 * kPi;
    const double grad2 = c * numerics::trapezoid_uniform(grad, h);
    const double hess2 = c * numerics::trapezoid_uniform(hess, h);
    const double g02 = c * numerics::trapezoid_uniform(g0, h);
    const double g12 = c * numerics::trapezoid_uniform(g1, h);
    return std::sqrt(grad2 + hess2) + std::sqrt(g02 + g12);
}

double bump_base(double r) {
    const double ar = std::abs(r);
    if (ar >= 1.0) return 0.0;
    const double q = 1.0 - ar * ar;
    return q * q * q * q;
}

namespace {
std::pair<RadialProfile, RadialProfile> unit_bump(BumpKind kind, Grid grid) {
    auto base = RadialProfile::sample(grid, bump_base);
    auto zero = RadialProfile::zero(grid);
    switch (kind) {
    case BumpKind::displacement: return {base, zero};
    case BumpKind::velocity: return {zero, base};
    case BumpKind::mixed: return {base, base};
    }
    return {zero, zero};
}
} // namespace

double bump_scale(double eps, BumpKind kind, Grid grid) {
    if (!(eps >= 0.0)) throw ArgumentError("bump amplitude eps must be >= 0");
    if (eps == 0.0) return 0.0;
    auto [f, g] = unit_bump(kind, grid);
    return eps / h2h1_norm(f, g);
}

std::pair<RadialProfile, RadialProfile> make_bump(double eps, BumpKind kind, Grid grid) {
    const double c = bump_scale(eps, kind, grid);
    auto [f, g] = unit_bump(kind, grid);
    return {f.scaled(c), g.scaled(c)};
}

BumpKind parse_bump_kind(const std::string& name) {
    if (name == "displacement") return BumpKind::displacement;
    if (name == "velocity") return BumpKind::velocity;
    if (name == "mixed") return BumpKind::mixed;
    throw ArgumentError("unknown bump kind '" + name + "'");
}

std::string to_string(BumpKind kind) {
    switch (kind) {
    case BumpKind::displacement: return "displacement";
    case BumpKind::velocity: return "velocity";
    case BumpKind::mixed: return "mixed";
    }
    return "unknown";
}

} // namespace qwave::model
