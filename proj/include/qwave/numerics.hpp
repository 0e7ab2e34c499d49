#pragma once

// Small numerical kernels shared by the modules: uniform-grid differences,
// four-point Lagrange weights, fixed Gauss-Legendre rules and trapezoid sums.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace qwave::numerics {

enum class Parity { none, even, odd };

/// First derivative on a uniform grid: centered in the interior, one-sided
/// second order at both ends.
std::vector<double> first_derivative(std::span<const double> f, double h);

/// Second derivative on a uniform grid: centered in the interior, one-sided
/// second order (four-point) at both ends.
std::vector<double> second_derivative(std::span<const double> f, double h);

/// Trapezoid rule over samples at arbitrary (increasing) abscissae.
double trapezoid(std::span<const double> x, std::span<const double> y);

/// Trapezoid rule on a uniform grid with spacing h.
double trapezoid_uniform(std::span<const double> y, double h);

/// Weights of the four-point Lagrange interpolant on nodes {-1, 0, 1, 2}
/// evaluated at s in [0, 1], together with first and second s-derivatives.
struct LagrangeWeights {
    std::array<double, 4> w, dw, d2w;
};

inline LagrangeWeights cubic_weights(double s) {
    LagrangeWeights out{};
    const double sm = s + 1.0, s1 = s - 1.0, s2 = s - 2.0;
    out.w = {-s * s1 * s2 / 6.0, sm * s1 * s2 / 2.0, -sm * s * s2 / 2.0, sm * s * s1 / 6.0};
    // derivatives of the cubic polynomials above
    out.dw = {-(3.0 * s * s - 6.0 * s + 2.0) / 6.0, (3.0 * s * s - 4.0 * s - 1.0) / 2.0,
              -(3.0 * s * s - 2.0 * s - 2.0) / 2.0, (3.0 * s * s - 1.0) / 6.0};
    out.d2w = {-(6.0 * s - 6.0) / 6.0, (6.0 * s - 4.0) / 2.0, -(6.0 * s - 2.0) / 2.0,
               (6.0 * s) / 6.0};
    return out;
}

/// Eight-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre8 {
    static constexpr std::array<double, 8> x = {
        -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
        0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
    static constexpr std::array<double, 8> w = {
        0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
        0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

    template <class F>
    static double integrate(F&& f, double a, double b) {
        const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
        double s = 0.0;
        for (std::size_t k = 0; k < 8; ++k) s += w[k] * f(c + hw * x[k]);
        return s * hw;
    }
};

/// Composite eight-point Gauss-Legendre on [a, b] with `panels` equal panels.
template <class F>
double gauss_composite(F&& f, double a, double b, std::size_t panels) {
    if (panels == 0 || b <= a) return 0.0;
    const double step = (b - a) / static_cast<double>(panels);
    double s = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + step * static_cast<double>(p);
        s += GaussLegendre8::integrate(f, lo, p + 1 == panels ? b : lo + step);
    }
    return s;
}

inline bool all_finite(std::span<const double> xs) {
    for (double x : xs)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace qwave::numerics
