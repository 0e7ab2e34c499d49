#include "qwave/numerics.hpp"

#include "qwave/errors.hpp"

namespace qwave::numerics {

std::vector<double> first_derivative(std::span<const double> f, double h) {
    const std::size_t m = f.size();
    if (m < 3) throw ArgumentError("first_derivative needs at least 3 samples");
    std::vector<double> d(m);
    const double inv = 1.0 / (2.0 * h);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv;
    for (std::size_t i = 1; i + 1 < m; ++i) d[i] = (f[i + 1] - f[i - 1]) * inv;
    d[m - 1] = (3.0 * f[m - 1] - 4.0 * f[m - 2] + f[m - 3]) * inv;
    return d;
}

std::vector<double> second_derivative(std::span<const double> f, double h) {
    const std::size_t m = f.size();
    if (m < 4) throw ArgumentError("second_derivative needs at least 4 samples");
    std::vector<double> d(m);
    const double inv = 1.0 / (h * h);
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * inv;
    for (std::size_t i = 1; i + 1 < m; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * inv;
    d[m - 1] = (2.0 * f[m - 1] - 5.0 * f[m - 2] + 4.0 * f[m - 3] - f[m - 4]) * inv;
    return d;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ArgumentError("trapezoid: size mismatch");
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

double trapezoid_uniform(std::span<const double> y, double h) {
    if (y.size() < 2) return 0.0;
    double s = 0.5 * (y.front() + y.back());
    for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
    return s * h;
}

} // namespace qwave::numerics
