#include "qwave/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qwave/errors.hpp"
#include "qwave/numerics.hpp"
#include "qwave/parallel.hpp"

namespace qwave::functionals {

namespace {

constexpr double four_pi = 4.0 * std::numbers::pi;

// derivatives of an even function of r sampled at r_i = i h
std::vector<double> even_first(const std::vector<double>& f, double h) {
    std::vector<double> d = numerics::first_derivative(f, h);
    d[0] = 0.0;
    return d;
}

std::vector<double> even_second(const std::vector<double>& f, double h) {
    std::vector<double> d = numerics::second_derivative(f, h);
    d[0] = 2.0 * (f[1] - f[0]) / (h * h);
    return d;
}

double radial_integral(const std::vector<double>& integrand, double h) {
    return four_pi * numerics::trapezoid_uniform(integrand, h);
}

double checked_a(const CoefficientModel& model, double u, double t, double r) {
    if (!model.admissible(u))
        throw CoefficientDomainExceeded("u outside the admissible domain of the coefficient", t, r, u);
    return model(u);
}

double power_weight(double t, double K) {
    if (!(K > 0.0)) throw ArgumentError("K must be positive");
    const double e = std::isinf(K) ? 1.0 : 1.0 - 4.0 / K;
    return std::pow(1.0 + t, e);
}

// Trapezoid of y over x truncated at T (linear interpolation at T).
double truncated_trapezoid(std::span<const double> x, std::span<const double> y, double T) {
    if (x.size() != y.size()) throw ArgumentError("series length mismatch");
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (x[i - 1] >= T) break;
        if (x[i] <= T) {
            s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
        } else {
            const double th = (T - x[i - 1]) / (x[i] - x[i - 1]);
            const double yT = y[i - 1] + th * (y[i] - y[i - 1]);
            s += 0.5 * (T - x[i - 1]) * (y[i - 1] + yT);
            break;
        }
    }
    return s;
}

struct Snapshot {
    double t;
    double sup_in, sup_out;
};

std::vector<Snapshot> snapshots(const RunHistory& history) {
    const auto samples = history.samples();
    std::vector<Snapshot> out(samples.size());
    parallel_for(samples.size(), [&](std::size_t k) {
        const FieldDerivatives d = field_derivatives(samples[k]);
        out[k] = {d.t, cone_sup(d, true), cone_sup(d, false)};
    });
    return out;
}

} // namespace

FieldDerivatives field_derivatives(const ArchivedLevel& level) {
    const auto& s = level.state;
    FieldDerivatives d;
    d.t = s.t;
    d.grid = s.grid;
    d.v = s.v;
    d.w = s.w;
    d.u = s.u();
    d.ut = s.ut();
    const double h = s.grid.h;
    d.ur = even_first(d.u, h);
    d.urr = even_second(d.u, h);
    d.utr = even_first(d.ut, h);
    return d;
}

CharacteristicFields lpm_fields(const FieldDerivatives& d, const CoefficientModel& model) {
    const std::size_t m = d.u.size();
    CharacteristicFields out{std::vector<double>(m), std::vector<double>(m), std::vector<double>(m),
                             std::vector<double>(m)};
    for (std::size_t i = 0; i < m; ++i) {
        const double r = d.grid.r(i);
        const double sa = std::sqrt(checked_a(model, d.u[i], d.t, r));
        const double vr = d.u[i] + r * d.ur[i];
        out.plus_v[i] = d.w[i] / sa + sa * vr;
        out.minus_v[i] = d.w[i] / sa - sa * vr;
        out.plus_u[i] = d.ut[i] / sa + sa * d.ur[i];
        out.minus_u[i] = d.ut[i] / sa - sa * d.ur[i];
    }
    return out;
}

CharacteristicFields mpm_fields(const FieldDerivatives& d, const CoefficientModel& model) {
    const std::size_t m = d.u.size();
    CharacteristicFields out{std::vector<double>(m), std::vector<double>(m), std::vector<double>(m),
                             std::vector<double>(m)};
    for (std::size_t i = 0; i < m; ++i) {
        const double r = d.grid.r(i);
        const double a = checked_a(model, d.u[i], d.t, r);
        const double vr = d.u[i] + r * d.ur[i];
        out.plus_v[i] = d.w[i] / a + vr;
        out.minus_v[i] = d.w[i] / a - vr;
        out.plus_u[i] = d.ut[i] / a + d.ur[i];
        out.minus_u[i] = d.ut[i] / a - d.ur[i];
    }
    return out;
}

std::vector<double> utt_from_equation(const FieldDerivatives& d, const CoefficientModel& model) {
    std::vector<double> out(d.u.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double a = model(d.u[i]);
        const double lap = i == 0 ? 3.0 * d.urr[0] : d.urr[i] + 2.0 * d.ur[i] / d.grid.r(i);
        out[i] = a * a * lap;
    }
    return out;
}

double energy(const FieldDerivatives& d, int s, const CoefficientModel& model) {
    if (s != 1 && s != 2) throw ArgumentError("energy order must be 1 or 2");
    const std::size_t m = d.u.size();
    std::vector<double> e1(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double r = d.grid.r(i);
        const double a = model(d.u[i]);
        e1[i] = (d.ut[i] * d.ut[i] + a * a * d.ur[i] * d.ur[i]) * r * r;
    }
    double E = 0.5 * radial_integral(e1, d.grid.h);
    if (s == 1) return E;
    const std::vector<double> utt = utt_from_equation(d, model);
    std::vector<double> e2(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double r = d.grid.r(i);
        const double a = model(d.u[i]);
        const double time_block = utt[i] * utt[i] + d.utr[i] * d.utr[i];
        const double space_block =
            (d.utr[i] * d.utr[i] + d.urr[i] * d.urr[i]) * r * r + 2.0 * d.ur[i] * d.ur[i];
        e2[i] = time_block * r * r + a * a * space_block;
    }
    return E + 0.5 * radial_integral(e2, d.grid.h);
}

double cone_sup(const FieldDerivatives& d, bool inside) {
    const double edge = 0.25 * d.t + 1.0;
    double best = 0.0;
    for (std::size_t i = 0; i < d.u.size(); ++i) {
        if ((d.grid.r(i) <= edge) != inside) continue;
        best = std::max({best, std::abs(d.ut[i]), std::abs(d.ur[i])});
    }
    return best;
}

double weighted_strichartz(std::span<const double> times, std::span<const double> sup_inside,
                           double K, double T) {
    if (times.size() != sup_inside.size()) throw ArgumentError("series length mismatch");
    std::vector<double> y(times.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double q = power_weight(times[i], K) * sup_inside[i];
        y[i] = q * q;
    }
    return truncated_trapezoid(times, y, T);
}

double weighted_strichartz(const RunHistory& history, double K, double T) {
    power_weight(0.0, K);
    const auto snaps = snapshots(history);
    std::vector<double> t, s;
    for (const auto& sn : snaps) {
        t.push_back(sn.t);
        s.push_back(sn.sup_in);
    }
    return weighted_strichartz(t, s, K, T);
}

double dispersion_integral(std::span<const double> times, std::span<const double> sup_du, double T) {
    return truncated_trapezoid(times, sup_du, T);
}

double dispersion_integral(const RunHistory& history, double T) {
    const auto snaps = snapshots(history);
    std::vector<double> t, s;
    for (const auto& sn : snaps) {
        t.push_back(sn.t);
        s.push_back(std::max(sn.sup_in, sn.sup_out));
    }
    return dispersion_integral(t, s, T);
}

double dispersion_integral_squared(const RunHistory& history, double T) {
    const auto snaps = snapshots(history);
    std::vector<double> t, s;
    for (const auto& sn : snaps) {
        t.push_back(sn.t);
        const double m = std::max(sn.sup_in, sn.sup_out);
        s.push_back(m * m);
    }
    return truncated_trapezoid(t, s, T);
}

VectorFieldEnergy vectorfield_energy(const FieldDerivatives& d, const CoefficientModel& model) {
    const std::size_t m = d.u.size();
    const std::vector<double> utt = utt_from_equation(d, model);
    const double edge = 0.25 * d.t + 1.0;
    std::vector<double> interior, g1(m), g2(m);
    VectorFieldEnergy out;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = d.grid.r(i), t = d.t;
        if (r <= edge)
            interior.push_back((d.urr[i] * d.urr[i] + d.utr[i] * d.utr[i] + utt[i] * utt[i]) * r * r);
        const double p1 = t + r, p2 = t - r;
        const double g1t = p1 * (utt[i] + d.utr[i]), g1r = p1 * (d.utr[i] + d.urr[i]);
        const double g2t = p2 * (utt[i] - d.utr[i]), g2r = p2 * (d.utr[i] - d.urr[i]);
        g1[i] = (g1t * g1t + g1r * g1r) * r * r;
        g2[i] = (g2t * g2t + g2r * g2r) * r * r;
        const double G1 = p1 * (d.ut[i] + d.ur[i]);
        const double G2 = p2 * (d.ut[i] - d.ur[i]);
        out.gamma1_sup = std::max(out.gamma1_sup, std::abs(G1));
        out.gamma2_sup = std::max(out.gamma2_sup, std::abs(G2));
        out.gamma0_sup = std::max(out.gamma0_sup, std::abs(r * d.ut[i] + t * d.ur[i]));
        out.scaling_sup = std::max(out.scaling_sup, std::abs(t * d.ut[i] + r * d.ur[i]));
    }
    out.interior_second = interior.size() >= 2 ? radial_integral(interior, d.grid.h) : 0.0;
    out.gamma1_l2 = std::sqrt(radial_integral(g1, d.grid.h));
    out.gamma2_l2 = std::sqrt(radial_integral(g2, d.grid.h));
    return out;
}

MaximalInput maximal_function(const MaximalInput& f) {
    const std::size_t n = f.values.size();
    if (!(f.h > 0.0)) throw ArgumentError("maximal_function needs h > 0");
    if (!numerics::all_finite(f.values)) throw ArgumentError("maximal_function input must be finite");
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + std::abs(f.values[i]);
    MaximalInput out{f.origin, f.h, std::vector<double>(n, 0.0)};
    std::vector<double> tail(n + 1);
    for (std::size_t a = 0; a < n; ++a) {
        // tail[b] = max over b' >= b of the mean over cells [a, b')
        tail[n] = (prefix[n] - prefix[a]) / static_cast<double>(n - a);
        for (std::size_t b = n; b-- > a + 1;)
            tail[b] = std::max(tail[b + 1], (prefix[b] - prefix[a]) / static_cast<double>(b - a));
        for (std::size_t i = a; i < n; ++i) out.values[i] = std::max(out.values[i], tail[i + 1]);
    }
    return out;
}

double lp_norm(const MaximalInput& f, double p) {
    if (!(p >= 1.0)) throw ArgumentError("p must be at least 1");
    double s = 0.0;
    for (double x : f.values) s += std::pow(std::abs(x), p);
    return std::pow(f.h * s, 1.0 / p);
}

std::vector<SeriesRow> compute_series(const RunHistory& history, double K) {
    power_weight(0.0, K);
    const auto samples = history.samples();
    const CoefficientModel& model = history.model();
    std::vector<SeriesRow> rows(samples.size());
    parallel_for(samples.size(), [&](std::size_t k) {
        const FieldDerivatives d = field_derivatives(samples[k]);
        SeriesRow& row = rows[k];
        row.t = d.t;
        for (double u : d.u) row.sup_u = std::max(row.sup_u, std::abs(u));
        row.sup_du_in_cone = cone_sup(d, true);
        row.sup_du_out_cone = cone_sup(d, false);
        row.E1 = energy(d, 1, model);
        row.E2 = energy(d, 2, model);
    });
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const double dt = rows[k].t - rows[k - 1].t;
        const double wa = power_weight(rows[k - 1].t, K) * rows[k - 1].sup_du_in_cone;
        const double wb = power_weight(rows[k].t, K) * rows[k].sup_du_in_cone;
        rows[k].W_K_partial = rows[k - 1].W_K_partial + 0.5 * dt * (wa * wa + wb * wb);
        const double da = std::max(rows[k - 1].sup_du_in_cone, rows[k - 1].sup_du_out_cone);
        const double db = std::max(rows[k].sup_du_in_cone, rows[k].sup_du_out_cone);
        rows[k].log_disp_partial = rows[k - 1].log_disp_partial + 0.5 * dt * (da + db);
    }
    return rows;
}

} // namespace qwave::functionals
