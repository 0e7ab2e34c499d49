#include "qwave/charts.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "qwave/errors.hpp"
#include "qwave/io.hpp"
#include "qwave/numerics.hpp"

namespace qwave::charts {

namespace {

struct Path {
    std::vector<double> tau, r, slope;
    bool hit_zero = false;
    bool hit_target = false;
};

double hermite(double s, double ra, double rb, double da, double db, double span) {
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * ra + (s3 - 2 * s2 + s) * span * da + (-2 * s3 + 3 * s2) * rb +
           (s3 - s2) * span * db;
}

// Parameter s in (0, 1] where the Hermite segment crosses `level`.
double crossing(double ra, double rb, double da, double db, double span, double level) {
    double lo = 0.0, hi = 1.0;
    const bool up = rb > ra;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double val = hermite(mid, ra, rb, da, db, span);
        if ((val < level) == up) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

class Tracer {
public:
    Tracer(const RunHistory& h, double sign, int substeps) : h_(h), sign_(sign), sub_(substeps) {
        if (substeps < 1) throw ArgumentError("substeps must be at least 1");
        if (h.step_count() < 2) throw ArgumentError("history has no per-step record");
    }

    double speed(std::size_t k, double tau, double r) const {
        const auto ts = h_.step_times();
        const double th = std::clamp((tau - ts[k]) / (ts[k + 1] - ts[k]), 0.0, 1.0);
        return sign_ * ((1.0 - th) * h_.a_level(k, r) + th * h_.a_level(k + 1, r));
    }

    // Integrates from (tau0, r0) to tau_end. Stops early where r crosses 0
    // downward (if stop_zero) or crosses `target` (if given).
    Path integrate(double tau0, double r0, double tau_end, bool stop_zero,
                   std::optional<double> target, bool stop_edge = true) const {
        const auto ts = h_.step_times();
        const double r_max = h_.grid().r_max();
        Path p;
        std::size_t k0 = h_.level_index(tau0);
        p.tau.push_back(tau0);
        p.r.push_back(r0);
        p.slope.push_back(speed(k0, tau0, r0));
        if (stop_zero && r0 <= 0.0 && sign_ * (tau_end - tau0) < 0.0) {
            p.hit_zero = true;
            return p;
        }
        const bool forward = tau_end > tau0;
        double tau = tau0, r = r0;
        while (forward ? tau < tau_end : tau > tau_end) {
            const double eps = 1e-12 * (1.0 + std::abs(tau));
            double next;
            std::size_t k;
            if (forward) {
                auto it = std::upper_bound(ts.begin(), ts.end(), tau + eps);
                next = it == ts.end() ? tau_end : std::min(*it, tau_end);
                std::size_t idx = static_cast<std::size_t>(it - ts.begin());
                k = idx == 0 ? 0 : std::min(idx - 1, ts.size() - 2);
            } else {
                auto it = std::lower_bound(ts.begin(), ts.end(), tau - eps);
                std::size_t idx = static_cast<std::size_t>(it - ts.begin());
                if (idx == 0) {
                    next = tau_end;
                    k = 0;
                } else {
                    next = std::max(ts[idx - 1], tau_end);
                    k = std::min(idx - 1, ts.size() - 2);
                }
            }
            const double span = (next - tau) / static_cast<double>(sub_);
            for (int s = 0; s < sub_; ++s) {
                const double ta = tau, ra = r;
                const double k1 = speed(k, ta, ra);
                const double k2 = speed(k, ta + 0.5 * span, ra + 0.5 * span * k1);
                const double k3 = speed(k, ta + 0.5 * span, ra + 0.5 * span * k2);
                const double tb = s + 1 == sub_ ? next : ta + span;
                const double k4 = speed(k, tb, ra + span * k3);
                const double rb = ra + span * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
                const double db = speed(k, tb, rb);
                const double da = p.slope.back();
                const double seg = tb - ta;
                auto finish = [&](double level) {
                    const double sc = crossing(ra, rb, da, db, seg, level);
                    const double tc = ta + sc * seg;
                    p.tau.push_back(tc);
                    p.r.push_back(level);
                    p.slope.push_back(speed(k, tc, level));
                };
                if (stop_zero && rb < 0.0) {
                    finish(0.0);
                    p.hit_zero = true;
                    return p;
                }
                if (target && (ra - *target) * (rb - *target) <= 0.0 && ra != *target) {
                    finish(*target);
                    p.hit_target = true;
                    return p;
                }
                if (stop_edge && rb > r_max) {
                    finish(r_max);
                    p.hit_target = true;
                    return p;
                }
                tau = tb;
                r = rb;
                p.tau.push_back(tau);
                p.r.push_back(r);
                p.slope.push_back(db);
            }
        }
        return p;
    }

private:
    const RunHistory& h_;
    double sign_;
    int sub_;
};

void check_point(const RunHistory& h, double t, double r) {
    if (!(t >= 0.0) || t > h.covered_time() + 1e-12 || !(r >= 0.0) || r > h.grid().r_max())
        throw ArgumentError("point outside the covered space-time region");
}

// int a_r along a sampled path between its first and last sample
double integrate_a_r(const RunHistory& h, const Characteristic& c, double lo, double hi) {
    if (hi == lo) return 0.0;
    const double sgn = hi > lo ? 1.0 : -1.0;
    const double a = std::min(lo, hi), b = std::max(lo, hi);
    double total = 0.0;
    const auto& ts = c.tau;
    const bool ascending = ts.back() >= ts.front();
    // walk sample intervals overlapping [a, b]
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        double x0 = ts[i], x1 = ts[i + 1];
        if (!ascending) std::swap(x0, x1);
        const double l = std::max(x0, a), u = std::min(x1, b);
        if (u <= l) continue;
        total += numerics::GaussLegendre8::integrate(
            [&](double s) { return h.a_r_at(s, c.r_at(s)); }, l, u);
    }
    return sgn * total;
}

Characteristic from_path(Family f, Seed seed, Path&& p) {
    Characteristic c;
    c.family = f;
    c.seed = seed;
    c.tau = std::move(p.tau);
    c.r = std::move(p.r);
    c.slope = std::move(p.slope);
    return c;
}

} // namespace

std::string to_string(Family f) { return f == Family::plus ? "plus" : "minus"; }

std::string to_string(SeedKind k) {
    switch (k) {
    case SeedKind::alpha: return "alpha";
    case SeedKind::beta: return "beta";
    case SeedKind::gamma: return "gamma";
    }
    return "beta";
}

double Characteristic::r_at(double t) const {
    if (tau.empty()) throw ArgumentError("empty characteristic");
    if (tau.size() == 1) return r.front();
    const bool ascending = tau.back() >= tau.front();
    const double lo = std::min(tau.front(), tau.back()), hi = std::max(tau.front(), tau.back());
    if (t < lo - 1e-12 * (1 + std::abs(lo)) || t > hi + 1e-12 * (1 + std::abs(hi)))
        throw ArgumentError("tau outside the characteristic's range");
    std::size_t i;
    if (ascending) {
        auto it = std::upper_bound(tau.begin(), tau.end(), t);
        i = it == tau.begin() ? 0 : static_cast<std::size_t>(it - tau.begin()) - 1;
    } else {
        auto it = std::upper_bound(tau.begin(), tau.end(), t, std::greater<>());
        i = it == tau.begin() ? 0 : static_cast<std::size_t>(it - tau.begin()) - 1;
    }
    i = std::min(i, tau.size() - 2);
    const double span = tau[i + 1] - tau[i];
    if (span == 0.0) return r[i];
    const double s = std::clamp((t - tau[i]) / span, 0.0, 1.0);
    return hermite(s, r[i], r[i + 1], slope[i], slope[i + 1], span);
}

Characteristic trace(const RunHistory& history, Family family, Seed seed, TraceLimit limit,
                     int substeps) {
    double tau0, r0;
    if (seed.kind == SeedKind::alpha) {
        if (family == Family::minus) throw ArgumentError("minus characteristics are seeded on the r-axis");
        tau0 = seed.value;
        r0 = 0.0;
    } else {
        tau0 = 0.0;
        r0 = seed.value;
    }
    check_point(history, tau0, r0);
    const double until = limit.until_time.value_or(history.t_final());
    if (until > history.covered_time() + 1e-12) throw ArgumentError("limit beyond covered time");
    const double sign = family == Family::plus ? 1.0 : -1.0;
    Tracer tr(history, sign, substeps);
    Path p = tr.integrate(tau0, r0, std::max(until, tau0), family == Family::minus, limit.until_radius);
    return from_path(family, seed, std::move(p));
}

double beta_of(const RunHistory& history, double t, double r, int substeps) {
    check_point(history, t, r);
    Tracer minus(history, -1.0, substeps);
    // beyond r_max the solution vanishes and the record holds a(0)
    Path p = minus.integrate(t, r, 0.0, false, std::nullopt, false);
    return p.r.back();
}

Coordinates invert_coords(const RunHistory& history, double t, double r, int substeps) {
    Coordinates out;
    out.beta = beta_of(history, t, r, substeps);
    if (r <= 0.0) {
        out.alpha = t;
        return out;
    }
    Tracer plus(history, 1.0, substeps);
    Path p = plus.integrate(t, r, 0.0, true, std::nullopt);
    if (p.hit_zero) out.alpha = std::max(0.0, p.tau.back());
    else out.gamma = p.r.back();
    return out;
}

double jacobian_factor(const RunHistory& history, const Characteristic& c, double tau) {
    const double lo = std::min(c.tau_begin(), c.tau_end()), hi = std::max(c.tau_begin(), c.tau_end());
    if (tau < lo - 1e-12 || tau > hi + 1e-12) throw ArgumentError("tau outside the characteristic's range");
    const double start = c.tau.front();
    const double integral = integrate_a_r(history, c, start, tau);
    if (c.family == Family::minus) return std::exp(-integral);
    if (c.seed.kind == SeedKind::alpha) return -history.a_at(c.seed.value, 0.0) * std::exp(integral);
    return std::exp(integral);
}

std::vector<DeviationRow> deviation_report(const RunHistory& history,
                                           std::span<const std::pair<double, double>> points,
                                           double eps, double K, int substeps) {
    std::vector<DeviationRow> rows;
    rows.reserve(points.size());
    for (auto [t, r] : points) {
        DeviationRow row;
        row.t = t;
        row.r = r;
        row.coords = invert_coords(history, t, r, substeps);
        row.dev_beta = std::abs(t + r - row.coords.beta);
        row.dev_other = row.coords.alpha ? std::abs(t - r - *row.coords.alpha)
                                         : std::abs(r - t - *row.coords.gamma);
        row.bound_time = eps * t;
        row.bound_k = std::isinf(K) ? eps : eps * K * K * std::pow(1.0 + t, 2.0 / K);
        row.bound_beta = eps * std::max(0.0, row.coords.beta - r);
        const double dev = std::max(row.dev_beta, row.dev_other);
        const double bound = std::max({row.bound_time, row.bound_k, row.bound_beta});
        row.implied_c = dev == 0.0 ? 0.0 : (bound > 0.0 ? dev / bound : INFINITY);
        rows.push_back(row);
    }
    return rows;
}

double accumulation_integral(const RunHistory& history, const Characteristic& c, double p,
                             double lo, double hi, int substeps) {
    if (!(hi > lo)) return 0.0;
    const double cl = std::min(c.tau_begin(), c.tau_end()), ch = std::max(c.tau_begin(), c.tau_end());
    if (lo < cl - 1e-12 || hi > ch + 1e-12) throw ArgumentError("range outside the characteristic");
    auto coord = [&](double tau) {
        const double r = std::max(0.0, c.r_at(tau));
        if (c.family == Family::plus) return beta_of(history, tau, r, substeps);
        const Coordinates co = invert_coords(history, tau, r, substeps);
        return co.alpha ? *co.alpha : *co.gamma;
    };
    const auto panels = static_cast<std::size_t>(std::max(4.0, std::ceil(2.0 * (hi - lo))));
    return numerics::gauss_composite([&](double tau) { return std::pow(1.0 + coord(tau), -p); }, lo,
                                     hi, panels);
}

double beta_slope(const RunHistory& history, double t, int substeps) {
    const auto sizes = history.step_sizes();
    if (sizes.empty()) throw ArgumentError("history has no per-step record");
    const std::size_t k = std::min(history.level_index(t), sizes.size() - 1);
    const double delta = 4.0 * sizes[k];
    if (t - delta < 0.0 || t + delta > history.covered_time())
        throw ArgumentError("t +- delta outside the covered range");
    return (beta_of(history, t + delta, 0.0, substeps) - beta_of(history, t - delta, 0.0, substeps)) /
           (2.0 * delta);
}

double beta_slope_reference(const RunHistory& history, double t, int substeps) {
    check_point(history, t, 0.0);
    Tracer minus(history, -1.0, substeps);
    Path p = minus.integrate(t, 0.0, 0.0, false, std::nullopt, false);
    Characteristic c = from_path(Family::minus, Seed{SeedKind::beta, p.r.back()}, std::move(p));
    const double integral = integrate_a_r(history, c, 0.0, t);
    return history.a_at(t, 0.0) * std::exp(integral);
}

void write_characteristics_csv(std::ostream& os, std::span<const Characteristic> chars) {
    os << "family,seed_kind,seed,tau,r\n";
    for (const auto& c : chars) {
        const std::string head = to_string(c.family) + "," + to_string(c.seed.kind) + "," +
                                 io::format_double(c.seed.value) + ",";
        for (std::size_t i = 0; i < c.tau.size(); ++i)
            os << head << io::format_double(c.tau[i]) << "," << io::format_double(c.r[i]) << "\n";
    }
}

} // namespace qwave::charts
