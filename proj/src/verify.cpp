#include "qwave/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "json.hpp"

#include "qwave/charts.hpp"
#include "qwave/errors.hpp"
#include "qwave/io.hpp"
#include "qwave/numerics.hpp"
#include "qwave/parallel.hpp"

namespace qwave::verify {

namespace {

using functionals::FieldDerivatives;

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double four_pi = 4.0 * std::numbers::pi;

const std::array<const char*, 14> kBoundIds = {"B18a", "B18b", "B19a", "B19b", "B19c",
                                               "B20a", "B20b", "B21",  "B3",   "A7",
                                               "G5",   "G6",   "G7",   "G12"};

enum Slot { B18a, B18b, B19a, B19b, B19c, B20a, B20b, kPointwise };

double safe_div(double num, double den) {
    if (num == 0.0) return 0.0;
    if (den == 0.0) return inf;
    return num / den;
}

// Running sup that remembers where it happened and whether the late part of
// the horizon beats everything before it.
struct Sup {
    double best = 0.0, t = 0.0, r = 0.0;
    double early = 0.0, late = 0.0;
    std::size_t n = 0;

    void add(double v, double tt, double rr, bool is_late) {
        ++n;
        if (v > best) {
            best = v;
            t = tt;
            r = rr;
        }
        if (is_late) late = std::max(late, v);
        else early = std::max(early, v);
    }
    void merge(const Sup& o) {
        n += o.n;
        if (o.best > best) {
            best = o.best;
            t = o.t;
            r = o.r;
        }
        early = std::max(early, o.early);
        late = std::max(late, o.late);
    }
    bool saturated() const { return late > early; }
};

// Cubic interpolation of node values at r, with the stencil shifted inward
// near both ends.
double interp(const std::vector<double>& f, double h, double r) {
    const std::size_t n = f.size() - 1;
    const double x = std::clamp(r / h, 0.0, static_cast<double>(n));
    auto j = static_cast<std::ptrdiff_t>(x);
    if (j >= static_cast<std::ptrdiff_t>(n)) j = static_cast<std::ptrdiff_t>(n) - 1;
    std::ptrdiff_t j0 = std::clamp<std::ptrdiff_t>(j - 1, 0, static_cast<std::ptrdiff_t>(n) - 3);
    const auto w = numerics::cubic_weights(x - static_cast<double>(j0 + 1));
    double s = 0.0;
    for (std::size_t q = 0; q < 4; ++q) s += w.w[q] * f[static_cast<std::size_t>(j0) + q];
    return s;
}

double r_on(const charts::Characteristic& c, double t, double r_max) {
    if (t <= c.tau_begin()) return c.r.front();
    if (t >= c.tau_end()) return std::min(c.r.back(), r_max);
    return std::min(c.r_at(t), r_max);
}

std::vector<double> lattice_radii(double t, double r0, double r1, double r_max, std::size_t count) {
    std::vector<double> radii;
    const double edge = std::min(charts::ConeLocator::boundary(t), r_max);
    const std::size_t n_in = count / 2, n_out = count - n_in;
    for (std::size_t j = 0; j < n_in; ++j)
        radii.push_back(n_in == 1 ? 0.0 : edge * static_cast<double>(j) / static_cast<double>(n_in - 1));
    auto fill = [&](double lo, double hi, std::size_t m) {
        for (std::size_t j = 0; j < m; ++j)
            radii.push_back(lo + (hi - lo) * static_cast<double>(j + 1) / static_cast<double>(m));
    };
    const double mid = std::max(edge, std::min(r0, r_max));
    const double top = std::max(mid, std::min(r1, r_max));
    if (mid > edge && top > mid) {
        fill(edge, mid, n_out / 2);
        fill(mid, top, n_out - n_out / 2);
    } else if (top > edge) {
        fill(edge, top, n_out);
    }
    return radii;
}

BoundRecord make_record(const std::string& id, const Sup& s, bool with_saturation) {
    BoundRecord rec;
    rec.id = id;
    rec.fitted_constant = s.best;
    rec.sup_t = s.t;
    rec.sup_r = s.r;
    rec.points = s.n;
    rec.saturated = with_saturation && s.saturated();
    return rec;
}

BoundRecord uncomputed(const std::string& id, const std::string& why) {
    BoundRecord rec;
    rec.id = id;
    rec.note = why;
    return rec;
}

// Brute-force maximal function: for each right end b, maximize over left ends.
std::vector<double> maximal_by_right_end(const std::vector<double>& f) {
    const std::size_t n = f.size();
    std::vector<double> out(n, 0.0), best_left(n);
    for (std::size_t b = 1; b <= n; ++b) {
        // best_left[i] = max over a <= i of mean |f| on [a, b)
        double sum = 0.0;
        std::vector<double> means(b);
        for (std::size_t a = b; a-- > 0;) {
            sum += std::abs(f[a]);
            means[a] = sum / static_cast<double>(b - a);
        }
        double run = 0.0;
        for (std::size_t i = 0; i < b; ++i) {
            run = std::max(run, means[i]);
            out[i] = std::max(out[i], run);
        }
    }
    return out;
}

} // namespace

// report ------------------------------------------------------------------------

const BoundRecord& VerificationReport::find(const std::string& id) const {
    for (const auto& b : bounds)
        if (b.id == id) return b;
    throw ArgumentError("unknown bound id " + id);
}

BoundRecord& VerificationReport::find(const std::string& id) {
    for (auto& b : bounds)
        if (b.id == id) return b;
    throw ArgumentError("unknown bound id " + id);
}

bool VerificationReport::any_saturated() const {
    return std::any_of(bounds.begin(), bounds.end(), [](const BoundRecord& b) { return b.saturated; });
}

double fit_growth_exponent(const std::vector<double>& t, const std::vector<double>& E, double t_start) {
    if (t.size() != E.size()) throw ArgumentError("series length mismatch");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_start) continue;
        if (!(E[i] > 0.0)) throw ArgumentError("energies must be positive in the fitting window");
        x.push_back(std::log1p(t[i]));
        y.push_back(std::log(E[i]));
    }
    if (x.size() < 2) throw ArgumentError("fitting window holds fewer than two samples");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw ArgumentError("fitting window has no spread in t");
    return sxy / sxx;
}

double fit_growth_exponent(const std::vector<double>& t, const std::vector<double>& E) {
    if (t.empty()) throw ArgumentError("empty series");
    return fit_growth_exponent(t, E, std::max(1.0, 0.5 * t.back()));
}

VerificationReport verify_theorem21(const RunHistory& history, double K, double eps,
                                    const RunHistory* refined, const VerifyOptions& options) {
    if (!(K > 0.0)) throw ArgumentError("K must be positive");
    if (!(eps >= 0.0)) throw ArgumentError("eps must be nonnegative");
    if (options.radii_per_snapshot < 4) throw ArgumentError("need at least 4 radii per snapshot");

    VerificationReport rep;
    rep.K = K;
    rep.eps = eps;
    rep.model = history.model().label();
    rep.N = history.grid().n;
    rep.h = history.grid().h;
    rep.T = history.t_final();
    rep.regime_ok = std::isinf(K) ? eps == 0.0 : std::pow(K, 4) * eps <= 1.0;
    if (!rep.regime_ok) rep.warnings.push_back("K^4 eps > 1: outside the small-data regime");

    const auto samples = history.samples();
    const double T = rep.T;
    const double late_from = 0.9 * T;
    const double kinv = std::isinf(K) ? 0.0 : 1.0 / K;
    const double K_eps = std::isinf(K) ? inf : K * eps;
    const CoefficientModel& model = history.model();
    const bool traced = history.step_count() >= 2;

    // pointwise bounds on the lattice
    std::vector<std::array<Sup, kPointwise>> per(samples.size());
    if (traced) {
        const double r_max = history.grid().r_max();
        const auto c0 = charts::trace(history, charts::Family::plus, {charts::SeedKind::alpha, 0.0}, {},
                                      options.substeps);
        const auto c1 = charts::trace(history, charts::Family::plus, {charts::SeedKind::gamma, 1.0}, {},
                                      options.substeps);
        parallel_for(samples.size(), [&](std::size_t k) {
            const FieldDerivatives d = functionals::field_derivatives(samples[k]);
            const auto L = functionals::lpm_fields(d, model);
            const double t = d.t, h = d.grid.h;
            const bool late = t >= late_from;
            const double edge = charts::ConeLocator::boundary(t);
            const double r0 = r_on(c0, t, r_max), r1 = r_on(c1, t, r_max);
            auto& acc = per[k];
            for (double r : lattice_radii(t, r0, r1, r_max, options.radii_per_snapshot)) {
                const auto co = charts::invert_coords(history, t, r, options.substeps);
                const double u = std::abs(interp(d.u, h, r));
                const double du = std::max(std::abs(interp(d.ut, h, r)), std::abs(interp(d.ur, h, r)));
                const double lp = std::abs(interp(L.plus_v, h, r));
                const double lm = std::abs(interp(L.minus_v, h, r));
                acc[B18a].add(safe_div(u * std::pow(1.0 + t, 0.6), eps), t, r, late);
                acc[B18b].add(safe_div(u * std::pow(1.0 + t, 1.0 - 2.0 * kinv), K_eps), t, r, late);
                acc[B19a].add(safe_div(lp * (1.0 + co.beta), eps * std::pow(1.0 + t, kinv)), t, r, late);
                if (co.alpha)
                    acc[B19c].add(safe_div(lm * std::pow(1.0 + *co.alpha, 1.0 - kinv), eps), t, r, late);
                else if (*co.gamma <= 1.0)
                    acc[B19b].add(safe_div(lm * std::pow(1.0 + *co.gamma, 1.0 - kinv), eps), t, r, late);
                if (r > std::max(edge, r0) && co.gamma)
                    acc[B20a].add(safe_div(du * (1.0 + t) * std::pow(1.0 + *co.gamma, 1.0 - 2.0 * kinv), K_eps),
                                  t, r, late);
                if (r > edge && r <= r0 && co.alpha)
                    acc[B20b].add(safe_div(du * (1.0 + t) * std::pow(1.0 + *co.alpha, 1.0 - 2.0 * kinv), K_eps),
                                  t, r, late);
            }
        });
    }
    std::array<Sup, kPointwise> total{};
    for (const auto& a : per)
        for (std::size_t b = 0; b < kPointwise; ++b) total[b].merge(a[b]);

    for (std::size_t b = 0; b < kPointwise; ++b) {
        if (!traced && b >= B19a) {
            rep.bounds.push_back(uncomputed(kBoundIds[b], "history has no characteristic coverage"));
            continue;
        }
        if (!traced) {
            // u-only bounds still use node sups when tracing is unavailable
            Sup s;
            for (const auto& lvl : samples) {
                double m = 0.0;
                for (double u : lvl.state.u()) m = std::max(m, std::abs(u));
                const double t = lvl.state.t;
                const double val = b == B18a ? safe_div(m * std::pow(1.0 + t, 0.6), eps)
                                             : safe_div(m * std::pow(1.0 + t, 1.0 - 2.0 * kinv), K_eps);
                s.add(val, t, 0.0, t >= late_from);
            }
            rep.bounds.push_back(make_record(kBoundIds[b], s, true));
            continue;
        }
        BoundRecord rec = make_record(kBoundIds[b], total[b], true);
        if (total[b].n == 0) rec.note = "no lattice points in this region";
        rep.bounds.push_back(rec);
    }

    // integral bounds from the series
    const auto series = functionals::compute_series(history, K);
    {
        BoundRecord rec;
        rec.id = "B21";
        const double W = series.back().W_K_partial;
        rec.fitted_constant = safe_div(std::sqrt(W), std::isinf(K) ? inf : K * K * eps);
        rec.sup_t = series.back().t;
        rec.points = series.size();
        double w_late = 0.0;
        for (const auto& row : series)
            if (row.t <= late_from) w_late = row.W_K_partial;
        rec.saturated = W > 0.0 && (W - w_late) > 0.01 * W;
        rep.bounds.push_back(rec);
    }
    {
        Sup s;
        for (const auto& row : series)
            if (row.t > 0.0) s.add(safe_div(K * row.log_disp_partial, std::log1p(row.t)), row.t, 0.0, row.t >= late_from);
        rep.bounds.push_back(make_record("B3", s, true));
    }
    {
        BoundRecord rec;
        rec.id = "A7";
        std::vector<double> ts, es;
        for (const auto& row : series) {
            ts.push_back(row.t);
            es.push_back(row.E2);
        }
        if (es.front() == 0.0 && std::all_of(es.begin(), es.end(), [](double e) { return e == 0.0; })) {
            rec.fitted_constant = 0.0;
            rec.exponent = 0.0;
            rec.note = "zero energy";
        } else {
            try {
                const double theta = fit_growth_exponent(ts, es);
                rep.theta = theta;
                rec.exponent = theta;
                double A = 0.0;
                for (std::size_t i = 0; i < ts.size(); ++i) {
                    const double v = es[i] / (es.front() * std::pow(1.0 + ts[i], theta));
                    if (v > A) {
                        A = v;
                        rec.sup_t = ts[i];
                    }
                }
                rec.fitted_constant = A;
                rec.points = ts.size();
            } catch (const ArgumentError& e) {
                rec.note = e.what();
            }
        }
        rep.bounds.push_back(rec);
    }

    const double horizon = std::min({options.local_horizon, 1.0, T});
    for (auto& rec : local_theorem71_check(history, horizon).records) rep.bounds.push_back(rec);
    rep.bounds.push_back(uncomputed("G12", "computed by the two-run stability experiment"));

    if (refined) {
        VerifyOptions ro = options;
        const VerificationReport fine = verify_theorem21(*refined, K, eps, nullptr, ro);
        for (auto& rec : rep.bounds) {
            const BoundRecord& other = fine.find(rec.id);
            if (!rec.fitted_constant || !other.fitted_constant) continue;
            const double a = *rec.fitted_constant, b = *other.fitted_constant;
            rec.refinement_ratio = (a == 0.0 && b == 0.0) ? 1.0 : safe_div(a, b);
        }
    }
    return rep;
}

namespace {

nlohmann::json finite_or_null(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
}

nlohmann::json optional_json(const std::optional<double>& x) {
    if (!x) return nullptr;
    return finite_or_null(*x);
}

} // namespace

void write_report_json(std::ostream& os, const VerificationReport& report) {
    nlohmann::json j;
    j["K"] = finite_or_null(report.K);
    j["K_is_infinite"] = std::isinf(report.K);
    j["epsilon"] = report.eps;
    j["regime_ok"] = report.regime_ok;
    j["model"] = report.model;
    j["N"] = report.N;
    j["h"] = report.h;
    j["T"] = report.T;
    j["theta"] = report.theta;
    j["warnings"] = report.warnings;
    j["bounds"] = nlohmann::json::array();
    for (const auto& b : report.bounds) {
        nlohmann::json e;
        e["bound_id"] = b.id;
        e["fitted_constant"] = optional_json(b.fitted_constant);
        e["computed"] = b.fitted_constant.has_value();
        e["sup_t"] = b.sup_t;
        e["sup_r"] = b.sup_r;
        e["saturated"] = b.saturated;
        e["refinement_ratio"] = optional_json(b.refinement_ratio);
        e["exponent"] = optional_json(b.exponent);
        e["points"] = b.points;
        e["note"] = b.note;
        j["bounds"].push_back(e);
    }
    os << j.dump(2) << "\n";
}

void write_report_csv(std::ostream& os, const VerificationReport& report) {
    os << "bound_id,fitted_constant,sup_t,sup_r,saturated,refinement_ratio\n";
    for (const auto& b : report.bounds) {
        os << b.id << "," << io::format_optional(b.fitted_constant) << "," << io::format_double(b.sup_t)
           << "," << io::format_double(b.sup_r) << "," << (b.saturated ? "true" : "false") << ","
           << io::format_optional(b.refinement_ratio) << "\n";
    }
}

// linear Strichartz --------------------------------------------------------------

std::optional<double> StrichartzTable::spread() const {
    if (!max_ratio || !min_ratio || *min_ratio == 0.0) return std::nullopt;
    return *max_ratio / *min_ratio;
}

RadialProfile scaled_bump(double s, double r_max, std::size_t cells_per_support) {
    if (!(s > 0.0) || !(r_max > s)) throw ArgumentError("need 0 < s < r_max");
    const double h = s / static_cast<double>(cells_per_support);
    const auto n = static_cast<std::size_t>(std::ceil(r_max / h));
    return RadialProfile::sample(model::Grid{h, n}, [s](double r) { return model::bump_base(r / s); });
}

StrichartzTable linear_strichartz_check(const std::vector<RadialProfile>& family, double T,
                                        double delta) {
    if (!(delta > 0.0)) throw ArgumentError("delta must be positive");
    if (!(T > 0.0)) throw ArgumentError("T must be positive");
    StrichartzTable table;
    table.rows.resize(family.size());
    parallel_for(family.size(), [&](std::size_t idx) {
        const RadialProfile& phi0 = family[idx];
        StrichartzRow& row = table.rows[idx];
        const double s = phi0.support_radius();
        row.support = s;
        if (s == 0.0) return;
        const double h = phi0.grid().h;
        const double span = std::ceil(s / h) * h;
        const auto cells = static_cast<std::size_t>(std::llround(span / h));
        const double den2 = numerics::gauss_composite(
            [&](double x) {
                const double d1 = phi0.deriv(x), d2 = x * phi0.deriv2(x);
                return d1 * d1 + d2 * d2;
            },
            0.0, span, cells);
        row.denominator = std::sqrt(den2);

        const auto nt = static_cast<std::size_t>(std::ceil(T / (s / 100.0)));
        const double dt = T / static_cast<double>(nt);
        const std::size_t nr = 200;
        const double cut = 8.0 / 3.0;
        double all = 0.0, cone = 0.0, wcone = 0.0, tail = 0.0, wtail = 0.0;
        double prev_all = 0.0, prev_cone = 0.0, prev_w = 0.0;
        for (std::size_t j = 0; j <= nt; ++j) {
            const double t = dt * static_cast<double>(j);
            const double lo = std::max(0.0, t - s), hi = t + s;
            const double edge = charts::ConeLocator::boundary(t);
            double sup_all = 0.0, sup_in = 0.0;
            for (std::size_t m = 0; m <= nr; ++m) {
                const double r = lo + (hi - lo) * static_cast<double>(m) / static_cast<double>(nr);
                const double v = std::abs(evolve::dalembert_reference(phi0, t, r).phi_t);
                sup_all = std::max(sup_all, v);
                if (r <= edge) sup_in = std::max(sup_in, v);
            }
            if (lo <= edge && edge < hi) {
                const double v = std::abs(evolve::dalembert_reference(phi0, t, edge).phi_t);
                sup_in = std::max(sup_in, v);
            }
            const double cur_all = sup_all * sup_all, cur_cone = sup_in * sup_in;
            const double cur_w = std::pow(1.0 + t, 2.0 * delta) * cur_cone;
            if (j > 0) {
                all += 0.5 * dt * (prev_all + cur_all);
                cone += 0.5 * dt * (prev_cone + cur_cone);
                wcone += 0.5 * dt * (prev_w + cur_w);
                if (t - dt > cut) {
                    tail += 0.5 * dt * (prev_cone + cur_cone);
                    wtail += 0.5 * dt * (prev_w + cur_w);
                }
            }
            prev_all = cur_all;
            prev_cone = cur_cone;
            prev_w = cur_w;
        }
        row.numerator = std::sqrt(all);
        row.in_cone = std::sqrt(cone);
        row.in_cone_weighted = std::sqrt(wcone);
        row.in_cone_tail = std::sqrt(tail);
        row.in_cone_weighted_tail = std::sqrt(wtail);
        if (row.denominator > 0.0) row.ratio = row.numerator / row.denominator;
    });
    for (const auto& row : table.rows) {
        if (!row.ratio) continue;
        table.max_ratio = table.max_ratio ? std::max(*table.max_ratio, *row.ratio) : *row.ratio;
        table.min_ratio = table.min_ratio ? std::min(*table.min_ratio, *row.ratio) : *row.ratio;
    }
    return table;
}

// stability -----------------------------------------------------------------------

std::pair<RadialProfile, RadialProfile> HomotopyFamily::member(double lambda) const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ArgumentError("lambda must lie in [0, 1]");
    if (lambda == 0.0) return {f1, g1};
    if (lambda == 1.0) return {f2, g2};
    return {f1.scaled(1.0 - lambda) + f2.scaled(lambda), g1.scaled(1.0 - lambda) + g2.scaled(lambda)};
}

GapReading level_gap(const evolve::ArchivedLevel& a, const evolve::ArchivedLevel& b) {
    if (!(a.state.grid == b.state.grid)) throw ArgumentError("runs live on different grids");
    const FieldDerivatives da = functionals::field_derivatives(a);
    const FieldDerivatives db = functionals::field_derivatives(b);
    const std::size_t m = da.u.size();
    std::vector<double> grad(m), vel(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double r = da.grid.r(i);
        const double gr = da.ur[i] - db.ur[i], gt = da.ut[i] - db.ut[i];
        grad[i] = gr * gr * r * r;
        vel[i] = gt * gt * r * r;
    }
    GapReading g;
    g.t = a.state.t;
    g.grad_l2 = std::sqrt(four_pi * numerics::trapezoid_uniform(grad, da.grid.h));
    g.ut_l2 = std::sqrt(four_pi * numerics::trapezoid_uniform(vel, da.grid.h));
    g.gap = g.grad_l2 + g.ut_l2;
    return g;
}

GapReading stability_gap(const RunHistory& run1, const RunHistory& run2, double t) {
    if (!(run1.grid() == run2.grid())) throw ArgumentError("runs live on different grids");
    const auto& a = run1.nearest_sample(t);
    const auto& b = run2.nearest_sample(t);
    if (std::abs(a.state.t - b.state.t) > 1e-9 * (1.0 + std::abs(t)))
        throw ArgumentError("runs do not share sample times");
    return level_gap(a, b);
}

StabilityResult stability_check(const HomotopyFamily& family, const CoefficientModel& model,
                                const RunOptions& options) {
    StabilityResult out;
    const auto [f1, g1] = family.member(0.0);
    const auto [f2, g2] = family.member(1.0);
    const RunHistory run1 = evolve::run(f1, g1, model, options);
    const auto samples1 = run1.samples();
    const evolve::WaveState s1 = evolve::WaveState::from_data(f1, g1);
    const evolve::WaveState s2 = evolve::WaveState::from_data(f2, g2);
    out.kappa = level_gap(evolve::ArchivedLevel{s1, {}, {}, 0, 0}, evolve::ArchivedLevel{s2, {}, {}, 0, 0}).gap;

    std::optional<RunHistory> run2;
    if (out.kappa > 0.0) {
        run2.emplace(evolve::run(f2, g2, model, options));
        for (const auto& lvl : samples1) {
            GapReading g = stability_gap(run1, *run2, lvl.state.t);
            out.gaps.push_back(g);
            const double ratio = g.gap / out.kappa;
            if (ratio > out.sup_ratio) {
                out.sup_ratio = ratio;
                out.sup_ratio_t = g.t;
            }
        }
    } else {
        for (const auto& lvl : samples1) out.gaps.push_back(GapReading{lvl.state.t, 0.0, 0.0, 0.0});
    }

    for (double lambda : family.lambdas) {
        LambdaRow row;
        row.lambda = lambda;
        std::optional<RunHistory> own;
        const RunHistory* h = &run1;
        if (lambda == 1.0 && run2) {
            h = &*run2;
        } else if (lambda != 0.0) {
            const auto [f, g] = family.member(lambda);
            own.emplace(evolve::run(f, g, model, options));
            h = &*own;
        }
        for (double s : h->step_sup_u()) row.sup_u = std::max(row.sup_u, s);
        const auto& last = h->samples().back();
        row.final_E1 = functionals::energy(functionals::field_derivatives(last), 1, model);
        if (lambda > 0.0 && out.kappa > 0.0)
            row.gap_ratio = level_gap(last, samples1.back()).gap / (lambda * out.kappa);
        out.lambda_rows.push_back(row);
    }
    return out;
}

// short-time bounds ------------------------------------------------------------------

LocalReport local_theorem71_check(const RunHistory& history, double T_small) {
    if (!(T_small > 0.0 && T_small <= 1.0)) throw ArgumentError("T_small must lie in (0, 1]");
    LocalReport rep;
    rep.horizon = T_small;
    const RadialProfile& f = history.initial_displacement();
    double f_inf = 0.0;
    for (double x : f.values()) f_inf = std::max(f_inf, std::abs(x));
    rep.two_f_inf = 2.0 * f_inf;
    const double data_norm = model::h2h1_norm(f, history.initial_velocity());

    Sup g5, g6;
    std::vector<double> ts, du2;
    for (const auto& lvl : history.samples()) {
        const double t = lvl.state.t;
        if (t > T_small * (1.0 + 1e-12)) break;
        const FieldDerivatives d = functionals::field_derivatives(lvl);
        const auto L = functionals::lpm_fields(d, history.model());
        double su = 0.0, lp = 0.0, lm = 0.0, dm = 0.0;
        for (std::size_t i = 0; i < d.u.size(); ++i) {
            su = std::max(su, std::abs(d.u[i]));
            lp = std::max(lp, std::abs(L.plus_v[i]));
            lm = std::max(lm, std::abs(L.minus_v[i]));
            dm = std::max({dm, std::abs(d.ut[i]), std::abs(d.ur[i])});
        }
        rep.sup_u = std::max(rep.sup_u, su);
        rep.sup_lplus_v = std::max(rep.sup_lplus_v, lp);
        rep.sup_lminus_v = std::max(rep.sup_lminus_v, lm);
        g5.add(safe_div(su, f_inf), t, 0.0, false);
        g6.add(safe_div(std::max(lp, lm), data_norm), t, 0.0, false);
        ts.push_back(t);
        du2.push_back(dm * dm);
    }
    rep.du_squared_integral = numerics::trapezoid(ts, du2);
    rep.doubling_holds = rep.sup_u <= rep.two_f_inf;

    BoundRecord r5 = make_record("G5", g5, false);
    r5.note = "sup|u| / ||f||_inf over t <= horizon (doubling bound: 2)";
    BoundRecord r6 = make_record("G6", g6, false);
    r6.note = "max sup|L+-v| / data norm";
    BoundRecord r7;
    r7.id = "G7";
    r7.fitted_constant = safe_div(std::sqrt(rep.du_squared_integral), data_norm);
    r7.sup_t = ts.empty() ? 0.0 : ts.back();
    r7.points = ts.size();
    r7.note = "(int ||du||_inf^2)^(1/2) / data norm";
    rep.records = {r5, r6, r7};
    return rep;
}

// maximal operator self-test -----------------------------------------------------------

std::vector<MaximalCase> maximal_selftest(unsigned seed, std::size_t N, std::size_t cases) {
    constexpr std::size_t breaks = 64;
    if (N == 0 || N % breaks != 0) throw ArgumentError("N must be a positive multiple of 64");
    if (cases == 0) throw ArgumentError("need at least one case");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pieces(1, 16), cut(1, breaks - 1), level(1, 64), sign(0, 1);

    std::vector<MaximalCase> rows;
    double c_coarse = 0.0, c_fine = 0.0, sup_ratio = 0.0;
    bool all_pass = true;
    for (std::size_t c = 0; c < cases; ++c) {
        const int m = pieces(rng);
        std::vector<int> cuts;
        for (int i = 1; i < m; ++i) cuts.push_back(cut(rng));
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        cuts.push_back(static_cast<int>(breaks));
        std::vector<double> vals;
        for (std::size_t i = 0; i < cuts.size(); ++i)
            vals.push_back((sign(rng) ? -1.0 : 1.0) * static_cast<double>(level(rng)) / 8.0);

        auto sample = [&](std::size_t n) {
            functionals::MaximalInput f{0.0, 1.0 / static_cast<double>(n), std::vector<double>(n)};
            const std::size_t per = n / breaks;
            std::size_t piece = 0;
            for (std::size_t i = 0; i < n; ++i) {
                while (i / per >= static_cast<std::size_t>(cuts[piece])) ++piece;
                f.values[i] = vals[piece];
            }
            return f;
        };
        const auto f = sample(N);
        const auto Mf = functionals::maximal_function(f);
        const bool equal = Mf.values == maximal_by_right_end(f.values);
        double f_inf = 0.0, m_inf = 0.0;
        for (double x : f.values) f_inf = std::max(f_inf, std::abs(x));
        for (double x : Mf.values) m_inf = std::max(m_inf, x);
        const bool sup_ok = m_inf <= f_inf;
        const double ratio = functionals::lp_norm(Mf, 2.0) / functionals::lp_norm(f, 2.0);
        rows.push_back({"oracle_" + std::to_string(c), 2.0, ratio, equal && sup_ok});
        all_pass = all_pass && equal && sup_ok;
        c_coarse = std::max(c_coarse, ratio);
        sup_ratio = std::max(sup_ratio, m_inf / f_inf);

        const auto f2 = sample(2 * N);
        const auto Mf2 = functionals::maximal_function(f2);
        c_fine = std::max(c_fine, functionals::lp_norm(Mf2, 2.0) / functionals::lp_norm(f2, 2.0));
    }
    rows.push_back({"sup_bound", inf, sup_ratio, sup_ratio <= 1.0});
    rows.push_back({"strong22_N", 2.0, c_coarse, all_pass});
    rows.push_back({"strong22_2N", 2.0, c_fine, std::abs(c_fine / c_coarse - 1.0) <= 0.1});
    return rows;
}

void write_maximal_csv(std::ostream& os, const std::vector<MaximalCase>& rows) {
    os << "case,p,norm_ratio,pass\n";
    for (const auto& r : rows)
        os << r.name << "," << io::format_double(r.p) << "," << io::format_double(r.norm_ratio) << ","
           << (r.pass ? "true" : "false") << "\n";
}

} // namespace qwave::verify
