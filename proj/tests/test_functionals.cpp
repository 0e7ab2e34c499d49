#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "qwave/errors.hpp"
#include "qwave/functionals.hpp"

using namespace qwave;
using namespace qwave::functionals;
using evolve::ArchivedLevel;
using evolve::RunOptions;
using evolve::WaveState;
using model::BumpKind;
using model::RadialProfile;
using boost::math::quadrature::gauss_kronrod;

namespace {

constexpr double pi = std::numbers::pi;
const auto linear = CoefficientModel::linear();
const auto quasi = CoefficientModel::one_plus_u(1.0, 0.1);

ArchivedLevel level_of(const RadialProfile& f, const RadialProfile& g) {
    return ArchivedLevel{WaveState::from_data(f, g), {}, {}, 0.0, 0.0};
}

RunHistory linear_run(std::size_t N = 4096) {
    const auto grid = Grid::over(16.0, N);
    const auto [f, g] = model::make_bump(0.1, BumpKind::displacement, grid);
    RunOptions o;
    o.T = 10.0;
    o.sample_dt = 0.25;
    return evolve::run(f, g, linear, o);
}

const RunHistory& quasi_run() {
    static const RunHistory h = [] {
        const auto grid = Grid::over(32.0, 2048);
        const auto [f, g] = model::make_bump(0.05, BumpKind::mixed, grid);
        RunOptions o;
        o.T = 10.0;
        o.sample_dt = 0.5;
        return evolve::run(f, g, quasi, o);
    }();
    return h;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// direct definition: max over cell ranges [a, b) containing i of the mean of |f|
std::vector<double> brute_maximal(const std::vector<double>& f) {
    const std::size_t n = f.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a <= i; ++a) {
            double sum = 0.0;
            for (std::size_t j = a; j < i; ++j) sum += std::abs(f[j]);
            for (std::size_t b = i + 1; b <= n; ++b) {
                sum += std::abs(f[b - 1]);
                out[i] = std::max(out[i], sum / static_cast<double>(b - a));
            }
        }
    }
    return out;
}

} // namespace

TEST_CASE("field derivatives are consistent with v") {
    const auto& h = quasi_run();
    const auto d = field_derivatives(h.nearest_sample(5.0));
    for (std::size_t i = 1; i < d.u.size(); ++i) CHECK(d.grid.r(i) * d.u[i] == doctest::Approx(d.v[i]).epsilon(1e-13));
    CHECK(d.ur[0] == 0.0);
    for (const auto* f : {&d.u, &d.ut, &d.ur, &d.urr, &d.utr})
        for (double x : *f) CHECK(std::isfinite(x));
}

TEST_CASE("L and M fields") {
    const auto grid = Grid::over(8.0, 512);
    const auto [f, g] = model::make_bump(0.05, BumpKind::displacement, grid);
    const auto d0 = field_derivatives(level_of(f, g));
    const auto L = lpm_fields(d0, quasi);
    const auto M = mpm_fields(d0, quasi);
    for (std::size_t i = 0; i < d0.u.size(); ++i) {
        CHECK(L.plus_v[i] == -L.minus_v[i]);
        CHECK(M.plus_u[i] == -M.minus_u[i]);
    }

    const auto& h = quasi_run();
    const auto d = field_derivatives(h.nearest_sample(4.0));
    const auto Ll = lpm_fields(d, linear);
    const auto Ml = mpm_fields(d, linear);
    for (std::size_t i = 0; i < d.u.size(); ++i) {
        const double vr = d.u[i] + d.grid.r(i) * d.ur[i];
        CHECK(Ll.plus_v[i] == doctest::Approx(d.w[i] + vr).epsilon(1e-14));
        CHECK(Ll.minus_u[i] == doctest::Approx(d.ut[i] - d.ur[i]).epsilon(1e-14));
        CHECK(Ml.plus_v[i] == Ll.plus_v[i]);
        CHECK(Ml.minus_u[i] == Ll.minus_u[i]);
    }

    const auto Lq = lpm_fields(d, quasi);
    const auto Mq = mpm_fields(d, quasi);
    for (std::size_t i = 0; i < d.u.size(); i += 7) {
        const double a = quasi(d.u[i]);
        CHECK(Lq.plus_u[i] + Lq.minus_u[i] == doctest::Approx(2.0 / std::sqrt(a) * d.ut[i]).epsilon(1e-12));
        CHECK(Mq.plus_u[i] + Mq.minus_u[i] == doctest::Approx(2.0 / a * d.ut[i]).epsilon(1e-12));
    }

    const std::size_t i = 300;
    const long double a = 1.0L + static_cast<long double>(d.u[i]);
    const long double sa = std::sqrt(a);
    const long double vr = static_cast<long double>(d.u[i]) +
                           static_cast<long double>(d.grid.r(i)) * static_cast<long double>(d.ur[i]);
    const long double spot = static_cast<long double>(d.w[i]) / sa + sa * vr;
    CHECK(Lq.plus_v[i] == doctest::Approx(static_cast<double>(spot)).epsilon(1e-10));

    auto bad = d;
    bad.u[5] = -0.95;
    CHECK_THROWS_AS(lpm_fields(bad, quasi), CoefficientDomainExceeded);
    CHECK_THROWS_AS(mpm_fields(bad, quasi), CoefficientDomainExceeded);
}

TEST_CASE("energies") {
    const auto grid = Grid::over(2.0, 4096);
    const auto z = RadialProfile::zero(grid);
    const auto dz = field_derivatives(level_of(z, z));
    CHECK(energy(dz, 1, quasi) == 0.0);
    CHECK(energy(dz, 2, quasi) == 0.0);
    CHECK_THROWS_AS(energy(dz, 3, quasi), ArgumentError);

    const double c = model::bump_scale(0.01, BumpKind::displacement, grid);
    const auto f = RadialProfile::sample(grid, [c](double r) { return c * model::bump_base(r); });
    const auto d = field_derivatives(level_of(f, z));
    auto F = [c](double r) { return c * std::pow(1 - r * r, 4); };
    auto F1 = [c](double r) { return -8 * c * r * std::pow(1 - r * r, 3); };
    auto F2 = [c](double r) { return c * (-8 * std::pow(1 - r * r, 3) + 48 * r * r * std::pow(1 - r * r, 2)); };
    auto integrand = [&](double r) {
        const double a = 1 + F(r);
        const double lap = r == 0.0 ? 3 * F2(0.0) : F2(r) + 2 * F1(r) / r;
        const double utt = a * a * lap;
        const double e1 = a * a * F1(r) * F1(r) * r * r;
        const double e2 = utt * utt * r * r + a * a * (F2(r) * F2(r) * r * r + 2 * F1(r) * F1(r));
        return 0.5 * 4 * pi * (e1 + e2);
    };
    const double oracle = gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 15, 1e-14);
    const double E2 = energy(d, 2, quasi);
    CHECK(E2 == doctest::Approx(oracle).epsilon(1e-3));
    CHECK(energy(d, 1, quasi) <= E2);
    CHECK(energy(d, 1, quasi) >= 0.0);
}

TEST_CASE("linear energy is conserved") {
    const auto h = linear_run();
    const auto series = compute_series(h, 3.0);
    const double E0 = series.front().E1;
    REQUIRE(E0 > 0.0);
    for (const auto& row : series) {
        CHECK(std::abs(row.E1 - E0) / E0 <= 1e-4);
        CHECK(row.E1 <= row.E2);
    }
}

TEST_CASE("cone sup norms") {
    const auto grid = Grid::over(8.0, 1024);
    const auto z = RadialProfile::zero(grid);
    CHECK(cone_sup(field_derivatives(level_of(z, z)), true) == 0.0);
    CHECK(cone_sup(field_derivatives(level_of(z, z)), false) == 0.0);

    const auto [f, g] = model::make_bump(0.1, BumpKind::mixed, grid);
    const auto d = field_derivatives(level_of(f, g));
    double expect = 0.0;
    for (std::size_t i = 0; grid.r(i) <= 1.0; ++i) expect = std::max({expect, std::abs(d.ut[i]), std::abs(d.ur[i])});
    CHECK(cone_sup(d, true) == expect);
    CHECK(cone_sup(d, false) == 0.0);

    const auto h = linear_run(2048);
    const auto d5 = field_derivatives(h.nearest_sample(5.0));
    CHECK(cone_sup(d5, true) <= 1e-8);
    CHECK(cone_sup(d5, false) > 1e-3);
    CHECK(vectorfield_energy(d5, linear).interior_second <= 1e-12);
}

TEST_CASE("weighted Strichartz and dispersion integrals on synthetic series") {
    const double T = 10.0;
    std::vector<double> t, s;
    for (int k = 0; k <= 20000; ++k) {
        t.push_back(T * k / 20000.0);
        s.push_back(1.0 / (1.0 + t.back()));
    }
    CHECK(weighted_strichartz(t, s, INFINITY, T) == doctest::Approx(T).epsilon(1e-12));
    CHECK(weighted_strichartz(t, s, 8.0, T) == doctest::Approx(std::log(1.0 + T)).epsilon(1e-7));
    CHECK(weighted_strichartz(t, s, 8.0, 5.0) == doctest::Approx(std::log(6.0)).epsilon(1e-7));
    CHECK(dispersion_integral(t, s, T) == doctest::Approx(std::log(1.0 + T)).epsilon(1e-7));
    CHECK_THROWS_AS(weighted_strichartz(t, s, 0.0, T), ArgumentError);
    CHECK_THROWS_AS(weighted_strichartz(t, std::vector<double>(3), 8.0, T), ArgumentError);
}

TEST_CASE("functionals of a zero run vanish") {
    const auto grid = Grid::over(16.0, 256);
    const auto z = RadialProfile::zero(grid);
    RunOptions o;
    o.T = 5.0;
    o.sample_dt = 0.5;
    const auto h = evolve::run(z, z, quasi, o);
    CHECK(weighted_strichartz(h, 3.0, 5.0) == 0.0);
    CHECK(dispersion_integral(h, 5.0) == 0.0);
    CHECK(dispersion_integral_squared(h, 5.0) == 0.0);
    for (const auto& row : compute_series(h, 3.0)) {
        CHECK(row.sup_u == 0.0);
        CHECK(row.E2 == 0.0);
        CHECK(row.W_K_partial == 0.0);
        CHECK(row.log_disp_partial == 0.0);
    }
    const auto v = vectorfield_energy(field_derivatives(h.samples()[3]), quasi);
    CHECK(v.interior_second == 0.0);
    CHECK(v.gamma1_l2 == 0.0);
    CHECK(v.gamma2_l2 == 0.0);
}

TEST_CASE("series partial integrals match the history functionals") {
    const auto& h = quasi_run();
    const auto rows = compute_series(h, 3.0);
    CHECK(rows.back().W_K_partial == doctest::Approx(weighted_strichartz(h, 3.0, 10.0)).epsilon(1e-12));
    CHECK(rows.back().log_disp_partial == doctest::Approx(dispersion_integral(h, 10.0)).epsilon(1e-12));
    for (std::size_t k = 1; k < rows.size(); ++k) {
        CHECK(rows[k].W_K_partial >= rows[k - 1].W_K_partial);
        CHECK(rows[k].E1 >= 0.0);
        CHECK(rows[k].E1 <= rows[k].E2);
    }
}

TEST_CASE("vector field identities") {
    const auto& h = quasi_run();
    for (double t : {1.0, 5.0, 9.0}) {
        const auto v = vectorfield_energy(field_derivatives(h.nearest_sample(t)), quasi);
        CHECK(v.gamma0_sup <= 0.5 * (v.gamma1_sup + v.gamma2_sup) * (1 + 1e-12));
        CHECK(v.scaling_sup <= 0.5 * (v.gamma1_sup + v.gamma2_sup) * (1 + 1e-12));
        CHECK(v.interior_second >= 0.0);
    }
}

TEST_CASE("maximal function") {
    MaximalInput c{0.0, 0.1, std::vector<double>(40, -2.5)};
    for (double x : maximal_function(c).values) CHECK(x == doctest::Approx(2.5).epsilon(1e-14));

    const double h = 1.0 / 256;
    MaximalInput ind{0.0, h, std::vector<double>(1024, 0.0)};
    for (std::size_t i = 0; i < 256; ++i) ind.values[i] = 1.0;
    const auto m = maximal_function(ind);
    CHECK(std::abs(m.values[512] - 0.5) <= h);

    std::mt19937 rng(3);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        MaximalInput f{0.0, 0.05, std::vector<double>(96)};
        for (double& x : f.values) x = N(rng);
        const auto mf = maximal_function(f);
        const auto oracle = brute_maximal(f.values);
        const double sup_f = max_abs(f.values);
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            CHECK(mf.values[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
            CHECK(mf.values[i] <= sup_f * (1 + 1e-14));
            CHECK(mf.values[i] >= std::abs(f.values[i]) * (1 - 1e-14));
        }
    }
    CHECK(lp_norm(c, 2.0) == doctest::Approx(2.5 * 2.0));
    CHECK_THROWS_AS(lp_norm(c, 0.5), ArgumentError);
}
