#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "qwave/errors.hpp"
#include "qwave/evolve.hpp"

using namespace qwave;
using namespace qwave::evolve;
using model::BumpKind;
using model::bump_base;

namespace {

const auto linear = CoefficientModel::linear();
const auto quasi = CoefficientModel::one_plus_u(1.0, 0.1);

RunOptions options(double T, double sample_dt) {
    RunOptions o;
    o.T = T;
    o.sample_dt = sample_dt;
    return o;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// sup-node error of u against the closed form at time t
double linear_error(std::size_t N, double r_max, double t) {
    const Grid grid = Grid::over(r_max, N);
    const auto [f, g] = model::make_bump(0.1, BumpKind::displacement, grid);
    const auto hist = run(f, g, linear, options(t, t));
    const auto& lvl = hist.nearest_sample(t);
    const auto u = lvl.state.u();
    double err = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        err = std::max(err, std::abs(u[i] - dalembert_reference(f, t, grid.r(i)).phi));
    return err;
}

} // namespace

TEST_CASE("cfl_dt follows the definition") {
    const Grid grid{0.01, 400};
    const auto zero = WaveState::from_data(RadialProfile::zero(grid), RadialProfile::zero(grid));
    CHECK(cfl_dt(zero, linear, 0.9) == doctest::Approx(0.009));
    CHECK(cfl_dt(zero, quasi, 0.9) == doctest::Approx(0.009));
    const auto bump = RadialProfile::sample(grid, [](double r) { return 0.05 * bump_base(r); });
    const auto s = WaveState::from_data(bump, RadialProfile::zero(grid));
    CHECK(cfl_dt(s, quasi, 0.9) == doctest::Approx(0.009 / 1.05).epsilon(1e-5));
}

TEST_CASE("zero states step to zero and keep the origin pinned") {
    const Grid grid{0.01, 100};
    const auto z = WaveState::from_data(RadialProfile::zero(grid), RadialProfile::zero(grid));
    WaveState prev = z;
    prev.t = -0.005;
    const auto next = step(prev, z, quasi, 0.005);
    CHECK(max_abs(next.v) == 0.0);
    CHECK(max_abs(next.w) == 0.0);
    CHECK_THROWS_AS(step(prev, z, quasi, 0.004), ArgumentError);
}

TEST_CASE("leapfrog is time reversible") {
    const Grid grid = Grid::over(8.0, 512);
    const auto f = RadialProfile::sample(grid, [](double r) { return 0.1 * bump_base(r); });
    const auto s0 = WaveState::from_data(f, RadialProfile::zero(grid));
    const double dt = cfl_dt(s0, linear, 0.9);
    WaveState prev = s0;
    prev.t = -dt;
    WaveState cur = s0;
    const int k = 200;
    for (int i = 0; i < k; ++i) {
        WaveState next = step(prev, cur, linear, dt);
        prev = std::move(cur);
        cur = std::move(next);
    }
    std::swap(prev, cur);
    for (int i = 0; i < k; ++i) {
        WaveState next = step(prev, cur, linear, -dt);
        prev = std::move(cur);
        cur = std::move(next);
    }
    // cur is now the level at t = -dt, prev the level at t = 0
    double err = 0.0;
    for (std::size_t i = 0; i < s0.v.size(); ++i) err = std::max(err, std::abs(prev.v[i] - s0.v[i]));
    CHECK(err <= 1e-10 * k * max_abs(s0.v));
}

TEST_CASE("zero data gives an identically zero history") {
    const Grid grid = Grid::over(16.0, 256);
    const auto z = RadialProfile::zero(grid);
    const auto hist = run(z, z, quasi, options(5.0, 0.5));
    CHECK(hist.samples().size() == 11);
    for (const auto& lvl : hist.samples()) {
        CHECK(max_abs(lvl.state.v) == 0.0);
        CHECK(max_abs(lvl.state.w) == 0.0);
    }
    for (double s : hist.step_sup_u()) CHECK(s == 0.0);
    const std::vector<double> times = {1.0, 2.5};
    CHECK(pde_residual(hist, times, 2) == 0.0);
}

TEST_CASE("run archives samples at multiples of sample_dt and keeps v(t, 0) = 0") {
    const Grid grid = Grid::over(16.0, 512);
    const auto [f, g] = model::make_bump(0.01, BumpKind::mixed, grid);
    const auto hist = run(f, g, quasi, options(3.0, 0.25));
    const auto times = hist.sample_times();
    REQUIRE(times.size() == 13);
    for (std::size_t k = 0; k < times.size(); ++k) CHECK(times[k] == doctest::Approx(0.25 * k).epsilon(1e-12));
    for (const auto& lvl : hist.samples()) CHECK(lvl.state.v[0] == 0.0);
    const auto st = hist.step_times();
    for (std::size_t k = 1; k < st.size(); ++k) CHECK(st[k] > st[k - 1]);
    CHECK(hist.covered_time() > 3.0);
    CHECK(hist.nearest_sample(1.1).state.t == doctest::Approx(1.0));
}

TEST_CASE("linear solutions obey strong Huygens") {
    const Grid grid = Grid::over(16.0, 2048);
    const auto [f, g] = model::make_bump(0.1, BumpKind::displacement, grid);
    const auto hist = run(f, g, linear, options(5.0, 0.5));
    const auto& lvl = hist.nearest_sample(5.0);
    const auto u = lvl.state.u();
    double outside = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (std::abs(5.0 - grid.r(i)) > 1.1) outside = std::max(outside, std::abs(u[i]));
    CHECK(outside <= 1e-8);
}

TEST_CASE("linear runs converge to the closed form at second order") {
    const double e1 = linear_error(512, 8.0, 2.0);
    const double e2 = linear_error(1024, 8.0, 2.0);
    CHECK(e1 / e2 >= 3.5);
}

TEST_CASE("quasilinear small data runs to T = 50 without tripping the guard") {
    const Grid grid = Grid::over(64.0, 4096);
    const auto [f, g] = model::make_bump(0.01, BumpKind::displacement, grid);
    const auto hist = run(f, g, quasi, options(50.0, 0.5));
    double sup = 0.0;
    for (double s : hist.step_sup_u()) sup = std::max(sup, s);
    CHECK(sup <= 2 * 0.01);
    CHECK(hist.sample_times().back() == doctest::Approx(50.0));
}

TEST_CASE("odd extension on the full line reproduces the half-line evolution") {
    const Grid grid = Grid::over(8.0, 128);
    const auto f = RadialProfile::sample(grid, [](double r) { return 0.05 * bump_base(r); });
    const auto g = RadialProfile::sample(grid, [](double r) { return 0.03 * bump_base(r); });
    const auto hist = run(f, g, quasi, options(2.0, 0.5));
    const std::size_t n = grid.n;
    const double h = grid.h;

    // full-line leapfrog on nodes -n..n with odd data, replaying the recorded step times
    const std::size_t M = 2 * n + 1;
    auto at = [&](std::vector<double>& x, long i) -> double& { return x[static_cast<std::size_t>(i + static_cast<long>(n))]; };
    std::vector<double> v(M), w(M);
    for (long i = -static_cast<long>(n); i <= static_cast<long>(n); ++i) {
        const double r = static_cast<double>(i) * h;
        at(v, i) = r * f.eval(r);
        at(w, i) = r * g.eval(r);
    }
    auto accel = [&](std::vector<double>& x, long i) {
        const double r = static_cast<double>(i) * h;
        const double a = quasi(at(x, i) / r);
        return a * a * (at(x, i + 1) - 2 * at(x, i) + at(x, i - 1)) / (h * h);
    };
    const auto st = hist.step_times();
    std::vector<double> prev = v, cur = v;
    double dt_prev = 0.0;
    std::size_t compared = 0;
    double worst = 0.0;
    const auto samples = hist.samples();
    std::size_t next_sample = 1;
    for (std::size_t k = 1; k < st.size(); ++k) {
        const double dt = st[k] - st[k - 1];
        std::vector<double> nxt = cur;
        for (long i = 1; i < static_cast<long>(n); ++i) {
            double value;
            if (k == 1) {
                value = at(cur, i) + dt * at(w, i) + 0.5 * dt * dt * accel(cur, i);
            } else {
                value = at(cur, i) + dt / dt_prev * (at(cur, i) - at(prev, i)) +
                        0.5 * dt * (dt + dt_prev) * accel(cur, i);
            }
            at(nxt, i) = value;
            at(nxt, -i) = -value;
        }
        at(nxt, 0) = 0.0;
        prev = std::move(cur);
        cur = std::move(nxt);
        dt_prev = dt;
        if (next_sample < samples.size() && std::abs(st[k] - samples[next_sample].state.t) < 1e-12) {
            const auto& sv = samples[next_sample].state.v;
            for (std::size_t i = 0; i <= n; ++i) worst = std::max(worst, std::abs(sv[i] - at(cur, static_cast<long>(i))));
            ++compared;
            ++next_sample;
        }
    }
    CHECK(compared == samples.size() - 1);
    CHECK(worst <= 1e-12 * max_abs(samples[0].state.v));
}

TEST_CASE("large data trips the blow-up guard instead of producing non-finite output") {
    const Grid grid = Grid::over(32.0, 1024);
    const auto [f, g] = model::make_bump(5.0, BumpKind::displacement, grid);
    CHECK_THROWS_AS(run(f, g, quasi, options(10.0, 0.5)), GuardTrip);
}

TEST_CASE("outer boundary check rejects undersized domains") {
    const Grid grid = Grid::over(8.0, 256);
    const auto [f, g] = model::make_bump(0.01, BumpKind::displacement, grid);
    CHECK_THROWS_AS(run(f, g, quasi, options(10.0, 0.5)), DomainTooSmall);
    RunOptions bad = options(2.0, 0.5);
    bad.cfl = 1.2;
    CHECK_THROWS_AS(run(f, g, quasi, bad), ArgumentError);
    bad = options(2.0, 0.5);
    bad.dense_stride = 3;
    CHECK_THROWS_AS(run(f, g, quasi, bad), ArgumentError);
}

TEST_CASE("closed-form linear reference") {
    const Grid grid = Grid::over(4.0, 4096);
    const auto phi0 = RadialProfile::sample(grid, bump_base);
    for (double r : {0.0, 0.3, 0.9, 2.0}) {
        const auto v = dalembert_reference(phi0, 0.0, r);
        CHECK(v.phi == doctest::Approx(bump_base(r)).epsilon(1e-9));
        CHECK(v.phi_t == doctest::Approx(0.0));
    }
    const auto far = dalembert_reference(phi0, 1.0, 2.5);
    CHECK(far.phi == 0.0);
    CHECK(far.phi_t == 0.0);

    // psi(x) = x phi0(|x|) evaluated directly on the polynomial
    auto psi = [](double x) { return x * bump_base(x); };
    auto dpsi = [](double x) {
        const double ax = std::abs(x);
        if (ax >= 1.0) return 0.0;
        return bump_base(ax) - 8.0 * ax * ax * std::pow(1.0 - ax * ax, 3);
    };
    const double t = 2.0, r = 1.5;
    const auto v = dalembert_reference(phi0, t, r);
    CHECK(v.phi == doctest::Approx((psi(t + r) - psi(t - r)) / (2 * r)).epsilon(1e-7));
    CHECK(v.phi_t == doctest::Approx((dpsi(t + r) - dpsi(t - r)) / (2 * r)).epsilon(1e-6));
    CHECK_THROWS_AS(dalembert_reference(phi0, -1.0, 0.5), ArgumentError);
}

TEST_CASE("pde residual converges under refinement") {
    // (1 - r^2)^8 keeps the fourth derivative continuous at the support edge
    auto residual = [](std::size_t N, const CoefficientModel& m, double eps) {
        const Grid grid = Grid::over(8.0, N);
        const auto f = RadialProfile::sample(grid, [eps](double r) { return eps * std::pow(bump_base(r), 2); });
        const auto hist = run(f, RadialProfile::zero(grid), m, options(2.0, 0.5));
        const std::vector<double> times = {0.5, 1.0, 1.5};
        return pde_residual(hist, times, 2);
    };
    const double l1 = residual(512, linear, 0.1), l2 = residual(1024, linear, 0.1);
    CHECK(l1 / l2 >= 3.5);
    const double q1 = residual(512, quasi, 0.01), q2 = residual(1024, quasi, 0.01);
    CHECK(std::isfinite(q1));
    CHECK(q1 / q2 >= 3.0);

    const Grid grid = Grid::over(8.0, 256);
    const auto [f, g] = model::make_bump(0.1, BumpKind::displacement, grid);
    const auto hist = run(f, g, linear, options(1.0, 0.5));
    const std::vector<double> at_zero = {0.0};
    CHECK_THROWS_AS(pde_residual(hist, at_zero, 2), ArgumentError);
}

TEST_CASE("convergence order is two") {
    const std::vector<std::size_t> res = {256, 512, 1024};
    const double c = model::bump_scale(0.1, BumpKind::displacement, Grid::over(8.0, 1024));
    auto f = [c](double r) { return c * bump_base(r); };
    auto zero = [](double) { return 0.0; };
    const auto lin = convergence_order(f, zero, linear, 8.0, res, options(2.0, 2.0));
    REQUIRE(lin.order);
    CHECK(*lin.order == doctest::Approx(2.0).epsilon(0.1));

    const double cq = model::bump_scale(0.01, BumpKind::displacement, Grid::over(8.0, 1024));
    auto fq = [cq](double r) { return cq * bump_base(r); };
    const auto q = convergence_order(fq, zero, quasi, 8.0, res, options(2.0, 2.0));
    REQUIRE(q.order);
    CHECK(std::abs(*q.order - 2.0) <= 0.3);

    const auto z = convergence_order(zero, zero, quasi, 8.0, res, options(2.0, 2.0));
    CHECK(z.exact());
    const std::vector<std::size_t> bad = {256, 384, 1024};
    CHECK_THROWS_AS(convergence_order(f, zero, linear, 8.0, bad, options(2.0, 2.0)), ArgumentError);
}
