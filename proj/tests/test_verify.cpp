#include <cmath>
#include <sstream>

#include "doctest.h"
#include "qwave/errors.hpp"
#include "qwave/verify.hpp"

using namespace qwave;
using namespace qwave::verify;
using model::BumpKind;
using model::Grid;

namespace {

const auto linear = CoefficientModel::linear();
const auto quasi = CoefficientModel::one_plus_u(1.0, 0.1);

RunOptions opts(double T, double sample_dt) {
    RunOptions o;
    o.T = T;
    o.sample_dt = sample_dt;
    return o;
}

RunHistory bump_run(double eps, const CoefficientModel& m, std::size_t N, double R, double T, double dt = 0.25) {
    const auto grid = Grid::over(R, N);
    const auto [f, g] = model::make_bump(eps, BumpKind::displacement, grid);
    return evolve::run(f, g, m, opts(T, dt));
}

} // namespace

TEST_CASE("zero run gives zero constants") {
    const auto grid = Grid::over(16.0, 256);
    const auto z = RadialProfile::zero(grid);
    const auto h = evolve::run(z, z, quasi, opts(5.0, 0.5));
    const auto rep = verify_theorem21(h, 3.0, 0.0, nullptr, {16, 1, 1.0});
    CHECK_FALSE(rep.any_saturated());
    for (const auto& b : rep.bounds) {
        if (b.id == "G12") {
            CHECK_FALSE(b.fitted_constant.has_value());
            continue;
        }
        REQUIRE(b.fitted_constant.has_value());
        CHECK(*b.fitted_constant == 0.0);
    }
    CHECK_THROWS_AS(rep.find("B99"), ArgumentError);
    CHECK_THROWS_AS(verify_theorem21(h, 0.0, 0.0), ArgumentError);
    CHECK_THROWS_AS(verify_theorem21(h, 3.0, -1.0), ArgumentError);
}

TEST_CASE("growth exponent fit") {
    std::vector<double> t, E, Ep, Ec;
    for (int k = 0; k <= 200; ++k) {
        t.push_back(0.25 * k);
        E.push_back(2.0 * std::pow(1.0 + t.back(), 0.1));
        Ep.push_back(E.back() * (1.0 + 1e-3 * std::sin(3.0 * k)));
        Ec.push_back(5.0);
    }
    CHECK(fit_growth_exponent(t, E) == doctest::Approx(0.1).epsilon(1e-8));
    CHECK(fit_growth_exponent(t, E, 0.0) == doctest::Approx(0.1).epsilon(1e-8));
    CHECK(std::abs(fit_growth_exponent(t, Ec)) <= 1e-12);
    CHECK(std::abs(fit_growth_exponent(t, Ep) - 0.1) <= 0.01);
    auto bad = E;
    bad.back() = 0.0;
    CHECK_THROWS_AS(fit_growth_exponent(t, bad), ArgumentError);
    CHECK_THROWS_AS(fit_growth_exponent(t, std::vector<double>(3, 1.0)), ArgumentError);
}

TEST_CASE("quasilinear report is finite and deterministic") {
    const auto h = bump_run(0.01, quasi, 1024, 32.0, 20.0, 0.5);
    const auto rep = verify_theorem21(h, 3.0, 0.01, nullptr, {16, 1, 1.0});
    CHECK(rep.regime_ok);
    for (const char* id : {"B18a", "B18b", "B19a", "B19b", "B19c", "B20a", "B20b", "B21", "B3", "A7", "G5", "G6", "G7"}) {
        const auto& b = rep.find(id);
        REQUIRE(b.fitted_constant.has_value());
        CHECK(std::isfinite(*b.fitted_constant));
        CHECK(*b.fitted_constant >= 0.0);
    }
    CHECK(rep.find("G5").fitted_constant.value() <= 2.0);
    CHECK(std::abs(rep.theta) <= 0.1);

    std::ostringstream j1, j2, c1;
    write_report_json(j1, rep);
    write_report_json(j2, verify_theorem21(h, 3.0, 0.01, nullptr, {16, 1, 1.0}));
    CHECK(j1.str() == j2.str());
    write_report_csv(c1, rep);
    CHECK(c1.str().rfind("bound_id,fitted_constant,sup_t,sup_r,saturated,refinement_ratio\n", 0) == 0);

    const auto big = verify_theorem21(h, 3.0, 0.05, nullptr, {16, 1, 1.0});
    CHECK_FALSE(big.regime_ok);
    CHECK_FALSE(big.warnings.empty());
}

TEST_CASE("refinement ratios are near one") {
    const auto h1 = bump_run(0.01, quasi, 1024, 32.0, 10.0, 0.5);
    const auto h2 = bump_run(0.01, quasi, 2048, 32.0, 10.0, 0.5);
    const auto rep = verify_theorem21(h1, 3.0, 0.01, &h2, {16, 1, 1.0});
    for (const char* id : {"B18a", "B19a", "B20a", "B21"}) {
        const auto& b = rep.find(id);
        REQUIRE(b.refinement_ratio.has_value());
        CHECK(*b.refinement_ratio == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("linear Strichartz family") {
    const auto zero = RadialProfile::zero(Grid::over(8.0, 512));
    const auto degenerate = linear_strichartz_check({zero}, 5.0, 0.75);
    REQUIRE(degenerate.rows.size() == 1);
    CHECK_FALSE(degenerate.rows[0].ratio.has_value());
    CHECK_FALSE(degenerate.spread().has_value());

    std::vector<RadialProfile> fam;
    for (double s : {0.5, 1.0}) fam.push_back(scaled_bump(s, 16.0, 256));
    const auto tab = linear_strichartz_check(fam, 10.0, 0.75);
    REQUIRE(tab.rows.size() == 2);
    for (const auto& row : tab.rows) {
        REQUIRE(row.ratio.has_value());
        CHECK(*row.ratio > 0.0);
        CHECK(row.in_cone_tail <= 1e-6 * row.numerator);
        CHECK(row.in_cone_weighted >= row.in_cone);
    }
    REQUIRE(tab.spread().has_value());
    CHECK(*tab.spread() >= 1.0);
    CHECK(*tab.spread() <= 3.0);
    CHECK_THROWS_AS(scaled_bump(20.0, 16.0), ArgumentError);
    CHECK_THROWS_AS(linear_strichartz_check(fam, 10.0, 0.0), ArgumentError);
}

TEST_CASE("homotopy members are affine with exact endpoints") {
    const auto grid = Grid::over(8.0, 256);
    const auto [f1, g1] = model::make_bump(0.01, BumpKind::mixed, grid);
    const auto [f2, g2] = model::make_bump(0.02, BumpKind::displacement, grid);
    const HomotopyFamily fam{f1, g1, f2, g2, {0.0, 0.5, 1.0}};
    const auto [a0, b0] = fam.member(0.0);
    const auto [a1, b1] = fam.member(1.0);
    const auto [am, bm] = fam.member(0.25);
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
        CHECK(a0[i] == f1[i]);
        CHECK(b0[i] == g1[i]);
        CHECK(a1[i] == f2[i]);
        CHECK(b1[i] == g2[i]);
        CHECK(am[i] == doctest::Approx(0.75 * f1[i] + 0.25 * f2[i]).epsilon(1e-14));
        CHECK(bm[i] == doctest::Approx(0.75 * g1[i] + 0.25 * g2[i]).epsilon(1e-14));
    }
    CHECK_THROWS_AS(fam.member(1.5), ArgumentError);
}

TEST_CASE("stability gaps") {
    const auto grid = Grid::over(32.0, 1024);
    const auto [f, g] = model::make_bump(0.01, BumpKind::displacement, grid);
    const auto o = opts(10.0, 0.5);
    const auto h1 = evolve::run(f, g, quasi, o);
    const auto h2 = evolve::run(f.scaled(1.05), g.scaled(1.05), quasi, o);
    CHECK(stability_gap(h1, h1, 5.0).gap == 0.0);
    const double kappa = model::h2h1_norm(f.scaled(0.05), g.scaled(0.05));
    CHECK(stability_gap(h1, h2, 0.0).gap == doctest::Approx(kappa).epsilon(0.02));

    const auto l1 = evolve::run(f, g, linear, o);
    const auto l2 = evolve::run(f.scaled(1.05), g.scaled(1.05), linear, o);
    const double g0 = stability_gap(l1, l2, 0.0).gap;
    for (double t : {2.0, 5.0, 9.5}) CHECK(stability_gap(l1, l2, t).gap == doctest::Approx(g0).epsilon(1e-3));

    const HomotopyFamily same{f, g, f, g, {0.0, 0.5, 1.0}};
    const auto res = stability_check(same, quasi, o);
    CHECK(res.kappa == 0.0);
    CHECK(res.sup_ratio == 0.0);

    const HomotopyFamily pert{f, g, f.scaled(1.05), g.scaled(1.05), {0.0, 1.0}};
    const auto rp = stability_check(pert, quasi, o);
    CHECK(rp.kappa > 0.0);
    CHECK(std::isfinite(rp.sup_ratio));
    CHECK(rp.sup_ratio >= 1.0 - 0.05);
    REQUIRE(rp.lambda_rows.size() == 2);
    CHECK(rp.lambda_rows[1].gap_ratio.value() == doctest::Approx(stability_gap(h1, h2, 10.0).gap / rp.kappa));

    const auto coarse = evolve::run(f, g, quasi, opts(10.0, 1.0));
    CHECK_THROWS_AS(stability_gap(h1, coarse, 5.5), ArgumentError);
    CHECK_THROWS_AS(stability_gap(h1, evolve::run(f, g, quasi, opts(1.0, 0.5)), 5.0), ArgumentError);
}

TEST_CASE("short-time check") {
    const auto grid = Grid::over(16.0, 1024);
    const auto z = RadialProfile::zero(grid);
    const auto hz = evolve::run(z, z, quasi, opts(1.0, 0.125));
    const auto rz = local_theorem71_check(hz, 1.0);
    CHECK(rz.sup_u == 0.0);
    CHECK(rz.doubling_holds);
    for (const auto& r : rz.records) CHECK(r.fitted_constant.value() == 0.0);

    const auto big = bump_run(0.5, quasi, 1024, 16.0, 1.0, 0.0625);
    const auto rb = local_theorem71_check(big, 0.25);
    CHECK(rb.doubling_holds);
    CHECK(rb.sup_u > 0.0);

    const auto lin = bump_run(0.05, linear, 1024, 16.0, 1.0, 0.0625);
    const auto rl = local_theorem71_check(lin, 1.0);
    CHECK(rl.du_squared_integral == doctest::Approx(functionals::dispersion_integral_squared(lin, 1.0)).epsilon(1e-12));
    CHECK_THROWS_AS(local_theorem71_check(lin, 2.0), ArgumentError);
}

TEST_CASE("maximal self-test") {
    const auto rows = maximal_selftest(20240601u, 128, 10);
    REQUIRE_FALSE(rows.empty());
    for (const auto& r : rows) CHECK(r.pass);
    std::ostringstream os;
    write_maximal_csv(os, rows);
    CHECK(os.str().find('\n') != std::string::npos);
    CHECK_THROWS_AS(maximal_selftest(1u, 100, 1), ArgumentError);
    CHECK_THROWS_AS(maximal_selftest(1u, 128, 0), ArgumentError);
}
