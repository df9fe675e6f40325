#include <doctest.h>

#include <rvml/vgrid.hpp>

#include <cmath>
#include <numbers>

using namespace rvml;

TEST_SUITE("vgrid") {

TEST_CASE("grid layout and weights")
{
    const VelocityGrid g = build_grid(6, 3.0);
    CHECK(g.size() == 216);
    CHECK(g.h == doctest::Approx(1.0));
    CHECK(g.nodes[g.index(0, 0, 0)].isApprox(Vec3::Constant(-2.5)));
    CHECK(g.nodes[g.index(5, 0, 2)].isApprox(Vec3(2.5, -2.5, -0.5)));
    double sum = 0;
    for (double w : g.weights) sum += w;
    CHECK(sum == doctest::Approx(216.0).epsilon(1e-14));
    CHECK(g.unstaggered());
}

TEST_CASE("staggered companion shifts every node by half a cell")
{
    const VelocityGrid g = build_grid(5, 2.0);
    const VelocityGrid s = staggered_companion(g);
    CHECK_FALSE(s.unstaggered());
    for (int a = 0; a < 3; ++a) CHECK(s.coord(a, 0) - g.coord(a, 0) == doctest::Approx(0.5 * g.h));
}

TEST_CASE("midpoint quadrature is exact on odd functions and quadratics")
{
    const VelocityGrid g = build_grid(8, 2.0);
    std::vector<double> odd(g.size()), quad2(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        odd[k] = g.nodes[k][0] * g.nodes[k][1] * g.nodes[k][1];
        quad2[k] = g.nodes[k][2] * g.nodes[k][2];
    }
    CHECK(std::abs(quad(g, odd)) < 1e-13);
    // midpoint rule on x^2 over [-a, a] per axis: 2a^3/3 - 2a h^2/12
    const double a = 2.0, h = g.h;
    const double expect = (2 * a * a * a / 3 - 2 * a * h * h / 12) * (2 * a) * (2 * a);
    CHECK(quad(g, quad2) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("bad grids are rejected")
{
    CHECK_THROWS_AS(build_grid(0, 1.0), ConfigError);
    CHECK_THROWS_AS(build_grid(4, -1.0), ConfigError);
    CHECK_THROWS_AS(build_grid(4, 1.0, Vec3(0.3, 0, 0)), ConfigError);
}

TEST_CASE("adaptive quadrature on known integrals")
{
    const auto r = adaptive_quad_1d([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-13);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(r.error < 1e-12);
    const auto e = adaptive_quad_1d_inf([](double x) { return std::exp(-x); }, 0.0,
                                        [](double x) { return std::exp(-x); }, 1e-13);
    CHECK(e.value == doctest::Approx(1.0).epsilon(1e-12));
    const auto g = adaptive_quad_1d_inf([](double x) { return std::exp(-x * x); }, 0.0,
                                        [](double x) { return std::exp(-x * x); }, 1e-13);
    CHECK(g.value == doctest::Approx(0.5 * std::sqrt(std::numbers::pi)).epsilon(1e-12));
    CHECK_THROWS_AS(adaptive_quad_1d([](double x) { return x; }, 0, 1, -1.0), ConfigError);
}

TEST_CASE("an unreachable tolerance raises NumericalError")
{
    // 1/sqrt(x) near zero needs more bisections than allowed
    CHECK_THROWS_AS(adaptive_quad_1d([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-15, 3),
                    NumericalError);
}

}
