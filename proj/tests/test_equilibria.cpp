#include <doctest.h>

#include <rvml/equilibria.hpp>

#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <numbers>

using namespace rvml;

TEST_SUITE("equilibria") {

TEST_CASE("K2 matches the library Bessel function and frozen high-precision values")
{
    // 30-digit reference values of K_2(s)
    const double s[] = {0.5, 1.0, 2.0, 5.0, 20.0};
    const double ref[] = {7.55018355124086943656770578023, 1.62483889863517748281070738228,
                          0.253759754566055862937318381968, 0.00530894371222345995808126974247,
                          6.32954361229222811048173027878e-10};
    for (int i = 0; i < 5; ++i) {
        const double k = bessel_k2(s[i]);
        CHECK(std::abs(k - ref[i]) / ref[i] < 1e-10);
        CHECK(std::abs(k - boost::math::cyl_bessel_k(2, s[i])) / ref[i] < 1e-10);
    }
    CHECK_THROWS_AS(bessel_k2(0.0), ConfigError);
}

TEST_CASE("K2 large-argument behaviour")
{
    const double s = 20.0;
    const double ratio = bessel_k2(s) * std::exp(s) * std::sqrt(2 * s / std::numbers::pi);
    // The leading term alone is 9.6% low at s = 20; the next term 15/(8s) accounts for it.
    CHECK(ratio == doctest::Approx(1.0958).epsilon(1e-3));
    CHECK(std::abs(ratio / (1 + 15.0 / (8 * s)) - 1) < 0.005);
    // Leading order does reach 5% further out.
    const double s2 = 60.0;
    CHECK(std::abs(bessel_k2(s2) * std::exp(s2) * std::sqrt(2 * s2 / std::numbers::pi) - 1) < 0.05);
}

TEST_CASE("Juettner normalization and second moment for unequal species")
{
    const SpeciesParams sps[] = {{1.0, 1.0, +1, 1.0}, {2.0, 0.5, -1, 0.7}, {0.3, 2.0, +1, 3.0}};
    for (const auto& sp : sps) {
        const Juttner J(sp);
        const double M = mass_constant(sp);
        CHECK(std::abs(sp.e * M - 1.0) < 1e-10);
        const double second = radial_moment(J, [&](double r) { return r * r / (3 * sp.p0(r)); }, 1e-12, 1);
        CHECK(std::abs(second - sp.kT * M) / (sp.kT * M) < 1e-10);
        // energy moment: <p0> = m K1/K2 + 3kT
        const double s = sp.m / sp.kT;
        const double mean_p0 = radial_moment(J, [&](double r) { return sp.p0(r); }, 1e-12, 1) / M;
        const double expect = sp.m * boost::math::cyl_bessel_k(1, s) / boost::math::cyl_bessel_k(2, s) + 3 * sp.kT;
        CHECK(mean_p0 == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("Juettner gradient matches central differences")
{
    const SpeciesParams sp{1.5, 1.0, +1, 0.8};
    const Juttner J(sp);
    const Vec3 p(0.4, -1.1, 0.7);
    const double h = 1e-5;
    for (int a = 0; a < 3; ++a) {
        Vec3 e = Vec3::Zero();
        e[a] = h;
        const double fd = (J(p + e) - J(p - e)) / (2 * h);
        CHECK(J.gradient(p)[a] == doctest::Approx(fd).epsilon(1e-8));
    }
    CHECK(J.sqrt_at(p) * J.sqrt_at(p) == doctest::Approx(J(p)).epsilon(1e-14));
}

TEST_CASE("neutrality")
{
    PlasmaPair pair;
    CHECK(check_neutrality(pair) < 1e-12);
    pair.minus.m = 5.0;
    pair.minus.kT = 1.0;
    CHECK(check_neutrality(pair) < 1e-10);
    CHECK(neutrality_residual(1.0, 2.0, 2.0, 1.0) == 0.0);
    CHECK(neutrality_residual(1.0, 2.0, 1.0, 1.0) == 1.0);
}

TEST_CASE("invalid species are rejected")
{
    SpeciesParams sp;
    sp.m = -1;
    CHECK_THROWS_AS(sp.validate(), ConfigError);
    sp = {};
    sp.kT = 0;
    CHECK_THROWS_AS(Juttner{sp}, ConfigError);
}

}
