#include <doctest.h>

#include <rvml/momentfn.hpp>

#include <json.hpp>

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <numbers>

using namespace rvml;

namespace {

double i_oracle(int j)
{
    boost::math::quadrature::exp_sinh<double> integrator;
    auto f = [j](double r) {
        return 2.0 * (r > 60 ? 0.0 : std::pow(r, 2 * j) * std::sqrt(1 + r * r) * std::exp(-0.5 * r * r)) / std::sqrt(2 * std::numbers::pi);
    };
    return integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

long double cofactor_det(const std::array<std::array<double, 4>, 4>& C)
{
    auto det3 = [&](int skip) {
        int cols[3], c = 0;
        for (int j = 0; j < 4; ++j)
            if (j != skip) cols[c++] = j;
        auto e = [&](int r, int k) { return static_cast<long double>(C[r + 1][cols[k]]); };
        return e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0)) +
               e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
    };
    long double d = 0;
    for (int j = 0; j < 4; ++j) d += (j % 2 ? -1.0L : 1.0L) * C[0][j] * det3(j);
    return d;
}

} // namespace

TEST_SUITE("momentfn") {

TEST_CASE("Gaussian moments are double factorials")
{
    const auto m = gaussian_moments(20);
    BigInt df = 1;
    for (int n = 1; n <= 20; ++n) {
        df *= 2 * n - 1;
        CHECK(m[n] == df);
    }
    CHECK(to_string(m[7]) == "135135");
    CHECK(to_string(m[20]) == "319830986772877770815625");
    CHECK_THROWS_AS(gaussian_moments(21), ConfigError);
}

TEST_CASE("i0 and i1 against frozen high-precision values and an independent quadrature")
{
    const MomentTables t = i_tables(1e-13);
    CHECK(t.i0 == doctest::Approx(1.35453080648131530205).epsilon(1e-12));
    CHECK(t.i1 == doctest::Approx(1.91942165372697352134).epsilon(1e-12));
    for (int j = 0; j <= 6; ++j) {
        const double o = i_oracle(j);
        CHECK(std::abs(t.i_direct[j] - o) / o < 1e-10);
        CHECK(std::abs(t.i_recurrence[j] - o) / o < 1e-10);
    }
}

TEST_CASE("i_j recurrence coefficients")
{
    const MomentTables t = i_tables(1e-12, 8);
    const std::int64_t expect[][2] = {{1, 0}, {0, 1}, {1, 3}, {5, 18}, {40, 141}, {395, 1395}, {4705, 16614}};
    for (int j = 0; j <= 6; ++j) {
        CHECK(t.i_comb[j][0] == expect[j][0]);
        CHECK(t.i_comb[j][1] == expect[j][1]);
    }
    // integration by parts: i_j = (2j-1) i_{j-1} + (2j-3) i_{j-2}
    for (int j = 2; j <= 8; ++j)
        CHECK(t.i_comb[j][0] == (2 * j - 1) * t.i_comb[j - 1][0] + (2 * j - 3) * t.i_comb[j - 2][0]);
}

TEST_CASE("determinant: exact coefficients and an independent expansion")
{
    const MomentTables t = i_tables(1e-12);
    const auto c = det_coefficients_exact(t);
    CHECK(c[0] == 14364000);
    CHECK(c[1] == -15649200);
    for (auto [i0, i1] : {std::pair{t.i0, t.i1}, std::pair{1.0, 2.0}, std::pair{0.7, 3.5}, std::pair{-2.0, 0.25}}) {
        const double closed = 14364000.0 * i0 - 15649200.0 * i1;
        const auto C = moment_matrix(t, i0, i1);
        CHECK(std::abs(static_cast<double>(cofactor_det(C)) - closed) < 1e-12 * std::abs(closed));
        CHECK(std::abs(det4(C) - closed) < 1e-9 * std::abs(closed));
    }
    CHECK(14364000.0 * t.i0 - 15649200.0 * t.i1 < 0);
}

TEST_CASE("k solves the moment system and yields the contraction eigenvalues")
{
    const MomentTables t = i_tables(1e-12);
    const MomentFunctionCoeffs c = solve_k(t, 1e-12, 5);
    for (int i = 0; i < 4; ++i) {
        double s = 0;
        for (int j = 0; j < 4; ++j) s += c.C[i][j] * c.k[j];
        const double rhs = i < 2 ? c.rhs[i] : 0.0;
        CHECK(std::abs(s - rhs) < 1e-10 * std::max(1.0, std::abs(rhs)));
    }
    CHECK(c.residuals.lambda1 == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(c.residuals.lambda2 == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(c.residuals.lambda3 == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::abs(h_sqrtJ(c, 12.0)) < 1e-20);
    const auto doc = nlohmann::json::parse(momentfn_report_json(t, c));
    for (const char* key : {"m_table", "i0", "i1", "k", "detC", "residuals"}) CHECK(doc.contains(key));
}

TEST_CASE("B_ij on a grid is symmetric in i, j")
{
    const MomentTables t = i_tables(1e-12);
    const MomentFunctionCoeffs c = solve_k(t);
    const VelocityGrid g = build_grid(10, 8.0);
    const auto B = build_Bij(c, g);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < g.size(); k += 37) CHECK(B[3 * i + j][k] == doctest::Approx(B[3 * j + i][k]));
}

}
