#include <doctest.h>

#include <rvml/maxwell.hpp>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace rvml;

namespace {

constexpr double pi = std::numbers::pi;

double max_abs(const std::vector<double>& v)
{
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Lowest cavity mode on [0, pi]^3 with amplitude vector (1, -1, 0).
void seed_mode(EMFieldState& s)
{
    const double a[3] = {1, -1, 0};
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i <= s.n[0]; ++i)
            for (int j = 0; j <= s.n[1]; ++j)
                for (int k = 0; k <= s.n[2]; ++k) {
                    if (!e_active(s, c, i, j, k)) continue;
                    const Vec3 x = s.e_pos(c, i, j, k);
                    double v = a[c];
                    for (int m = 0; m < 3; ++m) v *= m == c ? std::cos(x[m]) : std::sin(x[m]);
                    s.E[c][s.idx(i, j, k)] = v;
                }
}

} // namespace

TEST_SUITE("maxwell") {

TEST_CASE("state construction enforces the CFL bound")
{
    const double d = pi / 8;
    CHECK_NOTHROW(make_state({8, 8, 8}, {pi, pi, pi}, 0.99 * d / std::sqrt(3.0)));
    CHECK_THROWS_AS(make_state({8, 8, 8}, {pi, pi, pi}, 1.01 * d / std::sqrt(3.0)), ConfigError);
    CHECK_THROWS_AS(make_state({8, 8, 8}, {pi, pi, pi}, 0.6 * d / std::sqrt(3.0), Boundary::pec, 0.5), ConfigError);
    CHECK_THROWS_AS(make_state({0, 8, 8}, {pi, pi, pi}, 0.01), ConfigError);
}

TEST_CASE("discrete identities: div curl = 0")
{
    for (Boundary b : {Boundary::pec, Boundary::periodic}) {
        EMFieldState s = make_state({6, 7, 5}, {1.0, 1.3, 0.8}, 0.01, b);
        std::array<std::vector<double>, 3> E, cE, cB;
        for (int c = 0; c < 3; ++c) {
            E[c].resize(s.size());
            for (std::size_t p = 0; p < s.size(); ++p) E[c][p] = std::sin(0.37 * p + c);
        }
        s.E = E;
        apply_boundary(s);
        curl_e(s, s.E, cE);
        std::vector<double> div;
        div_b(s, cE, div);
        CHECK(max_abs(div) < 1e-12);
        s.B = cE;
        curl_b(s, s.B, cB);
        div_e(s, cB, div);
        CHECK(max_abs(div) < 1e-10);
    }
}

TEST_CASE("source-free cavity: PEC invariant, div B, energy")
{
    const int n = 10;
    EMFieldState s = make_state({n, n, n}, {pi, pi, pi}, 0.5 * (pi / n) / std::sqrt(3.0));
    seed_mode(s);
    const double W0 = diagnostics(s).energy;
    double drift = 0;
    std::vector<double> div;
    for (int k = 0; k < 300; ++k) {
        step(s);
        div_b(s, s.B, div);
        CHECK(max_abs(div) < 1e-12);
        drift = std::max(drift, std::abs(diagnostics(s).energy - W0) / W0);
    }
    CHECK(drift < 1e-12);
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j)
                for (int k = 0; k <= n; ++k) {
                    if (!e_active(s, c, i, j, k)) REQUIRE(s.E[c][s.idx(i, j, k)] == 0.0);
                    if (!b_active(s, c, i, j, k)) REQUIRE(s.B[c][s.idx(i, j, k)] == 0.0);
                }
    CHECK(diagnostics(s).gauss_residual < 1e-12);
}

TEST_CASE("continuity sources keep Gauss's law; a broken current does not")
{
    const int n = 12;
    const double L = 2 * pi, dt = 0.5 * (L / n) / std::sqrt(3.0);
    const SourceFn src = continuity_source(1.0, 0.5, 2.0, Vec3(pi, pi, pi), 0.6);
    EMFieldState s = make_state({n, n, n}, {L, L, L}, dt);
    double worst = 0, W = diagnostics(s).energy, balance = 0;
    for (int k = 0; k < 100; ++k) {
        const auto E_old = s.E;
        step(s, src);
        double w = 0;
        for (int c = 0; c < 3; ++c)
            for (std::size_t p = 0; p < s.size(); ++p) w += s.j[c][p] * (E_old[c][p] + s.E[c][p]);
        const double W_new = diagnostics(s).energy;
        // exact discrete Poynting balance
        balance = std::max(balance, std::abs(W_new - W + 0.5 * dt * w * s.cell_volume()));
        W = W_new;
        worst = std::max(worst, diagnostics(s).gauss_residual);
    }
    CHECK(worst < 1e-12);
    CHECK(balance < 1e-12);

    const SourceFn broken = [&](const EMFieldState& e, double th, double tn, SourceSample& out) {
        src(e, th, tn, out);
        out.rho.clear();
    };
    EMFieldState b = make_state({n, n, n}, {L, L, L}, dt);
    for (int k = 0; k < 20; ++k) step(b, broken);
    CHECK(diagnostics(b).gauss_residual > 1e-6);
}

TEST_CASE("Helmholtz splits leave divergence-free remainders")
{
    const int n = 10;
    const double L = 2 * pi;
    EMFieldState s = make_state({n, n, n}, {L, L, L}, 0.5 * (L / n) / std::sqrt(3.0));
    const SourceFn src = continuity_source(1.0, 0.5, 2.0, Vec3(pi, pi, pi), 0.7);
    for (int k = 0; k < 30; ++k) step(s, src);
    const HelmholtzSplit e = helmholtz_split_e(s);
    CHECK(e.remainder_divergence < 1e-10);
    const HelmholtzSplit b = helmholtz_split_b(s);
    CHECK(b.remainder_divergence < 1e-10);
    // B is already solenoidal, so its gradient part is negligible.
    double g = 0;
    for (const auto& c : b.gradient) g = std::max(g, max_abs(c));
    CHECK(g < 1e-10);
}

TEST_CASE("momentum identity: manufactured fields converge at second order, exact fields give zero")
{
    const ManufacturedEM m = manufactured_potential_solution();
    const double r1 = momentum_identity_residual(m, Vec3::Zero(), Vec3::Ones(), 0.1, 0.7);
    const double r2 = momentum_identity_residual(m, Vec3::Zero(), Vec3::Ones(), 0.05, 0.7);
    CHECK(std::log2(r1 / r2) > 1.8);

    // Vacuum plane wave: rho = 0, j = 0.
    ManufacturedEM wave;
    wave.E = [](const Vec3& x, double t) -> Vec3 { return Vec3(0, std::cos(x[0] - t), 0); };
    wave.B = [](const Vec3& x, double t) -> Vec3 { return Vec3(0, 0, std::cos(x[0] - t)); };
    wave.j = [](const Vec3&, double) -> Vec3 { return Vec3::Zero(); };
    wave.rho = [](const Vec3&, double) { return 0.0; };
    // Both differences act on functions of x - t, so their truncation errors cancel exactly.
    CHECK(momentum_identity_residual(wave, Vec3::Zero(), Vec3::Ones(), 0.1, 0.3) < 1e-13);

    // A uniform static field has zero stress divergence and zero rate.
    ManufacturedEM uniform;
    uniform.E = [](const Vec3&, double) -> Vec3 { return Vec3(1, 2, 3); };
    uniform.B = [](const Vec3&, double) -> Vec3 { return Vec3(-1, 0.5, 0); };
    uniform.j = [](const Vec3&, double) -> Vec3 { return Vec3::Zero(); };
    uniform.rho = [](const Vec3&, double) { return 0.0; };
    CHECK(momentum_identity_residual(uniform, Vec3::Zero(), Vec3::Ones(), 0.1, 0.0) < 1e-12);
}

TEST_CASE("angular momentum rate: translation identity and quiet vacuum")
{
    const int n = 12;
    const double L = 2 * pi;
    EMFieldState s = make_state({n, n, n}, {L, L, L}, 0.5 * (L / n) / std::sqrt(3.0), Boundary::periodic);
    const SourceFn src = continuity_source(1.0, 0.5, 2.0, Vec3(pi, pi, pi), 0.6);
    const Vec3 x0(pi, pi, pi), shift(0.3, -0.2, 0.1);
    AngularMomentumRateCheck base(Vec3::UnitZ(), x0), moved(Vec3::UnitZ(), x0 + shift), linear(Vec3::UnitZ(), x0, shift);
    std::vector<EMFieldState> states{s};
    base.push(s), moved.push(s), linear.push(s);
    for (int k = 0; k < 20; ++k) {
        step(s, src);
        states.push_back(s);
        base.push(s), moved.push(s), linear.push(s);
    }
    const auto r = base.report(), r2 = moved.report(), rl = linear.report();
    double scale = 0, worst = 0;
    for (std::size_t k = 0; k < r.lhs.size(); ++k) {
        scale = std::max(scale, std::abs(r.rhs[k]));
        worst = std::max(worst, std::abs((r.lhs[k] - r2.lhs[k]) - rl.lhs_linear[k]));
        worst = std::max(worst, std::abs((r.rhs[k] - r2.rhs[k]) - rl.rhs_linear[k]));
    }
    CHECK(worst < 1e-10 * scale);
    // the streaming check agrees with the batch one
    const auto batch = angular_momentum_rate_check(states, Vec3::UnitZ(), x0);
    REQUIRE(batch.lhs.size() == r.lhs.size());
    for (std::size_t k = 0; k < r.lhs.size(); ++k) CHECK(batch.lhs[k] == r.lhs[k]);

    EMFieldState quiet = make_state({n, n, n}, {L, L, L}, 0.5 * (L / n) / std::sqrt(3.0), Boundary::periodic);
    AngularMomentumRateCheck q(Vec3::UnitZ(), x0);
    q.push(quiet);
    for (int k = 0; k < 5; ++k) {
        step(quiet);
        q.push(quiet);
    }
    for (double v : q.report().lhs) CHECK(v == 0.0);
}

TEST_CASE("snapshot export")
{
    const auto dir = std::filesystem::temp_directory_path() / "rvml-unit-snapshot";
    std::filesystem::create_directories(dir);
    EMFieldState s = make_state({4, 4, 4}, {1, 1, 1}, 0.01);
    export_snapshot(s, (dir / "snap").string());
    const auto meta = nlohmann::json::parse(std::ifstream(dir / "snap.json"));
    CHECK(meta.contains("arrays"));
    CHECK(std::filesystem::file_size(dir / "snap.bin") == 10 * s.size() * sizeof(double));
}

}
