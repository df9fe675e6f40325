#include <doctest.h>

#include <rvml/scenarios.hpp>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace rvml;

namespace {

const LinearizedOperator& operator8()
{
    static const LinearizedOperator L = [] {
        const VelocityGrid g = build_grid(8, 6.0);
        return assemble_L(g, staggered_companion(g), PlasmaPair{});
    }();
    return L;
}

} // namespace

TEST_SUITE("scenarios") {

TEST_CASE("time to wall")
{
    CHECK(time_to_wall(BilliardDomain::ball, 2.0, Vec3::Zero(), Vec3(0.5, 0, 0)) == doctest::Approx(4.0));
    CHECK(time_to_wall(BilliardDomain::disk, 1.0, Vec3(0, 0, 5), Vec3(0, 0.25, 3)) == doctest::Approx(4.0));
    CHECK(std::isinf(time_to_wall(BilliardDomain::disk, 1.0, Vec3(0.2, 0, 0), Vec3(0, 0, 1))));
    // chord from the wall: x = (1, 0), v = (-1, 1)/sqrt2 meets the circle again at (0, 1)
    CHECK(time_to_wall(BilliardDomain::disk, 1.0, Vec3(1, 0, 0), Vec3(-1, 1, 0) / std::sqrt(2.0)) ==
          doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("billiard invariants on a small ensemble")
{
    for (BilliardDomain d : {BilliardDomain::disk, BilliardDomain::ball}) {
        BilliardConfig c;
        c.domain = d;
        c.particles = random_particles(d, 1.0, 20, 9);
        c.max_reflections = 2000;
        const BilliardReport r = run_billiard(c);
        CHECK(r.max_dp_norm < 1e-12);
        CHECK(r.max_dL_axial < 1e-10);
        CHECK(r.max_reversal < 1e-9);
        CHECK(r.max_involution < 1e-14);
        CHECK(r.total_reflections == 20 * 2000);
        if (d == BilliardDomain::ball) CHECK(r.max_dL_all < 1e-10);
        for (const auto& p : r.particles) CHECK(p.final_state.x.head(d == BilliardDomain::disk ? 2 : 3).norm() < 1.0);
    }
}

TEST_CASE("radial shots bounce back and forth along their line")
{
    BilliardConfig c;
    c.domain = BilliardDomain::ball;
    c.particles = {Particle{Vec3(0.1, 0.2, -0.3), Vec3(0.1, 0.2, -0.3) * 4.0}};
    c.max_reflections = 501;
    const BilliardReport r = run_billiard(c);
    const Vec3 pf = r.particles[0].final_state.p;
    CHECK(pf.isApprox(-Vec3(0.1, 0.2, -0.3) * 4.0, 1e-14));
    CHECK(r.max_dL_all < 1e-14);
}

TEST_CASE("billiard input checks")
{
    BilliardConfig c;
    c.particles = {Particle{Vec3(1.5, 0, 0), Vec3(1, 0, 0)}};
    CHECK_THROWS_AS(run_billiard(c), ConfigError);
    c.particles = {Particle{Vec3(0.5, 0, 0), Vec3(1, 0, 0)}};
    c.radius = -1;
    CHECK_THROWS_AS(run_billiard(c), ConfigError);
}

TEST_CASE("fit_log_linear recovers an exponential")
{
    std::vector<double> t, y;
    for (int k = 0; k < 10; ++k) {
        t.push_back(0.3 * k);
        y.push_back(2.0 * std::exp(-1.7 * t.back()));
    }
    const auto [a, b] = fit_log_linear(t, y);
    CHECK(b == doctest::Approx(-1.7).epsilon(1e-12));
    CHECK(a == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(fit_log_linear({1.0}, {1.0}), ConfigError);
}

TEST_CASE("functionals with k_max = 0 reduce to the plain norms")
{
    const VelocityGrid g = build_grid(6, 4.0);
    const ProjectionBasis B = build_basis(g, PlasmaPair{}, BasisConstants::grid);
    std::vector<DistributionVector> snaps;
    for (int s = 0; s < 3; ++s) {
        DistributionVector f(g.size());
        for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values[i] = std::sin(0.1 * i + s);
        snaps.push_back(f);
    }
    const FunctionalSeries fs = functionals(snaps, {}, 0.1, 0, B, g);
    REQUIRE(fs.I_parallel.size() == 3);
    for (int s = 0; s < 3; ++s) {
        CHECK(fs.I_parallel[s] == doctest::Approx(inner(g, snaps[s], snaps[s])).epsilon(1e-14));
        const DistributionVector micro(Eigen::VectorXd(snaps[s].values - project(snaps[s], B, g).Pf.values));
        CHECK(fs.D_parallel[s] ==
              doctest::Approx(inner(g, micro, micro) + grad_norm_sq(g, micro)).epsilon(1e-14));
    }
    // one-sided k = 1 needs neighbours, so the first and last snapshots drop out
    CHECK(functionals(snaps, {}, 0.1, 1, B, g).I_parallel.size() == 1);
}

TEST_CASE("relaxation: conserved moments, stationary null vectors, energy identity")
{
    const LinearizedOperator& L = operator8();
    RelaxationConfig c;
    c.n = 8;
    c.t_end = 3.0;
    c.stride = 2;
    const RelaxationResult r = run_relaxation(c, L);
    CHECK(r.max_moment_drift < 1e-12);
    CHECK(r.monotone_I);
    CHECK(r.fitted_rate == doctest::Approx(r.delta_hat).epsilon(0.05));

    RelaxationConfig chi = c;
    chi.recipe = InitialRecipe::basis_element;
    chi.basis_index = 3;
    const RelaxationResult rc = run_relaxation(chi, L);
    double dev = 0;
    for (const auto& s : rc.snapshots) dev = std::max(dev, (s.values - rc.snapshots.front().values).norm());
    CHECK(dev < 1e-12 * rc.snapshots.front().values.norm());

    // ||f(t)||^2 + 2 int_0^t <Lf, f> = ||f(0)||^2, trapezoid in time
    RelaxationConfig bump = c;
    bump.recipe = InitialRecipe::juttner_bump;
    bump.dt = 2.5e-4;
    bump.t_end = 0.25;
    bump.stride = 1;
    const RelaxationResult rb = run_relaxation(bump, L);
    CHECK(rb.energy_closure < 1e-6);

    RelaxationConfig mid = bump;
    mid.integrator = Integrator::implicit_midpoint;
    mid.dt = 0.01;
    mid.t_end = 1.0;
    const RelaxationResult rm = run_relaxation(mid, L);
    CHECK(rm.max_moment_drift < 1e-12);
    CHECK(rm.monotone_I);
}

TEST_CASE("relaxation input checks and the norm bound")
{
    const LinearizedOperator& L = operator8();
    RelaxationConfig c;
    c.n = 8;
    c.dt = -1;
    CHECK_THROWS_AS(run_relaxation(c, L), ConfigError);
    c.dt = 0.05;
    c.nonlinear_epsilon = 0.1;
    CHECK_THROWS_AS(run_relaxation(c, L), ConfigError);
    c.integrator = Integrator::implicit_midpoint;
    CHECK_THROWS_AS(run_relaxation(c, L), ConfigError);   // needs a context

    RelaxationConfig blow;
    blow.n = 8;
    blow.recipe = InitialRecipe::juttner_bump;
    blow.bump_amplitude = 10.0;
    blow.norm_bound = 1e-3;
    blow.t_end = 0.5;
    CHECK_THROWS_AS(run_relaxation(blow, L), NumericalError);
}

TEST_CASE("exports are readable")
{
    const auto dir = std::filesystem::temp_directory_path() / "rvml-unit-export";
    std::filesystem::create_directories(dir);
    BilliardConfig c;
    c.particles = random_particles(BilliardDomain::disk, 1.0, 3, 1);
    c.max_reflections = 10;
    write_billiard_json(run_billiard(c), (dir / "b.json").string());
    const auto j = nlohmann::json::parse(std::ifstream(dir / "b.json"));
    CHECK(j.is_object());

    RelaxationConfig rc;
    rc.n = 8;
    rc.t_end = 0.5;
    write_relaxation_csv(run_relaxation(rc, operator8()), (dir / "r.csv").string());
    std::ifstream in(dir / "r.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header.find("I_par") != std::string::npos);
}

}
