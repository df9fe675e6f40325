#include <doctest.h>

#include <rvml/kernel.hpp>
#include <rvml/rng.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace rvml;

namespace {

// Textbook form with r = (p0 q0 - p.q)/(m_p m_q) computed directly.
Mat3 phi_reference(const Vec3& p, const Vec3& q, double mp, double mq, double c)
{
    const double p0 = std::sqrt(mp * mp + p.squaredNorm()), q0 = std::sqrt(mq * mq + q.squaredNorm());
    const double r = (p0 * q0 - p.dot(q)) / (mp * mq);
    const double lam = r * r * std::pow(r * r - 1, -1.5);
    const Vec3 u = p / mp, w = q / mq;
    const Mat3 S = (r * r - 1) * Mat3::Identity() - (u - w) * (u - w).transpose() +
                   (r - 1) * (u * w.transpose() + w * u.transpose());
    return c * lam * (mp / p0) * (mq / q0) * S;
}

} // namespace

TEST_SUITE("kernel") {

TEST_CASE("kernel matches the direct formula away from the diagonal")
{
    CounterRng rng(7, "kernel-test");
    const KernelParams kp{1.0, 2.0, 1.0, 0.5, 1.3};
    for (int k = 0; k < 200; ++k) {
        const Vec3 p(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
        const Vec3 q(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
        const Mat3 ref = phi_reference(p, q, kp.m_p, kp.m_q, kp.prefactor());
        const KernelValue kv = eval_kernel(p, q, kp);
        CHECK((kv.phi - ref).norm() / ref.norm() < 1e-9);
        CHECK((kernel_phi(p, q, kp) - kv.phi).norm() / ref.norm() < 1e-13);
    }
}

TEST_CASE("minkowski excess avoids cancellation")
{
    const Vec3 p(1e-5, 2e-5, 0), q(1.5e-5, 2e-5, 0);
    // For small momenta P.Q - m^2 ~ |p - q|^2 / 2
    CHECK(minkowski_excess(p, q, 1, 1) == doctest::Approx(0.5 * (p - q).squaredNorm()).epsilon(1e-8));
    const Vec3 a(0.3, -0.2, 1.0), b(-1.0, 0.5, 0.2);
    CHECK(minkowski_excess(a, b, 1, 2) == doctest::Approx(minkowski_dot(a, b, 1, 2) - 2.0).epsilon(1e-12));
}

TEST_CASE("S vanishes on the diagonal for equal masses; the guarded kernel refuses it")
{
    const Vec3 p(0.7, -1.2, 2.5);
    CHECK(s_matrix(p, p).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_THROWS(eval_kernel(p, p, KernelParams{}));
}

TEST_CASE("properties: null vector, symmetry, positivity, rotation covariance")
{
    CounterRng rng(11, "kernel-props");
    const KernelParams kp;
    for (int k = 0; k < 100; ++k) {
        const Vec3 p(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
        const Vec3 q(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
        const Mat3 phi = eval_kernel(p, q, kp).phi;
        const Vec3 w = p / std::sqrt(1 + p.squaredNorm()) - q / std::sqrt(1 + q.squaredNorm());
        CHECK((phi * w).norm() < 1e-12 * phi.norm() * w.norm());
        CHECK((phi - phi.transpose()).norm() <= 1e-15 * phi.norm());
        const Eigen::Vector3d ev = Eigen::SelfAdjointEigenSolver<Mat3>(phi).eigenvalues();
        CHECK(ev.minCoeff() > -1e-12 * phi.norm());
        const Mat3 O = Eigen::AngleAxisd(rng.uniform(0, 6.28), Vec3(rng.uniform(-1, 1), 1, rng.uniform(-1, 1)).normalized())
                           .toRotationMatrix();
        CHECK((eval_kernel(O * p, O * q, kp).phi - O * phi * O.transpose()).norm() < 1e-12 * phi.norm());
    }
}

TEST_CASE("kappa against its closed form")
{
    // int_0^pi (1 + a sin^2 t)^{-3/2} sin t dt = 2 / (1 + a), so kappa = 2^{9/2} pi / p0 for unit mass.
    for (double r : {0.0, 0.3, 1.0, 2.5, 10.0}) {
        const Vec3 p(r / std::sqrt(3.0), -r / std::sqrt(3.0), r / std::sqrt(3.0));
        const double expect = std::pow(2.0, 4.5) * std::numbers::pi / std::sqrt(1 + r * r);
        CHECK(kappa(p) == doctest::Approx(expect).epsilon(1e-12));
    }
}

}
