#pragma once

#include "rvml/common.hpp"

#include <cmath>
#include <numbers>

namespace rvml {

/** Masses, charges and Coulomb logarithm of one colliding pair. */
struct KernelParams {
    double m_p = 1.0;
    double m_q = 1.0;
    double e_p = 1.0;
    double e_q = 1.0;
    double coulomb_log = 1.0;

    double prefactor() const { return 2.0 * std::numbers::pi * e_p * e_q * coulomb_log; }
};

struct KernelValue {
    Mat3 phi;
    double lambda = 0.0;
    Mat3 s_matrix;
    double pq_dot = 0.0;
};

double minkowski_dot(const Vec3& p, const Vec3& q, double m_p = 1.0, double m_q = 1.0);

// P.Q - m_p m_q without the cancellation of the direct formula.
inline double minkowski_excess(const Vec3& p, const Vec3& q, double m_p, double m_q)
{
    const double p0 = std::sqrt(m_p * m_p + p.squaredNorm());
    const double q0 = std::sqrt(m_q * m_q + q.squaredNorm());
    const double dm = m_p - m_q;
    const double d0 = (dm * (m_p + m_q) + (p.squaredNorm() - q.squaredNorm())) / (p0 + q0);
    return 0.5 * (dm * dm + (p - q).squaredNorm() - d0 * d0);
}

// S alone; finite everywhere, including the diagonal where it vanishes for equal masses.
Mat3 s_matrix(const Vec3& p, const Vec3& q, double m_p = 1.0, double m_q = 1.0);

/**
 * Phi(P,Q) = c * Lambda * (m_p/p0)(m_q/q0) * S with r = P.Q/(m_p m_q),
 * Lambda = r^2 (r^2-1)^{-3/2},
 * S = (r^2-1) I - (u-w)(u-w)^T + (r-1)(u w^T + w u^T), u = p/m_p, w = q/m_q.
 * Throws on the diagonal |r - 1| < 1e-14.
 */
KernelValue eval_kernel(const Vec3& p, const Vec3& q, const KernelParams& kp);

// Hot-path variant: Phi only, no diagonal guard beyond a finite check.
inline Mat3 kernel_phi(const Vec3& p, const Vec3& q, const KernelParams& kp)
{
    const double p0 = std::sqrt(kp.m_p * kp.m_p + p.squaredNorm());
    const double q0 = std::sqrt(kp.m_q * kp.m_q + q.squaredNorm());
    const double rm1 = minkowski_excess(p, q, kp.m_p, kp.m_q) / (kp.m_p * kp.m_q);
    const double r = 1.0 + rm1;
    const double r2m1 = rm1 * (r + 1.0);
    const double lam = r * r / (r2m1 * std::sqrt(r2m1));
    const Vec3 u = p / kp.m_p, w = q / kp.m_q;
    const Vec3 d = u - w;
    Mat3 S = r2m1 * Mat3::Identity() - d * d.transpose() + rm1 * (u * w.transpose() + w * u.transpose());
    return (kp.prefactor() * lam * (kp.m_p / p0) * (kp.m_q / q0)) * S;
}

/** 2^{7/2} pi p0 int_0^pi (1 + |p|^2 sin^2 t)^{-3/2} sin t dt. */
double kappa(const Vec3& p, double tol = 1e-12);

} // namespace rvml
