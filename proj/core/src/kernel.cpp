#include "rvml/kernel.hpp"
#include "rvml/vgrid.hpp"

#include <sstream>

namespace rvml {

double minkowski_dot(const Vec3& p, const Vec3& q, double m_p, double m_q)
{
    return std::sqrt(m_p * m_p + p.squaredNorm()) * std::sqrt(m_q * m_q + q.squaredNorm()) - p.dot(q);
}

Mat3 s_matrix(const Vec3& p, const Vec3& q, double m_p, double m_q)
{
    const double rm1 = minkowski_excess(p, q, m_p, m_q) / (m_p * m_q);
    const Vec3 u = p / m_p, w = q / m_q;
    const Vec3 d = u - w;
    return rm1 * (rm1 + 2.0) * Mat3::Identity() - d * d.transpose() + rm1 * (u * w.transpose() + w * u.transpose());
}

KernelValue eval_kernel(const Vec3& p, const Vec3& q, const KernelParams& kp)
{
    const double rm1 = minkowski_excess(p, q, kp.m_p, kp.m_q) / (kp.m_p * kp.m_q);
    if (std::abs(rm1) < 1e-14) {
        std::ostringstream os;
        os << "eval_kernel: diagonal singularity (|P.Q/(m_p m_q) - 1| = " << std::abs(rm1)
           << "); sample q on a staggered grid";
        throw NumericalError(os.str(), rm1, 0.0);
    }
    const double p0 = std::sqrt(kp.m_p * kp.m_p + p.squaredNorm());
    const double q0 = std::sqrt(kp.m_q * kp.m_q + q.squaredNorm());
    const double r = 1.0 + rm1;
    const double r2m1 = rm1 * (r + 1.0);
    KernelValue kv;
    kv.pq_dot = kp.m_p * kp.m_q * r;
    kv.lambda = r * r / (r2m1 * std::sqrt(r2m1));
    kv.s_matrix = s_matrix(p, q, kp.m_p, kp.m_q);
    kv.phi = (kp.prefactor() * kv.lambda * (kp.m_p / p0) * (kp.m_q / q0)) * kv.s_matrix;
    return kv;
}

double kappa(const Vec3& p, double tol)
{
    const double a2 = p.squaredNorm();
    const double p0 = std::sqrt(1.0 + a2);
    auto f = [a2](double t) {
        const double s = std::sin(t);
        return std::pow(1.0 + a2 * s * s, -1.5) * s;
    };
    const double pref = std::pow(2.0, 3.5) * std::numbers::pi * p0;
    // The integrand peaks near 0 and pi for large |p|; split the interval there.
    const double w = std::min(std::numbers::pi / 2, 4.0 / std::max(1.0, std::sqrt(a2)));
    double I = 2.0 * adaptive_quad_1d(f, 0.0, w, tol / (3 * pref)).value;
    if (w < std::numbers::pi / 2) I += adaptive_quad_1d(f, w, std::numbers::pi - w, tol / (3 * pref)).value;
    return pref * I;
}

} // namespace rvml
