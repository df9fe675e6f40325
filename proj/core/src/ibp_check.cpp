#include "rvml/landau.hpp"

#include <cmath>
#include <numbers>

namespace rvml {

IbpCheck ibp_identity_check(const VelocityGrid& grid_p, const VelocityGrid& grid_q, double support_radius,
                            double eval_radius)
{
    if (!(support_radius > 0.0) || !(eval_radius > 0.0))
        throw ConfigError("ibp check: radii must be positive");
    if (!grid_p.unstaggered() || grid_q.stagger != Vec3::Constant(0.5) || grid_q.n != grid_p.n ||
        grid_q.p_max != grid_p.p_max)
        throw ConfigError("ibp check: grid_q must be the half-staggered companion of grid_p");
    if (support_radius > grid_p.p_max) throw ConfigError("ibp check: support must fit inside the grid");

    const SpeciesParams sp;
    const Juttner J(sp);
    // The identity is stated for Lambda S m^2/(p0 q0), i.e. without the 2 pi e e L prefactor.
    const KernelParams kp{1.0, 1.0, 1.0, 1.0, 0.5 / std::numbers::pi};
    const double R2 = support_radius * support_radius;

    // Test function (1 - |q|^2/R^2)^4 and its gradient, weighted by sqrt(J) and the q-cell volume.
    const std::size_t Nq = grid_q.size();
    std::vector<double> g_w(Nq);
    std::vector<Vec3> dg_w(Nq), tg_w(Nq);
    for (std::size_t k = 0; k < Nq; ++k) {
        const Vec3& q = grid_q.nodes[k];
        const double s = 1.0 - q.squaredNorm() / R2;
        const double w = grid_q.weights[k] * J.sqrt_at(q);
        if (s <= 0.0) {
            g_w[k] = 0.0;
            dg_w[k] = tg_w[k] = Vec3::Zero();
            continue;
        }
        g_w[k] = w * s * s * s * s;
        dg_w[k] = w * (-8.0 / R2) * s * s * s * q;
        tg_w[k] = g_w[k] * q / (2.0 * sp.p0(q));
    }

    auto fluxes = [&](const Vec3& p, Vec3& t_grad, Vec3& t_transfer) {
        t_grad.setZero();
        t_transfer.setZero();
        for (std::size_t k = 0; k < Nq; ++k) {
            if (g_w[k] == 0.0) continue;
            const Mat3 phi = kernel_phi(p, grid_q.nodes[k], kp);
            t_grad += phi * dg_w[k];
            t_transfer += phi * tg_w[k];
        }
    };

    IbpCheck out;
    for (std::size_t k = 0; k < grid_p.size(); ++k)
        if (grid_p.nodes[k].norm() <= eval_radius) out.nodes.push_back(static_cast<int>(k));
    if (out.nodes.empty()) throw ConfigError("ibp check: no grid node within eval_radius");

    const std::size_t M = out.nodes.size();
    out.lhs.resize(M);
    out.rhs.resize(M);
    out.rhs_transfer.resize(M);
    out.rhs_log.resize(M);
    out.rhs_delta.resize(M);
    const double delta = 1e-4 * grid_p.h;
    parallel_for(M, [&](std::size_t b0, std::size_t b1) {
        for (std::size_t m = b0; m < b1; ++m) {
            const Vec3& p = grid_p.nodes[out.nodes[m]];
            double div_g = 0.0, div_t = 0.0;
            for (int i = 0; i < 3; ++i) {
                Vec3 pp = p, pm = p, gp, gm, tp, tm;
                pp[i] += delta;
                pm[i] -= delta;
                fluxes(pp, gp, tp);
                fluxes(pm, gm, tm);
                div_g += (gp[i] - gm[i]) / (2.0 * delta);
                div_t += (tp[i] - tm[i]) / (2.0 * delta);
            }
            const double p0 = sp.p0(p);
            double log_term = 0.0;
            for (std::size_t k = 0; k < Nq; ++k) {
                if (g_w[k] == 0.0) continue;
                const Vec3& q = grid_q.nodes[k];
                const double rm1 = minkowski_excess(p, q, 1.0, 1.0);
                const double r = 1.0 + rm1;
                log_term += r / (p0 * sp.p0(q)) / std::sqrt(rm1 * (r + 1.0)) * g_w[k];
            }
            const double s = 1.0 - p.squaredNorm() / R2;
            const double gp = s > 0.0 ? s * s * s * s : 0.0;
            out.lhs[m] = div_g;
            out.rhs_transfer[m] = div_t;
            out.rhs_log[m] = -4.0 * log_term;
            out.rhs_delta[m] = -kappa(p) * J.sqrt_at(p) * gp;
            out.rhs[m] = out.rhs_transfer[m] + out.rhs_log[m] + out.rhs_delta[m];
        }
    });
    double num = 0.0, den = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        num += (out.lhs[m] - out.rhs[m]) * (out.lhs[m] - out.rhs[m]);
        den += out.lhs[m] * out.lhs[m];
    }
    out.relative_error = std::sqrt(num / den);

    double xy = 0.0, yy = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        xy += (out.lhs[m] - out.rhs_transfer[m] - out.rhs_log[m]) * out.rhs_delta[m];
        yy += out.rhs_delta[m] * out.rhs_delta[m];
    }
    out.kappa_fit = yy > 0.0 ? xy / yy : 0.0;
    double fit = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        const double r = out.lhs[m] - out.rhs_transfer[m] - out.rhs_log[m] - out.kappa_fit * out.rhs_delta[m];
        fit += r * r;
    }
    out.relative_error_fitted = std::sqrt(fit / den);
    return out;
}

} // namespace rvml
