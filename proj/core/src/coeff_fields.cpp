#include "rvml/landau.hpp"

namespace rvml {

namespace {

struct StaggeredData {
    std::array<std::vector<double>, 2> J, sqrtJ, f, qf;   // qf: f / (2 kT q0) weight on q
    std::array<std::vector<Vec3>, 2> grad_f;
};

// f and its gradient at the staggered node between base nodes i..i+1 (per
// axis): the trilinear interpolant's centre value and centre gradient.
void interpolate(const VelocityGrid& g, std::span<const double> f, std::vector<double>& val, std::vector<Vec3>& grad)
{
    const int n = g.n;
    val.assign(static_cast<std::size_t>(n) * n * n, 0.0);
    grad.assign(val.size(), Vec3::Zero());
    auto at = [&](int i, int j, int k) {
        if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) return 0.0;
        return f[g.index(i, j, k)];
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double c[2][2][2];
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b)
                        for (int d = 0; d < 2; ++d) c[a][b][d] = at(i + a, j + b, k + d);
                double s = 0.0;
                Vec3 gr = Vec3::Zero();
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) {
                        gr[0] += c[1][a][b] - c[0][a][b];
                        gr[1] += c[a][1][b] - c[a][0][b];
                        gr[2] += c[a][b][1] - c[a][b][0];
                        for (int d = 0; d < 2; ++d) s += c[a][b][d];
                    }
                const std::size_t id = g.index(i, j, k);
                val[id] = s / 8.0;
                grad[id] = gr / (4.0 * g.h);
            }
}

struct Sums {
    Mat3 sigma_J = Mat3::Zero();   // sum_b int Phi J_b
    Mat3 sigma_f = Mat3::Zero();   // sum_b int Phi sqrt(J_b) f_b
    Vec3 w = Vec3::Zero();         // sum_b int Phi sqrt(J_b) grad f_b
    Vec3 transfer = Vec3::Zero();  // sum_b int Phi sqrt(J_b) q/(2 kT q0) f_b
};

Sums q_sums(const Vec3& p, int a, const VelocityGrid& gq, const StaggeredData& sd, const PlasmaPair& pair,
            const CollisionParams& params)
{
    Sums s;
    for (int b = 0; b < 2; ++b) {
        const KernelParams kp{pair[a].m, pair[b].m, pair[a].e, pair[b].e, params.coulomb_log[a][b]};
        for (std::size_t k = 0; k < gq.size(); ++k) {
            const Vec3& q = gq.nodes[k];
            const Mat3 phi = gq.weights[k] * kernel_phi(p, q, kp);
            s.sigma_J += sd.J[b][k] * phi;
            s.sigma_f += (sd.sqrtJ[b][k] * sd.f[b][k]) * phi;
            s.w += sd.sqrtJ[b][k] * (phi * sd.grad_f[b][k]);
            s.transfer += (sd.sqrtJ[b][k] * sd.qf[b][k]) * (phi * q);
        }
    }
    return s;
}

} // namespace

CoefficientFields coeff_fields(const DistributionVector& f, const VelocityGrid& grid_p, const VelocityGrid& grid_q,
                               const PlasmaPair& pair, const CollisionParams& params)
{
    pair.validate();
    if (!grid_p.unstaggered() || grid_q.n != grid_p.n || grid_q.p_max != grid_p.p_max ||
        grid_q.stagger != Vec3::Constant(0.5))
        throw ConfigError("coeff_fields: grid_q must be the half-staggered companion of an unstaggered grid_p");
    if (pair.plus.kT != pair.minus.kT) throw ConfigError("coeff_fields: species temperatures must agree");
    if (f.n_nodes() != grid_p.size()) throw std::invalid_argument("coeff_fields: grid mismatch");

    const std::size_t N = grid_p.size();
    const double kT = pair.plus.kT;
    StaggeredData sd;
    for (int b = 0; b < 2; ++b) {
        const Juttner J(pair[b]);
        const Eigen::VectorXd fb = f.species(b);
        interpolate(grid_p, std::span<const double>(fb.data(), N), sd.f[b], sd.grad_f[b]);
        sd.J[b].resize(N);
        sd.sqrtJ[b].resize(N);
        sd.qf[b].resize(N);
        for (std::size_t k = 0; k < N; ++k) {
            const Vec3& q = grid_q.nodes[k];
            sd.J[b][k] = J(q);
            sd.sqrtJ[b][k] = J.sqrt_at(q);
            sd.qf[b][k] = sd.f[b][k] / (2.0 * kT * pair[b].p0(q));
        }
    }

    CoefficientFields out;
    const double delta = 1e-4 * grid_p.h;
    for (int a = 0; a < 2; ++a) {
        out.sigma_f[a].resize(N);
        out.a_f[a].resize(N);
        out.C_f[a].resize(N);
        parallel_for(N, [&](std::size_t b0, std::size_t b1) {
            for (std::size_t k = b0; k < b1; ++k) {
                const Vec3& p = grid_p.nodes[k];
                const Vec3 v = p / pair[a].p0(p);
                const Sums c = q_sums(p, a, grid_q, sd, pair, params);
                out.sigma_f[a][k] = c.sigma_J + c.sigma_f;
                out.a_f[a][k] = -(c.w + c.transfer);

                // Divergences in p by central differences of the q-sums.
                double div_sv = 0.0, div_w = 0.0;
                for (int i = 0; i < 3; ++i) {
                    Vec3 pp = p, pm = p;
                    pp[i] += delta;
                    pm[i] -= delta;
                    const Sums sp = q_sums(pp, a, grid_q, sd, pair, params);
                    const Sums sm = q_sums(pm, a, grid_q, sd, pair, params);
                    const Vec3 vp = pp / pair[a].p0(pp), vm = pm / pair[a].p0(pm);
                    div_sv += ((sp.sigma_J * vp)[i] - (sm.sigma_J * vm)[i]) / (2.0 * delta);
                    div_w += (sp.w[i] - sm.w[i]) / (2.0 * delta);
                }
                out.C_f[a][k] = v.dot(c.sigma_J * v) / (4.0 * kT * kT) - div_sv / (2.0 * kT) + div_w -
                                v.dot(c.w) / (2.0 * kT);
            }
        });
    }
    return out;
}

} // namespace rvml
