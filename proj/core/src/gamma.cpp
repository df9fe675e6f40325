#include "rvml/landau.hpp"

namespace rvml {

namespace {

// Nodal C_a(F_a, sum_b H_b) in the weak pair form: the flux at p-face s
// pairs with q-faces t of the two other families.
DistributionVector pair_collision(const Eigen::VectorXd& F, const Eigen::VectorXd& H, const CollisionContext& ctx)
{
    const FaceSet& fs = ctx.faces;
    const std::size_t N = ctx.grid.size(), nf = fs.size();
    const double h3 = ctx.grid.h * ctx.grid.h * ctx.grid.h;

    std::array<std::vector<double>, 2> Fs, Hs;
    std::array<std::vector<Vec3>, 2> gF, gH;
    for (int a = 0; a < 2; ++a) {
        const std::span<const double> fa(F.data() + a * N, N), ha(H.data() + a * N, N);
        Fs[a].resize(nf);
        Hs[a].resize(nf);
        gF[a].resize(nf);
        gH[a].resize(nf);
        for (std::size_t s = 0; s < nf; ++s) {
            Fs[a][s] = fs.average(s, fa);
            Hs[a][s] = fs.average(s, ha);
            gF[a][s] = fs.gradient(s, fa);
            gH[a][s] = fs.gradient(s, ha);
        }
    }

    std::vector<Vec3> flux(2 * nf, Vec3::Zero());
    parallel_for(nf, [&](std::size_t b0, std::size_t b1) {
        for (std::size_t s = b0; s < b1; ++s) {
            // Per species pair: sum_t Phi H(t) and sum_t Phi grad H(t).
            Mat3 sH[2][2];
            Vec3 sG[2][2];
            for (auto& r : sH) r[0] = r[1] = Mat3::Zero();
            for (auto& r : sG) r[0] = r[1] = Vec3::Zero();
            const int fam = fs.family[s];
            for (int e = 0; e < 3; ++e) {
                if (e == fam) continue;
                for (std::size_t t = fs.family_begin[e]; t < fs.family_begin[e + 1]; ++t) {
                    if (ctx.uniform) {
                        const Mat3 phi = project_out(kernel_phi(fs.pos[s], fs.pos[t], ctx.unit_kernel(0, 0)),
                                                     ctx.grad_p0[0][s] - ctx.grad_p0[0][t]);
                        for (int b = 0; b < 2; ++b) {
                            sH[0][b] += Hs[b][t] * phi;
                            sG[0][b] += phi * gH[b][t];
                        }
                    } else {
                        for (int a = 0; a < 2; ++a)
                            for (int b = 0; b < 2; ++b) {
                                const Mat3 phi = project_out(kernel_phi(fs.pos[s], fs.pos[t], ctx.unit_kernel(a, b)),
                                                             ctx.grad_p0[a][s] - ctx.grad_p0[b][t]);
                                sH[a][b] += Hs[b][t] * phi;
                                sG[a][b] += phi * gH[b][t];
                            }
                    }
                }
            }
            for (int a = 0; a < 2; ++a) {
                Vec3 fl = Vec3::Zero();
                const int ka = ctx.uniform ? 0 : a;
                for (int b = 0; b < 2; ++b) {
                    const double c = ctx.pair[a].e * ctx.pair[b].e * ctx.params.coulomb_log[a][b];
                    fl += c * (sH[ka][b] * gF[a][s] - Fs[a][s] * sG[ka][b]);
                }
                flux[a * nf + s] = fl;
            }
        }
    });

    DistributionVector out(N);
    for (int a = 0; a < 2; ++a)
        for (std::size_t s = 0; s < nf; ++s) {
            const Vec3& fl = flux[a * nf + s];
            for (int q = 0; q < fs.count[s]; ++q) out.values[a * N + fs.node[s][q]] -= h3 / 6.0 * fs.coef[s][q].dot(fl);
        }
    return out;
}

void check_size(const DistributionVector& v, const CollisionContext& ctx, const char* what)
{
    if (v.n_nodes() != ctx.grid.size() || static_cast<std::size_t>(v.values.size()) != 2 * ctx.grid.size())
        throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

} // namespace

DistributionVector apply_gamma(const DistributionVector& g, const DistributionVector& h, const CollisionContext& ctx)
{
    check_size(g, ctx, "apply_gamma");
    check_size(h, ctx, "apply_gamma");
    const std::size_t N = ctx.grid.size();
    Eigen::VectorXd F(2 * N), H(2 * N);
    for (int a = 0; a < 2; ++a) {
        F.segment(a * N, N) = ctx.sqrt_j[a].cwiseProduct(g.values.segment(a * N, N));
        H.segment(a * N, N) = ctx.sqrt_j[a].cwiseProduct(h.values.segment(a * N, N));
    }
    DistributionVector c = pair_collision(F, H, ctx);
    for (int a = 0; a < 2; ++a) c.values.segment(a * N, N).array() /= ctx.sqrt_j[a].array();
    return c;
}

DistributionVector collision_form(const DistributionVector& F, const CollisionContext& ctx)
{
    check_size(F, ctx, "collision_form");
    return pair_collision(F.values, F.values, ctx);
}

} // namespace rvml
