#include "rvml/landau.hpp"

#include <cmath>
#include <sstream>

namespace rvml {

namespace {
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
}

double assembly_memory_mb(const VelocityGrid& grid)
{
    const double n2 = 2.0 * static_cast<double>(grid.size());
    return 2.0 * n2 * n2 * sizeof(double) / (1024.0 * 1024.0);
}

DistributionVector LinearizedOperator::apply(const DistributionVector& f) const
{
    if (static_cast<std::size_t>(f.values.size()) != unknowns()) throw std::invalid_argument("apply: size mismatch");
    return DistributionVector(Eigen::VectorXd(A_part * f.values - K_part * f.values));
}

Eigen::MatrixXd LinearizedOperator::dense() const
{
    Eigen::MatrixXd M = -K_part;
    for (int k = 0; k < A_part.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A_part, k); it; ++it) M(it.row(), it.col()) += it.value();
    return M;
}

LinearizedOperator assemble_L(const VelocityGrid& grid_p, const VelocityGrid& grid_q, const PlasmaPair& pair,
                              const CollisionParams& params)
{
    const double need = assembly_memory_mb(grid_p);
    if (need > params.memory_budget_mb) {
        std::ostringstream os;
        os << "assemble_L: grid " << grid_p.n << "^3 needs about " << need << " MB for the dense coupling block"
           << " and one solver copy (2N = " << 2 * grid_p.size() << " unknowns); budget is "
           << params.memory_budget_mb << " MB";
        throw ConfigError(os.str());
    }
    return assemble_L(make_context(grid_p, pair, params), grid_q);
}

LinearizedOperator assemble_L(const CollisionContext& ctx, const VelocityGrid& grid_q)
{
    const VelocityGrid& grid = ctx.grid;
    if (grid_q.n != grid.n || grid_q.p_max != grid.p_max || grid_q.stagger != Vec3::Constant(0.5))
        throw ConfigError("assemble_L: grid_q must be the half-staggered companion of grid_p");

    const FaceSet& fs = ctx.faces;
    const std::size_t N = grid.size(), F = fs.size();
    const double h3 = grid.h * grid.h * grid.h;
    const int blocks = ctx.uniform ? 1 : 4;

    RowMat K = RowMat::Zero(2 * N, 2 * N);
    std::vector<Mat3> sigma(2 * F, Mat3::Zero());

    for (const auto& cls : fs.color_classes) {
        parallel_for(cls.size(), [&](std::size_t b0, std::size_t b1) {
            // Y[blk][beta][c * N + node]: sum over partners t of W_b(t) Phi~ g_t.
            std::vector<double> Y(static_cast<std::size_t>(blocks) * 2 * 3 * N);
            for (std::size_t ci = b0; ci < b1; ++ci) {
                const int s = cls[ci];
                std::fill(Y.begin(), Y.end(), 0.0);
                std::array<Mat3, 2> sig{Mat3::Zero(), Mat3::Zero()};
                const int fam = fs.family[s];
                for (int e = 0; e < 3; ++e) {
                    if (e == fam) continue;
                    for (std::size_t t = fs.family_begin[e]; t < fs.family_begin[e + 1]; ++t) {
                        for (int blk = 0; blk < blocks; ++blk) {
                            const int a = ctx.uniform ? 0 : blk / 2, b = ctx.uniform ? 0 : blk % 2;
                            const Mat3 phi = project_out(kernel_phi(fs.pos[s], fs.pos[t], ctx.unit_kernel(a, b)),
                                                         ctx.grad_p0[a][s] - ctx.grad_p0[b][t]);
                            for (int beta = 0; beta < 2; ++beta) {
                                if (!ctx.uniform && beta != b) continue;
                                const double Lab = ctx.params.coulomb_log[a][beta];
                                const double w = ctx.weight[beta][t] * Lab;
                                if (ctx.uniform) {
                                    sig[0] += w * phi;
                                    sig[1] += w * phi;
                                } else {
                                    sig[a] += w * phi;
                                }
                                double* y = &Y[(static_cast<std::size_t>(blk) * 2 + beta) * 3 * N];
                                for (int q = 0; q < fs.count[t]; ++q) {
                                    const Vec3 v = w * (phi * fs.coef[t][q]);
                                    const int nd = fs.node[t][q];
                                    y[nd] += v[0];
                                    y[N + nd] += v[1];
                                    y[2 * N + nd] += v[2];
                                }
                            }
                        }
                    }
                }
                for (int a = 0; a < 2; ++a) sigma[a * F + s] = (0.5 * h3 * ctx.pair[a].e) * sig[a];

                for (int a = 0; a < 2; ++a) {
                    const double pref = h3 * h3 / 6.0 * ctx.weight[a][s];
                    for (int beta = 0; beta < 2; ++beta) {
                        const int blk = ctx.uniform ? 0 : 2 * a + beta;
                        const double* y = &Y[(static_cast<std::size_t>(blk) * 2 + beta) * 3 * N];
                        for (int q = 0; q < fs.count[s]; ++q) {
                            const Vec3 c = pref * fs.coef[s][q];
                            double* row = K.row(a * N + fs.node[s][q]).data() + beta * N;
                            for (std::size_t j = 0; j < N; ++j)
                                row[j] += c[0] * y[j] + c[1] * y[N + j] + c[2] * y[2 * N + j];
                        }
                    }
                }
            }
        });
    }

    LinearizedOperator op;
    op.grid = grid;
    op.pair = ctx.pair;
    op.face_sigma = sigma;
    op.basis = build_basis(grid, ctx.pair);

    // Local part: sum over faces (h^3/3) J_a(s) g_s^T sigma_s g_s, in u = f/sqrt(J).
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * F * 100);
    for (int a = 0; a < 2; ++a)
        for (std::size_t s = 0; s < F; ++s) {
            const double wa = h3 / 3.0 * ctx.weight[a][s] / ctx.pair[a].e;
            const Mat3& sg = sigma[a * F + s];
            for (int q = 0; q < fs.count[s]; ++q)
                for (int r = 0; r < fs.count[s]; ++r) {
                    const double v = wa * fs.coef[s][q].dot(sg * fs.coef[s][r]);
                    const int i = fs.node[s][q], j = fs.node[s][r];
                    trip.emplace_back(a * N + i, a * N + j,
                                      v / (h3 * ctx.sqrt_j[a][i] * ctx.sqrt_j[a][j]));
                }
        }
    op.A_part.resize(2 * N, 2 * N);
    op.A_part.setFromTriplets(trip.begin(), trip.end());

    // Back to f-variables and symmetrize; record the pre-symmetrization defect.
    Eigen::VectorXd dinv(2 * N);
    for (int a = 0; a < 2; ++a)
        for (std::size_t k = 0; k < N; ++k) dinv[a * N + k] = 1.0 / ctx.sqrt_j[a][k];
    op.K_part.resize(2 * N, 2 * N);
    for (std::size_t i = 0; i < 2 * N; ++i)
        for (std::size_t j = 0; j < 2 * N; ++j) op.K_part(i, j) = K(i, j) * dinv[i] * dinv[j] / h3;
    K.resize(0, 0);

    double asym2 = 0.0;
    for (Eigen::Index j = 0; j < op.K_part.cols(); ++j)
        for (Eigen::Index i = j + 1; i < op.K_part.rows(); ++i) {
            const double a = op.K_part(i, j), b = op.K_part(j, i);
            asym2 += 2.0 * (a - b) * (a - b);
            op.K_part(i, j) = op.K_part(j, i) = 0.5 * (a + b);
        }
    const double asym = std::sqrt(asym2);
    Eigen::SparseMatrix<double> At = op.A_part.transpose();
    const double asymA = (op.A_part - At).norm();
    op.A_part = 0.5 * (op.A_part + At);
    op.assembly_asymmetry = std::hypot(asym, asymA) / op.dense().norm();
    return op;
}

} // namespace rvml
