#include "rvml/landau.hpp"

#include <cmath>

namespace rvml {

double inner(const VelocityGrid& grid, const DistributionVector& f, const DistributionVector& g)
{
    const std::size_t N = grid.size();
    if (f.n_nodes() != N || g.n_nodes() != N) throw std::invalid_argument("inner: grid mismatch");
    double s = 0.0;
    for (int a = 0; a < 2; ++a)
        for (std::size_t k = 0; k < N; ++k) s += grid.weights[k] * f.values[a * N + k] * g.values[a * N + k];
    return s;
}

Eigen::Matrix<double, 6, 6> ProjectionBasis::gram(const VelocityGrid& grid) const
{
    Eigen::Matrix<double, 6, 6> G;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) G(i, j) = inner(grid, chi[i], chi[j]);
    return G;
}

ProjectionBasis build_basis(const VelocityGrid& grid, const PlasmaPair& pair, BasisConstants constants, double tol)
{
    pair.validate();
    if (!grid.unstaggered()) throw ConfigError("build_basis: grid must be unstaggered");
    const std::size_t N = grid.size();
    ProjectionBasis B;
    B.constants = constants;

    std::array<Juttner, 2> J{Juttner(pair.plus), Juttner(pair.minus)};
    for (int a = 0; a < 2; ++a) {
        B.sqrt_j[a].resize(N);
        B.p0[a].resize(N);
        for (std::size_t k = 0; k < N; ++k) {
            B.sqrt_j[a][k] = J[a].sqrt_at(grid.nodes[k]);
            B.p0[a][k] = pair[a].p0(grid.nodes[k]);
        }
    }

    // Moments int J w(p) dp, either radial or on the grid.
    auto moment = [&](int a, auto&& w_radial, auto&& w_node, int growth) {
        if (constants == BasisConstants::radial) return radial_moment(J[a], w_radial, tol, growth);
        double s = 0.0;
        for (std::size_t k = 0; k < N; ++k) s += grid.weights[k] * B.sqrt_j[a][k] * B.sqrt_j[a][k] * w_node(k);
        return s;
    };

    std::array<double, 2> M{}, k2{}, p1sq{};
    for (int a = 0; a < 2; ++a) {
        const SpeciesParams sp = pair[a];
        M[a] = moment(a, [](double) { return 1.0; }, [](std::size_t) { return 1.0; }, 0);
        k2[a] = moment(a, [sp](double r) { return sp.p0(r); }, [&](std::size_t k) { return B.p0[a][k]; }, 1) / M[a];
        p1sq[a] = moment(a, [](double r) { return r * r / 3.0; },
                         [&](std::size_t k) { return grid.nodes[k][0] * grid.nodes[k][0]; }, 2);
    }
    double var = 0.0;
    for (int a = 0; a < 2; ++a) {
        const SpeciesParams sp = pair[a];
        const double c = k2[a];
        var += moment(a, [sp, c](double r) { return (sp.p0(r) - c) * (sp.p0(r) - c); },
                      [&](std::size_t k) { return (B.p0[a][k] - c) * (B.p0[a][k] - c); }, 2);
    }
    if (!(M[0] > 0 && M[1] > 0 && p1sq[0] + p1sq[1] > 0 && var > 0))
        throw ConfigError("build_basis: non-positive normalization integral");

    B.M_plus = M[0];
    B.M_minus = M[1];
    B.kappa1 = 1.0 / std::sqrt(p1sq[0] + p1sq[1]);
    B.kappa2_plus = k2[0];
    B.kappa2_minus = k2[1];
    B.kappa3 = 1.0 / std::sqrt(var);

    for (auto& c : B.chi) c = DistributionVector(N);
    for (std::size_t k = 0; k < N; ++k) {
        const Vec3& p = grid.nodes[k];
        for (int a = 0; a < 2; ++a) {
            const double sj = B.sqrt_j[a][k];
            const std::size_t r = a * N + k;
            if (a == 0) B.chi[0].values[r] = sj / std::sqrt(M[0]);
            else B.chi[1].values[r] = sj / std::sqrt(M[1]);
            for (int i = 0; i < 3; ++i) B.chi[2 + i].values[r] = B.kappa1 * p[i] * sj;
            B.chi[5].values[r] = B.kappa3 * (B.p0[a][k] - k2[a]) * sj;
        }
    }
    return B;
}

Projection project(const DistributionVector& f, const ProjectionBasis& B, const VelocityGrid& grid)
{
    const std::size_t N = grid.size();
    if (f.n_nodes() != N) throw std::invalid_argument("project: grid mismatch");
    Moments m;
    double ap = 0, am = 0, c = 0;
    Vec3 b = Vec3::Zero();
    for (std::size_t k = 0; k < N; ++k) {
        const double w = grid.weights[k];
        const double fp = f.values[k] * B.sqrt_j[0][k], fm = f.values[N + k] * B.sqrt_j[1][k];
        ap += w * fp;
        am += w * fm;
        b += w * (fp + fm) * grid.nodes[k];
        c += w * ((B.p0[0][k] - B.kappa2_plus) * fp + (B.p0[1][k] - B.kappa2_minus) * fm);
    }
    m.a_plus = ap / std::sqrt(B.M_plus);
    m.a_minus = am / std::sqrt(B.M_minus);
    m.b = B.kappa1 * b;
    m.c = B.kappa3 * c;

    Projection out{DistributionVector(N), m};
    const std::array<double, 6> coeff = m.as_array();
    for (int i = 0; i < 6; ++i) out.Pf.values += coeff[i] * B.chi[i].values;
    return out;
}

} // namespace rvml
