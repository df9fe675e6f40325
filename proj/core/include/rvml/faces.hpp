#pragma once

#include "rvml/common.hpp"
#include "rvml/equilibria.hpp"
#include "rvml/kernel.hpp"
#include "rvml/vgrid.hpp"

#include <array>
#include <span>
#include <vector>

namespace rvml {

/**
 * Gradient sample points of the collision discretization: the interior
 * cell faces of the velocity grid, in three families (normal along p1, p2,
 * p3). Family d is the base grid shifted by h/2 along axis d. The gradient
 * at a face uses the normal difference of its two nodes and the average of
 * the nodes' transverse differences, so it is exact on affine functions.
 */
struct FaceSet {
    static constexpr int max_stencil = 10;

    std::vector<int> family;
    std::vector<Vec3> pos;
    std::vector<int> lo, hi;
    std::vector<int> count;
    std::vector<std::array<int, max_stencil>> node;
    std::vector<std::array<Vec3, max_stencil>> coef;
    std::array<std::size_t, 4> family_begin{};
    // Faces of one class touch pairwise disjoint node sets.
    std::vector<std::vector<int>> color_classes;

    std::size_t size() const { return pos.size(); }
    Vec3 gradient(std::size_t s, std::span<const double> u) const
    {
        Vec3 g = Vec3::Zero();
        for (int e = 0; e < count[s]; ++e) g += coef[s][e] * u[node[s][e]];
        return g;
    }
    double average(std::size_t s, std::span<const double> u) const { return 0.5 * (u[lo[s]] + u[hi[s]]); }
};

FaceSet build_faces(const VelocityGrid& grid);

/** Coulomb logarithms per species pair (symmetric). */
struct CollisionParams {
    std::array<std::array<double, 2>, 2> coulomb_log{{{1.0, 1.0}, {1.0, 1.0}}};
    double memory_budget_mb = 4096.0;
};

/** Everything the pair sums need, precomputed once per grid and species pair. */
struct CollisionContext {
    VelocityGrid grid;
    PlasmaPair pair;
    CollisionParams params;
    FaceSet faces;
    bool uniform = false;   // equal masses and one Coulomb logarithm: one kernel serves all blocks
    std::array<std::vector<double>, 2> weight;   // e_a J_a at faces
    std::array<std::vector<Vec3>, 2> grad_p0;     // discrete gradient of p0_a at faces
    std::array<Eigen::VectorXd, 2> sqrt_j;        // sqrt(J_a) at nodes

    KernelParams unit_kernel(int a, int b) const
    {
        return KernelParams{pair[a].m, pair[b].m, 1.0, 1.0, 1.0};
    }
};

CollisionContext make_context(const VelocityGrid& grid, const PlasmaPair& pair, const CollisionParams& params);

/**
 * Kernel restricted to the complement of d: P Phi P with P = I - d d^T/|d|^2.
 * d is the discrete counterpart of p/p0 - q/q0, so the pair form keeps the
 * discrete energy as an exact invariant.
 */
inline Mat3 project_out(const Mat3& phi, const Vec3& d)
{
    const double dd = d.squaredNorm();
    if (dd == 0.0) return phi;
    const Vec3 n = d / std::sqrt(dd);
    const Vec3 v = phi * n;
    const double a = n.dot(v);
    return phi - n * v.transpose() - v * n.transpose() + a * (n * n.transpose());
}

} // namespace rvml
