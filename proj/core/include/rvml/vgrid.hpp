#pragma once

#include "rvml/common.hpp"

#include <functional>
#include <span>
#include <vector>

namespace rvml {

/**
 * Midpoint tensor grid on the cube [-p_max, p_max]^3, optionally shifted by
 * stagger * h along each axis. Node (i,j,k) has flat index (i*n + j)*n + k.
 */
struct VelocityGrid {
    int n = 0;
    double p_max = 0.0;
    double h = 0.0;
    Vec3 stagger = Vec3::Zero();
    std::vector<Vec3> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
    std::size_t index(int i, int j, int k) const
    {
        return (static_cast<std::size_t>(i) * n + j) * n + k;
    }
    double coord(int axis, int i) const { return -p_max + (i + 0.5 + stagger[axis]) * h; }
    bool unstaggered() const { return stagger.isZero(0.0); }
};

VelocityGrid build_grid(int n_per_axis, double p_max, const Vec3& stagger = Vec3::Zero());

// The companion used for singular q-integrals: shifted by half a cell on every axis.
inline VelocityGrid staggered_companion(const VelocityGrid& g)
{
    return build_grid(g.n, g.p_max, Vec3::Constant(0.5));
}

double quad(const VelocityGrid& grid, std::span<const double> values);

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

/**
 * Adaptive Gauss-Kronrod (7/15) on [a, b]. Throws NumericalError when the
 * estimated absolute error stays above tol within max_depth bisections.
 */
QuadResult adaptive_quad_1d(const std::function<double(double)>& f, double a, double b,
                            double tol, unsigned max_depth = 24);

/**
 * Semi-infinite version on [a, inf). The interval is cut at the first
 * R = a + 2^k * scale with envelope(R) < tol/100; the caller supplies an
 * envelope that bounds |f| beyond R (and its tail mass up to that factor).
 */
QuadResult adaptive_quad_1d_inf(const std::function<double(double)>& f, double a,
                                const std::function<double(double)>& envelope, double tol,
                                double scale = 1.0, unsigned max_depth = 24);

} // namespace rvml
