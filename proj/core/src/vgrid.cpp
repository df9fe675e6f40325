#include "rvml/vgrid.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace rvml {

VelocityGrid build_grid(int n_per_axis, double p_max, const Vec3& stagger)
{
    if (n_per_axis < 2) {
        std::ostringstream os;
        os << "build_grid: n_per_axis must be >= 2 (got " << n_per_axis << ")";
        throw ConfigError(os.str());
    }
    if (!(p_max > 0.0) || !std::isfinite(p_max)) {
        std::ostringstream os;
        os << "build_grid: p_max must be a positive finite number (got " << p_max << ")";
        throw ConfigError(os.str());
    }
    for (int a = 0; a < 3; ++a)
        if (stagger[a] != 0.0 && stagger[a] != 0.5)
            throw ConfigError("build_grid: stagger components must be 0 or 1/2");

    VelocityGrid g;
    g.n = n_per_axis;
    g.p_max = p_max;
    g.h = 2.0 * p_max / n_per_axis;
    g.stagger = stagger;
    const std::size_t N = static_cast<std::size_t>(n_per_axis) * n_per_axis * n_per_axis;
    g.nodes.resize(N);
    g.weights.assign(N, g.h * g.h * g.h);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k)
                g.nodes[g.index(i, j, k)] = Vec3(g.coord(0, i), g.coord(1, j), g.coord(2, k));
    return g;
}

double quad(const VelocityGrid& grid, std::span<const double> values)
{
    if (values.size() != grid.size())
        throw std::invalid_argument("quad: value count does not match grid");
    double s = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) s += grid.weights[k] * values[k];
    return s;
}

QuadResult adaptive_quad_1d(const std::function<double(double)>& f, double a, double b,
                            double tol, unsigned max_depth)
{
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    if (!(tol > 0.0)) throw ConfigError("adaptive_quad_1d: tol must be positive");
    double err = 0.0, l1 = 0.0;
    // Boost terminates on a relative criterion; convert the absolute target
    // using a first coarse pass for the L1 scale.
    double value = GK::integrate(f, a, b, 3, 1e-3, &err, &l1);
    const double rel = std::max(tol / std::max(l1, std::numeric_limits<double>::min()),
                                4.0 * std::numeric_limits<double>::epsilon());
    value = GK::integrate(f, a, b, max_depth, rel, &err, &l1);
    if (!(err <= tol) || !std::isfinite(value)) {
        std::ostringstream os;
        os << "adaptive_quad_1d: no convergence on [" << a << ", " << b << "], estimate "
           << value << ", error " << err << " > tol " << tol;
        throw NumericalError(os.str(), value, err);
    }
    return {value, err};
}

QuadResult adaptive_quad_1d_inf(const std::function<double(double)>& f, double a,
                                const std::function<double(double)>& envelope, double tol,
                                double scale, unsigned max_depth)
{
    double len = scale;
    int guard = 0;
    while (envelope(a + len) >= tol / 100.0) {
        len *= 2.0;
        if (++guard > 60) throw NumericalError("adaptive_quad_1d_inf: envelope does not decay", 0.0, 0.0);
    }
    // Split at the scale so the adaptive rule sees the bulk and the tail separately.
    int pieces = 0;
    for (double lo = a, piece = scale; lo < a + len; piece *= 2.0, ++pieces) lo = std::min(a + len, lo + piece);
    QuadResult r;
    double lo = a;
    for (double piece = scale; lo < a + len; piece *= 2.0) {
        const double hi = std::min(a + len, lo + piece);
        const QuadResult q = adaptive_quad_1d(f, lo, hi, tol / (2.0 * pieces), max_depth);
        r.value += q.value;
        r.error += q.error;
        lo = hi;
    }
    r.error += tol / 100.0;
    return r;
}

} // namespace rvml
