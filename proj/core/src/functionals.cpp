#include "rvml/scenarios.hpp"

#include <cmath>

namespace rvml {

double grad_norm_sq(const VelocityGrid& grid, const DistributionVector& f)
{
    const int n = grid.n;
    const std::size_t N = grid.size();
    const double h = grid.h, w = h * h * h;
    double s = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    const double v = f.values[a * N + grid.index(i, j, k)];
                    if (i + 1 < n) s += std::pow((f.values[a * N + grid.index(i + 1, j, k)] - v) / h, 2);
                    if (j + 1 < n) s += std::pow((f.values[a * N + grid.index(i, j + 1, k)] - v) / h, 2);
                    if (k + 1 < n) s += std::pow((f.values[a * N + grid.index(i, j, k + 1)] - v) / h, 2);
                }
    return s * w;
}

std::pair<double, double> fit_log_linear(const std::vector<double>& t, const std::vector<double>& y)
{
    const std::size_t n = t.size();
    if (n < 2 || y.size() != n) throw ConfigError("fit_log_linear: need at least two points");
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ly = std::log(y[i]);
        st += t[i];
        sy += ly;
        stt += t[i] * t[i];
        sty += t[i] * ly;
    }
    const double b = (n * sty - st * sy) / (n * stt - st * st);
    return {(sy - b * st) / n, b};
}

namespace {

double em_norm_sq(const std::array<std::vector<double>, 3>& E, const std::array<std::vector<double>, 3>& B, double dV)
{
    double s = 0.0;
    for (int c = 0; c < 3; ++c) {
        for (double v : E[c]) s += v * v;
        for (double v : B[c]) s += v * v;
    }
    return s * dV;
}

} // namespace

FunctionalSeries functionals(const std::vector<DistributionVector>& f, const std::vector<EMFieldState>& em,
                             double dt_snap, int k_max, const ProjectionBasis& basis, const VelocityGrid& grid)
{
    if (k_max < 0 || k_max > 2) throw ConfigError("functionals: k_max must be 0, 1 or 2");
    if (f.size() < static_cast<std::size_t>(2 * k_max + 1))
        throw ConfigError("functionals: need at least 2 k_max + 1 snapshots");
    if (!em.empty() && em.size() != f.size()) throw ConfigError("functionals: field and distribution snapshots differ in count");
    if (!(dt_snap > 0.0)) throw ConfigError("functionals: snapshot spacing must be positive");

    FunctionalSeries out;
    out.offset = k_max > 0 ? 1 : 0;
    const double dV = em.empty() ? 0.0 : em.front().cell_volume();
    for (std::size_t n = out.offset; n + out.offset < f.size(); ++n) {
        double I = 0.0, D = 0.0;
        for (int k = 0; k <= k_max; ++k) {
            DistributionVector d;
            std::array<std::vector<double>, 3> dE, dB;
            auto combine = [&](double cm, double c0, double cp) {
                d = DistributionVector(Eigen::VectorXd(c0 * f[n].values));
                if (cm != 0.0) d.values += cm * f[n - 1].values;
                if (cp != 0.0) d.values += cp * f[n + 1].values;
                if (em.empty()) return;
                for (int c = 0; c < 3; ++c) {
                    dE[c].assign(em[n].E[c].size(), 0.0);
                    dB[c].assign(em[n].B[c].size(), 0.0);
                    for (std::size_t q = 0; q < dE[c].size(); ++q) {
                        dE[c][q] = c0 * em[n].E[c][q] + (cm != 0.0 ? cm * em[n - 1].E[c][q] : 0.0) +
                                   (cp != 0.0 ? cp * em[n + 1].E[c][q] : 0.0);
                        dB[c][q] = c0 * em[n].B[c][q] + (cm != 0.0 ? cm * em[n - 1].B[c][q] : 0.0) +
                                   (cp != 0.0 ? cp * em[n + 1].B[c][q] : 0.0);
                    }
                }
            };
            if (k == 0) combine(0.0, 1.0, 0.0);
            else if (k == 1) combine(-0.5 / dt_snap, 0.0, 0.5 / dt_snap);
            else combine(1.0 / (dt_snap * dt_snap), -2.0 / (dt_snap * dt_snap), 1.0 / (dt_snap * dt_snap));
            I += inner(grid, d, d);
            if (!em.empty()) I += em_norm_sq(dE, dB, dV);
            DistributionVector micro(Eigen::VectorXd(d.values - project(d, basis, grid).Pf.values));
            D += inner(grid, micro, micro) + grad_norm_sq(grid, micro);
        }
        out.times.push_back(static_cast<double>(n) * dt_snap);
        out.I_parallel.push_back(I);
        out.D_parallel.push_back(D);
    }
    return out;
}

} // namespace rvml
