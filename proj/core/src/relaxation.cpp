#include "rvml/rng.hpp"
#include "rvml/scenarios.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rvml {

DistributionVector initial_state(const RelaxationConfig& cfg, const VelocityGrid& grid, const ProjectionBasis& basis)
{
    const std::size_t N = grid.size();
    DistributionVector f(N);
    switch (cfg.recipe) {
    case InitialRecipe::random_microscopic: {
        CounterRng rng(cfg.seed, "relaxation/initial");
        for (int a = 0; a < 2; ++a)
            for (std::size_t k = 0; k < N; ++k) f.values[a * N + k] = rng.uniform(-1.0, 1.0) * basis.sqrt_j[a][k];
        f.values -= project(f, basis, grid).Pf.values;
        break;
    }
    case InitialRecipe::basis_element:
        if (cfg.basis_index < 1 || cfg.basis_index > 6) throw ConfigError("relaxation: basis_index must be in 1..6");
        f = basis.chi[cfg.basis_index - 1];
        break;
    case InitialRecipe::juttner_bump:
        for (int a = 0; a < 2; ++a)
            for (std::size_t k = 0; k < N; ++k) {
                const double r2 = (grid.nodes[k] - cfg.bump_center).squaredNorm();
                f.values[a * N + k] = cfg.bump_amplitude * basis.sqrt_j[a][k] *
                                      std::exp(-r2 / (2.0 * cfg.bump_width * cfg.bump_width));
            }
        break;
    }
    const double nf = norm(grid, f);
    if (cfg.recipe == InitialRecipe::random_microscopic && nf > 0.0) f.values /= nf;
    return f;
}

RelaxationResult run_relaxation(const RelaxationConfig& cfg, const LinearizedOperator& L, const CollisionContext* ctx,
                                 std::optional<double> delta_hat)
{
    if (!(cfg.dt > 0.0) || !(cfg.t_end > 0.0) || cfg.stride < 1) throw ConfigError("relaxation: need dt > 0, t_end > 0, stride >= 1");
    if (cfg.k_max < 0 || cfg.k_max > 2) throw ConfigError("relaxation: k_max must be 0, 1 or 2");
    if (cfg.nonlinear_epsilon < 0.0) throw ConfigError("relaxation: nonlinear_epsilon must be >= 0");
    if (cfg.nonlinear_epsilon > 0.0 && cfg.integrator == Integrator::exact_exponential)
        throw ConfigError("relaxation: the exact exponential integrator is linear; use implicit_midpoint for eps > 0");
    if (cfg.nonlinear_epsilon > 0.0 && !ctx) throw ConfigError("relaxation: eps > 0 needs a collision context");

    const VelocityGrid& grid = L.grid;
    const ProjectionBasis basis = build_basis(grid, L.pair, BasisConstants::grid);
    const DistributionVector f0 = initial_state(cfg, grid, basis);
    const long steps = std::lround(cfg.t_end / cfg.dt);
    const double f0_norm = norm(grid, f0);

    RelaxationResult res;
    const Eigen::MatrixXd M = L.dense();

    std::function<DistributionVector(long)> snapshot;   // f at step index (multiple of stride), in order
    Eigen::VectorXd lam, coef;
    Eigen::MatrixXd V;
    Eigen::LLT<Eigen::MatrixXd> implicit;
    DistributionVector cur = f0;
    long cur_step = 0;

    if (cfg.integrator == Integrator::exact_exponential) {
        SymmetricEigen se = eigh(M, true);
        lam = se.values;
        V = std::move(se.vectors);
        const double scale = lam.cwiseAbs().maxCoeff();
        double smallest = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < lam.size(); ++i) {
            // null-space eigenvalues are zero up to assembly rounding; keep them exactly stationary
            if (std::abs(lam[i]) < cfg.tol_null * scale) lam[i] = 0.0;
            else smallest = std::min(smallest, lam[i]);
        }
        if (!delta_hat) delta_hat = smallest;
        coef = V.transpose() * f0.values;
        snapshot = [&](long s) {
            const double t = s * cfg.dt;
            Eigen::VectorXd c = coef;
            for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= std::exp(-lam[i] * t);
            return DistributionVector(Eigen::VectorXd(V * c));
        };
    } else {
        Eigen::MatrixXd A = 0.5 * cfg.dt * M;
        A.diagonal().array() += 1.0;
        implicit.compute(A);
        if (implicit.info() != Eigen::Success) throw NumericalError("relaxation: I + dt/2 L is not positive definite", 0, 0);
        snapshot = [&](long s) {
            while (cur_step < s) {
                Eigen::VectorXd rhs = cur.values - 0.5 * cfg.dt * (M * cur.values);
                if (cfg.nonlinear_epsilon > 0.0)
                    rhs += cfg.dt * cfg.nonlinear_epsilon * apply_gamma(cur, cur, *ctx).values;
                cur.values = implicit.solve(rhs);
                ++cur_step;
                const double nf = norm(grid, cur);
                if (!std::isfinite(nf) || nf > cfg.norm_bound)
                    throw NumericalError("relaxation: solution left the norm bound at step " + std::to_string(cur_step),
                                         nf, cfg.norm_bound);
            }
            return cur;
        };
    }
    res.delta_hat = delta_hat.value_or(0.0);

    for (long s = 0; s <= steps; s += cfg.stride) {
        DistributionVector f = snapshot(s);
        const double nf = norm(grid, f);
        if (!std::isfinite(nf) || nf > cfg.norm_bound)
            throw NumericalError("relaxation: solution left the norm bound at step " + std::to_string(s), nf, cfg.norm_bound);
        DiagnosticsRecord r;
        r.t = s * cfg.dt;
        const Projection P = project(f, basis, grid);
        r.moments = P.moments;
        DistributionVector micro(Eigen::VectorXd(f.values - P.Pf.values));
        r.norm_micro = norm(grid, micro);
        r.norm_sq = nf * nf;
        r.dissipation = inner(grid, DistributionVector(Eigen::VectorXd(M * f.values)), f);
        res.records.push_back(r);
        res.snapshots.push_back(std::move(f));
    }

    const double dt_snap = cfg.dt * cfg.stride;
    const FunctionalSeries fs = functionals(res.snapshots, {}, dt_snap, cfg.k_max, basis, grid);
    res.first_functional = fs.offset;
    res.last_functional = fs.offset + fs.I_parallel.size() - 1;
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        const bool has = i >= fs.offset && i - fs.offset < fs.I_parallel.size();
        res.records[i].I_parallel = has ? fs.I_parallel[i - fs.offset] : std::numeric_limits<double>::quiet_NaN();
        res.records[i].D_parallel = has ? fs.D_parallel[i - fs.offset] : std::numeric_limits<double>::quiet_NaN();
    }
    for (std::size_t i = 1; i < fs.I_parallel.size(); ++i)
        if (fs.I_parallel[i] > fs.I_parallel[i - 1]) res.monotone_I = false;

    const auto m0 = res.records.front().moments.as_array();
    double integral = 0.0;
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        const auto& r = res.records[i];
        if (i > 0) {
            integral += 0.5 * dt_snap * (r.dissipation + res.records[i - 1].dissipation);
            const auto m = r.moments.as_array();
            double d = 0.0;
            for (int q = 0; q < 6; ++q) d = std::max(d, std::abs(m[q] - m0[q]));
            res.max_moment_drift = std::max(res.max_moment_drift, d / (r.t * std::max(f0_norm, 1e-300)));
        }
    }
    const double e0 = res.records.front().norm_sq;
    res.energy_closure = std::abs(res.records.back().norm_sq + 2.0 * integral - e0) / std::max(e0, 1e-300);

    std::vector<double> ts, ys;
    const double t_half = 0.5 * res.records.back().t;
    for (const auto& r : res.records)
        if (r.t >= t_half && r.norm_micro > 0.0) {
            ts.push_back(r.t);
            ys.push_back(r.norm_micro);
        }
    if (ts.size() >= 2) {
        const auto [a, b] = fit_log_linear(ts, ys);
        res.fit_intercept = a;
        res.fitted_rate = -b;
    }
    return res;
}

} // namespace rvml
