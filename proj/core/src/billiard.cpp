#include "rvml/rng.hpp"
#include "rvml/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rvml {

namespace {

// Flights run in extended precision: over 1e4 bounces the twist of the
// disk and ball maps amplifies double rounding past the reversibility target.
using Real = long double;
using RVec = Eigen::Matrix<Real, 3, 1>;

template <class V>
V restrict_to(BilliardDomain d, const V& v)
{
    return d == BilliardDomain::disk ? V(v[0], v[1], 0) : v;
}

RVec velocity(const RVec& p, Real m) { return p / std::sqrt(m * m + p.squaredNorm()); }

Real wall_time(BilliardDomain domain, Real radius, const RVec& x, const RVec& v)
{
    const RVec xr = restrict_to(domain, x), vr = restrict_to(domain, v);
    const Real a = vr.squaredNorm();
    if (a == 0) return std::numeric_limits<Real>::infinity();
    const Real b = 2 * xr.dot(vr);
    const Real c = xr.squaredNorm() - radius * radius;
    const Real disc = std::max(Real(0), b * b - 4 * a * c);
    // Stable roots; the later one is the exit (the other is ~0 or negative when starting on the wall).
    const Real q = -(b + std::copysign(std::sqrt(disc), b)) / 2;
    const Real r1 = q / a;
    const Real r2 = q != 0 ? c / q : r1;
    return std::max({r1, r2, Real(0)});
}

struct Flight {
    RVec x, p;
    long reflections = 0;
};

// Advance for time T, reflecting at the wall; `on_reflect` sees the state after each bounce.
template <class F>
void fly(const BilliardConfig& cfg, Flight& s, Real T, long max_refl, F&& on_reflect, Real* t_stop)
{
    Real t = 0;
    while (true) {
        const RVec v = velocity(s.p, cfg.mass);
        const Real tw = wall_time(cfg.domain, cfg.radius, s.x, v);
        if (s.reflections >= max_refl) {
            // stop half way along the current flight
            const Real half = std::isfinite(tw) ? tw / 2 : 0;
            const Real dtl = std::min(half, T - t);
            s.x += v * dtl;
            t += dtl;
            break;
        }
        if (t + tw >= T) {
            s.x += v * (T - t);
            t = T;
            break;
        }
        s.x += v * tw;
        t += tw;
        const RVec n = restrict_to(cfg.domain, s.x).normalized();
        const RVec before = s.p;
        s.p = s.p - 2 * s.p.dot(n) * n;
        ++s.reflections;
        on_reflect(s, before, n);
    }
    if (t_stop) *t_stop = t;
}

} // namespace

double time_to_wall(BilliardDomain domain, double radius, const Vec3& x, const Vec3& v)
{
    return static_cast<double>(wall_time(domain, radius, x.cast<Real>(), v.cast<Real>()));
}

std::vector<Particle> random_particles(BilliardDomain domain, double radius, std::size_t n, std::uint64_t seed)
{
    CounterRng rng(seed, "billiard");
    std::vector<Particle> out;
    out.reserve(n);
    while (out.size() < n) {
        Particle q;
        for (int c = 0; c < 3; ++c) q.x[c] = rng.uniform(-0.9 * radius, 0.9 * radius);
        for (int c = 0; c < 3; ++c) q.p[c] = rng.uniform(-2.0, 2.0);
        if (restrict_to(domain, q.x).norm() < 0.9 * radius && restrict_to(domain, q.p).norm() > 1e-3)
            out.push_back(q);
    }
    return out;
}

BilliardReport run_billiard(const BilliardConfig& cfg)
{
    if (!(cfg.radius > 0.0) || !(cfg.mass > 0.0)) throw ConfigError("billiard: radius and mass must be positive");
    if (!(cfg.t_end > 0.0) || cfg.max_reflections < 0) throw ConfigError("billiard: need t_end > 0 and max_reflections >= 0");
    for (std::size_t i = 0; i < cfg.particles.size(); ++i)
        if (!(restrict_to(cfg.domain, cfg.particles[i].x).norm() < cfg.radius))
            throw ConfigError("billiard: particle " + std::to_string(i) + " is not strictly inside the domain");

    BilliardReport rep;
    rep.particles.resize(cfg.particles.size());
    parallel_for(cfg.particles.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const Particle& p0 = cfg.particles[i];
            ParticleReport& r = rep.particles[i];
            // Conservation is measured on the double-precision state a caller would see.
            const double pn0 = p0.p.norm();
            const Vec3 L0 = p0.x.cross(p0.p);
            auto dL = [&](const RVec& x, const RVec& p) {
                const Vec3 xd = x.cast<double>(), pd = p.cast<double>();
                return Vec3((xd.cross(pd) - L0).cwiseAbs());
            };
            Flight s{p0.x.cast<Real>(), p0.p.cast<Real>()};
            Real t_stop = 0;
            fly(cfg, s, cfg.t_end, cfg.max_reflections,
                [&](const Flight& st, const RVec& before, const RVec& n) {
                    r.max_dp_norm = std::max(r.max_dp_norm, std::abs(st.p.cast<double>().norm() - pn0));
                    r.max_dL = r.max_dL.cwiseMax(dL(st.x, st.p));
                    const RVec back = st.p - 2 * st.p.dot(n) * n;
                    r.max_involution = std::max(r.max_involution, static_cast<double>((back - before).norm()));
                },
                &t_stop);
            r.t_stop = static_cast<double>(t_stop);
            r.reflections = s.reflections;
            r.final_state = {s.x.cast<double>(), s.p.cast<double>()};
            r.max_dp_norm = std::max(r.max_dp_norm, std::abs(s.p.cast<double>().norm() - pn0));
            r.max_dL = r.max_dL.cwiseMax(dL(s.x, s.p));

            Flight back{s.x, -s.p};
            fly(cfg, back, t_stop, std::numeric_limits<long>::max(), [](const Flight&, const RVec&, const RVec&) {},
                nullptr);
            r.reversal_error = (back.x.cast<double>() - p0.x).norm();
        }
    });
    for (const auto& r : rep.particles) {
        rep.max_dp_norm = std::max(rep.max_dp_norm, r.max_dp_norm);
        rep.max_dL_axial = std::max(rep.max_dL_axial, cfg.domain == BilliardDomain::disk ? r.max_dL[2] : r.max_dL.maxCoeff());
        rep.max_dL_all = std::max(rep.max_dL_all, r.max_dL.maxCoeff());
        rep.max_reversal = std::max(rep.max_reversal, r.reversal_error);
        rep.max_involution = std::max(rep.max_involution, r.max_involution);
        rep.total_reflections += r.reflections;
    }
    return rep;
}

} // namespace rvml
