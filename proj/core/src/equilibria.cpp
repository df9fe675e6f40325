#include "rvml/equilibria.hpp"
#include "rvml/vgrid.hpp"

#include <cmath>
#include <numbers>

namespace rvml {

namespace {
constexpr double pi = std::numbers::pi;
}

void SpeciesParams::validate() const
{
    if (!(m > 0.0)) throw ConfigError("species: mass must be positive");
    if (!(e > 0.0)) throw ConfigError("species: charge magnitude must be positive");
    if (!(kT > 0.0)) throw ConfigError("species: k_bT must be positive");
    if (sign != 1 && sign != -1) throw ConfigError("species: sign must be +1 or -1");
}

void PlasmaPair::validate() const
{
    plus.validate();
    minus.validate();
    if (plus.sign != 1 || minus.sign != -1) throw ConfigError("pair: expected (+, -) species ordering");
    if (plus.kT != minus.kT) throw ConfigError("pair: species must share k_bT");
}

double bessel_k2(double s, double tol)
{
    if (!(s > 0.0)) throw ConfigError("bessel_k2: argument must be positive");
    // t = 1 + u pulls exp(-s) out of the integral, so large s does not underflow.
    auto f = [s](double u) { return std::exp(-s * u) * std::pow(u * (u + 2.0), 1.5); };
    auto env = [s](double u) { return std::exp(-s * u) * std::pow(u + 2.0, 3.0) / s; };
    const double scale = 1.0 / s;
    const double rough = adaptive_quad_1d_inf(f, 0.0, env, 1e-3 * std::pow(scale, 4.0), scale).value;
    const double I = adaptive_quad_1d_inf(f, 0.0, env, tol * rough, scale).value;
    return s * s / 3.0 * std::exp(-s) * I;
}

Juttner::Juttner(const SpeciesParams& sp) : sp_(sp)
{
    sp_.validate();
    norm_ = 1.0 / (4.0 * pi * sp.e * sp.m * sp.m * sp.kT * bessel_k2(sp.m / sp.kT));
}

double juttner(const Vec3& p, const SpeciesParams& sp) { return Juttner(sp)(p); }

double radial_moment(const Juttner& J, const std::function<double(double)>& w, double tol, int growth)
{
    const double kT = J.params().kT;
    auto f = [&](double r) { return 4.0 * pi * r * r * J.of_radius(r) * w(r); };
    auto env = [&](double r) {
        return 4.0 * pi * J.norm() * std::pow(1.0 + r, 2 + growth) * std::exp(-r / kT) * kT;
    };
    return adaptive_quad_1d_inf(f, 0.0, env, tol, 2.0 * kT).value;
}

double mass_constant(const SpeciesParams& sp, double tol)
{
    return radial_moment(Juttner(sp), [](double) { return 1.0; }, tol);
}

double neutrality_residual(double e_plus, double M_plus, double e_minus, double M_minus)
{
    return std::abs(e_plus * M_plus - e_minus * M_minus);
}

double check_neutrality(const PlasmaPair& pair, double tol)
{
    return neutrality_residual(pair.plus.e, mass_constant(pair.plus, tol), pair.minus.e,
                               mass_constant(pair.minus, tol));
}

} // namespace rvml
