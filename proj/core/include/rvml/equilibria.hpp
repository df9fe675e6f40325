#pragma once

#include "rvml/common.hpp"

#include <functional>

namespace rvml {

/** One species: mass, charge magnitude, charge sign and temperature. */
struct SpeciesParams {
    double m = 1.0;
    double e = 1.0;
    int sign = +1;
    double kT = 1.0;

    void validate() const;
    double p0(double r) const { return std::sqrt(m * m + r * r); }
    double p0(const Vec3& p) const { return std::sqrt(m * m + p.squaredNorm()); }
};

struct PlasmaPair {
    SpeciesParams plus{1.0, 1.0, +1, 1.0};
    SpeciesParams minus{1.0, 1.0, -1, 1.0};

    void validate() const;
    const SpeciesParams& operator[](int s) const { return s == 0 ? plus : minus; }
};

// K_2(s) from (s^2/3) int_1^inf exp(-s t) (t^2-1)^{3/2} dt; tol is relative.
double bessel_k2(double s, double tol = 1e-12);

/** Normalized Juettner profile (4 pi e m^2 kT K_2(m/kT))^{-1} exp(-p0/kT). */
class Juttner {
public:
    explicit Juttner(const SpeciesParams& sp);

    double operator()(const Vec3& p) const { return norm_ * std::exp(-sp_.p0(p) / sp_.kT); }
    double of_radius(double r) const { return norm_ * std::exp(-sp_.p0(r) / sp_.kT); }
    double sqrt_at(const Vec3& p) const { return std::sqrt(norm_) * std::exp(-0.5 * sp_.p0(p) / sp_.kT); }
    Vec3 gradient(const Vec3& p) const { return -(p / (sp_.kT * sp_.p0(p))) * (*this)(p); }
    double norm() const { return norm_; }
    const SpeciesParams& params() const { return sp_; }

private:
    SpeciesParams sp_;
    double norm_;
};

double juttner(const Vec3& p, const SpeciesParams& sp);

/**
 * int J(p) w(|p|) dp by radial adaptive quadrature. The weight must obey
 * |w(r)| <= (1+r)^growth so the truncation envelope is valid.
 */
double radial_moment(const Juttner& J, const std::function<double(double)>& w, double tol,
                     int growth = 0);

double mass_constant(const SpeciesParams& sp, double tol = 1e-12);

double neutrality_residual(double e_plus, double M_plus, double e_minus, double M_minus);
double check_neutrality(const PlasmaPair& pair, double tol = 1e-12);

} // namespace rvml
