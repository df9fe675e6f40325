#pragma once

#include "rvml/landau.hpp"
#include "rvml/maxwell.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rvml {

// ---------------------------------------------------------------- billiards

enum class BilliardDomain {
    disk,   // infinite cylinder x^2 + y^2 < R^2, free along z
    ball
};

struct Particle {
    Vec3 x = Vec3::Zero();
    Vec3 p = Vec3::Zero();
};

struct BilliardConfig {
    BilliardDomain domain = BilliardDomain::disk;
    double radius = 1.0;
    double mass = 1.0;
    std::vector<Particle> particles;
    double t_end = 1e300;
    long max_reflections = 10000;
};

struct ParticleReport {
    long reflections = 0;
    double t_stop = 0.0;
    double max_dp_norm = 0.0;     // max over reflections of | |p| - |p(0)| |
    Vec3 max_dL = Vec3::Zero();   // per component of (x - x0) x p, x0 the centre
    double max_involution = 0.0;  // max | R(R p) - p |
    double reversal_error = 0.0;  // |x_back - x0| after reversing and running t_stop again
    Particle final_state;
};

struct BilliardReport {
    std::vector<ParticleReport> particles;
    double max_dp_norm = 0.0;
    double max_dL_axial = 0.0;    // z component (disk) or the largest component (ball)
    double max_dL_all = 0.0;
    double max_reversal = 0.0;
    double max_involution = 0.0;
    long total_reflections = 0;
};

/**
 * Straight flight at velocity p/p0 with exact time of flight to the wall and
 * p -> p - 2 (p.n) n there. A particle stops at t_end, or half way along the
 * flight after its max_reflections-th bounce. Throws ConfigError for particles
 * not strictly inside.
 */
BilliardReport run_billiard(const BilliardConfig& cfg);

// Uniform positions inside 0.9 R and momenta in [-2, 2]^3 from stream (seed, "billiard").
std::vector<Particle> random_particles(BilliardDomain domain, double radius, std::size_t n, std::uint64_t seed);

// Time of flight from x (inside or on the wall) along v to the wall; +inf if it never arrives.
double time_to_wall(BilliardDomain domain, double radius, const Vec3& x, const Vec3& v);

// ---------------------------------------------------------------- relaxation

enum class InitialRecipe { random_microscopic, basis_element, juttner_bump };
enum class Integrator { exact_exponential, implicit_midpoint };

struct RelaxationConfig {
    int n = 12;
    double p_max = 6.0;
    InitialRecipe recipe = InitialRecipe::random_microscopic;
    int basis_index = 3;          // 1..6, for basis_element
    double bump_amplitude = 0.1;  // juttner_bump: amplitude * sqrt(J) * exp(-|p - c|^2 / 2w^2)
    Vec3 bump_center = Vec3(0.5, 0.0, 0.0);
    double bump_width = 1.0;
    Integrator integrator = Integrator::exact_exponential;
    double dt = 0.05;
    double t_end = 15.0;
    int stride = 1;               // record every stride steps
    double nonlinear_epsilon = 0.0;
    int k_max = 1;
    double norm_bound = 1e6;
    double tol_null = 5e-2;
    std::uint64_t seed = 1;
};

struct DiagnosticsRecord {
    double t = 0.0;
    double I_parallel = 0.0;
    double D_parallel = 0.0;
    Moments moments;
    double norm_micro = 0.0;
    double norm_sq = 0.0;         // ||f||^2
    double dissipation = 0.0;     // <L f, f>
};

struct RelaxationResult {
    std::vector<DiagnosticsRecord> records;   // all snapshot times; I and D are NaN-free only inside
    std::size_t first_functional = 0, last_functional = 0;   // records carrying I and D, inclusive
    double fitted_rate = 0.0;
    double fit_intercept = 0.0;
    double delta_hat = 0.0;
    double max_moment_drift = 0.0;            // max_t max_i |m_i(t) - m_i(0)| / (t ||f0||)
    double energy_closure = 0.0;              // | ||f||^2 + 2 int <Lf,f> - ||f0||^2 | / ||f0||^2
    bool monotone_I = true;
    std::vector<DistributionVector> snapshots;
};

DistributionVector initial_state(const RelaxationConfig& cfg, const VelocityGrid& grid, const ProjectionBasis& basis);

/**
 * df/dt = -L f + eps Gamma(f, f). The exact exponential uses the full
 * eigendecomposition (eps must be 0); implicit midpoint treats Gamma
 * explicitly. ctx is required when eps > 0. delta_hat is reported when the
 * caller supplies it (otherwise from the eigenvalues when available).
 */
RelaxationResult run_relaxation(const RelaxationConfig& cfg, const LinearizedOperator& L,
                                 const CollisionContext* ctx = nullptr, std::optional<double> delta_hat = {});

// ---------------------------------------------------------------- functionals

struct FunctionalSeries {
    std::vector<double> times;
    std::vector<double> I_parallel, D_parallel;
    std::size_t offset = 0;   // index of the first snapshot with a value
};

/**
 * I = sum_{k<=k_max} ||d_t^k f||^2 + ||d_t^k (E,B)||^2 and
 * D = sum_{k<=k_max} ||(1-P) d_t^k f||^2 + ||grad_p (1-P) d_t^k f||^2,
 * with centred differences of step dt_snap. EM snapshots may be empty;
 * otherwise they must match f snapshot for snapshot.
 */
FunctionalSeries functionals(const std::vector<DistributionVector>& f, const std::vector<EMFieldState>& em,
                             double dt_snap, int k_max, const ProjectionBasis& basis, const VelocityGrid& grid);

// Discrete H^1-type seminorm: sum over forward differences along each axis and species, times h^3.
double grad_norm_sq(const VelocityGrid& grid, const DistributionVector& f);

// Fit log y = a + b t by least squares; returns (a, b).
std::pair<double, double> fit_log_linear(const std::vector<double>& t, const std::vector<double>& y);

// ---------------------------------------------------------------- export

void write_relaxation_csv(const RelaxationResult& r, const std::string& path);
void write_billiard_json(const BilliardReport& r, const std::string& path);
void write_maxwell_csv(const std::vector<double>& t, const std::vector<MaxwellDiagnostics>& d,
                       const std::string& path);
// Spectrum CSV (index, eigenvalue) and, when asked, dense L as float64 binary with a JSON sidecar.
void export_operator(const LinearizedOperator& L, const std::vector<double>& eigenvalues, const std::string& stem,
                     bool include_matrix = true);

} // namespace rvml
