#pragma once

#include "rvml/common.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace rvml {

enum class Boundary { pec, periodic };

/**
 * Yee grid over [0,Lx]x[0,Ly]x[0,Lz] with n cells per axis. Every component
 * is stored in a (nx+1)(ny+1)(nz+1) array indexed like the nodes:
 *   Ex(i,j,k) at ((i+1/2)dx, j dy, k dz), Ey, Ez likewise;
 *   Bx(i,j,k) at (i dx, (j+1/2)dy, (k+1/2)dz), By, Bz likewise;
 *   rho at nodes; j shares the E locations.
 * E is held at t, B at t - dt/2, j at t - dt/2 (last step), rho at t.
 * Periodic boundaries use indices 0..n-1 only and wrap.
 */
struct EMFieldState {
    std::array<int, 3> n{};
    std::array<double, 3> L{};
    std::array<double, 3> d{};
    double dt = 0.0;
    double t = 0.0;
    long step_count = 0;
    Boundary boundary = Boundary::pec;
    std::array<std::vector<double>, 3> E, B, j;
    std::vector<double> rho;

    std::size_t idx(int i, int j_, int k) const
    {
        return (static_cast<std::size_t>(i) * (n[1] + 1) + j_) * (n[2] + 1) + k;
    }
    std::size_t size() const { return static_cast<std::size_t>(n[0] + 1) * (n[1] + 1) * (n[2] + 1); }
    double cell_volume() const { return d[0] * d[1] * d[2]; }
    // Position of component c of an E-type (edge) or B-type (face) field.
    Vec3 e_pos(int c, int i, int j_, int k) const;
    Vec3 b_pos(int c, int i, int j_, int k) const;
    Vec3 node_pos(int i, int j_, int k) const { return {i * d[0], j_ * d[1], k * d[2]}; }
};

// Throws ConfigError on bad sizes or a CFL violation (dt > cfl * min(d) / sqrt(3), cfl <= 1).
EMFieldState make_state(std::array<int, 3> n, std::array<double, 3> L, double dt, Boundary b = Boundary::pec,
                        double cfl_factor = 1.0);

/**
 * Sources for one step: j at t + dt/2 on E locations, rho at t + dt on nodes.
 * Either may be left empty to mean zero.
 */
struct SourceSample {
    std::array<std::vector<double>, 3> j;
    std::vector<double> rho;
};
using SourceFn = std::function<void(const EMFieldState& s, double t_half, double t_new, SourceSample& out)>;

// One leapfrog step: B -= dt curl E; E += dt (curl B - 4 pi j). PEC entries are written as 0.
void step(EMFieldState& s, const SourceFn& sources = {});

// Re-establish the boundary invariant (zero tangential E, zero normal B) and zero unused periodic slots.
void apply_boundary(EMFieldState& s);

// Discrete operators on state-shaped arrays.
void curl_e(const EMFieldState& s, const std::array<std::vector<double>, 3>& E, std::array<std::vector<double>, 3>& out);
void curl_b(const EMFieldState& s, const std::array<std::vector<double>, 3>& B, std::array<std::vector<double>, 3>& out);
// Node gradient into E locations; node divergence of E-type fields; cell divergence of B-type fields.
void grad_node(const EMFieldState& s, const std::vector<double>& phi, std::array<std::vector<double>, 3>& out);
void div_e(const EMFieldState& s, const std::array<std::vector<double>, 3>& E, std::vector<double>& out);
void div_b(const EMFieldState& s, const std::array<std::vector<double>, 3>& B, std::vector<double>& out);

// Active entries of each layout (PEC: interior of E-type, all B-type cells, interior nodes).
bool e_active(const EMFieldState& s, int c, int i, int j_, int k);
bool b_active(const EMFieldState& s, int c, int i, int j_, int k);
bool node_active(const EMFieldState& s, int i, int j_, int k);

struct MaxwellDiagnostics {
    double energy = 0.0;          // (1/8pi)[|E^n|^2 + B^{n-1/2} . B^{n+1/2}] dV, conserved without sources
    double energy_naive = 0.0;    // (1/8pi)[|E^n|^2 + |B^{n-1/2}|^2] dV
    Vec3 momentum = Vec3::Zero(); // (1/4pi) sum E x B, cell-centred, B time-averaged
    double angular_momentum = 0.0;
    double gauss_residual = 0.0;  // max |div E - 4 pi rho| over active nodes
    double divB_residual = 0.0;
};

// Angular momentum about the axis through x0 along `axis` (unit vector).
MaxwellDiagnostics diagnostics(const EMFieldState& s, const Vec3& x0 = Vec3::Zero(), const Vec3& axis = Vec3::UnitZ());

// Cell-centred E, B (B averaged to time t) for moment diagnostics.
void cell_fields(const EMFieldState& s, std::vector<Vec3>& E, std::vector<Vec3>& B, std::vector<Vec3>& centers);

/** Analytic fields and sources for the momentum identity. */
struct ManufacturedEM {
    std::function<Vec3(const Vec3&, double)> E, B, j;
    std::function<double(const Vec3&, double)> rho;
};

/**
 * Localised sources satisfying the discrete continuity equation exactly:
 * rho = lap_h chi / 4pi and j = -(grad_h chi(t+dt) - grad_h chi(t)) / (4pi dt) + curl_h a,
 * with chi = q g(x) sin(omega t) at nodes and a = m g(x) cos(omega t) e_z at B locations,
 * g a Gaussian of the given width about `center`.
 */
SourceFn continuity_source(double q, double m, double omega, const Vec3& center, double width);

// Fields from A = (0, 0, sin x cos y cos t), phi = cos x sin z sin t; rho and j from Gauss and Ampere.
ManufacturedEM manufactured_potential_solution();

/**
 * max over a uniform point lattice of spacing h inside [lo, hi] of
 * |d_t (E x B)/4pi - div T + rho E + j x B| with centred differences of step h.
 */
double momentum_identity_residual(const ManufacturedEM& m, const Vec3& lo, const Vec3& hi, double h, double t);

struct AngularMomentumReport {
    std::vector<double> times, lhs, rhs;   // lhs: d/dt (1/4pi) sum R.(E x B); rhs: -sum R.(rho E + j x B)
    std::vector<double> lhs_linear, rhs_linear;   // the same with R replaced by the constant omega x delta
    double mismatch = 0.0;                 // max |lhs - rhs| / max |rhs|
};

/**
 * Both sides evaluated from consecutive states as they are produced; each
 * state carries the current of the step that produced it. Only the last
 * three states are retained. R(x) = omega x (x - x0); the "linear" series
 * repeat the computation with R replaced by the constant omega x delta.
 */
class AngularMomentumRateCheck {
public:
    AngularMomentumRateCheck(const Vec3& omega, const Vec3& x0, const Vec3& delta = Vec3::Zero());
    void push(const EMFieldState& s);
    AngularMomentumReport report() const;

private:
    struct Sample {
        double t, L, P, torque, torque_linear;
    };
    Vec3 omega_, x0_, delta_;
    std::vector<EMFieldState> window_;
    std::vector<Sample> samples_;
    double dt_ = 0.0;
};

AngularMomentumReport angular_momentum_rate_check(const std::vector<EMFieldState>& states, const Vec3& omega,
                                                  const Vec3& x0, const Vec3& delta = Vec3::Zero());

/**
 * Discrete Helmholtz split, a diagnostic only. For E the node potential has
 * Dirichlet data (PEC walls are equipotential); for B the cell potential has
 * Neumann data (B.n = 0 on the walls). remainder = field - gradient is
 * divergence free to the solver tolerance.
 */
struct HelmholtzSplit {
    std::array<std::vector<double>, 3> gradient, remainder;
    double remainder_divergence = 0.0;
    int iterations = 0;
};
HelmholtzSplit helmholtz_split_e(const EMFieldState& s, double tol = 1e-12);
HelmholtzSplit helmholtz_split_b(const EMFieldState& s, double tol = 1e-12);

// Binary dump of all arrays (little-endian doubles) with a JSON sidecar describing them.
void export_snapshot(const EMFieldState& s, const std::string& path_stem);

} // namespace rvml
