#pragma once

#include "rvml/common.hpp"
#include "rvml/equilibria.hpp"
#include "rvml/faces.hpp"
#include "rvml/vgrid.hpp"

#include <Eigen/Sparse>

#include <array>
#include <vector>

namespace rvml {

/** f = (f+, f-) on a shared grid, stored as one vector [f+; f-]. */
struct DistributionVector {
    Eigen::VectorXd values;

    DistributionVector() = default;
    explicit DistributionVector(std::size_t n_nodes) : values(Eigen::VectorXd::Zero(2 * n_nodes)) {}
    explicit DistributionVector(Eigen::VectorXd v) : values(std::move(v)) {}

    std::size_t n_nodes() const { return static_cast<std::size_t>(values.size() / 2); }
    auto species(int a) { return values.segment(a * n_nodes(), n_nodes()); }
    auto species(int a) const { return values.segment(a * n_nodes(), n_nodes()); }
    bool finite() const { return values.allFinite(); }
};

// Discrete L2 inner product sum_k w_k (f+ g+ + f- g-).
double inner(const VelocityGrid& grid, const DistributionVector& f, const DistributionVector& g);
inline double norm(const VelocityGrid& grid, const DistributionVector& f) { return std::sqrt(inner(grid, f, f)); }

enum class BasisConstants {
    radial,  // kappa and M by radial adaptive quadrature
    grid     // same formulas with grid quadrature: Gram matrix is the identity to rounding
};

/** chi_1..chi_6 with the normalizing constants they were built from. */
struct ProjectionBasis {
    std::array<DistributionVector, 6> chi;
    double kappa1 = 0, kappa2_plus = 0, kappa2_minus = 0, kappa3 = 0;
    double M_plus = 0, M_minus = 0;
    BasisConstants constants = BasisConstants::radial;
    std::array<Eigen::VectorXd, 2> sqrt_j;
    std::array<Eigen::VectorXd, 2> p0;

    Eigen::Matrix<double, 6, 6> gram(const VelocityGrid& grid) const;
};

ProjectionBasis build_basis(const VelocityGrid& grid, const PlasmaPair& pair,
                            BasisConstants constants = BasisConstants::radial, double tol = 1e-12);

struct Moments {
    double a_plus = 0, a_minus = 0;
    Vec3 b = Vec3::Zero();
    double c = 0;
    std::array<double, 6> as_array() const { return {a_plus, a_minus, b[0], b[1], b[2], c}; }
};

struct Projection {
    DistributionVector Pf;
    Moments moments;
};

Projection project(const DistributionVector& f, const ProjectionBasis& basis, const VelocityGrid& grid);

/**
 * Discrete L = A - K acting on nodal values of f. Both parts come from one
 * symmetric pair form over face samples p (family d) and q (family e != d):
 *   1/2 sum J_a(p) J_b(q) (g_p u_a - g_q u_b)^T Phi~ (g_p w_a - g_q w_b),  u = f/sqrt(J).
 * A is the local diffusion with face coefficients sigma; K the dense coupling.
 */
struct LinearizedOperator {
    VelocityGrid grid;
    PlasmaPair pair;
    ProjectionBasis basis;
    Eigen::SparseMatrix<double> A_part;
    Eigen::MatrixXd K_part;
    std::vector<Mat3> face_sigma;      // per face and species: [a * faces + s]
    double assembly_asymmetry = 0.0;   // ||K - K^T||_F / ||L||_F before symmetrization

    std::size_t unknowns() const { return static_cast<std::size_t>(K_part.rows()); }
    DistributionVector apply(const DistributionVector& f) const;
    Eigen::MatrixXd dense() const;
};

// Bytes needed for K and one working copy for the eigensolver.
double assembly_memory_mb(const VelocityGrid& grid);

LinearizedOperator assemble_L(const VelocityGrid& grid_p, const VelocityGrid& grid_q, const PlasmaPair& pair,
                              const CollisionParams& params = {});
LinearizedOperator assemble_L(const CollisionContext& ctx, const VelocityGrid& grid_q);

struct GapResult {
    double delta_hat = 0.0;
    std::vector<double> spectrum_head;   // smallest eigenvalues, ascending
    std::vector<double> near_zero;       // the entries with |lambda| < tol_null * ||L||
    double norm_L = 0.0;                 // largest eigenvalue magnitude
    double gap_residual = 0.0;           // ||L y - delta y|| / ||y|| of the deflated eigenvector
    int iterations = 0;
};

// head = 0 skips the full spectrum: norm_L then comes from power iteration and near_zero stays empty.
GapResult coercivity_gap(const LinearizedOperator& L, double tol_null, int head = 12);

struct SymmetricEigen {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;   // columns; empty when not requested
};
// Dense symmetric eigensolver on a copy; ascending eigenvalues.
SymmetricEigen eigh(const Eigen::MatrixXd& M, bool vectors);

/** Gamma(g, h) = J^{-1/2} C(sqrt(J) g, sum_b sqrt(J_b) h_b) in the weak pair form. */
DistributionVector apply_gamma(const DistributionVector& g, const DistributionVector& h, const CollisionContext& ctx);

/** Nodal C_a(F_a, sum_b F_b) for densities F (not perturbations). */
DistributionVector collision_form(const DistributionVector& F, const CollisionContext& ctx);

struct CoefficientFields {
    std::array<std::vector<Mat3>, 2> sigma_f;
    std::array<std::vector<Vec3>, 2> a_f;
    std::array<std::vector<double>, 2> C_f;
};

/**
 * Per-node sigma_f, a_f, C_f with q on the staggered companion. f is given on
 * the base grid; its values and gradient at staggered nodes come from the
 * eight surrounding base nodes (zero outside the base grid).
 */
CoefficientFields coeff_fields(const DistributionVector& f, const VelocityGrid& grid_p, const VelocityGrid& grid_q,
                               const PlasmaPair& pair, const CollisionParams& params = {});

/** Both sides of the integration-by-parts identity with the kappa(p) delta term. */
struct IbpCheck {
    std::vector<double> lhs, rhs;
    std::vector<double> rhs_transfer, rhs_log, rhs_delta;
    std::vector<int> nodes;
    double relative_error = 0.0;
    // Least-squares multiplier on the kappa term and the error it leaves.
    double kappa_fit = 0.0;
    double relative_error_fitted = 0.0;
};

IbpCheck ibp_identity_check(const VelocityGrid& grid_p, const VelocityGrid& grid_q, double support_radius,
                            double eval_radius);

} // namespace rvml
