#pragma once

#include "rvml/equilibria.hpp"
#include "rvml/landau.hpp"
#include "rvml/vgrid.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace rvml {

using BigInt = __int128;
std::string to_string(BigInt v);

/** Exact Gaussian moments m_n = (2n-1)!! and the i_j integrals of sqrt(1+r^2) mu(r). */
struct MomentTables {
    std::vector<BigInt> m;                                // m[n], n = 0..n_max
    double i0 = 0, i1 = 0, i0_err = 0, i1_err = 0;
    std::vector<std::array<std::int64_t, 2>> i_comb;      // i_j = i_comb[j][0] i0 + i_comb[j][1] i1
    std::vector<double> i_direct;                         // direct quadrature of i_j
    std::vector<double> i_recurrence;                     // from the integer combinations

    double i_value(int j) const
    {
        return static_cast<double>(i_comb[j][0]) * i0 + static_cast<double>(i_comb[j][1]) * i1;
    }
};

// Throws ConfigError for n_max > 20.
std::vector<BigInt> gaussian_moments(int n_max);

// i_j for j <= j_max (>= 6 needed by the k-system); tol is relative.
MomentTables i_tables(double tol, int j_max = 6, int n_max = 8);

struct MomentResiduals {
    double orth_sqrtJ = 0, orth_p_sqrtJ = 0, orth_p0_sqrtJ = 0;      // <B_ij, .>
    double vel_sqrtJ = 0, vel_p0_sqrtJ = 0;                         // <(p_k/p0) B_ij, .>
    double contraction = 0;                                         // max over random (D, xi)
    double lambda1 = 0, lambda2 = 0, lambda3 = 0;
};

struct MomentFunctionCoeffs {
    std::array<double, 4> k{};
    std::array<std::array<double, 4>, 4> C{};
    double detC = 0;            // floating LU determinant at (i0, i1)
    double detC_closed = 0;     // 14364000 i0 - 15649200 i1
    std::array<double, 2> rhs{};
    double sqrt_cJ = 0;         // sqrt of the Juettner normalization
    MomentResiduals residuals;
};

// Integer coefficients (a, b) with det C = a i0 + b i1, computed exactly.
std::array<BigInt, 2> det_coefficients_exact(const MomentTables& t);
// 4x4 matrix of the k-system at a given (i0, i1) and its LU determinant.
std::array<std::array<double, 4>, 4> moment_matrix(const MomentTables& t, double i0, double i1);
double det4(const std::array<std::array<double, 4>, 4>& C);

MomentFunctionCoeffs solve_k(const MomentTables& t, double tol = 1e-12, std::uint64_t seed = 1);

// h(r) sqrt(J(r)) with the normalization carried explicitly.
double h_sqrtJ(const MomentFunctionCoeffs& c, double r);

/** B_ij at grid nodes, index [3 * i + j]. */
std::array<std::vector<double>, 9> build_Bij(const MomentFunctionCoeffs& c, const VelocityGrid& grid);

struct Section8Functions {
    double rho0 = 0;
    double defining_residual = 0;   // int |p|^2/p0 (p0 - rho0) J, radial quadrature, relative
    double component_residual = 0;  // same with p_1^2 on the grid, relative
    double orthogonality = 0;       // max |<(p_j/p0) C_i, sqrt J>| relative
    double rho_c = 0;               // <(p_i/p0) C_i, chi_6>
    double off_diagonal = 0;        // max |<(p_j/p0) C_i, chi_6>|, i != j, relative to rho_c
    std::array<DistributionVector, 3> C;
};

Section8Functions rho0_and_Ci(const SpeciesParams& sp, const VelocityGrid& grid, double tol = 1e-12);

// {m_table, i0, i1, k, detC, residuals} as a JSON document.
std::string momentfn_report_json(const MomentTables& t, const MomentFunctionCoeffs& c);

} // namespace rvml
