#include "rvml/momentfn.hpp"
#include "rvml/rng.hpp"

#include <json.hpp>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rvml {

namespace {

constexpr double pi = std::numbers::pi;

double mu(double r) { return std::exp(-0.5 * r * r) / std::sqrt(2.0 * pi); }

// int_0^inf f for integrands bounded by C (1+r)^deg mu(r); tol is relative
// to int |f| so sign-changing integrands do not ask for less than rounding.
double half_line(const std::function<double(double)>& f, int deg, double tol)
{
    auto g = [&f](double r) { return std::abs(f(r)); };
    const double l1 = std::max(adaptive_quad_1d_inf(g, 0.0, [deg](double r) { return std::pow(1.0 + r, deg) * mu(r); },
                                                    1e-3, 2.0).value,
                               1e-300);
    auto env = [deg, l1](double r) { return std::pow(1.0 + r, deg) * mu(r) / l1; };
    return adaptive_quad_1d_inf(f, 0.0, env, tol * l1, 2.0).value;
}

// Surface integral of x^a y^b z^c over the unit sphere.
double sphere_monomial(int a, int b, int c)
{
    if (a % 2 || b % 2 || c % 2) return 0.0;
    return 2.0 * std::tgamma(0.5 * (a + 1)) * std::tgamma(0.5 * (b + 1)) * std::tgamma(0.5 * (c + 1)) /
           std::tgamma(0.5 * (a + b + c + 3));
}

BigInt det_int(std::array<std::array<BigInt, 4>, 4> M)
{
    // Cofactor expansion: 24 terms, exact.
    std::array<int, 4> perm{0, 1, 2, 3};
    BigInt det = 0;
    do {
        int inv = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                if (perm[i] > perm[j]) ++inv;
        BigInt term = 1;
        for (int i = 0; i < 4; ++i) term *= M[i][perm[i]];
        det += (inv % 2) ? -term : term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return det;
}

} // namespace

std::string to_string(BigInt v)
{
    if (v == 0) return "0";
    const bool neg = v < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
    std::string s;
    while (u > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    return {s.rbegin(), s.rend()};
}

std::vector<BigInt> gaussian_moments(int n_max)
{
    if (n_max < 0 || n_max > 20) throw ConfigError("gaussian_moments: n_max must lie in [0, 20]");
    std::vector<BigInt> m(n_max + 1);
    m[0] = 1;
    for (int n = 1; n <= n_max; ++n) m[n] = (2 * n - 1) * m[n - 1];
    return m;
}

MomentTables i_tables(double tol, int j_max, int n_max)
{
    if (!(tol > 0.0)) throw ConfigError("i_tables: tol must be positive");
    if (j_max < 2 || j_max > 20) throw ConfigError("i_tables: j_max must lie in [2, 20]");
    MomentTables t;
    t.m = gaussian_moments(n_max);

    auto i_direct = [](int j, double tl) {
        return 2.0 * half_line([j](double r) { return std::pow(r, 2 * j) * std::sqrt(1.0 + r * r) * mu(r); },
                               2 * j + 1, tl);
    };
    t.i0 = i_direct(0, tol);
    t.i1 = i_direct(1, tol);
    t.i0_err = tol * t.i0;
    t.i1_err = tol * t.i1;

    t.i_comb.resize(j_max + 1);
    t.i_comb[0] = {1, 0};
    t.i_comb[1] = {0, 1};
    for (int j = 2; j <= j_max; ++j)
        for (int c = 0; c < 2; ++c) t.i_comb[j][c] = (2 * j - 1) * t.i_comb[j - 1][c] + (2 * j - 3) * t.i_comb[j - 2][c];
    for (int j = 0; j <= j_max; ++j) {
        t.i_direct.push_back(j < 2 ? (j == 0 ? t.i0 : t.i1) : i_direct(j, tol));
        t.i_recurrence.push_back(t.i_value(j));
    }
    return t;
}

std::array<BigInt, 2> det_coefficients_exact(const MomentTables& t)
{
    if (t.m.size() < 8 || t.i_comb.size() < 7) throw ConfigError("det_coefficients_exact: tables too short");
    std::array<std::array<BigInt, 4>, 4> M{};
    for (int j = 1; j <= 4; ++j) {
        M[0][j - 1] = t.m[j + 1];
        M[1][j - 1] = t.m[j + 2];
        M[2][j - 1] = t.m[j + 3] - 2 * t.m[j + 2] - 3 * t.m[j + 1];
    }
    std::array<BigInt, 2> out{};
    for (int c = 0; c < 2; ++c) {
        for (int j = 1; j <= 4; ++j) M[3][j - 1] = t.i_comb[j + 2][c] - 3 * t.i_comb[j + 1][c];
        out[c] = det_int(M);
    }
    return out;
}

std::array<std::array<double, 4>, 4> moment_matrix(const MomentTables& t, double i0, double i1)
{
    if (t.m.size() < 8 || t.i_comb.size() < 7) throw ConfigError("moment_matrix: tables too short");
    auto iv = [&](int j) {
        return static_cast<double>(t.i_comb[j][0]) * i0 + static_cast<double>(t.i_comb[j][1]) * i1;
    };
    std::array<std::array<double, 4>, 4> C{};
    for (int j = 1; j <= 4; ++j) {
        C[0][j - 1] = static_cast<double>(t.m[j + 1]);
        C[1][j - 1] = static_cast<double>(t.m[j + 2]);
        C[2][j - 1] = static_cast<double>(t.m[j + 3] - 2 * t.m[j + 2] - 3 * t.m[j + 1]);
        C[3][j - 1] = iv(j + 2) - 3.0 * iv(j + 1);
    }
    return C;
}

double det4(const std::array<std::array<double, 4>, 4>& C)
{
    Eigen::Matrix4d M;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) M(i, j) = C[i][j];
    return Eigen::PartialPivLU<Eigen::Matrix4d>(M).determinant();
}

double h_sqrtJ(const MomentFunctionCoeffs& c, double r)
{
    const double r2 = r * r;
    const double poly = r2 * (c.k[0] + r2 * (c.k[1] + r2 * (c.k[2] + r2 * c.k[3])));
    return c.sqrt_cJ * mu(r) * std::sqrt(1.0 + r2) * poly;
}

MomentFunctionCoeffs solve_k(const MomentTables& t, double tol, std::uint64_t seed)
{
    MomentFunctionCoeffs c;
    c.C = moment_matrix(t, t.i0, t.i1);
    c.detC = det4(c.C);
    c.detC_closed = 14364000.0 * t.i0 - 15649200.0 * t.i1;
    double scale = 1.0;
    for (const auto& row : c.C) {
        double s = 0.0;
        for (double v : row) s += v * v;
        scale *= std::sqrt(s);
    }
    if (std::abs(c.detC) < 1e-12 * scale) throw NumericalError("solve_k: degenerate moment system", c.detC, scale);

    // sqrt(J) = sqrt(c_J) exp(-p0/2) for the unit species; h carries exp(+p0/2).
    const Juttner J{SpeciesParams{}};
    c.sqrt_cJ = std::sqrt(J.norm());
    const double rhs = 3.0 / (4.0 * pi * c.sqrt_cJ);
    c.rhs = {rhs, rhs};
    Eigen::Matrix4d M;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) M(i, j) = c.C[i][j];
    const Eigen::Vector4d k = M.fullPivLu().solve(Eigen::Vector4d(rhs, rhs, 0.0, 0.0));
    for (int j = 0; j < 4; ++j) c.k[j] = k[j];

    // A posteriori checks by radial quadrature and exact angular integrals.
    auto radial = [&](int n, int weight) {
        // weight: -1 -> 1/p0, 0 -> 1, 1 -> p0
        return half_line(
            [&, n, weight](double r) {
                const double p0 = std::sqrt(1.0 + r * r);
                return std::pow(r, n) * h_sqrtJ(c, r) * std::pow(p0, weight);
            },
            n + 11, tol);
    };
    // int p^(a,b,c) h sqrt(J) p0^w dp
    auto moment = [&](std::array<int, 3> e, int weight) {
        const double ang = sphere_monomial(e[0], e[1], e[2]);
        return ang == 0.0 ? 0.0 : ang * radial(e[0] + e[1] + e[2] + 2, weight);
    };
    auto bump = [](std::array<int, 3> e, int i) {
        ++e[i];
        return e;
    };

    MomentResiduals& R = c.residuals;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const std::array<int, 3> e = bump(bump({0, 0, 0}, i), j);
            const double d = i == j ? 1.0 : 0.0;
            // <B_ij, w sqrt J> = int (p_i p_j - delta_ij) w h sqrt J
            R.orth_sqrtJ = std::max(R.orth_sqrtJ, std::abs(moment(e, 0) - d * moment({0, 0, 0}, 0)));
            R.orth_p0_sqrtJ = std::max(R.orth_p0_sqrtJ, std::abs(moment(e, 1) - d * moment({0, 0, 0}, 1)));
            for (int k = 0; k < 3; ++k) {
                const std::array<int, 3> ek = bump(e, k), zk = bump({0, 0, 0}, k);
                R.orth_p_sqrtJ = std::max(R.orth_p_sqrtJ, std::abs(moment(ek, 0) - d * moment(zk, 0)));
                R.vel_sqrtJ = std::max(R.vel_sqrtJ, std::abs(moment(ek, -1) - d * moment(zk, -1)));
                R.vel_p0_sqrtJ = std::max(R.vel_p0_sqrtJ, std::abs(moment(ek, 0) - d * moment(zk, 0)));
            }
        }
    R.lambda1 = moment({2, 2, 0}, -1);
    R.lambda2 = moment({4, 0, 0}, -1);
    R.lambda3 = moment({2, 0, 0}, -1);

    // T_ijkl = int B_ij (p_k/p0) p_l sqrt J; contraction with random D_kij = D_kji and xi.
    double T[3][3][3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) {
                    const std::array<int, 3> kl = bump(bump({0, 0, 0}, k), l);
                    T[i][j][k][l] = moment(bump(bump(kl, i), j), -1) - (i == j ? moment(kl, -1) : 0.0);
                }
    CounterRng rng(seed, "momentfn.contraction");
    for (int trial = 0; trial < 8; ++trial) {
        double D[3][3][3], xi[3];
        for (int k = 0; k < 3; ++k)
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j) D[k][i][j] = D[k][j][i] = rng.uniform(-1.0, 1.0);
        for (double& x : xi) x = rng.uniform(-1.0, 1.0);
        double lhs = 0.0, rhs_c = 0.0, mag = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                for (int k = 0; k < 3; ++k)
                    for (int l = 0; l < 3; ++l) lhs += T[i][j][k][l] * D[k][i][j] * xi[l];
                rhs_c += D[i][i][j] * xi[j];
                mag += std::abs(D[i][i][j] * xi[j]);
            }
        R.contraction = std::max(R.contraction, std::abs(lhs - rhs_c) / std::max(mag, 1e-300));
    }
    return c;
}

std::array<std::vector<double>, 9> build_Bij(const MomentFunctionCoeffs& c, const VelocityGrid& grid)
{
    const Juttner J{SpeciesParams{}};
    std::array<std::vector<double>, 9> B;
    for (auto& b : B) b.resize(grid.size());
    for (std::size_t n = 0; n < grid.size(); ++n) {
        const Vec3& p = grid.nodes[n];
        const double h = h_sqrtJ(c, p.norm()) / J.sqrt_at(p);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) B[3 * i + j][n] = (p[i] * p[j] - (i == j ? 1.0 : 0.0)) * h;
    }
    return B;
}

Section8Functions rho0_and_Ci(const SpeciesParams& sp, const VelocityGrid& grid, double tol)
{
    sp.validate();
    const Juttner J(sp);
    Section8Functions out;
    const double A = radial_moment(J, [](double r) { return r * r; }, tol, 2);
    const double B = radial_moment(J, [&](double r) { return r * r / sp.p0(r); }, tol, 1);
    out.rho0 = A / B;
    const double rho0 = out.rho0;
    out.defining_residual =
        std::abs(radial_moment(J, [&](double r) { return r * r / sp.p0(r) * (sp.p0(r) - rho0); }, tol, 2)) / A;

    SpeciesParams minus = sp;
    minus.sign = -1;
    SpeciesParams plus = sp;
    plus.sign = 1;
    const PlasmaPair pair{plus, minus};
    const ProjectionBasis basis = build_basis(grid, pair);

    const std::size_t N = grid.size();
    double comp = 0.0, norm = 0.0;
    for (int i = 0; i < 3; ++i) out.C[i] = DistributionVector(N);
    for (std::size_t k = 0; k < N; ++k) {
        const Vec3& p = grid.nodes[k];
        const double p0 = sp.p0(p), sj = J.sqrt_at(p), w = grid.weights[k];
        comp += w * p[0] * p[0] / p0 * (p0 - rho0) * sj * sj;
        norm += w * p[0] * p[0] * sj * sj;
        for (int i = 0; i < 3; ++i) out.C[i].values[k] = out.C[i].values[N + k] = p[i] * (p0 - rho0) * sj;
    }
    out.component_residual = std::abs(comp) / norm;

    double orth[3][3] = {}, chi6[3][3] = {};
    for (int a = 0; a < 2; ++a)
        for (std::size_t k = 0; k < N; ++k) {
            const Vec3& p = grid.nodes[k];
            const double p0 = sp.p0(p), w = grid.weights[k];
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    const double v = w * p[j] / p0 * out.C[i].values[a * N + k];
                    orth[i][j] += v * J.sqrt_at(p);
                    chi6[i][j] += v * basis.chi[5].values[a * N + k];
                }
        }
    out.rho_c = (chi6[0][0] + chi6[1][1] + chi6[2][2]) / 3.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            out.orthogonality = std::max(out.orthogonality, std::abs(orth[i][j]) / (2.0 * norm));
            if (i != j) out.off_diagonal = std::max(out.off_diagonal, std::abs(chi6[i][j]) / std::abs(out.rho_c));
        }
    return out;
}

std::string momentfn_report_json(const MomentTables& t, const MomentFunctionCoeffs& c)
{
    nlohmann::ordered_json j;
    std::vector<std::string> m;
    for (BigInt v : t.m) m.push_back(to_string(v));
    j["m_table"] = m;
    j["i0"] = {{"value", t.i0}, {"error_bound", t.i0_err}};
    j["i1"] = {{"value", t.i1}, {"error_bound", t.i1_err}};
    nlohmann::ordered_json comb = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < t.i_comb.size(); ++k)
        comb.push_back({{"j", k},
                        {"i0_coeff", static_cast<long long>(t.i_comb[k][0])},
                        {"i1_coeff", static_cast<long long>(t.i_comb[k][1])},
                        {"recurrence", t.i_recurrence[k]},
                        {"direct", t.i_direct[k]}});
    j["i_table"] = comb;
    j["k"] = c.k;
    j["detC"] = {{"lu", c.detC}, {"closed_form", c.detC_closed}};
    j["rhs"] = c.rhs;
    const MomentResiduals& r = c.residuals;
    j["residuals"] = {{"B_perp_sqrtJ", r.orth_sqrtJ},
                      {"B_perp_p_sqrtJ", r.orth_p_sqrtJ},
                      {"B_perp_p0_sqrtJ", r.orth_p0_sqrtJ},
                      {"vB_perp_sqrtJ", r.vel_sqrtJ},
                      {"vB_perp_p0_sqrtJ", r.vel_p0_sqrtJ},
                      {"contraction", r.contraction},
                      {"lambda1", r.lambda1},
                      {"lambda2", r.lambda2},
                      {"lambda3", r.lambda3}};
    return j.dump(2);
}

} // namespace rvml
