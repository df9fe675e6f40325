#include "rvml/landau.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace rvml {

SymmetricEigen eigh(const Eigen::MatrixXd& M, bool vectors)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("eigh: QR iteration did not converge", 0.0, 0.0);
    SymmetricEigen out;
    out.values = es.eigenvalues();
    if (vectors) out.vectors = es.eigenvectors();
    return out;
}

GapResult coercivity_gap(const LinearizedOperator& L, double tol_null, int head)
{
    if (!(tol_null > 0.0 && tol_null < 1.0)) throw ConfigError("coercivity_gap: tol_null must lie in (0, 1)");
    GapResult res;
    const Eigen::Index n = static_cast<Eigen::Index>(L.unknowns());

    double w6 = 0.0;
    if (head > 0) {
        const Eigen::VectorXd w = eigh(L.dense(), false).values;
        res.norm_L = std::max(std::abs(w[0]), std::abs(w[n - 1]));
        for (Eigen::Index i = 0; i < std::min<Eigen::Index>(head, n); ++i) res.spectrum_head.push_back(w[i]);
        for (Eigen::Index i = 0; i < n; ++i)
            if (std::abs(w[i]) < tol_null * res.norm_L) res.near_zero.push_back(w[i]);
        w6 = w[std::min<Eigen::Index>(6, n - 1)];
    } else {
        // power iteration; the shift below only needs the right magnitude
        Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] += 0.1 * std::cos(2.0 + 5.0 * static_cast<double>(i));
        v.normalize();
        double lam = 0.0;
        for (int it = 0; it < 500; ++it) {
            Eigen::VectorXd z = L.apply(DistributionVector(Eigen::VectorXd(v))).values;
            const double next = z.norm();
            v = z / next;
            if (std::abs(next - lam) <= 1e-10 * next) {
                lam = next;
                break;
            }
            lam = next;
        }
        res.norm_L = lam;
    }

    // Orthonormal basis of the conserved directions.
    Eigen::MatrixXd X(n, 6);
    for (int i = 0; i < 6; ++i) X.col(i) = L.basis.chi[i].values;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    X = qr.householderQ() * Eigen::MatrixXd::Identity(n, 6);

    // L + c X X^T is positive definite when L is coercive off span(X).
    Eigen::MatrixXd C = L.dense();
    C.noalias() += res.norm_L * (X * X.transpose());
    const Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> chol(std::move(C));
    if (chol.info() != Eigen::Success)
        throw NumericalError("coercivity_gap: deflated operator is not positive definite", w6, 0.0);

    auto deflate = [&](Eigen::VectorXd& v) { v -= X * (X.transpose() * v); };

    // Lanczos on the inverse, restricted to the complement of span(X).
    const int max_it = static_cast<int>(std::min<Eigen::Index>(n - 6, 120));
    Eigen::MatrixXd V(n, max_it + 1);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] += 0.1 * std::sin(1.0 + 3.0 * static_cast<double>(i));
    deflate(v);
    v.normalize();
    V.col(0) = v;
    std::vector<double> alpha, beta;
    double theta = 0.0, prev = -1.0;
    Eigen::VectorXd ritz;
    int k = 0;
    for (; k < max_it; ++k) {
        Eigen::VectorXd z = chol.solve(V.col(k));
        deflate(z);
        alpha.push_back(V.col(k).dot(z));
        for (int pass = 0; pass < 2; ++pass) z -= V.leftCols(k + 1) * (V.leftCols(k + 1).transpose() * z);
        const double b = z.norm();
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k + 1, k + 1);
        for (int i = 0; i <= k; ++i) {
            T(i, i) = alpha[i];
            if (i < k) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        theta = es.eigenvalues()[k];
        ritz = es.eigenvectors().col(k);
        const double resid_est = b * std::abs(ritz[k]);
        if ((k > 4 && std::abs(theta - prev) <= 1e-13 * theta && resid_est <= 1e-9 * theta) || b <= 1e-14 * theta) {
            ++k;
            break;
        }
        prev = theta;
        beta.push_back(b);
        V.col(k + 1) = z / b;
    }
    res.iterations = k;
    if (!(theta > 0.0)) throw NumericalError("coercivity_gap: Lanczos produced no positive Ritz value", 0.0, theta);
    res.delta_hat = 1.0 / theta;
    Eigen::VectorXd y = V.leftCols(k) * ritz.head(k);
    const DistributionVector Ly = L.apply(DistributionVector(Eigen::VectorXd(y)));
    res.gap_residual = (Ly.values - res.delta_hat * y).norm() / y.norm();
    return res;
}

} // namespace rvml
