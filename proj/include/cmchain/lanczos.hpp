#ifndef CMCHAIN_LANCZOS_HPP
#define CMCHAIN_LANCZOS_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>

// Lanczos evaluation of matrix functions of a symmetric operator given only
// its matvec: quadratic forms v'f(A)v, selected vectors f(A)v, and extreme
// eigenvalues. Deterministic (no randomness), full reorthogonalization.

namespace cmchain {

using MatVec = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using ScalarFn = std::function<double(double)>;

struct LanczosOptions {
    int max_iter = 400;
    double tol = 1e-14;
};

namespace detail {

struct LanczosResult {
    Eigen::VectorXd alpha;   // T diagonal
    Eigen::VectorXd beta;    // T subdiagonal
    Eigen::MatrixXd basis;   // orthonormal Krylov basis, n x m
    double v_norm = 0.0;
};

/// Runs Lanczos until the functional m -> e1' f(T_m) e1 stabilizes.
inline LanczosResult lanczos_run(const MatVec& matvec, const Eigen::VectorXd& v,
                                 const ScalarFn& f, const LanczosOptions& opts) {
    const int n = static_cast<int>(v.size());
    LanczosResult res;
    res.v_norm = v.norm();
    if (res.v_norm == 0.0) {
        res.alpha.resize(0);
        res.beta.resize(0);
        res.basis.resize(n, 0);
        return res;
    }

    const int cap = std::min(opts.max_iter, n);
    Eigen::MatrixXd V(n, cap);
    Eigen::VectorXd alpha(cap), beta(cap);
    V.col(0) = v / res.v_norm;

    double prev_est = std::numeric_limits<double>::quiet_NaN();
    int stable = 0;
    int m = 0;
    for (int j = 0; j < cap; ++j) {
        Eigen::VectorXd w = matvec(V.col(j));
        alpha[j] = V.col(j).dot(w);
        w -= alpha[j] * V.col(j);
        if (j > 0) w -= beta[j - 1] * V.col(j - 1);
        // Full reorthogonalization keeps the quadrature exact in floating point.
        w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
        const double b = w.norm();
        m = j + 1;

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(alpha.head(m), beta.head(m - 1));
        double est = 0.0;
        for (int k = 0; k < m; ++k) {
            const double c = es.eigenvectors()(0, k);
            est += c * c * f(es.eigenvalues()[k]);
        }
        if (std::isfinite(prev_est) &&
            std::abs(est - prev_est) <= opts.tol * std::max(std::abs(est), 1e-300)) {
            if (++stable >= 2) break;
        } else {
            stable = 0;
        }
        prev_est = est;

        if (b <= 1e-14 * std::max(std::abs(alpha[j]), 1.0)) break;  // invariant subspace
        if (j + 1 < cap) {
            beta[j] = b;
            V.col(j + 1) = w / b;
        }
    }

    res.alpha = alpha.head(m);
    res.beta = beta.head(std::max(m - 1, 0));
    res.basis = V.leftCols(m);
    return res;
}

}  // namespace detail

/// v' f(A) v via Lanczos quadrature.
inline double lanczos_quadratic_form(const MatVec& matvec, const Eigen::VectorXd& v,
                                     const ScalarFn& f, const LanczosOptions& opts = {}) {
    auto res = detail::lanczos_run(matvec, v, f, opts);
    const int m = static_cast<int>(res.alpha.size());
    if (m == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(res.alpha, res.beta);
    double est = 0.0;
    for (int k = 0; k < m; ++k) {
        const double c = es.eigenvectors()(0, k);
        est += c * c * f(es.eigenvalues()[k]);
    }
    return res.v_norm * res.v_norm * est;
}

/// f(A) v via Lanczos.
inline Eigen::VectorXd lanczos_apply(const MatVec& matvec, const Eigen::VectorXd& v,
                                     const ScalarFn& f, const LanczosOptions& opts = {}) {
    auto res = detail::lanczos_run(matvec, v, f, opts);
    const int m = static_cast<int>(res.alpha.size());
    if (m == 0) return Eigen::VectorXd::Zero(v.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(res.alpha, res.beta);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    for (int k = 0; k < m; ++k) {
        const double c = es.eigenvectors()(0, k);
        y += c * f(es.eigenvalues()[k]) * es.eigenvectors().col(k);
    }
    return res.v_norm * (res.basis * y);
}

/// Smallest eigenvalue of a symmetric operator; deterministic start vector.
inline double lanczos_min_eigenvalue(const MatVec& matvec, int n,
                                     const LanczosOptions& opts = {}) {
    Eigen::VectorXd start(n);
    for (int i = 0; i < n; ++i) start[i] = 1.0 + 0.25 * std::sin(1.0 + i);
    start /= start.norm();

    const int cap = std::min(opts.max_iter, n);
    Eigen::MatrixXd V(n, cap);
    Eigen::VectorXd alpha(cap), beta(cap);
    V.col(0) = start;
    double prev = std::numeric_limits<double>::quiet_NaN();
    double min_ritz = 0.0;
    int stable = 0;
    for (int j = 0; j < cap; ++j) {
        Eigen::VectorXd w = matvec(V.col(j));
        alpha[j] = V.col(j).dot(w);
        w -= alpha[j] * V.col(j);
        if (j > 0) w -= beta[j - 1] * V.col(j - 1);
        w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
        const double b = w.norm();

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(alpha.head(j + 1), beta.head(j), Eigen::EigenvaluesOnly);
        min_ritz = es.eigenvalues()[0];
        if (std::isfinite(prev) &&
            std::abs(min_ritz - prev) <= 1e-13 * std::max(std::abs(min_ritz), 1.0)) {
            if (++stable >= 2) break;
        } else {
            stable = 0;
        }
        prev = min_ritz;

        if (b <= 1e-14 * std::max(std::abs(alpha[j]), 1.0)) break;
        if (j + 1 < cap) {
            beta[j] = b;
            V.col(j + 1) = w / b;
        }
    }
    return min_ritz;
}

}  // namespace cmchain

#endif  // CMCHAIN_LANCZOS_HPP
