/*
   Copyright 2026 The xxbell Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

// Dense linear algebra used by the free-fermion solver: a checked symmetric
// eigensolver and a singular value decomposition that keeps high relative
// accuracy for strongly graded matrices.
//
// The accurate SVD follows the rank-revealing route: Gaussian elimination
// with complete pivoting gives A = X D Y^T with well-conditioned unit
// triangular X, Y; then X D = Q R Pi^T (column-pivoted Householder QR),
// W = R Pi^T Y^T, and one-sided Jacobi on W^T finishes the job. Singular
// values come out with small relative error whenever the elimination itself
// is free of cancellation, which holds for the bipartite ring blocks we feed
// it in the ground-state sector (all terms of every minor share one sign).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "xxbell/error.hpp"

namespace xxbell {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SymmetricEigen {
    Vector values;   // ascending
    Matrix vectors;  // column k pairs with values(k)
};

inline double max_asymmetry(const Matrix& a) { return (a - a.transpose()).cwiseAbs().maxCoeff(); }

inline SymmetricEigen diagonalize_symmetric(const Matrix& t, double symmetry_tol = 1e-12)
{
    if (t.rows() != t.cols()) throw InvalidInput("diagonalize_symmetric: matrix is not square");
    if (t.size() == 0) return {};
    if (max_asymmetry(t) > symmetry_tol) throw InvalidInput("diagonalize_symmetric: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(t);
    if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

inline Vector symmetric_eigenvalues(const Matrix& t)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(t, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
    return es.eigenvalues();
}

// P A Q = L diag(d) U with unit lower L and unit upper U, |L|, |U| <= 1.
struct CompletePivotLDU {
    std::vector<int> row_perm;  // row k of PAQ is row row_perm[k] of A
    std::vector<int> col_perm;  // column k of PAQ is column col_perm[k] of A
    Matrix lower;
    Vector pivots;
    Matrix upper;
};

inline CompletePivotLDU complete_pivot_ldu(Matrix a)
{
    const int n = static_cast<int>(a.rows());
    CompletePivotLDU f;
    f.row_perm.resize(n);
    f.col_perm.resize(n);
    std::iota(f.row_perm.begin(), f.row_perm.end(), 0);
    std::iota(f.col_perm.begin(), f.col_perm.end(), 0);
    f.lower = Matrix::Identity(n, n);
    f.upper = Matrix::Identity(n, n);
    f.pivots = Vector::Zero(n);

    for (int k = 0; k < n; ++k) {
        Eigen::Index r = k, c = k;
        const double best = a.bottomRightCorner(n - k, n - k).cwiseAbs().maxCoeff(&r, &c);
        r += k;
        c += k;
        if (best == 0.0) break;  // remaining block is exactly zero
        if (r != k) {
            a.row(k).swap(a.row(r));
            f.lower.block(k, 0, 1, k).swap(f.lower.block(r, 0, 1, k));
            std::swap(f.row_perm[k], f.row_perm[r]);
        }
        if (c != k) {
            a.col(k).swap(a.col(c));
            f.upper.block(0, k, k, 1).swap(f.upper.block(0, c, k, 1));
            std::swap(f.col_perm[k], f.col_perm[c]);
        }
        const double p = a(k, k);
        f.pivots(k) = p;
        for (int i = k + 1; i < n; ++i) f.lower(i, k) = a(i, k) / p;
        for (int j = k + 1; j < n; ++j) f.upper(k, j) = a(k, j) / p;
        for (int j = k + 1; j < n; ++j) {
            const double akj = a(k, j);
            if (akj == 0.0) continue;
            for (int i = k + 1; i < n; ++i)
                if (a(i, k) != 0.0) a(i, j) -= f.lower(i, k) * akj;
        }
    }
    return f;
}

struct SingularValueDecomposition {
    Vector values;  // descending
    Matrix left;    // A = left * diag(values) * right^T
    Matrix right;
    int sweeps = 0;
};

namespace detail {

// One-sided (Hestenes) Jacobi on the columns of g. On return the columns of
// g are mutually orthogonal and v holds the accumulated rotations, so that
// g_in * v = g_out. Rotation angles are computed from norm ratios to stay
// clear of underflow for strongly graded columns.
inline int one_sided_jacobi(Matrix& g, Matrix& v, int max_sweeps = 80)
{
    const int n = static_cast<int>(g.cols());
    const Eigen::Index rows = g.rows();
    const double tol = std::numeric_limits<double>::epsilon() * std::max(n, 1);
    std::vector<double> norm(static_cast<std::size_t>(n));
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        // Norms are refreshed every sweep and updated in closed form within it.
        for (int k = 0; k < n; ++k) norm[k] = g.col(k).stableNorm();
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double np = norm[p], nq = norm[q];
                if (np == 0.0 || nq == 0.0) continue;
                double* gp = g.col(p).data();
                double* gq = g.col(q).data();
                const double inv_p = 1.0 / np;
                double dot = 0.0;
                for (Eigen::Index i = 0; i < rows; ++i) dot += (gp[i] * inv_p) * gq[i];
                const double cosang = dot / nq;
                if (std::abs(cosang) <= tol) continue;
                rotated = true;
                const double zeta = (nq / np - np / nq) / (2.0 * cosang);
                const double az = std::abs(zeta);
                const double t = az > 1e150 ? 0.5 / zeta
                                            : std::copysign(1.0, zeta) / (az + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);  // |t| <= 1
                const double s = c * t;
                for (Eigen::Index i = 0; i < rows; ++i) {
                    const double xp = gp[i], xq = gq[i];
                    gp[i] = c * xp - s * xq;
                    gq[i] = s * xp + c * xq;
                }
                double* vp = v.col(p).data();
                double* vq = v.col(q).data();
                for (Eigen::Index i = 0; i < v.rows(); ++i) {
                    const double xp = vp[i], xq = vq[i];
                    vp[i] = c * xp - s * xq;
                    vq[i] = s * xp + c * xq;
                }
                // ||c gp - s gq||^2 = np^2 - t cos np nq, ||s gp + c gq||^2 = nq^2 + t cos np nq.
                norm[p] = np * std::sqrt(std::max(0.0, 1.0 - t * cosang * (nq / np)));
                norm[q] = nq * std::sqrt(std::max(0.0, 1.0 + t * cosang * (np / nq)));
            }
        }
        if (!rotated) return sweep;
    }
    throw NumericalError("one-sided Jacobi SVD did not converge");
}

}  // namespace detail

inline SingularValueDecomposition accurate_svd(const Matrix& a)
{
    if (a.rows() != a.cols()) throw InvalidInput("accurate_svd: square input expected");
    const int n = static_cast<int>(a.rows());
    SingularValueDecomposition out;
    if (n == 0) return out;

    const CompletePivotLDU f = complete_pivot_ldu(a);
    // X = P^T L, Y^T = U Q^T.
    Matrix x = Matrix::Zero(n, n), yt = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        x.row(f.row_perm[k]) = f.lower.row(k);
        yt.col(f.col_perm[k]) = f.upper.col(k);
    }
    const Matrix xd = x * f.pivots.asDiagonal();
    Eigen::ColPivHouseholderQR<Matrix> qr(xd);
    const Matrix r = qr.matrixR().triangularView<Eigen::Upper>();
    const Matrix q = qr.householderQ();
    const Matrix w = r * qr.colsPermutation().transpose() * yt;

    Matrix g = w.transpose();
    Matrix vg = Matrix::Identity(n, n);
    out.sweeps = detail::one_sided_jacobi(g, vg);

    Vector sigma(n);
    for (int k = 0; k < n; ++k) sigma(k) = g.col(k).stableNorm();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return sigma(i) > sigma(j); });

    const Matrix left_all = q * vg;
    out.values.resize(n);
    out.left.resize(n, n);
    out.right.resize(n, n);
    for (int k = 0; k < n; ++k) {
        const int s = order[k];
        out.values(k) = sigma(s);
        out.left.col(k) = left_all.col(s);
        out.right.col(k) = sigma(s) > 0.0 ? Vector(g.col(s) / sigma(s)) : Vector::Zero(n);
    }
    return out;
}

}  // namespace xxbell
