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

#include <cmath>

#include <gtest/gtest.h>

#include "support.hpp"
#include "xxbell/linalg.hpp"

using namespace xxbell;

TEST(DiagonalizeSymmetric, TwoByTwo)
{
    Matrix t(2, 2);
    t << 0.0, 0.5, 0.5, 0.0;
    const auto e = diagonalize_symmetric(t);
    EXPECT_NEAR(e.values(0), -0.5, 1e-15);
    EXPECT_NEAR(e.values(1), 0.5, 1e-15);
}

TEST(DiagonalizeSymmetric, DiagonalIsSorted)
{
    Vector d(4);
    d << 3.0, -1.0, 2.0, 0.5;
    const auto e = diagonalize_symmetric(Matrix(d.asDiagonal()));
    EXPECT_EQ(e.values(0), -1.0);
    EXPECT_EQ(e.values(1), 0.5);
    EXPECT_EQ(e.values(2), 2.0);
    EXPECT_EQ(e.values(3), 3.0);
}

TEST(DiagonalizeSymmetric, RejectsAsymmetricInput)
{
    Matrix t = Matrix::Zero(3, 3);
    t(0, 1) = 1e-6;
    EXPECT_THROW(diagonalize_symmetric(t), InvalidInput);
    EXPECT_THROW(diagonalize_symmetric(Matrix::Zero(2, 3)), InvalidInput);
}

TEST(DiagonalizeSymmetric, RandomReconstruction)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Matrix t = fixtures::random_symmetric(8, s);
        const auto e = diagonalize_symmetric(t);
        const Matrix back = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
        EXPECT_LT((back - t).norm(), 1e-10);
        EXPECT_LT((e.vectors.transpose() * e.vectors - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-10);
        for (int k = 0; k < 8; ++k)
            EXPECT_LT((t * e.vectors.col(k) - e.values(k) * e.vectors.col(k)).norm(), 1e-10 * t.norm());
    }
}

TEST(CompletePivotLDU, Reconstructs)
{
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Matrix a = fixtures::random_matrix(7, 7, s);
        const auto f = complete_pivot_ldu(a);
        Matrix paq(7, 7);
        for (int i = 0; i < 7; ++i)
            for (int j = 0; j < 7; ++j) paq(i, j) = a(f.row_perm[i], f.col_perm[j]);
        EXPECT_LT((f.lower * f.pivots.asDiagonal() * f.upper - paq).norm(), 1e-12);
        EXPECT_LE(f.lower.cwiseAbs().maxCoeff(), 1.0);
        EXPECT_LE(f.upper.cwiseAbs().maxCoeff(), 1.0);
    }
}

TEST(AccurateSvd, RandomReconstruction)
{
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Matrix a = fixtures::random_matrix(9, 9, 100 + s);
        const auto svd = accurate_svd(a);
        EXPECT_LT((svd.left * svd.values.asDiagonal() * svd.right.transpose() - a).norm(), 1e-12 * a.norm());
        EXPECT_LT((svd.left.transpose() * svd.left - Matrix::Identity(9, 9)).norm(), 1e-12);
        EXPECT_LT((svd.right.transpose() * svd.right - Matrix::Identity(9, 9)).norm(), 1e-12);
        for (int k = 0; k + 1 < 9; ++k) EXPECT_GE(svd.values(k), svd.values(k + 1));
        const Eigen::JacobiSVD<Matrix> ref(a);
        EXPECT_LT((ref.singularValues() - svd.values).norm(), 1e-12);
    }
}

TEST(AccurateSvd, GradedCyclicBidiagonalKeepsRelativeAccuracy)
{
    // B = diag(a) + shift(b) with positive entries spanning ~60 decades:
    // |det B| = prod a + prod b without cancellation, so the product of the
    // computed singular values can be checked to relative precision.
    for (std::uint64_t s = 0; s < 20; ++s) {
        const int n = 16;
        const Matrix r = fixtures::random_matrix(2, n, 900 + s);
        Matrix b = Matrix::Zero(n, n);
        double log_a = 0.0, log_b = 0.0;
        for (int k = 0; k < n; ++k) {
            const double a = std::pow(10.0, -4.0 * std::abs(r(0, k)));
            const double c = std::pow(10.0, -4.0 * std::abs(r(1, k)));
            b(k, k) = a;
            b(k, (k + 1) % n) = (k + 1 == n) ? -c : c;  // sign that avoids cancellation for even n
            log_a += std::log(a);
            log_b += std::log(c);
        }
        const double m = std::max(log_a, log_b);
        const double log_det = m + std::log(std::exp(log_a - m) + std::exp(log_b - m));
        const auto svd = accurate_svd(b);
        double log_prod = 0.0;
        for (int k = 0; k < n; ++k) log_prod += std::log(svd.values(k));
        EXPECT_NEAR(log_prod, log_det, 1e-11 * std::abs(log_det) + 1e-12) << "seed " << s;
    }
}
