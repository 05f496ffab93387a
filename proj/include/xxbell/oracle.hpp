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

// Brute-force exact diagonalization of the XX ring in the spin basis.
//
// This module is the ground truth for everything else and shares nothing
// with the fermion code beyond ChainSpec. The Hamiltonian is built directly
// from spin flip-flops in the total S^z = 0 sector, diagonalized densely in
// double precision, and the low-lying cluster that contains the ground state
// is then refined in binary128 arithmetic (Rayleigh-Ritz plus a correction
// step preconditioned by the double-precision spectrum). The refinement
// matters for strongly disordered rings whose many-body gap sits far below
// double-precision resolution.

#include <quadmath.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "xxbell/error.hpp"
#include "xxbell/model.hpp"

namespace xxbell::oracle {

using quad = __float128;

inline constexpr int max_length = 14;

using DensityMatrix2 = Eigen::Matrix4cd;  // basis ++, +-, -+, -- ; + = up

struct GroundState {
    int length = 0;
    std::vector<std::uint32_t> basis;  // bit i set <=> spin i up; sorted
    std::vector<double> amplitudes;
    double energy = 0.0;
    double first_excited = 0.0;  // next level in the same sector
    bool degenerate = false;
    int cluster_size = 0;        // states refined together in binary128
    double residual = 0.0;       // ||H psi - E psi|| after refinement

    std::size_t index_of(std::uint32_t s) const
    {
        auto it = std::lower_bound(basis.begin(), basis.end(), s);
        return (it != basis.end() && *it == s) ? static_cast<std::size_t>(it - basis.begin()) : basis.size();
    }
};

namespace detail {

struct Bond {
    int a, b;
    double amplitude;  // J/2
};

inline std::vector<Bond> bonds_of(const ChainSpec& chain)
{
    const int n = chain.length();
    std::vector<Bond> out;
    if (n == 2) return {{0, 1, chain.couplings[0] / 2}};  // a two-site ring has a single bond
    for (int i = 0; i < n; ++i) out.push_back({i, (i + 1) % n, chain.couplings[i] / 2});
    return out;
}

// Sparse rows: for each basis state, the flip-flop partners and amplitudes.
struct SparseHamiltonian {
    std::vector<std::size_t> start;
    std::vector<std::uint32_t> col;
    std::vector<double> val;

    std::size_t dim() const { return start.size() - 1; }

    template <class T>
    void apply(const T* x, T* y) const
    {
        for (std::size_t r = 0; r + 1 < start.size(); ++r) {
            T acc = 0;
            for (std::size_t k = start[r]; k < start[r + 1]; ++k) acc += T(val[k]) * x[col[k]];
            y[r] = acc;
        }
    }
};

inline SparseHamiltonian build_hamiltonian(const ChainSpec& chain, const std::vector<std::uint32_t>& basis)
{
    const auto bonds = bonds_of(chain);
    SparseHamiltonian h;
    h.start.push_back(0);
    for (std::uint32_t s : basis) {
        for (const auto& b : bonds) {
            const bool ua = (s >> b.a) & 1u, ub = (s >> b.b) & 1u;
            if (ua == ub) continue;
            const std::uint32_t t = s ^ ((1u << b.a) | (1u << b.b));
            auto it = std::lower_bound(basis.begin(), basis.end(), t);
            h.col.push_back(static_cast<std::uint32_t>(it - basis.begin()));
            h.val.push_back(b.amplitude);
        }
        h.start.push_back(h.col.size());
    }
    return h;
}

inline quad qabs(quad x) { return x < 0 ? -x : x; }

// Cyclic Jacobi eigensolver for a small symmetric matrix (row-major, n x n).
// On return a is diagonal (eigenvalues) and z holds eigenvectors by column.
inline void jacobi_eigen(std::vector<quad>& a, std::vector<quad>& z, int n)
{
    z.assign(static_cast<std::size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i) z[i * n + i] = 1;
    const quad tiny = 1e-33Q;
    for (int sweep = 0; sweep < 100; ++sweep) {
        quad off = 0, diag = 0;
        for (int p = 0; p < n; ++p) {
            diag += a[p * n + p] * a[p * n + p];
            for (int q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        }
        if (off <= tiny * tiny * (diag + 1e-300Q)) return;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const quad apq = a[p * n + q];
                if (qabs(apq) <= tiny * 1e-3Q * sqrtq(qabs(a[p * n + p] * a[q * n + q])) || apq == 0) continue;
                const quad theta = (a[q * n + q] - a[p * n + p]) / (2 * apq);
                const quad t = (theta >= 0 ? 1 : -1) / (qabs(theta) + sqrtq(1 + theta * theta));
                const quad c = 1 / sqrtq(1 + t * t), s = t * c;
                for (int k = 0; k < n; ++k) {
                    const quad akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const quad apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const quad zkp = z[k * n + p], zkq = z[k * n + q];
                    z[k * n + p] = c * zkp - s * zkq;
                    z[k * n + q] = s * zkp + c * zkq;
                }
            }
        }
    }
    throw NumericalError("oracle: binary128 Jacobi did not converge");
}

// Columns of a dim x k block (column-major), orthonormalized in place.
inline void orthonormalize(std::vector<quad>& phi, std::size_t dim, int k)
{
    for (int pass = 0; pass < 2; ++pass) {
        for (int c = 0; c < k; ++c) {
            quad* v = &phi[c * dim];
            for (int p = 0; p < c; ++p) {
                const quad* u = &phi[p * dim];
                quad d = 0;
                for (std::size_t i = 0; i < dim; ++i) d += u[i] * v[i];
                for (std::size_t i = 0; i < dim; ++i) v[i] -= d * u[i];
            }
            quad nrm = 0;
            for (std::size_t i = 0; i < dim; ++i) nrm += v[i] * v[i];
            nrm = sqrtq(nrm);
            if (nrm == 0) throw NumericalError("oracle: refinement basis collapsed");
            for (std::size_t i = 0; i < dim; ++i) v[i] /= nrm;
        }
    }
}

}  // namespace detail

inline std::vector<std::uint32_t> sz_zero_basis(int length)
{
    std::vector<std::uint32_t> basis;
    for (std::uint32_t s = 0; s < (1u << length); ++s)
        if (std::popcount(s) == length / 2) basis.push_back(s);
    return basis;
}

inline GroundState ground_state_exact(const ChainSpec& chain)
{
    chain.validate();
    const int n = chain.length();
    if (n > max_length) throw InvalidInput("oracle supports L <= 14, got " + std::to_string(n));

    GroundState gs;
    gs.length = n;
    gs.basis = sz_zero_basis(n);
    const auto h = detail::build_hamiltonian(chain, gs.basis);
    const std::size_t dim = h.dim();

    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t k = h.start[r]; k < h.start[r + 1]; ++k) dense(r, h.col[k]) += h.val[k];
    // Divide and conquer (LAPACK dsyevd); ascending eigenvalues.
    Eigen::MatrixXd vec = dense;
    Eigen::VectorXd lam(static_cast<Eigen::Index>(dim));
    const auto order = static_cast<lapack_int>(dim);
    if (LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', order, vec.data(), order, lam.data()) != 0)
        throw NumericalError("oracle: dense eigensolver failed", chain.seed);

    if (dim == 1) {
        gs.amplitudes = {vec(0, 0)};
        gs.energy = gs.first_excited = lam(0);
        gs.cluster_size = 1;
        return gs;
    }

    // Cluster: the lowest k levels, ended at the first gap of at least
    // 1e-3 of the bandwidth (or the widest gap among the first 128 levels).
    const double spread = std::max(lam(dim - 1) - lam(0), 1e-300);
    const std::size_t cap = std::min<std::size_t>(dim - 1, 128);
    std::size_t k = 0, widest = 1;
    for (std::size_t m = 1; m <= cap; ++m) {
        if (lam(m) - lam(m - 1) > lam(widest) - lam(widest - 1)) widest = m;
        if (lam(m) - lam(m - 1) >= 1e-3 * spread) {
            k = m;
            break;
        }
    }
    if (k == 0) k = widest;
    const int kk = static_cast<int>(k);

    std::vector<quad> phi(dim * k), hphi(dim * k), z, s(k * k);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t i = 0; i < dim; ++i) phi[c * dim + i] = vec(i, c);

    const Eigen::MatrixXd rest = vec.rightCols(dim - k);
    const Eigen::VectorXd rest_lam = lam.tail(dim - k);
    std::vector<quad> theta(k);

    auto rayleigh_ritz = [&] {
        detail::orthonormalize(phi, dim, kk);
        for (std::size_t c = 0; c < k; ++c) h.apply(&phi[c * dim], &hphi[c * dim]);
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = a; b < k; ++b) {
                quad d = 0;
                for (std::size_t i = 0; i < dim; ++i) d += phi[a * dim + i] * hphi[b * dim + i];
                s[a * k + b] = s[b * k + a] = d;
            }
        detail::jacobi_eigen(s, z, kk);
        std::vector<std::size_t> order(k);
        for (std::size_t c = 0; c < k; ++c) order[c] = c;
        std::sort(order.begin(), order.end(), [&](auto x, auto y) { return s[x * k + x] < s[y * k + y]; });
        std::vector<quad> nphi(dim * k, 0), nhphi(dim * k, 0);
        for (std::size_t c = 0; c < k; ++c) {
            const std::size_t src = order[c];
            theta[c] = s[src * k + src];
            for (std::size_t b = 0; b < k; ++b) {
                const quad w = z[b * k + src];
                if (w == 0) continue;
                for (std::size_t i = 0; i < dim; ++i) {
                    nphi[c * dim + i] += w * phi[b * dim + i];
                    nhphi[c * dim + i] += w * hphi[b * dim + i];
                }
            }
        }
        phi.swap(nphi);
        hphi.swap(nhphi);
    };

    Eigen::MatrixXd resid(dim, k);
    for (int iter = 0; iter < 4; ++iter) {
        rayleigh_ritz();
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t i = 0; i < dim; ++i)
                resid(i, c) = static_cast<double>(hphi[c * dim + i] - theta[c] * phi[c * dim + i]);
        const Eigen::MatrixXd proj = rest.transpose() * resid;
        Eigen::MatrixXd scaled(proj.rows(), k);
        for (std::size_t c = 0; c < k; ++c)
            for (Eigen::Index m = 0; m < proj.rows(); ++m)
                scaled(m, c) = proj(m, c) / (rest_lam(m) - static_cast<double>(theta[c]));
        const Eigen::MatrixXd delta = rest * scaled;
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t i = 0; i < dim; ++i) phi[c * dim + i] -= delta(i, c);
    }
    rayleigh_ritz();

    quad r2 = 0;
    for (std::size_t i = 0; i < dim; ++i) {
        const quad r = hphi[i] - theta[0] * phi[i];
        r2 += r * r;
    }
    gs.residual = static_cast<double>(sqrtq(r2));
    gs.amplitudes.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) gs.amplitudes[i] = static_cast<double>(phi[i]);
    gs.energy = static_cast<double>(theta[0]);
    gs.first_excited = k > 1 ? static_cast<double>(theta[1]) : lam(1);
    gs.degenerate = k > 1 && (theta[1] - theta[0]) <= 1e-24Q * spread;
    gs.cluster_size = kk;
    return gs;
}

// Lowest energy over the full 2^L space (all S^z sectors), for checking
// that the S^z = 0 restriction is harmless. L <= 12.
inline double ground_energy_full_space(const ChainSpec& chain)
{
    chain.validate();
    const int n = chain.length();
    if (n > 12) throw InvalidInput("full-space diagonalization limited to L <= 12");
    const std::uint32_t dim = 1u << n;
    const auto bonds = detail::bonds_of(chain);
    Eigen::MatrixXd hm = Eigen::MatrixXd::Zero(dim, dim);
    for (std::uint32_t s = 0; s < dim; ++s)
        for (const auto& b : bonds) {
            const bool ua = (s >> b.a) & 1u, ub = (s >> b.b) & 1u;
            if (ua != ub) hm(s ^ ((1u << b.a) | (1u << b.b)), s) += b.amplitude;
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hm, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

inline void check_sites(const GroundState& gs, int i, int j)
{
    if (i < 0 || j < 0 || i >= gs.length || j >= gs.length) throw InvalidInput("oracle: site out of range");
    if (i == j) throw InvalidInput("oracle: two distinct sites required");
}

namespace detail {

// Reduced density matrix accumulated in binary128 (row-major 4 x 4).
inline std::vector<quad> reduced_density_matrix_q(const GroundState& gs, int i, int j)
{
    std::vector<quad> rho(16, 0);
    const std::uint32_t mask = (1u << i) | (1u << j);
    auto label = [&](std::uint32_t s) { return 2 * (((s >> i) & 1u) ? 0 : 1) + (((s >> j) & 1u) ? 0 : 1); };
    for (std::size_t a = 0; a < gs.basis.size(); ++a) {
        const std::uint32_t s = gs.basis[a];
        const std::uint32_t rest = s & ~mask;
        for (std::uint32_t bits = 0; bits < 4; ++bits) {
            const std::uint32_t t = rest | ((bits & 1u) << i) | (((bits >> 1) & 1u) << j);
            const std::size_t b = gs.index_of(t);
            if (b == gs.basis.size()) continue;
            rho[label(s) * 4 + label(t)] += static_cast<quad>(gs.amplitudes[a]) * gs.amplitudes[b];
        }
    }
    return rho;
}

inline std::vector<quad> multiply4(const std::vector<quad>& x, const std::vector<quad>& y)
{
    std::vector<quad> r(16, 0);
    for (int a = 0; a < 4; ++a)
        for (int k = 0; k < 4; ++k)
            for (int b = 0; b < 4; ++b) r[a * 4 + b] += x[a * 4 + k] * y[k * 4 + b];
    return r;
}

// Wootters concurrence of a real density matrix in binary128. The square
// roots of near-zero eigenvalues would cost half the digits in double.
inline double wootters_real(std::vector<quad> rho)
{
    std::vector<quad> z;
    const std::vector<quad> rho_in = rho;
    jacobi_eigen(rho, z, 4);
    std::vector<quad> sq(16, 0);
    for (int k = 0; k < 4; ++k) {
        const quad mu = rho[k * 4 + k] > 0 ? sqrtq(rho[k * 4 + k]) : 0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) sq[a * 4 + b] += z[a * 4 + k] * mu * z[b * 4 + k];
    }
    // sigma_y (x) sigma_y is real.
    const std::vector<quad> yy{0, 0, 0, -1, 0, 0, 1, 0, 0, 1, 0, 0, -1, 0, 0, 0};
    auto r = multiply4(multiply4(sq, multiply4(multiply4(yy, rho_in), yy)), sq);
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) r[a * 4 + b] = r[b * 4 + a] = (r[a * 4 + b] + r[b * 4 + a]) / 2;
    jacobi_eigen(r, z, 4);
    std::vector<quad> l(4);
    for (int k = 0; k < 4; ++k) l[k] = r[k * 4 + k] > 0 ? sqrtq(r[k * 4 + k]) : 0;
    std::sort(l.begin(), l.end(), std::greater<>());
    const quad c = l[0] - l[1] - l[2] - l[3];
    return c > 0 ? static_cast<double>(c) : 0.0;
}

}  // namespace detail

// Partial trace over every site except i and j. Row/column index is
// 2*(site i down) + (site j down).
inline DensityMatrix2 reduced_density_matrix(const GroundState& gs, int i, int j)
{
    check_sites(gs, i, j);
    const auto q = detail::reduced_density_matrix_q(gs, i, j);
    DensityMatrix2 rho;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) rho(a, b) = static_cast<double>(q[a * 4 + b]);
    return rho;
}

inline double sz_expectation(const GroundState& gs, int i)
{
    double acc = 0.0;
    for (std::size_t a = 0; a < gs.basis.size(); ++a)
        acc += gs.amplitudes[a] * gs.amplitudes[a] * (((gs.basis[a] >> i) & 1u) ? 0.5 : -0.5);
    return acc;
}

// <c+_i c_j> rebuilt in the spin language: for i < j,
// c+_i c_j = S+_i prod_{i<k<j} (-sigma^z_k) S-_j, and c+_i c_i = S^z_i + 1/2.
inline double fermion_correlation(const GroundState& gs, int i, int j)
{
    if (i == j) return sz_expectation(gs, i) + 0.5;
    const int lo = std::min(i, j), hi = std::max(i, j);
    double acc = 0.0;
    for (std::size_t a = 0; a < gs.basis.size(); ++a) {
        const std::uint32_t s = gs.basis[a];
        // S+_lo S-_hi |s> (or its transpose; the matrix is real symmetric)
        if (((s >> lo) & 1u) || !((s >> hi) & 1u)) continue;
        const std::uint32_t t = s ^ ((1u << lo) | (1u << hi));
        const std::size_t b = gs.index_of(t);
        if (b == gs.basis.size()) continue;
        int ups = 0;
        for (int k = lo + 1; k < hi; ++k) ups += (s >> k) & 1u;
        const double string = (ups % 2 == 0) ? 1.0 : -1.0;  // prod of -sigma^z = (-1)^{#up}
        acc += gs.amplitudes[b] * string * gs.amplitudes[a];
    }
    return acc;
}

struct OracleMeasures {
    double cxx = 0.0;
    double cyy = 0.0;
    double czz = 0.0;
    double fidelity = 0.0;   // <Psi-| rho |Psi->
    double wootters = 0.0;   // concurrence from the rho * rho~ spectrum
    double bell = 0.0;
};

inline double wootters_concurrence(const DensityMatrix2& rho)
{
    Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
    yy(0, 3) = -1.0;
    yy(1, 2) = 1.0;
    yy(2, 1) = 1.0;
    yy(3, 0) = -1.0;
    const Eigen::Matrix4cd tilde = yy * rho.conjugate() * yy;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho);
    Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::Matrix4cd sq = es.eigenvectors() * ev.cast<std::complex<double>>().asDiagonal() *
                                es.eigenvectors().adjoint();
    const Eigen::Matrix4cd r = sq * tilde * sq;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> er(0.5 * (r + r.adjoint()), Eigen::EigenvaluesOnly);
    Eigen::Vector4d l = er.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    std::sort(l.data(), l.data() + 4, std::greater<>());
    return std::max(0.0, l(0) - l(1) - l(2) - l(3));
}

inline OracleMeasures oracle_measures(const GroundState& gs, int i, int j)
{
    check_sites(gs, i, j);
    OracleMeasures m;
    const std::uint32_t flip = (1u << i) | (1u << j);
    for (std::size_t a = 0; a < gs.basis.size(); ++a) {
        const std::uint32_t s = gs.basis[a];
        const double si = ((s >> i) & 1u) ? 0.5 : -0.5;
        const double sj = ((s >> j) & 1u) ? 0.5 : -0.5;
        m.czz += gs.amplitudes[a] * gs.amplitudes[a] * si * sj;
        const std::size_t b = gs.index_of(s ^ flip);
        if (b == gs.basis.size()) continue;
        // S^x S^x flips both spins with weight 1/4; S^y S^y carries -4 s_i s_j.
        m.cxx += 0.25 * gs.amplitudes[a] * gs.amplitudes[b];
        m.cyy += -0.25 * (4.0 * si * sj) * gs.amplitudes[a] * gs.amplitudes[b];
    }
    const DensityMatrix2 rho = reduced_density_matrix(gs, i, j);
    Eigen::Vector4cd singlet(0.0, std::numbers::sqrt2 / 2, -std::numbers::sqrt2 / 2, 0.0);
    m.fidelity = (singlet.adjoint() * rho * singlet)(0, 0).real();
    m.wootters = detail::wootters_real(detail::reduced_density_matrix_q(gs, i, j));
    m.bell = 8.0 * std::max(std::sqrt(2.0 * m.cxx * m.cxx), std::hypot(m.cxx, m.czz));
    return m;
}

}  // namespace xxbell::oracle
