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

// Jordan-Wigner mapping of the XX ring onto free spinless fermions.
//
// H = sum_i J_i (S^x_i S^x_{i+1} + S^y_i S^y_{i+1}) becomes
// sum_i J_i/2 (c+_i c_{i+1} + h.c.) on the open bonds, while the bond that
// closes the ring picks up the sign -(-1)^N of the total fermion parity:
// antiperiodic (-1) for even N, periodic (+1) for odd N. Each parity sector
// is solved separately and the self-consistent, lower-energy one is kept.
//
// The ring is bipartite (L even), so T = [[0, B], [B^T, 0]] with B the
// coupling block between even and odd sites; the spectrum is +-sigma_k(B).
// In the sector whose parity equals that of L/2 every term of det B has the
// same sign, B is never singular and the half-filled state (N = L/2) is
// self-consistent. Its correlation matrix is G = (1 - sign T)/2, built from
// the polar factor of B computed with the accurate SVD, which keeps
// correlations meaningful when couplings span many decades.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "xxbell/error.hpp"
#include "xxbell/linalg.hpp"
#include "xxbell/model.hpp"

namespace xxbell {

enum class ParitySector { Even, Odd };

inline std::string to_string(ParitySector s) { return s == ParitySector::Even ? "even" : "odd"; }
inline int boundary_sign(ParitySector s) { return s == ParitySector::Even ? -1 : +1; }

// |epsilon| below this counts as a zero mode in the dense route.
inline constexpr double zero_mode_tolerance = 1e-12;
// Sector energies closer than this are treated as degenerate.
inline constexpr double sector_tie_tolerance = 1e-12;

struct FermionSolution {
    ParitySector sector = ParitySector::Even;
    Vector eigenvalues;      // single-particle energies of the chosen sector, ascending
    int occupied_count = 0;
    Matrix g;                // G_ij = <c+_i c_j>
    double ground_energy = 0.0;

    // Diagnostics.
    bool other_sector_consistent = false;
    double other_sector_energy = std::numeric_limits<double>::quiet_NaN();
    bool degenerate_tie = false;   // sector energies within sector_tie_tolerance
    bool dense_route = false;      // G came from the dense eigenvectors
    int zero_modes = 0;

    int length() const { return static_cast<int>(g.rows()); }
};

// Single-particle hopping matrix. A two-site ring has a single bond (J_1);
// the second coupling and the boundary sign are not used there.
inline Matrix hopping_matrix(const ChainSpec& chain, int sign)
{
    const int n = chain.length();
    Matrix t = Matrix::Zero(n, n);
    if (n == 2) {
        t(0, 1) = t(1, 0) = chain.couplings[0] / 2;
        return t;
    }
    for (int i = 0; i + 1 < n; ++i) t(i, i + 1) = t(i + 1, i) = chain.couplings[i] / 2;
    t(n - 1, 0) = t(0, n - 1) = sign * chain.couplings[n - 1] / 2;
    return t;
}

// Block B with rows = even sites (2p) and columns = odd sites (2q+1).
inline Matrix bipartite_block(const ChainSpec& chain, int sign)
{
    const int n = chain.length();
    const int h = n / 2;
    Matrix b = Matrix::Zero(h, h);
    const int bonds = n == 2 ? 1 : n;
    for (int bond = 0; bond < bonds; ++bond) {
        const int a = bond, c = (bond + 1) % n;
        double v = chain.couplings[bond] / 2;
        if (bond == n - 1) v *= sign;
        if (a % 2 == 0)
            b(a / 2, c / 2) = v;
        else
            b(c / 2, a / 2) = v;
    }
    return b;
}

namespace detail {

struct DenseSector {
    bool consistent = false;
    int occupied = 0;
    int zero_modes = 0;
    double energy = 0.0;
    SymmetricEigen eig;
};

inline int parity_of(ParitySector s) { return s == ParitySector::Even ? 0 : 1; }

// Fill every strictly negative mode; when the parity is off by one, occupy
// the lowest-index zero mode.
inline DenseSector solve_sector_dense(const ChainSpec& chain, ParitySector sector, bool want_vectors)
{
    DenseSector out;
    const Matrix t = hopping_matrix(chain, boundary_sign(sector));
    if (want_vectors)
        out.eig = diagonalize_symmetric(t);
    else
        out.eig.values = symmetric_eigenvalues(t);
    const Vector& e = out.eig.values;
    int negative = 0;
    for (Eigen::Index k = 0; k < e.size(); ++k) {
        if (e(k) < -zero_mode_tolerance) {
            ++negative;
            out.energy += e(k);
        } else if (std::abs(e(k)) <= zero_mode_tolerance) {
            ++out.zero_modes;
        }
    }
    out.occupied = negative;
    if (out.occupied % 2 != parity_of(sector) && out.zero_modes > 0) ++out.occupied;
    out.consistent = out.occupied % 2 == parity_of(sector);
    return out;
}

inline Matrix projector_from_dense(const DenseSector& s)
{
    const Matrix occ = s.eig.vectors.leftCols(s.occupied);
    return occ * occ.transpose();
}

}  // namespace detail

inline ParitySector half_filling_sector(int length)
{
    return (length / 2) % 2 == 0 ? ParitySector::Even : ParitySector::Odd;
}

// Ground state via the dense eigensolver only. Accurate while couplings stay
// within a few decades of each other; used as the cross-check route.
inline FermionSolution ground_state_correlations_dense(const ChainSpec& chain)
{
    chain.validate();
    const auto even = detail::solve_sector_dense(chain, ParitySector::Even, true);
    const auto odd = detail::solve_sector_dense(chain, ParitySector::Odd, true);
    if (!even.consistent && !odd.consistent)
        throw NumericalError("no self-consistent parity sector", chain.seed);

    // Ties go to the half-filled sector, then to even parity.
    bool pick_even = even.consistent;
    bool tie = false;
    if (even.consistent && odd.consistent) {
        tie = std::abs(even.energy - odd.energy) <= sector_tie_tolerance;
        if (tie) {
            const bool even_half = even.occupied * 2 == chain.length();
            const bool odd_half = odd.occupied * 2 == chain.length();
            pick_even = even_half == odd_half ? true : even_half;
        } else {
            pick_even = even.energy < odd.energy;
        }
    }
    const auto& chosen = pick_even ? even : odd;
    const auto& other = pick_even ? odd : even;

    FermionSolution sol;
    sol.sector = pick_even ? ParitySector::Even : ParitySector::Odd;
    sol.eigenvalues = chosen.eig.values;
    sol.occupied_count = chosen.occupied;
    sol.g = detail::projector_from_dense(chosen);
    sol.ground_energy = chosen.energy;
    sol.other_sector_consistent = other.consistent;
    sol.other_sector_energy = other.consistent ? other.energy : std::numeric_limits<double>::quiet_NaN();
    sol.degenerate_tie = tie;
    sol.dense_route = true;
    sol.zero_modes = chosen.zero_modes;
    return sol;
}

inline FermionSolution ground_state_correlations(const ChainSpec& chain)
{
    chain.validate();
    const int n = chain.length();
    const int h = n / 2;
    const ParitySector main = half_filling_sector(n);
    const ParitySector alt = main == ParitySector::Even ? ParitySector::Odd : ParitySector::Even;

    const SingularValueDecomposition svd = accurate_svd(bipartite_block(chain, boundary_sign(main)));
    if (!(svd.values(h - 1) > 0.0)) {
        // Only reachable through underflow; the dense route applies the
        // zero-mode rule.
        return ground_state_correlations_dense(chain);
    }
    double energy = 0.0;
    for (int k = h - 1; k >= 0; --k) energy -= svd.values(k);

    const auto other = detail::solve_sector_dense(chain, alt, false);
    if (other.consistent && other.energy < energy - sector_tie_tolerance) {
        // A lower, self-consistent state away from half filling would
        // contradict the spin-sector structure of the ring; fall back to the
        // literal dense procedure so the anomaly is reproduced faithfully.
        return ground_state_correlations_dense(chain);
    }

    FermionSolution sol;
    sol.sector = main;
    sol.eigenvalues.resize(n);
    for (int k = 0; k < h; ++k) {
        sol.eigenvalues(k) = -svd.values(k);
        sol.eigenvalues(n - 1 - k) = svd.values(k);
    }
    sol.occupied_count = h;
    sol.ground_energy = energy;
    sol.other_sector_consistent = other.consistent;
    sol.other_sector_energy = other.consistent ? other.energy : std::numeric_limits<double>::quiet_NaN();
    sol.degenerate_tie = other.consistent && std::abs(other.energy - energy) <= sector_tie_tolerance;

    const Matrix polar = svd.left * svd.right.transpose();
    sol.g = Matrix::Identity(n, n) * 0.5;
    for (int p = 0; p < h; ++p)
        for (int q = 0; q < h; ++q) {
            const double v = -0.5 * polar(p, q);
            sol.g(2 * p, 2 * q + 1) = v;
            sol.g(2 * q + 1, 2 * p) = v;
        }
    return sol;
}

// Debug record: sector, single-particle spectrum and ground energy.
inline nlohmann::json spectrum_record(const FermionSolution& s, std::uint64_t seed)
{
    return nlohmann::json{{"seed", seed},
                          {"sector", to_string(s.sector)},
                          {"ground_energy", s.ground_energy},
                          {"occupied", s.occupied_count},
                          {"eigenvalues", std::vector<double>(s.eigenvalues.begin(), s.eigenvalues.end())}};
}

}  // namespace xxbell
