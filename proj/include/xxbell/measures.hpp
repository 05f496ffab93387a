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

// Pairwise entanglement and Bell nonlocality from the two correlators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "xxbell/correlators.hpp"
#include "xxbell/error.hpp"

namespace xxbell {

// |C^xx| above this violates the CHSH bound when |C^xx| >= |C^zz|.
inline const double nonlocal_cxx_threshold = 1.0 / (4.0 * std::numbers::sqrt2);
// Tolerance of the monitored |C^xx| >= |C^zz| property and of M <= 1.
inline constexpr double property_tolerance = 1e-9;

// Singlet fidelity <Psi-| rho_ij |Psi-> for the XX ground state.
inline double fidelity(double cxx, double czz) { return 0.25 - 2.0 * cxx - czz; }

inline double concurrence(double f) { return f > 0.5 ? 2.0 * f - 1.0 : 0.0; }

inline double bell(double cxx, double czz)
{
    return 8.0 * std::max(std::sqrt(2.0 * cxx * cxx), std::hypot(cxx, czz));
}

inline bool is_nonlocal(double cxx, double czz) { return bell(cxx, czz) > 2.0; }

inline bool exceeds_cxx_threshold(double cxx) { return std::abs(cxx) > nonlocal_cxx_threshold; }

inline bool violates_xx_dominance(double cxx, double czz)
{
    return std::abs(czz) - std::abs(cxx) > property_tolerance;
}

inline void apply_measures(PairObservables& p)
{
    p.fidelity = fidelity(p.cxx, p.czz);
    p.concurrence = concurrence(p.fidelity);
    p.bell = bell(p.cxx, p.czz);
    p.entangled = p.fidelity > 0.5;
    p.nonlocal = p.bell > 2.0;
    p.nonlocal_by_threshold = exceeds_cxx_threshold(p.cxx);
}

inline void apply_measures(std::span<PairObservables> pairs)
{
    for (auto& p : pairs) apply_measures(p);
}

// Per-realization scalars and the property checks that must hold on every
// realization.
struct RealizationSummary {
    double monogamy = 0.0;
    std::int64_t q_nl = 0;
    double q_nl_normalized = 0.0;
    int max_entangled_separation = 0;  // 0 when no pair is entangled
    int max_nonlocal_separation = 0;

    std::int64_t xx_dominance_violations = 0;      // |C^zz| > |C^xx|
    std::int64_t predicate_disagreements = 0;  // B > 2 vs |C^xx| > 1/(4 sqrt 2)
    std::int64_t nonlocal_not_entangled = 0;
    std::int64_t nonlocal_degree_violations = 0;  // sites in two nonlocal pairs
    bool monogamy_violated = false;
};

inline RealizationSummary summarize_realization(std::span<const PairObservables> pairs, int length)
{
    const std::size_t expected = static_cast<std::size_t>(length) * (length - 1) / 2;
    if (pairs.size() != expected)
        throw InvalidInput("summarize_realization needs every pair i < j (got " + std::to_string(pairs.size()) +
                           " of " + std::to_string(expected) + ")");
    std::vector<char> seen(expected, 0);
    std::vector<int> degree(length, 0);
    RealizationSummary s;
    double c2 = 0.0;
    for (const auto& p : pairs) {
        if (p.i < 0 || p.j >= length || p.i >= p.j) throw InvalidInput("summarize_realization: bad pair labels");
        const auto slot = detail::pair_slot(p.i, p.j, length);
        if (seen[slot]) throw InvalidInput("summarize_realization: duplicate pair");
        seen[slot] = 1;

        c2 += p.concurrence * p.concurrence;
        if (p.entangled) s.max_entangled_separation = std::max(s.max_entangled_separation, p.separation);
        if (p.nonlocal) {
            ++s.q_nl;
            s.max_nonlocal_separation = std::max(s.max_nonlocal_separation, p.separation);
            ++degree[p.i];
            ++degree[p.j];
            if (!p.entangled) ++s.nonlocal_not_entangled;
        }
        if (p.nonlocal != p.nonlocal_by_threshold) ++s.predicate_disagreements;
        if (violates_xx_dominance(p.cxx, p.czz)) ++s.xx_dominance_violations;
    }
    for (int d : degree)
        if (d > 1) ++s.nonlocal_degree_violations;
    s.monogamy = 2.0 * c2 / length;
    s.q_nl_normalized = 2.0 * static_cast<double>(s.q_nl) / length;
    s.monogamy_violated = s.monogamy > 1.0 + property_tolerance;
    return s;
}

}  // namespace xxbell
