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

// Shared helpers for the test suites: seeded generators of chains and
// matrices used by the property tests.

#include <cstdint>
#include <random>
#include <vector>

#include "xxbell/linalg.hpp"
#include "xxbell/model.hpp"

namespace xxbell::fixtures {

inline constexpr std::uint64_t fixed_seed = 20260101;

// Random chain of the given model at power-law strength d.
inline ChainSpec random_chain(ModelKind model, int length, double d, std::uint64_t seed)
{
    return build_chain(model, length, DisorderSpec::make(DisorderKind::PowerLaw, d), seed);
}

// Chains drawn over a spread of models, lengths and strengths.
struct ChainCase {
    ChainSpec chain;
    double d = 0.0;
};

inline std::vector<ChainCase> chain_cases(const std::vector<int>& lengths, const std::vector<double>& strengths,
                                          int seeds, std::uint64_t master = fixed_seed)
{
    std::vector<ChainCase> out;
    std::uint64_t k = 0;
    for (int length : lengths)
        for (ModelKind model : {ModelKind::Uncorrelated, ModelKind::Correlated})
            for (double d : strengths)
                for (int s = 0; s < seeds; ++s)
                    out.push_back({random_chain(model, length, d, derive_seed(master, k++)), d});
    return out;
}

inline Matrix random_symmetric(int n, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = normal(gen);
    return a;
}

inline Matrix random_matrix(int rows, int cols, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    Matrix a(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) a(i, j) = normal(gen);
    return a;
}

}  // namespace xxbell::fixtures
