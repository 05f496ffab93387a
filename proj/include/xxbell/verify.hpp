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

// Cross-checks of the free-fermion pipeline against exact diagonalization.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "xxbell/correlators.hpp"
#include "xxbell/freefermion.hpp"
#include "xxbell/measures.hpp"
#include "xxbell/model.hpp"
#include "xxbell/oracle.hpp"

namespace xxbell {

struct VerifyOptions {
    std::vector<int> lengths{8, 10, 12};
    std::vector<std::string> strengths{"0.1", "1", "5"};
    int seeds = 20;
    std::uint64_t master_seed = 0;
    double corrupt_g = 0.0;  // test hook: added to G(0,1) and G(1,0)
};

struct Deviation {
    std::string formula;
    double tolerance = 0.0;
    double value = 0.0;
    std::string model;
    int length = 0;
    std::string strength;
    std::uint64_t seed = 0;
    int i = -1;  // 0-based, -1 when not tied to a pair
    int j = -1;
};

struct FormulaCheck {
    double tolerance = 0.0;
    std::uint64_t checks = 0;
    Deviation worst;
    std::uint64_t failures = 0;
};

struct VerifyReport {
    std::map<std::string, FormulaCheck> formulas;
    std::vector<Deviation> failures;  // first failures, capped
    std::uint64_t chains = 0;

    bool passed() const
    {
        for (const auto& [name, f] : formulas)
            if (f.failures > 0) return false;
        return true;
    }
};

inline constexpr std::size_t max_reported_failures = 100;

namespace detail {

struct VerifyContext {
    VerifyReport& report;
    Deviation where;

    void record(const std::string& formula, double tolerance, double deviation, int i = -1, int j = -1)
    {
        auto& f = report.formulas[formula];
        f.tolerance = tolerance;
        ++f.checks;
        Deviation d = where;
        d.formula = formula;
        d.tolerance = tolerance;
        d.value = std::isnan(deviation) ? INFINITY : deviation;
        d.i = i;
        d.j = j;
        if (f.checks == 1 || d.value > f.worst.value) f.worst = d;
        if (d.value > tolerance) {
            ++f.failures;
            if (report.failures.size() < max_reported_failures) report.failures.push_back(d);
        }
    }
};

inline void verify_chain(VerifyContext& ctx, const ChainSpec& chain, double corrupt)
{
    const auto gs = oracle::ground_state_exact(chain);
    auto sol = ground_state_correlations(chain);
    if (corrupt != 0.0) {
        sol.g(0, 1) += corrupt;
        sol.g(1, 0) += corrupt;
    }
    ctx.record("ground_energy", 1e-9, std::abs(sol.ground_energy - gs.energy));
    for (int i = 0; i < chain.length(); ++i) ctx.record("sz_zero", 1e-10, std::abs(oracle::sz_expectation(gs, i)), i);

    auto pairs = chain.length() <= 4 ? all_pairs(sol.g) : all_pairs_ring(chain, sol);
    apply_measures(pairs);
    for (const auto& p : pairs) {
        const auto m = oracle::oracle_measures(gs, p.i, p.j);
        ctx.record("cxx", 1e-9, std::abs(p.cxx - m.cxx), p.i, p.j);
        ctx.record("czz", 1e-9, std::abs(p.czz - m.czz), p.i, p.j);
        ctx.record("cyy_symmetry", 1e-10, std::abs(m.cyy - m.cxx), p.i, p.j);
        ctx.record("fidelity_identity", 1e-10, std::abs(m.fidelity - fidelity(m.cxx, m.czz)), p.i, p.j);
        ctx.record("fidelity", 1e-9, std::abs(p.fidelity - m.fidelity), p.i, p.j);
        ctx.record("concurrence_identity", 1e-8, std::abs(m.wootters - p.concurrence), p.i, p.j);
        ctx.record("bell", 1e-9, std::abs(p.bell - m.bell), p.i, p.j);
    }
}

}  // namespace detail

inline VerifyReport run_verify(const VerifyOptions& opt)
{
    VerifyReport report;
    detail::VerifyContext ctx{report, {}};

    // Two sites: a singlet.
    {
        const auto chain = make_chain(ModelKind::Uniform, {1.0, 1.0});
        auto sol = ground_state_correlations(chain);
        if (opt.corrupt_g != 0.0) {
            sol.g(0, 1) += opt.corrupt_g;
            sol.g(1, 0) += opt.corrupt_g;
        }
        auto pairs = all_pairs(sol.g);
        apply_measures(pairs);
        ctx.where = Deviation{};
        ctx.where.model = "uniform";
        ctx.where.length = 2;
        ctx.where.strength = "0";
        const auto& p = pairs.at(0);
        ctx.record("singlet", 1e-12,
                   std::max({std::abs(p.fidelity - 1.0), std::abs(p.concurrence - 1.0),
                             std::abs(p.bell - 2.0 * std::numbers::sqrt2)}),
                   0, 1);
        ++report.chains;
    }

    for (int length : opt.lengths) {
        if (length > oracle::max_length) throw InvalidInput("verify supports L <= " + std::to_string(oracle::max_length));
        check_length(length);
        for (ModelKind model : {ModelKind::Uncorrelated, ModelKind::Correlated}) {
            for (const auto& s : opt.strengths) {
                const auto dist = DisorderSpec::power_law(s);
                for (int k = 0; k < opt.seeds; ++k) {
                    const auto seed = derive_seed(opt.master_seed, static_cast<std::uint64_t>(k));
                    ctx.where = Deviation{};
                    ctx.where.model = to_string(model);
                    ctx.where.length = length;
                    ctx.where.strength = s;
                    ctx.where.seed = seed;
                    detail::verify_chain(ctx, build_chain(model, length, dist, seed), opt.corrupt_g);
                    ++report.chains;
                }
            }
        }
    }
    return report;
}

inline nlohmann::ordered_json to_json(const Deviation& d)
{
    nlohmann::ordered_json j{{"formula", d.formula}, {"deviation", d.value}, {"tolerance", d.tolerance},
                             {"model", d.model},     {"L", d.length},       {"strength", d.strength},
                             {"seed", d.seed}};
    if (d.i >= 0) j["site_i"] = d.i + 1;
    if (d.j >= 0) j["site_j"] = d.j + 1;
    return j;
}

inline nlohmann::ordered_json verify_json(const VerifyReport& r)
{
    nlohmann::ordered_json j;
    j["passed"] = r.passed();
    j["chains"] = r.chains;
    nlohmann::ordered_json table = nlohmann::ordered_json::array();
    for (const auto& [name, f] : r.formulas)
        table.push_back({{"formula", name},
                         {"pass", f.failures == 0},
                         {"checks", f.checks},
                         {"max_abs_deviation", f.worst.value},
                         {"tolerance", f.tolerance},
                         {"failures", f.failures},
                         {"worst", to_json(f.worst)}});
    j["table"] = table;
    nlohmann::ordered_json fails = nlohmann::ordered_json::array();
    for (const auto& d : r.failures) fails.push_back(to_json(d));
    j["failures"] = fails;
    return j;
}

}  // namespace xxbell
