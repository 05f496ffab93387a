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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. XXBELL_ACCEPTANCE=1,3,7 restricts the run to listed criteria;
// XXBELL_WORKERS sets the worker count (default: hardware threads).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "xxbell/xxbell.hpp"

using namespace xxbell;

namespace {

constexpr std::uint64_t master = 2026;
constexpr int length = 64;
constexpr std::uint64_t n_threshold = 10000;

int workers = 1;
PropertyCounters seen;  // every ensemble produced during the run
std::uint64_t ensembles_seen = 0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void observe(const PropertyCounters& c)
{
    seen.merge(c);
    ++ensembles_seen;
}

void observe(const ThresholdEstimate& e)
{
    for (const auto& p : e.probes) observe(p.counters);
}

EnsembleAccumulator ensemble(ModelKind model, const std::string& d, std::uint64_t n, std::uint64_t seed, int w = workers)
{
    EnsembleConfig c;
    c.model = model;
    c.length = length;
    c.dist = DisorderSpec::power_law(d);
    c.realizations = n;
    c.master_seed = seed;
    c.workers = w;
    auto acc = run_ensemble(c);
    observe(acc.counters);
    return acc;
}

ThresholdJob job(ModelKind model, DisorderKind family, std::vector<std::string> grid, double resolution)
{
    ThresholdJob j;
    j.model = model;
    j.length = length;
    j.family = family;
    j.grid = std::move(grid);
    j.realizations = n_threshold;
    j.master_seed = master;
    j.resolution = resolution;
    j.max_separation = 8;
    j.workers = workers;
    return j;
}

// Onset inside [lo, hi] with a closed bracket on both sides.
bool onset_within(const ThresholdEstimate& e, double lo, double hi, std::string& detail)
{
    std::ostringstream s;
    if (!e.found) {
        s << "no violation on the grid (last clean " << fmt(e.low) << ")";
    } else {
        s << "onset " << fmt(e.onset) << " bracket [" << fmt(std::min(e.low, e.high)) << ", "
          << fmt(std::max(e.low, e.high)) << "]" << (e.lower_open ? " lower-open" : "") << ", required in ["
          << fmt(lo) << ", " << fmt(hi) << "]";
    }
    detail += s.str();
    return e.found && !e.lower_open && e.onset >= lo && e.onset <= hi;
}

Outcome oracle_equivalence()
{
    const auto report = run_verify(VerifyOptions{});
    Outcome o{report.passed(), ""};
    for (const auto& name : {"cxx", "czz", "fidelity_identity", "concurrence_identity", "bell"}) {
        const auto& f = report.formulas.at(name);
        o.detail += std::string(o.detail.empty() ? "" : ", ") + name + " " + fmt(f.worst.value) + "/" + fmt(f.tolerance);
    }
    o.detail += " over " + std::to_string(report.chains) + " chains";
    return o;
}

Outcome clean_chain()
{
    const auto chain = make_chain(ModelKind::Uniform, std::vector<double>(100, 1.0));
    const auto sol = ground_state_correlations(chain);
    auto pairs = all_pairs_ring(chain, sol);
    apply_measures(pairs);
    std::uint64_t nonlocal = 0;
    for (const auto& p : pairs) nonlocal += p.nonlocal;
    const double nn = cxx(sol.g, 0, 1);
    const double target = -1.0 / (2.0 * std::numbers::pi);
    const double rel = std::abs(nn / target - 1.0);
    return {nonlocal == 0 && rel <= 0.01,
            std::to_string(nonlocal) + " nonlocal pairs of " + std::to_string(pairs.size()) + ", C^xx(1,2) = " + fmt(nn) +
                " vs " + fmt(target) + " (rel " + fmt(rel) + ")"};
}

Outcome singlet_limits()
{
    auto two = all_pairs(ground_state_correlations(make_chain(ModelKind::Uniform, {1.0, 1.0})).g);
    apply_measures(two);
    const auto& s = two.at(0);
    const double dev = std::max({std::abs(s.fidelity - 1.0), std::abs(s.concurrence - 1.0),
                                 std::abs(s.bell - 2.0 * std::numbers::sqrt2)});
    std::vector<double> j(16, 1.0);
    j[0] = 1000.0;
    const auto g = ground_state_correlations(make_chain(ModelKind::Uncorrelated, j)).g;
    PairObservables dimer{0, 1, 1, cxx(g, 0, 1), czz(g, 0, 1)};
    apply_measures(dimer);
    return {dev <= 1e-12 && dimer.fidelity > 0.99,
            "two-site max deviation " + fmt(dev) + ", dimer F = " + fmt(dimer.fidelity)};
}

Outcome uncorrelated_onset()
{
    Outcome o;
    const auto d = threshold_scan(job(ModelKind::Uncorrelated, DisorderKind::PowerLaw,
                                      {"0", "0.01", "0.02", "0.03", "0.05", "0.1", "0.2"}, 0.001));
    const auto b = threshold_scan(job(ModelKind::Uncorrelated, DisorderKind::Box,
                                      {"1", "0.95", "0.9", "0.85", "0.8", "0.7", "0.5"}, 0.0025));
    observe(d);
    observe(b);
    o.detail = "D: ";
    const bool pd = onset_within(d, 0.010, 0.025, o.detail);
    o.detail += "; J_min: ";
    const bool pb = onset_within(b, 0.88, 0.94, o.detail);
    o.pass = pd && pb;
    return o;
}

Outcome far_pair_onsets()
{
    Outcome o;
    auto j = job(ModelKind::Uncorrelated, DisorderKind::PowerLaw, {"0.1", "0.2", "0.3", "0.4", "0.6", "1"}, 0.005);
    const auto far = far_pair_thresholds(j, SeparationFilter::parse("ring>L/6"));
    observe(far.entanglement);
    observe(far.nonlocality);
    o.detail = "entangled: ";
    const bool pe = onset_within(far.entanglement, 0.17, 0.27, o.detail);
    o.detail += "; nonlocal: ";
    const bool pn = onset_within(far.nonlocality, 0.31, 0.41, o.detail);
    o.pass = pe && pn;
    return o;
}

Outcome correlated_onset()
{
    Outcome o;
    const auto d = threshold_scan(job(ModelKind::Correlated, DisorderKind::PowerLaw,
                                      {"0", "0.01", "0.02", "0.03", "0.04", "0.06", "0.1", "0.2"}, 0.001));
    const auto b = threshold_scan(job(ModelKind::Correlated, DisorderKind::Box,
                                      {"1", "0.9", "0.8", "0.7", "0.6", "0.5", "0.3"}, 0.0025));
    observe(d);
    observe(b);
    o.detail = "D*: ";
    const bool pd = onset_within(d, 0.03, 0.05, o.detail);
    o.detail += "; J*_min: ";
    const bool pb = onset_within(b, 0.57, 0.67, o.detail);
    o.pass = pd && pb;
    return o;
}

Outcome correlated_caps()
{
    const auto acc = ensemble(ModelKind::Correlated, "5", n_threshold, master);
    const int ent = acc.max_entangled_separation.set ? static_cast<int>(acc.max_entangled_separation.value) : 0;
    const int nl = acc.max_nonlocal_separation.set ? static_cast<int>(acc.max_nonlocal_separation.value) : 0;
    return {ent <= 9 && nl <= 1, "max entangled separation " + std::to_string(ent) + " (cap 9), max nonlocal separation " +
                                     std::to_string(nl) + " (cap 1), N=" + std::to_string(acc.realizations)};
}

Outcome saturation_trends()
{
    const std::vector<std::string> ds{"0.5", "1", "2", "5", "10"};
    std::vector<double> qu, mu, qc, mc;
    for (const auto& d : ds) {
        const auto u = ensemble(ModelKind::Uncorrelated, d, 1000, master);
        const auto c = ensemble(ModelKind::Correlated, d, 1000, master);
        qu.push_back(u.q_nl_normalized.mean());
        mu.push_back(u.monogamy.mean());
        qc.push_back(c.q_nl_normalized.mean());
        mc.push_back(c.monogamy.mean());
    }
    bool pass = true;
    std::ostringstream s;
    for (std::size_t k = 0; k < ds.size(); ++k) {
        if (k > 0 && !(qu[k] > qu[k - 1] && mu[k] > mu[k - 1])) pass = false;
        if (parse_decimal(ds[k]) >= 2 && !(qu[k] > qc[k] && mu[k] > mc[k])) pass = false;
        s << (k ? "; " : "") << "D=" << ds[k] << " 2Q/L " << fmt(qu[k]) << "/" << fmt(qc[k]) << " M " << fmt(mu[k]) << "/"
          << fmt(mc[k]);
    }
    return {pass, s.str() + " (uncorrelated/correlated)"};
}

Outcome xx_dominance_property()
{
    return {seen.xx_dominance_violations == 0 && seen.monogamy_violations == 0,
            std::to_string(seen.xx_dominance_violations) + " xx dominance violations, " + std::to_string(seen.monogamy_violations) +
                " realizations with M > 1, across " + std::to_string(ensembles_seen) + " ensembles"};
}

bool within(double a, double b) { return a == b || std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

Outcome determinism()
{
    const auto a = ensemble(ModelKind::Uncorrelated, "1", 1000, master, 1);
    const auto b = ensemble(ModelKind::Uncorrelated, "1", 1000, master, 8);
    const bool counts = a.all.pairs == b.all.pairs && a.all.entangled == b.all.entangled &&
                        a.all.nonlocal == b.all.nonlocal && a.all.cxx.counts == b.all.cxx.counts &&
                        a.all.fidelity.counts == b.all.fidelity.counts;
    const bool extremes = a.max_abs_cxx.value == b.max_abs_cxx.value && a.max_abs_cxx.index == b.max_abs_cxx.index &&
                          a.all.max_bell.value == b.all.max_bell.value && a.all.max_bell.seed == b.all.max_bell.seed;
    const bool aggregates = within(a.monogamy.mean(), b.monogamy.mean()) &&
                            within(a.q_nl_normalized.mean(), b.q_nl_normalized.mean()) &&
                            within(a.all.abs_cxx.value(), b.all.abs_cxx.value());
    const bool bytes = accumulator_to_json(a).dump() == accumulator_to_json(b).dump();

    auto j = job(ModelKind::Uncorrelated, DisorderKind::PowerLaw, {"0", "0.05", "0.2"}, 0.01);
    j.length = 32;
    j.realizations = 500;
    j.workers = 1;
    const auto s1 = threshold_json(threshold_scan(j)).dump();
    j.workers = 8;
    const auto s8 = threshold_json(threshold_scan(j)).dump();
    return {counts && extremes && aggregates && s1 == s8,
            std::string("workers 1 vs 8: counts ") + (counts ? "equal" : "differ") + ", extremes " +
                (extremes ? "equal" : "differ") + ", aggregates " + (aggregates ? "within 1e-9" : "differ") +
                ", accumulator JSON " + (bytes ? "byte-identical" : "differs") + ", threshold scan " +
                (s1 == s8 ? "identical" : "differs")};
}

}  // namespace

int main()
{
    workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* w = std::getenv("XXBELL_WORKERS"); w && *w) workers = std::max(1, std::atoi(w));
    std::set<int> only;
    if (const char* s = std::getenv("XXBELL_ACCEPTANCE"); s && *s) {
        std::stringstream in(s);
        std::string item;
        while (std::getline(in, item, ',')) only.insert(std::atoi(item.c_str()));
    }

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle equivalence", oracle_equivalence},
        {"clean-chain locality", clean_chain},
        {"singlet limits", singlet_limits},
        {"uncorrelated onset", uncorrelated_onset},
        {"far-pair onsets", far_pair_onsets},
        {"correlated onset", correlated_onset},
        {"correlated separation caps", correlated_caps},
        {"saturation trends", saturation_trends},
        {"xx-dominance property", xx_dominance_property},
        {"determinism", determinism},
    };

    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k + 1);
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += !o.pass;
        std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
