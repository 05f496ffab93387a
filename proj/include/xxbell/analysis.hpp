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

// Normalized histograms, onset thresholds and separation statistics built
// on ensemble runs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "xxbell/ensemble.hpp"
#include "xxbell/error.hpp"
#include "xxbell/model.hpp"

namespace xxbell {

struct Histogram {
    std::string observable;        // "cxx" or "fidelity"
    std::string separation_class;  // "all", "filtered:<filter>", "d=<k>"
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> densities;
    std::uint64_t count = 0;       // samples inside the range
    std::uint64_t out_of_range = 0;

    int bins() const { return static_cast<int>(densities.size()); }
    double width() const { return (hi - lo) / bins(); }
    double bin_lo(int b) const { return lo + b * width(); }
    double bin_hi(int b) const { return b + 1 == bins() ? hi : lo + (b + 1) * width(); }
};

inline Histogram normalize(const BinnedCounts& c, std::string observable, std::string separation_class)
{
    Histogram h;
    h.observable = std::move(observable);
    h.separation_class = std::move(separation_class);
    h.lo = c.lo;
    h.hi = c.hi;
    h.count = c.in_range();
    h.out_of_range = c.below + c.above;
    h.densities.assign(c.counts.size(), 0.0);
    if (h.count > 0)
        for (std::size_t b = 0; b < c.counts.size(); ++b)
            h.densities[b] = static_cast<double>(c.counts[b]) / (static_cast<double>(h.count) * c.width());
    return h;
}

inline Histogram build_histogram(const std::vector<double>& samples, int bins, double lo, double hi,
                                 std::string observable = "samples", std::string separation_class = "all")
{
    if (bins < 1) throw InvalidInput("histogram needs at least one bin");
    if (!(hi > lo)) throw InvalidInput("histogram range needs hi > lo");
    BinnedCounts c(HistogramRange{bins, lo, hi});
    for (double x : samples) c.add(x);
    return normalize(c, std::move(observable), std::move(separation_class));
}

// CSV with header bin_lo,bin_hi,density and 12 significant digits.
inline std::string histogram_csv(const Histogram& h, const std::string& fingerprint)
{
    std::string out = "# fingerprint=" + fingerprint + " observable=" + h.observable +
                      " class=" + h.separation_class + " count=" + std::to_string(h.count) +
                      " out_of_range=" + std::to_string(h.out_of_range) + "\n";
    out += "bin_lo,bin_hi,density\n";
    char buf[96];
    for (int b = 0; b < h.bins(); ++b) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", h.bin_lo(b), h.bin_hi(b), h.densities[b]);
        out += buf;
    }
    return out;
}

// --- onset thresholds -------------------------------------------------------

enum class OnsetPredicate { Nonlocal, Entangled };

inline std::string to_string(OnsetPredicate p) { return p == OnsetPredicate::Nonlocal ? "nonlocal" : "entangled"; }

inline OnsetPredicate parse_onset_predicate(std::string_view s)
{
    if (s == "nonlocal") return OnsetPredicate::Nonlocal;
    if (s == "entangled") return OnsetPredicate::Entangled;
    throw InvalidInput("unknown predicate '" + std::string(s) + "' (expected nonlocal or entangled)");
}

struct ThresholdJob {
    ModelKind model = ModelKind::Uncorrelated;
    int length = 64;
    DisorderKind family = DisorderKind::PowerLaw;
    std::vector<std::string> grid;  // ordered from weak to strong disorder
    std::uint64_t realizations = 10000;
    std::uint64_t master_seed = 0;
    double resolution = 0.001;
    OnsetPredicate predicate = OnsetPredicate::Nonlocal;
    std::optional<SeparationFilter> filter;  // restrict the predicate to a pair class
    int max_separation = unlimited_separation;
    int workers = 1;

    void validate() const
    {
        check_length(length);
        if (grid.empty()) throw InvalidInput("threshold grid is empty");
        if (realizations < 1) throw InvalidInput("threshold needs at least one realization per point");
        if (!(resolution > 0.0)) throw InvalidInput("threshold resolution must be positive");
        double prev = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const auto d = DisorderSpec::make(family, grid[k], parse_decimal(grid[k]));
            if (k > 0 && !(weaker(prev, d.strength)))
                throw InvalidInput("threshold grid must run from weak to strong disorder (" +
                                   std::string(family == DisorderKind::PowerLaw ? "increasing D" : "decreasing J_min") +
                                   ")");
            prev = d.strength;
        }
    }

    // a is strictly weaker disorder than b.
    bool weaker(double a, double b) const { return family == DisorderKind::PowerLaw ? a < b : a > b; }
};

struct Witness {
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    int i = -1;  // 0-based
    int j = -1;
    double value = 0.0;  // Bell value or fidelity
};

struct ThresholdProbe {
    std::string strength;
    std::uint64_t master_seed = 0;
    std::uint64_t realizations = 0;  // run until the first witness, or N
    bool violated = false;
    std::optional<Witness> witness;
    bool refinement = false;  // bisection probe rather than grid point
    PropertyCounters counters;
};

struct ThresholdEstimate {
    std::string definition;
    double onset = std::numeric_limits<double>::quiet_NaN();
    double low = std::numeric_limits<double>::quiet_NaN();  // last probe without violation
    double high = std::numeric_limits<double>::quiet_NaN(); // first probe with violation
    bool found = false;        // false: no violation anywhere, upper bracket open
    bool lower_open = false;   // violation already at the weakest grid point
    std::uint64_t realizations_per_point = 0;
    std::vector<ThresholdProbe> probes;
};

inline std::string format_strength(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Probe seeds depend only on the strength value, so scans with different
// predicates see the same realizations wherever they probe the same point.
inline std::uint64_t probe_seed(std::uint64_t master, DisorderKind family, const std::string& strength)
{
    return derive_seed(master, fnv1a64(to_string(family) + ":" + format_strength(parse_decimal(strength))));
}

inline ThresholdProbe run_probe(const ThresholdJob& job, const std::string& strength)
{
    EnsembleConfig c;
    c.model = job.model;
    c.length = job.length;
    c.dist = DisorderSpec::make(job.family, strength, parse_decimal(strength));
    c.realizations = job.realizations;
    c.master_seed = probe_seed(job.master_seed, job.family, strength);
    c.max_separation = job.max_separation;
    if (job.filter) c.filter = *job.filter;
    c.workers = job.workers;

    const bool filtered = job.filter.has_value();
    auto hits = [&](const EnsembleAccumulator& a) {
        const ClassStats& s = filtered ? a.filtered : a.all;
        return job.predicate == OnsetPredicate::Nonlocal ? s.nonlocal > 0 : s.entangled > 0;
    };
    RunOptions opt;
    opt.stop_when = hits;
    const auto acc = run_ensemble(c, opt);

    ThresholdProbe p;
    p.strength = strength;
    p.master_seed = c.master_seed;
    p.realizations = acc.realizations;
    p.violated = hits(acc);
    p.counters = acc.counters;
    if (p.violated) {
        const ClassStats& s = filtered ? acc.filtered : acc.all;
        const Extreme& e = job.predicate == OnsetPredicate::Nonlocal ? s.max_bell : s.max_fidelity;
        p.witness = Witness{e.seed, e.index, e.i, e.j, e.value};
    }
    return p;
}

// Onset = weakest disorder at which at least one pair in the ensemble meets
// the predicate: scan the grid from weak to strong, then bisect between the
// last clean and the first violating point with fresh seeds per probe.
inline ThresholdEstimate threshold_scan(const ThresholdJob& job)
{
    job.validate();
    ThresholdEstimate est;
    est.definition = "first " + std::string(job.family == DisorderKind::PowerLaw ? "D" : "J_min") +
                     " (weak to strong) with at least one " + to_string(job.predicate) + " pair" +
                     (job.filter ? " at " + job.filter->to_string() : std::string()) + " among N realizations of " +
                     to_string(job.model) + " L=" + std::to_string(job.length);
    est.realizations_per_point = job.realizations;

    std::optional<double> clean, dirty;
    for (std::size_t k = 0; k < job.grid.size(); ++k) {
        auto p = run_probe(job, job.grid[k]);
        est.probes.push_back(p);
        if (p.violated) {
            dirty = parse_decimal(job.grid[k]);
            break;
        }
        clean = parse_decimal(job.grid[k]);
    }
    if (!dirty) {
        est.found = false;
        est.low = clean.value_or(std::numeric_limits<double>::quiet_NaN());
        return est;
    }
    est.found = true;
    if (!clean) {
        est.lower_open = true;
        est.onset = est.high = *dirty;
        est.low = *dirty;
        return est;
    }
    double lo = *clean, hi = *dirty;
    while (std::abs(hi - lo) > job.resolution * (1.0 + 1e-9)) {
        const std::string mid = format_strength(0.5 * (lo + hi));
        const double m = parse_decimal(mid);
        if (m == lo || m == hi) break;
        auto p = run_probe(job, mid);
        p.refinement = true;
        est.probes.push_back(p);
        (p.violated ? hi : lo) = m;
    }
    est.low = lo;
    est.high = hi;
    est.onset = hi;
    return est;
}

inline nlohmann::ordered_json threshold_json(const ThresholdEstimate& e)
{
    nlohmann::ordered_json j;
    j["definition"] = e.definition;
    j["found"] = e.found;
    j["onset"] = e.found ? nlohmann::ordered_json(e.onset) : nlohmann::ordered_json(nullptr);
    j["bracket"] = {std::isnan(e.low) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(e.low),
                    e.found ? nlohmann::ordered_json(e.high) : nlohmann::ordered_json(nullptr)};
    j["lower_open"] = e.lower_open;
    j["upper_open"] = !e.found;
    j["N"] = e.realizations_per_point;
    nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
    for (const auto& p : e.probes) {
        nlohmann::ordered_json q;
        q["strength"] = p.strength;
        q["master_seed"] = p.master_seed;
        q["realizations"] = p.realizations;
        q["violated"] = p.violated;
        q["refinement"] = p.refinement;
        if (p.witness)
            q["witness"] = {{"seed", p.witness->seed},
                            {"realization", p.witness->index},
                            {"i", p.witness->i + 1},
                            {"j", p.witness->j + 1},
                            {"value", p.witness->value}};
        seeds.push_back(q);
    }
    j["seeds"] = seeds;
    return j;
}

// Entanglement and nonlocality onsets restricted to far pairs.
struct FarPairThresholds {
    ThresholdEstimate entanglement;
    ThresholdEstimate nonlocality;
};

inline FarPairThresholds far_pair_thresholds(ThresholdJob job, const SeparationFilter& filter)
{
    job.filter = filter;
    job.max_separation = unlimited_separation;
    FarPairThresholds out;
    job.predicate = OnsetPredicate::Entangled;
    out.entanglement = threshold_scan(job);
    job.predicate = OnsetPredicate::Nonlocal;
    out.nonlocality = threshold_scan(job);
    return out;
}

// --- separation statistics --------------------------------------------------

struct SeparationPoint {
    std::string strength;
    std::uint64_t realizations = 0;
    int max_entangled_separation = 0;  // 0: no entangled pair
    int max_nonlocal_separation = 0;
    Extreme entangled_witness;
    Extreme nonlocal_witness;
    PropertyCounters counters;
};

inline std::vector<SeparationPoint> max_separation_curve(ModelKind model, int length, DisorderKind family,
                                                         const std::vector<std::string>& strengths,
                                                         std::uint64_t realizations, std::uint64_t master_seed,
                                                         int workers = 1)
{
    std::vector<SeparationPoint> out;
    for (const auto& s : strengths) {
        EnsembleConfig c;
        c.model = model;
        c.length = length;
        c.dist = DisorderSpec::make(family, s, parse_decimal(s));
        c.realizations = realizations;
        c.master_seed = probe_seed(master_seed, family, s);
        c.workers = workers;
        const auto acc = run_ensemble(c);
        SeparationPoint p;
        p.strength = s;
        p.realizations = acc.realizations;
        p.entangled_witness = acc.max_entangled_separation;
        p.nonlocal_witness = acc.max_nonlocal_separation;
        p.counters = acc.counters;
        p.max_entangled_separation = acc.max_entangled_separation.set ? static_cast<int>(acc.max_entangled_separation.value) : 0;
        p.max_nonlocal_separation = acc.max_nonlocal_separation.set ? static_cast<int>(acc.max_nonlocal_separation.value) : 0;
        out.push_back(p);
    }
    return out;
}

// --- bootstrap --------------------------------------------------------------

struct BootstrapInterval {
    double lo = 0.0;
    double hi = 0.0;
    double level = 0.95;
    int resamples = 0;
};

// Percentile bootstrap interval of the mean.
inline BootstrapInterval bootstrap_mean(const std::vector<double>& values, int resamples, std::uint64_t seed,
                                        double level = 0.95)
{
    if (values.empty()) throw InvalidInput("bootstrap needs at least one value");
    if (resamples < 1) throw InvalidInput("bootstrap needs at least one resample");
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
    std::vector<double> means(static_cast<std::size_t>(resamples));
    for (auto& m : means) {
        CompensatedSum s;
        for (std::size_t k = 0; k < values.size(); ++k) s.add(values[pick(gen)]);
        m = s.value() / values.size();
    }
    std::sort(means.begin(), means.end());
    auto at = [&](double q) {
        const double pos = q * (means.size() - 1);
        const auto a = static_cast<std::size_t>(std::floor(pos));
        const auto b = std::min(a + 1, means.size() - 1);
        return means[a] + (pos - a) * (means[b] - means[a]);
    };
    return {at((1.0 - level) / 2), at(1.0 - (1.0 - level) / 2), level, resamples};
}

}  // namespace xxbell
