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

// Disorder ensembles: deterministic per-realization seeding, the full
// per-realization pipeline, and mergeable accumulators.
//
// Realizations are processed in fixed blocks that do not depend on the
// number of workers. Block accumulators are merged strictly in index order,
// so a run gives bit-identical results for any worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "xxbell/correlators.hpp"
#include "xxbell/error.hpp"
#include "xxbell/freefermion.hpp"
#include "xxbell/measures.hpp"
#include "xxbell/model.hpp"

namespace xxbell {

inline constexpr int accumulator_version = 1;
inline constexpr int realizations_per_block = 32;

// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Pair-class predicate on distances: "ring>L/6", "linear>L/6", "ring>10",
// "ring=1,3".
struct SeparationFilter {
    enum class Metric { Ring, Linear };
    Metric metric = Metric::Ring;
    bool exact = false;
    std::vector<int> distances;  // exact form
    int bound = 0;               // d > bound, or 6d > L when per_length
    int length_divisor = 0;      // 0: absolute bound

    static SeparationFilter parse(std::string_view text)
    {
        auto fail = [&] {
            throw InvalidInput("bad separation filter '" + std::string(text) +
                               "' (expected e.g. ring>L/6, linear>L/6, ring>10, ring=1,3)");
        };
        SeparationFilter f;
        std::size_t pos = text.find_first_of("<>=");
        if (pos == std::string_view::npos) fail();
        const auto metric = text.substr(0, pos);
        if (metric == "ring")
            f.metric = Metric::Ring;
        else if (metric == "linear")
            f.metric = Metric::Linear;
        else
            fail();
        const char op = text[pos];
        auto rhs = text.substr(pos + 1);
        auto parse_int = [&](std::string_view s) {
            int v = 0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size() || s.empty() || v < 0) fail();
            return v;
        };
        if (op == '=') {
            f.exact = true;
            while (!rhs.empty()) {
                const auto comma = rhs.find(',');
                f.distances.push_back(parse_int(rhs.substr(0, comma)));
                if (comma == std::string_view::npos) break;
                rhs = rhs.substr(comma + 1);
            }
            if (f.distances.empty()) fail();
            std::sort(f.distances.begin(), f.distances.end());
            f.distances.erase(std::unique(f.distances.begin(), f.distances.end()), f.distances.end());
        } else if (op == '>') {
            if (rhs.starts_with("L/")) {
                f.length_divisor = parse_int(rhs.substr(2));
                if (f.length_divisor == 0) fail();
            } else {
                f.bound = parse_int(rhs);
            }
        } else {
            fail();
        }
        return f;
    }

    int distance(int i, int j, int length) const
    {
        return metric == Metric::Ring ? ring_distance(i, j, length) : std::abs(j - i);
    }

    bool matches(int i, int j, int length) const
    {
        const int d = distance(i, j, length);
        if (exact) return std::binary_search(distances.begin(), distances.end(), d);
        if (length_divisor > 0) return static_cast<long long>(d) * length_divisor > length;
        return d > bound;
    }

    std::string to_string() const
    {
        std::string s = metric == Metric::Ring ? "ring" : "linear";
        if (exact) {
            s += "=";
            for (std::size_t k = 0; k < distances.size(); ++k) s += (k ? "," : "") + std::to_string(distances[k]);
        } else if (length_divisor > 0) {
            s += ">L/" + std::to_string(length_divisor);
        } else {
            s += ">" + std::to_string(bound);
        }
        return s;
    }
};

struct HistogramRange {
    int bins = 100;
    double lo = 0.0;
    double hi = 1.0;
};

struct EnsembleConfig {
    ModelKind model = ModelKind::Uncorrelated;
    int length = 64;
    DisorderSpec dist;
    std::uint64_t realizations = 1;
    std::uint64_t first_realization = 0;  // shards cover disjoint index ranges
    std::uint64_t master_seed = 0;
    int max_separation = unlimited_separation;
    SeparationFilter filter = SeparationFilter::parse("ring>L/6");
    HistogramRange cxx_hist{100, -0.25, 0.25};
    HistogramRange fidelity_hist{100, 0.0, 1.0};
    int workers = 1;  // not part of the fingerprint: results do not depend on it

    void validate() const
    {
        check_length(length);
        dist.validate();
        if (realizations < 1) throw InvalidInput("ensemble needs at least one realization");
        if (max_separation < 1) throw InvalidInput("max_separation must be >= 1");
        if (workers < 1) throw InvalidInput("workers must be >= 1");
        for (const auto* h : {&cxx_hist, &fidelity_hist})
            if (h->bins < 1 || !(h->hi > h->lo)) throw InvalidInput("histogram needs bins >= 1 and hi > lo");
    }

    // Pairs at every distance are available (monogamy and Q_NL need them).
    bool complete_pairs() const { return max_separation >= length / 2; }

    // Fields that define the sampled population. Shards of one population
    // share this and can be merged.
    nlohmann::json population_json() const
    {
        return nlohmann::json{
            {"model", to_string(model)},
            {"L", length},
            {"dist", {{"kind", to_string(dist.kind)}, {"strength", dist.text}}},
            {"master_seed", master_seed},
            {"max_separation", complete_pairs() ? nlohmann::json("unlimited") : nlohmann::json(max_separation)},
            {"filter", filter.to_string()},
            {"cxx_hist", {cxx_hist.bins, cxx_hist.lo, cxx_hist.hi}},
            {"fidelity_hist", {fidelity_hist.bins, fidelity_hist.lo, fidelity_hist.hi}},
        };
    }

    nlohmann::json canonical_json() const
    {
        auto j = population_json();
        j["N"] = realizations;
        j["first_realization"] = first_realization;
        return j;
    }

    std::string fingerprint() const { return hex64(fnv1a64(population_json().dump())); }
};

// Neumaier-compensated running sum.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x)
    {
        const double t = sum + x;
        comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    void merge(const CompensatedSum& o)
    {
        add(o.sum);
        comp += o.comp;
    }
    double value() const { return sum + comp; }
};

struct Moments {
    std::uint64_t count = 0;
    CompensatedSum sum;
    CompensatedSum sum_sq;

    void add(double x)
    {
        ++count;
        sum.add(x);
        sum_sq.add(x * x);
    }
    void merge(const Moments& o)
    {
        count += o.count;
        sum.merge(o.sum);
        sum_sq.merge(o.sum_sq);
    }
    double mean() const { return count ? sum.value() / count : std::numeric_limits<double>::quiet_NaN(); }
    // Standard error of the mean.
    double standard_error() const
    {
        if (count < 2) return std::numeric_limits<double>::quiet_NaN();
        const double m = mean();
        const double var = std::max(0.0, (sum_sq.value() - count * m * m) / (count - 1));
        return std::sqrt(var / count);
    }
};

// Fixed-range bin counts. Samples within 1e-9 outside the range are folded
// into the edge bins; anything further out is counted separately.
struct BinnedCounts {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<std::uint64_t> counts;
    std::uint64_t below = 0;
    std::uint64_t above = 0;

    BinnedCounts() = default;
    BinnedCounts(const HistogramRange& r) : lo(r.lo), hi(r.hi), counts(static_cast<std::size_t>(r.bins), 0) {}

    int bins() const { return static_cast<int>(counts.size()); }
    double width() const { return (hi - lo) / bins(); }
    std::uint64_t in_range() const
    {
        std::uint64_t s = 0;
        for (auto c : counts) s += c;
        return s;
    }

    void add(double x)
    {
        constexpr double edge = 1e-9;
        if (x < lo - edge) {
            ++below;
            return;
        }
        if (x > hi + edge) {
            ++above;
            return;
        }
        const double t = (x - lo) / (hi - lo) * bins();
        const int b = std::clamp(static_cast<int>(std::floor(t)), 0, bins() - 1);
        ++counts[static_cast<std::size_t>(b)];
    }

    void merge(const BinnedCounts& o)
    {
        if (o.counts.size() != counts.size() || o.lo != lo || o.hi != hi)
            throw InvalidInput("histogram shapes differ");
        for (std::size_t b = 0; b < counts.size(); ++b) counts[b] += o.counts[b];
        below += o.below;
        above += o.above;
    }
};

// Largest value seen, with the realization and pair that produced it. Ties
// keep the smallest realization index, then the first pair in sweep order.
struct Extreme {
    bool set = false;
    double value = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    int i = -1;
    int j = -1;

    void offer(double v, std::uint64_t s, std::uint64_t k, int pi, int pj)
    {
        if (!set || v > value || (v == value && k < index)) {
            set = true;
            value = v;
            seed = s;
            index = k;
            i = pi;
            j = pj;
        }
    }
    void merge(const Extreme& o)
    {
        if (o.set) offer(o.value, o.seed, o.index, o.i, o.j);
    }
};

struct PropertyCounters {
    std::uint64_t xx_dominance_violations = 0;      // |C^zz| > |C^xx|
    std::uint64_t predicate_disagreements = 0;  // B > 2 vs |C^xx| threshold
    std::uint64_t nonlocal_not_entangled = 0;
    std::uint64_t nonlocal_degree_violations = 0;
    std::uint64_t monogamy_violations = 0;
    std::uint64_t spin_bound_violations = 0;    // |C| > 1/4
    std::uint64_t underflow_clamps = 0;
    std::uint64_t degenerate_sector_ties = 0;
    std::uint64_t dense_fallbacks = 0;

    void merge(const PropertyCounters& o)
    {
        xx_dominance_violations += o.xx_dominance_violations;
        predicate_disagreements += o.predicate_disagreements;
        nonlocal_not_entangled += o.nonlocal_not_entangled;
        nonlocal_degree_violations += o.nonlocal_degree_violations;
        monogamy_violations += o.monogamy_violations;
        spin_bound_violations += o.spin_bound_violations;
        underflow_clamps += o.underflow_clamps;
        degenerate_sector_ties += o.degenerate_sector_ties;
        dense_fallbacks += o.dense_fallbacks;
    }

    // Violations of properties that must hold exactly (the xx-dominance property
    // and the predicate disagreement it implies are monitored, not required).
    std::uint64_t hard_failures() const
    {
        return nonlocal_not_entangled + nonlocal_degree_violations + monogamy_violations + spin_bound_violations;
    }
};

// Statistics of one distance class (a ring distance, or the filtered class).
struct ClassStats {
    BinnedCounts cxx;
    BinnedCounts fidelity;
    std::uint64_t pairs = 0;
    std::uint64_t entangled = 0;
    std::uint64_t nonlocal = 0;
    CompensatedSum abs_cxx;
    Extreme max_fidelity;
    Extreme max_bell;

    ClassStats() = default;
    ClassStats(const EnsembleConfig& c) : cxx(c.cxx_hist), fidelity(c.fidelity_hist) {}

    void add(const PairObservables& p, std::uint64_t seed, std::uint64_t k)
    {
        cxx.add(p.cxx);
        fidelity.add(p.fidelity);
        ++pairs;
        entangled += p.entangled;
        nonlocal += p.nonlocal;
        abs_cxx.add(std::abs(p.cxx));
        max_fidelity.offer(p.fidelity, seed, k, p.i, p.j);
        max_bell.offer(p.bell, seed, k, p.i, p.j);
    }
    void merge(const ClassStats& o)
    {
        cxx.merge(o.cxx);
        fidelity.merge(o.fidelity);
        pairs += o.pairs;
        entangled += o.entangled;
        nonlocal += o.nonlocal;
        abs_cxx.merge(o.abs_cxx);
        max_fidelity.merge(o.max_fidelity);
        max_bell.merge(o.max_bell);
    }
};

struct EnsembleAccumulator {
    std::string fingerprint;
    nlohmann::json config;  // population fields the fingerprint was taken from
    int length = 0;
    bool complete_pairs = false;
    std::uint64_t realizations = 0;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;  // [first, last) realization indices

    ClassStats all;
    ClassStats filtered;
    std::vector<ClassStats> by_distance;  // index = ring distance, 0 unused

    Moments monogamy;        // only for complete pair sets
    Moments q_nl_normalized;
    Extreme max_abs_cxx;
    Extreme max_monogamy;
    Extreme max_entangled_separation;
    Extreme max_nonlocal_separation;
    PropertyCounters counters;

    EnsembleAccumulator() = default;
    explicit EnsembleAccumulator(const EnsembleConfig& c)
        : fingerprint(c.fingerprint()), config(c.population_json()), length(c.length),
          complete_pairs(c.complete_pairs()), all(c), filtered(c),
          by_distance(static_cast<std::size_t>(c.length / 2 + 1), ClassStats(c))
    {
    }

    bool any_nonlocal() const { return all.nonlocal > 0; }

    void add_range(std::uint64_t first, std::uint64_t last) { merge_ranges({{first, last}}); }

    void merge_ranges(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& more)
    {
        auto r = ranges;
        r.insert(r.end(), more.begin(), more.end());
        std::sort(r.begin(), r.end());
        std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
        for (const auto& x : r) {
            if (x.first == x.second) continue;
            if (!out.empty() && x.first < out.back().second)
                throw InvalidInput("accumulators cover overlapping realization ranges");
            if (!out.empty() && x.first == out.back().second)
                out.back().second = x.second;
            else
                out.push_back(x);
        }
        ranges = std::move(out);
    }

    void merge(const EnsembleAccumulator& o)
    {
        if (o.fingerprint != fingerprint)
            throw InvalidInput("cannot merge accumulators with different configurations (" + fingerprint + " vs " +
                               o.fingerprint + ")");
        merge_ranges(o.ranges);
        realizations += o.realizations;
        all.merge(o.all);
        filtered.merge(o.filtered);
        for (std::size_t d = 0; d < by_distance.size(); ++d) by_distance[d].merge(o.by_distance[d]);
        monogamy.merge(o.monogamy);
        q_nl_normalized.merge(o.q_nl_normalized);
        max_abs_cxx.merge(o.max_abs_cxx);
        max_monogamy.merge(o.max_monogamy);
        max_entangled_separation.merge(o.max_entangled_separation);
        max_nonlocal_separation.merge(o.max_nonlocal_separation);
        counters.merge(o.counters);
    }
};

inline EnsembleAccumulator merge(EnsembleAccumulator a, const EnsembleAccumulator& b)
{
    a.merge(b);
    return a;
}

// One realization through the whole pipeline.
struct RealizationResult {
    std::uint64_t index = 0;
    std::uint64_t seed = 0;
    ChainSpec chain;
    FermionSolution solution;
    std::vector<PairObservables> pairs;
    std::optional<RealizationSummary> summary;  // complete pair sets only
    CorrelatorCounters correlator_counters;
};

inline RealizationResult evaluate_realization(const EnsembleConfig& c, std::uint64_t k)
{
    RealizationResult r;
    r.index = k;
    r.seed = derive_seed(c.master_seed, k);
    try {
        r.chain = build_chain(c.model, c.length, c.dist, r.seed);
        r.solution = ground_state_correlations(r.chain);
        r.pairs = all_pairs_ring(r.chain, r.solution, {c.max_separation}, &r.correlator_counters);
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " (realization " + std::to_string(k) + ", seed " +
                                 std::to_string(r.seed) + ")",
                             r.seed);
    }
    apply_measures(r.pairs);
    if (c.complete_pairs()) r.summary = summarize_realization(r.pairs, c.length);
    return r;
}

inline void accumulate(EnsembleAccumulator& acc, const EnsembleConfig& c, const RealizationResult& r)
{
    ++acc.realizations;
    auto& cnt = acc.counters;
    cnt.underflow_clamps += r.correlator_counters.underflow_clamps;
    cnt.degenerate_sector_ties += r.solution.degenerate_tie;
    cnt.dense_fallbacks += r.solution.dense_route;

    std::vector<int> degree(static_cast<std::size_t>(c.length), 0);
    for (const auto& p : r.pairs) {
        acc.all.add(p, r.seed, r.index);
        acc.by_distance[static_cast<std::size_t>(p.separation)].add(p, r.seed, r.index);
        if (c.filter.matches(p.i, p.j, c.length)) acc.filtered.add(p, r.seed, r.index);
        acc.max_abs_cxx.offer(std::abs(p.cxx), r.seed, r.index, p.i, p.j);
        if (p.entangled) acc.max_entangled_separation.offer(p.separation, r.seed, r.index, p.i, p.j);
        if (p.nonlocal) {
            acc.max_nonlocal_separation.offer(p.separation, r.seed, r.index, p.i, p.j);
            ++degree[p.i];
            ++degree[p.j];
            if (!p.entangled) ++cnt.nonlocal_not_entangled;
        }
        if (p.nonlocal != p.nonlocal_by_threshold) ++cnt.predicate_disagreements;
        if (violates_xx_dominance(p.cxx, p.czz)) ++cnt.xx_dominance_violations;
        if (std::abs(p.cxx) > 0.25 + property_tolerance || std::abs(p.czz) > 0.25 + property_tolerance)
            ++cnt.spin_bound_violations;
    }
    for (int d : degree) cnt.nonlocal_degree_violations += d > 1;
    if (r.summary) {
        acc.monogamy.add(r.summary->monogamy);
        acc.q_nl_normalized.add(r.summary->q_nl_normalized);
        acc.max_monogamy.offer(r.summary->monogamy, r.seed, r.index, -1, -1);
        cnt.monogamy_violations += r.summary->monogamy_violated;
    }
}

struct RunOptions {
    // Checked on the merged, index-ordered prefix after every block; when it
    // returns true no further blocks are merged.
    std::function<bool(const EnsembleAccumulator&)> stop_when;
    // Called for every realization, in index order, for merged blocks only.
    std::function<void(const RealizationResult&)> observer;
};

inline EnsembleAccumulator run_ensemble(const EnsembleConfig& c, const RunOptions& opt = {})
{
    c.validate();
    const std::uint64_t blocks = (c.realizations + realizations_per_block - 1) / realizations_per_block;

    struct Block {
        EnsembleAccumulator acc;
        std::vector<RealizationResult> kept;
    };
    std::map<std::uint64_t, Block> pending;
    EnsembleAccumulator total(c);
    std::uint64_t next_merge = 0;
    bool done = false;  // stop_when fired
    std::atomic<std::uint64_t> next_block{0};
    // Blocks above this index are not started. Lowered when the predicate
    // fires or a block fails; every lower block has already been handed out.
    std::atomic<std::uint64_t> last_needed{blocks};
    std::exception_ptr failure;
    std::uint64_t failed_block = blocks;
    std::mutex mu;

    auto lower_last_needed = [&](std::uint64_t b) {
        std::uint64_t cur = last_needed.load();
        while (b < cur && !last_needed.compare_exchange_weak(cur, b)) {
        }
    };

    auto merge_ready = [&] {
        // Caller holds mu.
        while (!done && pending.count(next_merge)) {
            auto node = pending.extract(next_merge);
            if (opt.observer)
                for (const auto& r : node.mapped().kept) opt.observer(r);
            total.merge(node.mapped().acc);
            if (opt.stop_when && opt.stop_when(total)) {
                done = true;
                lower_last_needed(next_merge);
            }
            ++next_merge;
        }
    };

    auto work = [&] {
        for (;;) {
            const std::uint64_t b = next_block.fetch_add(1);
            if (b >= blocks || b > last_needed.load()) return;
            Block blk{EnsembleAccumulator(c), {}};
            try {
                const std::uint64_t first = c.first_realization + b * realizations_per_block;
                const std::uint64_t last =
                    std::min(c.first_realization + c.realizations, first + realizations_per_block);
                blk.acc.add_range(first, last);
                for (std::uint64_t k = first; k < last; ++k) {
                    auto r = evaluate_realization(c, k);
                    accumulate(blk.acc, c, r);
                    if (opt.observer) blk.kept.push_back(std::move(r));
                }
            } catch (...) {
                std::lock_guard lock(mu);
                if (b < failed_block) {
                    failed_block = b;
                    failure = std::current_exception();
                }
                lower_last_needed(b);
                return;
            }
            std::lock_guard lock(mu);
            pending.emplace(b, std::move(blk));
            merge_ready();
        }
    };

    const auto n_threads = std::min<std::uint64_t>(static_cast<std::uint64_t>(c.workers), blocks);
    if (n_threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::uint64_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    // The outcome depends only on block contents: a failure surfaces exactly
    // when every earlier block merged without the predicate firing.
    if (!done && failure && next_merge == failed_block) std::rethrow_exception(failure);
    return total;
}

// --- JSON -------------------------------------------------------------------

namespace detail {

inline nlohmann::json to_json(const CompensatedSum& s) { return nlohmann::json::array({s.sum, s.comp}); }
inline CompensatedSum sum_from_json(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

inline nlohmann::json to_json(const Moments& m)
{
    return {{"count", m.count}, {"sum", to_json(m.sum)}, {"sum_sq", to_json(m.sum_sq)}};
}
inline Moments moments_from_json(const nlohmann::json& j)
{
    return {j.at("count").get<std::uint64_t>(), sum_from_json(j.at("sum")), sum_from_json(j.at("sum_sq"))};
}

inline nlohmann::json to_json(const BinnedCounts& h)
{
    return {{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}, {"below", h.below}, {"above", h.above}};
}
inline BinnedCounts counts_from_json(const nlohmann::json& j)
{
    BinnedCounts h;
    h.lo = j.at("lo").get<double>();
    h.hi = j.at("hi").get<double>();
    h.counts = j.at("counts").get<std::vector<std::uint64_t>>();
    h.below = j.at("below").get<std::uint64_t>();
    h.above = j.at("above").get<std::uint64_t>();
    return h;
}

inline nlohmann::json to_json(const Extreme& e)
{
    if (!e.set) return nullptr;
    // Sites are exported 1-based; realization-level records have none.
    const auto site = [](int s) { return s < 0 ? nlohmann::json(nullptr) : nlohmann::json(s + 1); };
    return {{"value", e.value}, {"seed", e.seed}, {"index", e.index}, {"i", site(e.i)}, {"j", site(e.j)}};
}
inline Extreme extreme_from_json(const nlohmann::json& j)
{
    Extreme e;
    if (j.is_null()) return e;
    e.set = true;
    e.value = j.at("value").get<double>();
    e.seed = j.at("seed").get<std::uint64_t>();
    e.index = j.at("index").get<std::uint64_t>();
    e.i = j.at("i").is_null() ? -1 : j.at("i").get<int>() - 1;
    e.j = j.at("j").is_null() ? -1 : j.at("j").get<int>() - 1;
    return e;
}

inline nlohmann::json to_json(const ClassStats& s)
{
    return {{"cxx", to_json(s.cxx)},
            {"fidelity", to_json(s.fidelity)},
            {"pairs", s.pairs},
            {"entangled", s.entangled},
            {"nonlocal", s.nonlocal},
            {"abs_cxx", to_json(s.abs_cxx)},
            {"max_fidelity", to_json(s.max_fidelity)},
            {"max_bell", to_json(s.max_bell)}};
}
inline ClassStats class_from_json(const nlohmann::json& j)
{
    ClassStats s;
    s.cxx = counts_from_json(j.at("cxx"));
    s.fidelity = counts_from_json(j.at("fidelity"));
    s.pairs = j.at("pairs").get<std::uint64_t>();
    s.entangled = j.at("entangled").get<std::uint64_t>();
    s.nonlocal = j.at("nonlocal").get<std::uint64_t>();
    s.abs_cxx = sum_from_json(j.at("abs_cxx"));
    s.max_fidelity = extreme_from_json(j.at("max_fidelity"));
    s.max_bell = extreme_from_json(j.at("max_bell"));
    return s;
}

}  // namespace detail

inline nlohmann::ordered_json accumulator_to_json(const EnsembleAccumulator& a)
{
    using detail::to_json;
    nlohmann::json dist = nlohmann::json::array();
    for (const auto& d : a.by_distance) dist.push_back(to_json(d));
    const auto& c = a.counters;
    nlohmann::ordered_json j;
    j["format"] = "xxbell-accumulator";
    j["version"] = accumulator_version;
    j["fingerprint"] = a.fingerprint;
    j["config"] = a.config;
    j["L"] = a.length;
    j["complete_pairs"] = a.complete_pairs;
    j["realizations"] = a.realizations;
    j["ranges"] = a.ranges;
    j["all"] = to_json(a.all);
    j["filtered"] = to_json(a.filtered);
    j["by_distance"] = dist;
    j["monogamy"] = to_json(a.monogamy);
    j["q_nl_normalized"] = to_json(a.q_nl_normalized);
    j["max_abs_cxx"] = to_json(a.max_abs_cxx);
    j["max_monogamy"] = to_json(a.max_monogamy);
    j["max_entangled_separation"] = to_json(a.max_entangled_separation);
    j["max_nonlocal_separation"] = to_json(a.max_nonlocal_separation);
    j["counters"] = {{"xx_dominance_violations", c.xx_dominance_violations},
                     {"predicate_disagreements", c.predicate_disagreements},
                     {"nonlocal_not_entangled", c.nonlocal_not_entangled},
                     {"nonlocal_degree_violations", c.nonlocal_degree_violations},
                     {"monogamy_violations", c.monogamy_violations},
                     {"spin_bound_violations", c.spin_bound_violations},
                     {"underflow_clamps", c.underflow_clamps},
                     {"degenerate_sector_ties", c.degenerate_sector_ties},
                     {"dense_fallbacks", c.dense_fallbacks}};
    return j;
}

inline EnsembleAccumulator accumulator_from_json(const nlohmann::json& j)
{
    using namespace detail;
    try {
        if (j.at("format").get<std::string>() != "xxbell-accumulator")
            throw InvalidInput("not an accumulator document");
        if (j.at("version").get<int>() != accumulator_version)
            throw InvalidInput("unsupported accumulator version " + j.at("version").dump());
        EnsembleAccumulator a;
        a.fingerprint = j.at("fingerprint").get<std::string>();
        a.config = j.at("config");
        a.length = j.at("L").get<int>();
        a.complete_pairs = j.at("complete_pairs").get<bool>();
        a.realizations = j.at("realizations").get<std::uint64_t>();
        a.merge_ranges(j.at("ranges").get<std::vector<std::pair<std::uint64_t, std::uint64_t>>>());
        a.all = class_from_json(j.at("all"));
        a.filtered = class_from_json(j.at("filtered"));
        for (const auto& d : j.at("by_distance")) a.by_distance.push_back(class_from_json(d));
        a.monogamy = moments_from_json(j.at("monogamy"));
        a.q_nl_normalized = moments_from_json(j.at("q_nl_normalized"));
        a.max_abs_cxx = extreme_from_json(j.at("max_abs_cxx"));
        a.max_monogamy = extreme_from_json(j.at("max_monogamy"));
        a.max_entangled_separation = extreme_from_json(j.at("max_entangled_separation"));
        a.max_nonlocal_separation = extreme_from_json(j.at("max_nonlocal_separation"));
        const auto& c = j.at("counters");
        auto& k = a.counters;
        k.xx_dominance_violations = c.at("xx_dominance_violations").get<std::uint64_t>();
        k.predicate_disagreements = c.at("predicate_disagreements").get<std::uint64_t>();
        k.nonlocal_not_entangled = c.at("nonlocal_not_entangled").get<std::uint64_t>();
        k.nonlocal_degree_violations = c.at("nonlocal_degree_violations").get<std::uint64_t>();
        k.monogamy_violations = c.at("monogamy_violations").get<std::uint64_t>();
        k.spin_bound_violations = c.at("spin_bound_violations").get<std::uint64_t>();
        k.underflow_clamps = c.at("underflow_clamps").get<std::uint64_t>();
        k.degenerate_sector_ties = c.at("degenerate_sector_ties").get<std::uint64_t>();
        k.dense_fallbacks = c.at("dense_fallbacks").get<std::uint64_t>();
        if (static_cast<int>(a.by_distance.size()) != a.length / 2 + 1)
            throw InvalidInput("accumulator: distance classes do not match L");
        return a;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("malformed accumulator document: ") + e.what());
    }
}

}  // namespace xxbell
