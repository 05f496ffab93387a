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

// Run configuration: one YAML file with a section per module.
//
//   model:      kind, length, disorder, strength
//   ensemble:   realizations, first_realization, master_seed, workers,
//               max_separation, filter
//   histograms: cxx {bins, lo, hi}, fidelity {bins, lo, hi}
//   threshold:  grid, resolution, predicate, filter
//   maxsep:     strengths
//   output:     dir, pairs_csv, debug_spectrum
//   checks:     allow (list of property counters that may be nonzero)
//
// Unknown keys are errors. Every error carries the 1-based line of the
// offending node.

#include <charconv>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "xxbell/analysis.hpp"
#include "xxbell/ensemble.hpp"
#include "xxbell/error.hpp"

namespace xxbell {

class ConfigError : public InvalidInput {
public:
    ConfigError(int line, const std::string& what)
        : InvalidInput("line " + std::to_string(line) + ": " + what), line_(line)
    {
    }
    int line() const { return line_; }

private:
    int line_;
};

inline const std::set<std::string>& property_counter_names()
{
    static const std::set<std::string> names{
        "xx_dominance_violations",     "predicate_disagreements", "nonlocal_not_entangled",
        "nonlocal_degree_violations", "monogamy_violations", "spin_bound_violations",
        "underflow_clamps",        "degenerate_sector_ties",  "dense_fallbacks"};
    return names;
}

inline std::vector<std::pair<std::string, std::uint64_t>> counter_values(const PropertyCounters& c)
{
    return {{"xx_dominance_violations", c.xx_dominance_violations},
            {"predicate_disagreements", c.predicate_disagreements},
            {"nonlocal_not_entangled", c.nonlocal_not_entangled},
            {"nonlocal_degree_violations", c.nonlocal_degree_violations},
            {"monogamy_violations", c.monogamy_violations},
            {"spin_bound_violations", c.spin_bound_violations},
            {"underflow_clamps", c.underflow_clamps},
            {"degenerate_sector_ties", c.degenerate_sector_ties},
            {"dense_fallbacks", c.dense_fallbacks}};
}

struct ThresholdSection {
    std::vector<std::string> grid;
    double resolution = 0.001;
    std::string predicate = "nonlocal";  // nonlocal, entangled or both
    std::optional<SeparationFilter> filter;
};

struct RunConfig {
    EnsembleConfig ensemble;
    bool has_strength = false;
    std::optional<ThresholdSection> threshold;
    std::optional<std::vector<std::string>> maxsep;
    std::string output_dir = "out";
    bool pairs_csv = false;
    bool debug_spectrum = false;
    std::set<std::string> allowed{"underflow_clamps", "degenerate_sector_ties", "dense_fallbacks"};

    // Every field that can change a result or an exit code. Workers and
    // output options are excluded.
    nlohmann::json canonical_json() const
    {
        nlohmann::json j;
        j["model"] = {{"kind", to_string(ensemble.model)},
                      {"length", ensemble.length},
                      {"disorder", to_string(ensemble.dist.kind)},
                      {"strength", has_strength ? nlohmann::json(ensemble.dist.text) : nlohmann::json()}};
        j["ensemble"] = {{"realizations", ensemble.realizations},
                         {"first_realization", ensemble.first_realization},
                         {"master_seed", ensemble.master_seed},
                         {"max_separation", ensemble.complete_pairs() ? nlohmann::json("unlimited")
                                                                      : nlohmann::json(ensemble.max_separation)},
                         {"filter", ensemble.filter.to_string()}};
        j["histograms"] = {{"cxx", {ensemble.cxx_hist.bins, ensemble.cxx_hist.lo, ensemble.cxx_hist.hi}},
                           {"fidelity", {ensemble.fidelity_hist.bins, ensemble.fidelity_hist.lo, ensemble.fidelity_hist.hi}}};
        if (threshold) {
            j["threshold"] = {{"grid", threshold->grid},
                              {"resolution", threshold->resolution},
                              {"predicate", threshold->predicate},
                              {"filter", threshold->filter ? nlohmann::json(threshold->filter->to_string()) : nlohmann::json()}};
        }
        if (maxsep) j["maxsep"] = *maxsep;
        j["checks"] = {{"allow", allowed}};
        return j;
    }

    std::string fingerprint() const { return hex64(fnv1a64(canonical_json().dump())); }

    ThresholdJob threshold_job() const
    {
        ThresholdJob job;
        job.model = ensemble.model;
        job.length = ensemble.length;
        job.family = ensemble.dist.kind;
        job.realizations = ensemble.realizations;
        job.master_seed = ensemble.master_seed;
        job.max_separation = ensemble.max_separation;
        job.workers = ensemble.workers;
        if (threshold) {
            job.grid = threshold->grid;
            job.resolution = threshold->resolution;
            job.filter = threshold->filter;
        }
        return job;
    }
};

namespace detail {

inline int line_of(const YAML::Node& n) { return n.Mark().line + 1; }

inline void check_keys(const YAML::Node& map, const std::string& where, const std::set<std::string>& known)
{
    if (!map.IsMap()) throw ConfigError(line_of(map), "'" + where + "' must be a mapping");
    std::set<std::string> seen;
    for (const auto& kv : map) {
        const auto key = kv.first.as<std::string>();
        if (!seen.insert(key).second) throw ConfigError(line_of(kv.first), "duplicate key '" + key + "' in '" + where + "'");
        if (!known.count(key)) {
            std::string list;
            for (const auto& k : known) list += (list.empty() ? "" : ", ") + k;
            throw ConfigError(line_of(kv.first), "unknown key '" + key + "' in '" + where + "' (expected one of: " + list + ")");
        }
    }
}

inline std::string scalar(const YAML::Node& n, const std::string& key)
{
    if (!n.IsScalar()) throw ConfigError(line_of(n), "'" + key + "' must be a scalar");
    return n.Scalar();
}

template <class T>
T integer(const YAML::Node& n, const std::string& key, long long min_value)
{
    const auto text = scalar(n, key);
    long long v = 0;
    std::size_t used = 0;
    try {
        v = std::stoll(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw ConfigError(line_of(n), "'" + key + "' must be an integer, got '" + text + "'");
    if (v < min_value)
        throw ConfigError(line_of(n), "'" + key + "' must be >= " + std::to_string(min_value) + ", got " + text);
    return static_cast<T>(v);
}

inline std::uint64_t unsigned64(const YAML::Node& n, const std::string& key)
{
    const auto text = scalar(n, key);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        throw ConfigError(line_of(n), "'" + key + "' must be a non-negative 64-bit integer, got '" + text + "'");
    return v;
}

inline double real(const YAML::Node& n, const std::string& key)
{
    const auto text = scalar(n, key);
    try {
        return parse_decimal(text);
    } catch (const InvalidInput&) {
        throw ConfigError(line_of(n), "'" + key + "' must be a finite number, got '" + text + "'");
    }
}

inline bool boolean(const YAML::Node& n, const std::string& key)
{
    const auto text = scalar(n, key);
    if (text == "true") return true;
    if (text == "false") return false;
    throw ConfigError(line_of(n), "'" + key + "' must be true or false, got '" + text + "'");
}

// Canonical decimal text of a disorder strength, validated for its family.
inline std::string strength(const YAML::Node& n, const std::string& key, DisorderKind family)
{
    const double v = real(n, key);
    const auto text = format_strength(v);
    try {
        DisorderSpec::make(family, text, v).validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(line_of(n), e.what());
    }
    return text;
}

inline HistogramRange histogram(const YAML::Node& n, const std::string& key, HistogramRange h)
{
    check_keys(n, key, {"bins", "lo", "hi"});
    if (n["bins"]) h.bins = integer<int>(n["bins"], key + ".bins", 1);
    if (n["lo"]) h.lo = real(n["lo"], key + ".lo");
    if (n["hi"]) h.hi = real(n["hi"], key + ".hi");
    if (!(h.hi > h.lo)) throw ConfigError(line_of(n), "'" + key + "' needs hi > lo");
    return h;
}

inline SeparationFilter filter(const YAML::Node& n, const std::string& key)
{
    try {
        return SeparationFilter::parse(scalar(n, key));
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidInput& e) {
        throw ConfigError(line_of(n), e.what());
    }
}

template <class F>
auto with_line(const YAML::Node& n, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidInput& e) {
        throw ConfigError(line_of(n), e.what());
    }
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text)
{
    using namespace detail;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(e.mark.line + 1, "YAML syntax error: " + e.msg);
    }
    if (!root.IsDefined() || root.IsNull()) throw ConfigError(1, "config is empty");
    check_keys(root, "top level", {"model", "ensemble", "histograms", "threshold", "maxsep", "output", "checks"});

    RunConfig cfg;
    auto& e = cfg.ensemble;

    const auto model = root["model"];
    if (!model) throw ConfigError(1, "missing required section 'model'");
    check_keys(model, "model", {"kind", "length", "disorder", "strength"});
    if (!model["kind"]) throw ConfigError(line_of(model), "missing 'model.kind'");
    e.model = with_line(model["kind"], [&] { return parse_model_kind(scalar(model["kind"], "model.kind")); });
    if (!model["length"]) throw ConfigError(line_of(model), "missing 'model.length'");
    e.length = integer<int>(model["length"], "model.length", 2);
    with_line(model["length"], [&] { check_length(e.length); return 0; });
    if (model["disorder"])
        e.dist.kind = with_line(model["disorder"], [&] { return parse_disorder_kind(scalar(model["disorder"], "model.disorder")); });
    else if (e.model != ModelKind::Uniform)
        throw ConfigError(line_of(model), "missing 'model.disorder' (powerlaw or box)");
    if (model["strength"]) {
        const auto s = strength(model["strength"], "model.strength", e.dist.kind);
        e.dist = DisorderSpec::make(e.dist.kind, s, parse_decimal(s));
        cfg.has_strength = true;
    } else {
        // Placeholder at zero disorder; threshold and maxsep supply their own strengths.
        e.dist = e.dist.kind == DisorderKind::Box ? DisorderSpec::box("1") : DisorderSpec::power_law("0");
        cfg.has_strength = e.model == ModelKind::Uniform;
    }

    if (const auto ens = root["ensemble"]) {
        check_keys(ens, "ensemble", {"realizations", "first_realization", "master_seed", "workers", "max_separation", "filter"});
        if (ens["realizations"]) e.realizations = integer<std::uint64_t>(ens["realizations"], "ensemble.realizations", 1);
        if (ens["first_realization"])
            e.first_realization = integer<std::uint64_t>(ens["first_realization"], "ensemble.first_realization", 0);
        if (ens["master_seed"]) e.master_seed = unsigned64(ens["master_seed"], "ensemble.master_seed");
        if (ens["workers"]) e.workers = integer<int>(ens["workers"], "ensemble.workers", 1);
        if (const auto m = ens["max_separation"])
            e.max_separation = scalar(m, "ensemble.max_separation") == "unlimited"
                                   ? unlimited_separation
                                   : integer<int>(m, "ensemble.max_separation", 1);
        if (ens["filter"]) e.filter = filter(ens["filter"], "ensemble.filter");
    }

    if (const auto h = root["histograms"]) {
        check_keys(h, "histograms", {"cxx", "fidelity"});
        if (h["cxx"]) e.cxx_hist = histogram(h["cxx"], "histograms.cxx", e.cxx_hist);
        if (h["fidelity"]) e.fidelity_hist = histogram(h["fidelity"], "histograms.fidelity", e.fidelity_hist);
    }

    if (const auto t = root["threshold"]) {
        check_keys(t, "threshold", {"grid", "resolution", "predicate", "filter"});
        ThresholdSection ts;
        const auto grid = t["grid"];
        if (!grid || !grid.IsSequence() || grid.size() == 0)
            throw ConfigError(line_of(grid ? grid : t), "'threshold.grid' must be a non-empty list of strengths");
        for (const auto& g : grid) ts.grid.push_back(strength(g, "threshold.grid", e.dist.kind));
        if (t["resolution"]) {
            ts.resolution = real(t["resolution"], "threshold.resolution");
            if (!(ts.resolution > 0.0)) throw ConfigError(line_of(t["resolution"]), "'threshold.resolution' must be positive");
        }
        if (const auto p = t["predicate"]) {
            ts.predicate = scalar(p, "threshold.predicate");
            if (ts.predicate != "both") with_line(p, [&] { return parse_onset_predicate(ts.predicate); });
        }
        if (t["filter"]) ts.filter = filter(t["filter"], "threshold.filter");
        cfg.threshold = ts;
        with_line(grid, [&] { cfg.threshold_job().validate(); return 0; });
    }

    if (const auto m = root["maxsep"]) {
        check_keys(m, "maxsep", {"strengths"});
        const auto s = m["strengths"];
        if (!s || !s.IsSequence() || s.size() == 0)
            throw ConfigError(line_of(s ? s : m), "'maxsep.strengths' must be a non-empty list");
        std::vector<std::string> list;
        for (const auto& x : s) list.push_back(strength(x, "maxsep.strengths", e.dist.kind));
        cfg.maxsep = list;
    }

    if (const auto o = root["output"]) {
        check_keys(o, "output", {"dir", "pairs_csv", "debug_spectrum"});
        if (o["dir"]) cfg.output_dir = scalar(o["dir"], "output.dir");
        if (o["pairs_csv"]) cfg.pairs_csv = boolean(o["pairs_csv"], "output.pairs_csv");
        if (o["debug_spectrum"]) cfg.debug_spectrum = boolean(o["debug_spectrum"], "output.debug_spectrum");
    }

    if (const auto c = root["checks"]) {
        check_keys(c, "checks", {"allow"});
        if (const auto a = c["allow"]) {
            if (!a.IsSequence()) throw ConfigError(line_of(a), "'checks.allow' must be a list");
            cfg.allowed.clear();
            for (const auto& x : a) {
                const auto name = scalar(x, "checks.allow");
                if (!property_counter_names().count(name))
                    throw ConfigError(line_of(x), "unknown property counter '" + name + "'");
                cfg.allowed.insert(name);
            }
        }
    }

    with_line(root, [&] { e.validate(); return 0; });
    return cfg;
}

}  // namespace xxbell
