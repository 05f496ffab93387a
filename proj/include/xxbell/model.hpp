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

// Chain realizations of the random XX ring and the two coupling
// distributions (power law and box), for uncorrelated, pair-correlated and
// uniform coupling sequences.

#include <algorithm>
#include <cfloat>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xxbell/error.hpp"

namespace xxbell {

enum class DisorderKind { PowerLaw, Box };
enum class ModelKind { Uncorrelated, Correlated, Uniform };

inline std::string to_string(DisorderKind k) { return k == DisorderKind::PowerLaw ? "powerlaw" : "box"; }

inline std::string to_string(ModelKind m)
{
    switch (m) {
    case ModelKind::Uncorrelated: return "uncorrelated";
    case ModelKind::Correlated: return "correlated";
    case ModelKind::Uniform: return "uniform";
    }
    return "?";
}

inline DisorderKind parse_disorder_kind(std::string_view s)
{
    if (s == "powerlaw" || s == "power-law" || s == "power_law") return DisorderKind::PowerLaw;
    if (s == "box") return DisorderKind::Box;
    throw InvalidInput("unknown distribution '" + std::string(s) + "' (expected powerlaw or box)");
}

inline ModelKind parse_model_kind(std::string_view s)
{
    if (s == "uncorrelated") return ModelKind::Uncorrelated;
    if (s == "correlated") return ModelKind::Correlated;
    if (s == "uniform") return ModelKind::Uniform;
    throw InvalidInput("unknown model '" + std::string(s) + "' (expected uncorrelated, correlated or uniform)");
}

// Parses a plain decimal literal ("0.015", "5", "1e-3"). The original text is
// kept alongside the value so reports quote the configured number verbatim.
inline double parse_decimal(std::string_view text)
{
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v))
        throw InvalidInput("not a decimal number: '" + std::string(text) + "'");
    return v;
}

// Disorder strength. For PowerLaw `strength` is the exponent parameter
// D >= 0; for Box it is the lower cutoff J_min in (0, 1].
struct DisorderSpec {
    DisorderKind kind = DisorderKind::PowerLaw;
    double strength = 0.0;
    std::string text = "0";

    static DisorderSpec power_law(std::string_view d)
    {
        return make(DisorderKind::PowerLaw, std::string(d), parse_decimal(d));
    }
    static DisorderSpec box(std::string_view j_min)
    {
        return make(DisorderKind::Box, std::string(j_min), parse_decimal(j_min));
    }
    static DisorderSpec make(DisorderKind kind, double value)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", value);
        return make(kind, buf, value);
    }
    static DisorderSpec make(DisorderKind kind, std::string text, double value)
    {
        DisorderSpec s{kind, value, std::move(text)};
        s.validate();
        return s;
    }

    void validate() const
    {
        if (kind == DisorderKind::PowerLaw && !(strength >= 0.0))
            throw InvalidInput("power-law disorder requires D >= 0, got " + text);
        if (kind == DisorderKind::Box && !(strength > 0.0 && strength <= 1.0))
            throw InvalidInput("box disorder requires 0 < J_min <= 1, got " + text);
    }

    // True when the distribution collapses to J = 1.
    bool degenerate() const
    {
        return kind == DisorderKind::PowerLaw ? strength == 0.0 : strength == 1.0;
    }
};

// Inverse-CDF draw from P(J) = J^{1/D - 1} / D on (0, 1]: J = u^D.
inline double sample_powerlaw(double d, double u)
{
    if (d == 0.0) return 1.0;
    // Denormal guard; only reachable for D well beyond the tested range.
    return std::max(std::pow(u, d), DBL_MIN);
}

inline double sample_box(double j_min, double u) { return j_min + (1.0 - j_min) * u; }

inline double sample_coupling(const DisorderSpec& dist, double u)
{
    return dist.kind == DisorderKind::PowerLaw ? sample_powerlaw(dist.strength, u)
                                               : sample_box(dist.strength, u);
}

// splitmix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Seed of realization k: mix64(master + (k + 1) * golden). For a fixed
// master the map k -> seed is injective over all 2^64 indices because the
// golden-ratio increment is odd and mix64 is bijective.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k) noexcept
{
    return mix64(master + (k + 1) * 0x9E3779B97F4A7C15ULL);
}

// Uniform draw on the open interval (0, 1) from the top 52 bits of a word;
// both endpoints are excluded exactly.
constexpr double open_unit(std::uint64_t x) noexcept
{
    return (static_cast<double>(x >> 12) + 0.5) * 0x1.0p-52;
}

struct ChainSpec {
    ModelKind model = ModelKind::Uniform;
    std::vector<double> couplings;  // J_1..J_L; bond i joins sites i and i+1 (mod L)
    DisorderSpec dist;
    std::uint64_t seed = 0;

    int length() const { return static_cast<int>(couplings.size()); }

    void validate() const
    {
        const auto n = couplings.size();
        if (n < 2 || n % 2 != 0)
            throw InvalidInput("chain length must be even and >= 2, got " + std::to_string(n));
        for (double j : couplings)
            if (!(j > 0.0) || !std::isfinite(j)) throw InvalidInput("couplings must be positive and finite");
        if (model == ModelKind::Correlated)
            for (std::size_t i = 0; i + 1 < n; i += 2)
                if (couplings[i] != couplings[i + 1])
                    throw InvalidInput("correlated chain must repeat each coupling on adjacent bonds");
        if (model == ModelKind::Uniform)
            for (double j : couplings)
                if (j != couplings.front()) throw InvalidInput("uniform chain must have equal couplings");
    }
};

inline void check_length(int length)
{
    if (length < 2) throw InvalidInput("chain length must be >= 2, got " + std::to_string(length));
    if (length % 2 != 0) throw InvalidInput("chain length must be even, got " + std::to_string(length));
}

inline ChainSpec build_chain(ModelKind model, int length, const DisorderSpec& dist, std::uint64_t seed)
{
    check_length(length);
    dist.validate();
    ChainSpec chain{model, std::vector<double>(static_cast<std::size_t>(length), 1.0), dist, seed};
    std::mt19937_64 gen(seed);
    switch (model) {
    case ModelKind::Uniform:
        break;
    case ModelKind::Uncorrelated:
        for (auto& j : chain.couplings) j = sample_coupling(dist, open_unit(gen()));
        break;
    case ModelKind::Correlated:
        for (std::size_t i = 0; i < chain.couplings.size(); i += 2)
            chain.couplings[i] = chain.couplings[i + 1] = sample_coupling(dist, open_unit(gen()));
        break;
    }
    return chain;
}

// Chain with explicitly given couplings (tests, replay).
inline ChainSpec make_chain(ModelKind model, std::vector<double> couplings)
{
    ChainSpec chain{model, std::move(couplings), DisorderSpec{}, 0};
    chain.validate();
    return chain;
}

// Same ring relabelled so that old site `shift` becomes site 0.
inline ChainSpec rotate_chain(const ChainSpec& chain, int shift)
{
    ChainSpec out = chain;
    const int n = chain.length();
    std::rotate(out.couplings.begin(), out.couplings.begin() + ((shift % n) + n) % n, out.couplings.end());
    return out;
}

// One JSON-lines audit record: {seed, model, L, dist, couplings[]}.
inline nlohmann::json chain_record(const ChainSpec& chain)
{
    return nlohmann::json{{"seed", chain.seed},
                          {"model", to_string(chain.model)},
                          {"L", chain.length()},
                          {"dist", {{"kind", to_string(chain.dist.kind)}, {"strength", chain.dist.text}}},
                          {"couplings", chain.couplings}};
}

inline ChainSpec chain_from_record(const nlohmann::json& j)
{
    ChainSpec chain;
    chain.seed = j.at("seed").get<std::uint64_t>();
    chain.model = parse_model_kind(j.at("model").get<std::string>());
    const auto& d = j.at("dist");
    chain.dist = DisorderSpec::make(parse_disorder_kind(d.at("kind").get<std::string>()),
                                    d.at("strength").get<std::string>(),
                                    parse_decimal(d.at("strength").get<std::string>()));
    chain.couplings = j.at("couplings").get<std::vector<double>>();
    if (j.at("L").get<int>() != chain.length()) throw InvalidInput("chain record: L does not match couplings");
    chain.validate();
    return chain;
}

}  // namespace xxbell
