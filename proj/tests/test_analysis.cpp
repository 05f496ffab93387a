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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"
#include "xxbell/analysis.hpp"

using namespace xxbell;

namespace {

double mass(const Histogram& h)
{
    double m = 0.0;
    for (int b = 0; b < h.bins(); ++b) m += h.densities[b] * h.width();
    return m;
}

ThresholdJob small_job()
{
    ThresholdJob job;
    job.model = ModelKind::Uncorrelated;
    job.length = 16;
    job.grid = {"0", "0.2", "0.4", "0.8", "1.6"};
    job.realizations = 64;
    job.master_seed = 5;
    job.resolution = 0.02;
    return job;
}

// Replays a witness: the recorded pair must meet the predicate again.
void expect_replays(const ThresholdJob& job, const ThresholdProbe& p)
{
    ASSERT_TRUE(p.witness.has_value());
    const auto chain = build_chain(job.model, job.length, DisorderSpec::make(job.family, p.strength, parse_decimal(p.strength)),
                                   p.witness->seed);
    const auto g = ground_state_correlations(chain).g;
    PairObservables q{p.witness->i, p.witness->j, ring_distance(p.witness->i, p.witness->j, job.length),
                      cxx(g, p.witness->i, p.witness->j), czz(g, p.witness->i, p.witness->j)};
    apply_measures(q);
    if (job.predicate == OnsetPredicate::Nonlocal)
        EXPECT_TRUE(q.nonlocal);
    else
        EXPECT_TRUE(q.entangled);
    EXPECT_EQ(p.witness->seed, derive_seed(p.master_seed, p.witness->index));
}

}  // namespace

TEST(BuildHistogram, SingleSampleOneBin)
{
    const auto h = build_histogram({0.5}, 1, 0.0, 2.0);
    EXPECT_DOUBLE_EQ(h.densities[0], 0.5);
    EXPECT_EQ(h.count, 1u);
}

TEST(BuildHistogram, UniformSamples)
{
    std::mt19937_64 gen(fixtures::fixed_seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(1000000);
    for (auto& v : x) v = u(gen);
    const auto h = build_histogram(x, 10, 0.0, 1.0);
    for (double d : h.densities) EXPECT_NEAR(d, 1.0, 0.01);
    EXPECT_NEAR(mass(h), 1.0, 1e-9);
}

TEST(BuildHistogram, EmptyAndInvalid)
{
    const auto h = build_histogram({}, 5, 0.0, 1.0);
    EXPECT_EQ(h.count, 0u);
    for (double d : h.densities) EXPECT_EQ(d, 0.0);
    EXPECT_THROW(build_histogram({0.1}, 0, 0.0, 1.0), InvalidInput);
    EXPECT_THROW(build_histogram({0.1}, 3, 1.0, 1.0), InvalidInput);
}

TEST(BuildHistogram, OutOfRangeCountedSeparately)
{
    const auto h = build_histogram({-1.0, 0.2, 0.3, 2.0, 5.0}, 4, 0.0, 1.0);
    EXPECT_EQ(h.count, 2u);
    EXPECT_EQ(h.out_of_range, 3u);
    EXPECT_NEAR(mass(h), 1.0, 1e-12);
}

TEST(BuildHistogram, CsvLayout)
{
    const auto h = build_histogram({0.1, 0.7}, 2, 0.0, 1.0, "fidelity", "all");
    const auto csv = histogram_csv(h, "abc");
    EXPECT_EQ(csv, "# fingerprint=abc observable=fidelity class=all count=2 out_of_range=0\n"
                   "bin_lo,bin_hi,density\n0,0.5,1\n0.5,1,1\n");
}

TEST(Histograms, ViolatingTailAtModerateDisorder)
{
    EnsembleConfig c;
    c.length = 64;
    c.dist = DisorderSpec::power_law("1.0");
    c.realizations = 200;
    c.master_seed = 2;
    const auto acc = run_ensemble(c);
    const auto h = normalize(acc.all.cxx, "cxx", "all");
    EXPECT_NEAR(mass(h), 1.0, 1e-9);
    EXPECT_EQ(h.out_of_range, 0u);
    double tail = 0.0;
    for (int b = 0; b < h.bins(); ++b)
        if (h.bin_hi(b) <= -nonlocal_cxx_threshold) tail += h.densities[b] * h.width();
    EXPECT_GT(tail, 0.0);
    // Every distance class is normalized on its own.
    for (std::size_t d = 1; d < acc.by_distance.size(); ++d)
        EXPECT_NEAR(mass(normalize(acc.by_distance[d].fidelity, "fidelity", "d")), 1.0, 1e-9);
}

TEST(ThresholdScan, GridValidation)
{
    auto job = small_job();
    job.grid = {"0.4", "0.2"};
    EXPECT_THROW(threshold_scan(job), InvalidInput);
    job.family = DisorderKind::Box;
    job.grid = {"0.5", "0.9"};
    EXPECT_THROW(threshold_scan(job), InvalidInput);
    job.grid = {};
    EXPECT_THROW(threshold_scan(job), InvalidInput);
    job.grid = {"0.9", "1.2"};
    EXPECT_THROW(threshold_scan(job), InvalidInput);
}

TEST(ThresholdScan, BracketSemanticsAndReplayableWitnesses)
{
    const auto job = small_job();
    const auto est = threshold_scan(job);
    ASSERT_TRUE(est.found);
    EXPECT_FALSE(est.lower_open);
    EXPECT_LT(est.low, est.onset);
    EXPECT_LE(est.onset, est.high);
    EXPECT_LE(est.high - est.low, job.resolution * (1.0 + 1e-9));
    EXPECT_EQ(est.realizations_per_point, 64u);
    bool refined = false;
    for (const auto& p : est.probes) {
        refined |= p.refinement;
        if (p.violated) {
            expect_replays(job, p);
            EXPECT_LE(est.onset, parse_decimal(p.strength));
        } else {
            EXPECT_EQ(p.realizations, job.realizations);
            EXPECT_GE(est.low, parse_decimal(p.strength));
        }
    }
    EXPECT_TRUE(refined);
    const auto j = threshold_json(est);
    EXPECT_EQ(j.at("N").get<int>(), 64);
    EXPECT_EQ(j.at("bracket").size(), 2u);
    EXPECT_EQ(j.at("seeds").size(), est.probes.size());
}

TEST(ThresholdScan, OpenBrackets)
{
    auto job = small_job();
    job.grid = {"0", "0.001"};
    auto none = threshold_scan(job);
    EXPECT_FALSE(none.found);
    EXPECT_TRUE(threshold_json(none).at("upper_open").get<bool>());
    job.grid = {"5", "10"};
    auto early = threshold_scan(job);
    EXPECT_TRUE(early.found);
    EXPECT_TRUE(early.lower_open);
    EXPECT_EQ(early.onset, 5.0);
}

TEST(ThresholdScan, BoxFamilyScansDownward)
{
    auto job = small_job();
    job.family = DisorderKind::Box;
    job.grid = {"1", "0.8", "0.6", "0.4", "0.2"};
    const auto est = threshold_scan(job);
    ASSERT_TRUE(est.found);
    EXPECT_GT(est.low, est.onset);  // weaker disorder = larger J_min
    EXPECT_LE(std::abs(est.low - est.high), job.resolution * (1.0 + 1e-9));
    for (const auto& p : est.probes)
        if (p.violated) expect_replays(job, p);
}

TEST(ThresholdScan, NonlocalOnsetNotBelowEntanglementOnset)
{
    for (std::uint64_t seed : {1, 2, 3}) {
        auto job = small_job();
        job.master_seed = seed;
        job.grid = {"0.1", "0.3", "0.6", "1", "2", "4", "8"};
        const auto far = far_pair_thresholds(job, SeparationFilter::parse("ring>L/6"));
        if (far.nonlocality.found) {
            ASSERT_TRUE(far.entanglement.found);
            EXPECT_LE(far.entanglement.onset, far.nonlocality.onset);
        }
        for (const auto& p : far.entanglement.probes)
            if (p.violated) {
                auto ej = job;
                ej.predicate = OnsetPredicate::Entangled;
                expect_replays(ej, p);
                EXPECT_GT(ring_distance(p.witness->i, p.witness->j, 16) * 6, 16);
            }
    }
}

TEST(MaxSeparation, CurveWithProvenance)
{
    const auto curve =
        max_separation_curve(ModelKind::Correlated, 24, DisorderKind::PowerLaw, {"0.5", "5"}, 100, 9);
    ASSERT_EQ(curve.size(), 2u);
    for (const auto& p : curve) {
        EXPECT_EQ(p.realizations, 100u);
        EXPECT_GE(p.max_entangled_separation, p.max_nonlocal_separation);
        ASSERT_TRUE(p.entangled_witness.set);
        EXPECT_EQ(p.entangled_witness.value, p.max_entangled_separation);
    }
}

TEST(Bootstrap, IntervalCoversMeanAndShrinks)
{
    std::mt19937_64 gen(3);
    std::normal_distribution<double> normal(2.0, 1.0);
    std::vector<double> small(100), large(10000);
    for (auto& v : small) v = normal(gen);
    for (auto& v : large) v = normal(gen);
    const auto a = bootstrap_mean(small, 1000, 1);
    const auto b = bootstrap_mean(large, 1000, 1);
    EXPECT_LT(a.lo, 2.0 + 0.4);
    EXPECT_GT(a.hi, 2.0 - 0.4);
    EXPECT_LT(b.lo, b.hi);
    const double ratio = (a.hi - a.lo) / (b.hi - b.lo);
    EXPECT_GT(ratio, 7.0);
    EXPECT_LT(ratio, 13.0);
    EXPECT_THROW(bootstrap_mean({}, 10, 1), InvalidInput);
}
