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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "xxbell/xxbell.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path work = fs::path(XXBELL_TEST_WORKDIR) / "cli";

void write(const fs::path& p, const std::string& text)
{
    fs::create_directories(p.parent_path());
    std::ofstream(p) << text;
}

std::string read(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run(const std::string& args, const std::string& env = "")
{
    const std::string cmd = env + " " + XXBELL_CLI + " " + args + " > " + (work / "last.log").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string log_text() { return read(work / "last.log"); }

std::string config(const std::string& model, const std::string& extra = "")
{
    return "model: " + model + "\nensemble: {realizations: 40, master_seed: 5}\n" + extra;
}

std::string csv_value(const std::string& csv, const std::string& key)
{
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(key + ",", 0) == 0) return line.substr(key.size() + 1);
    return "";
}

}  // namespace

TEST(Cli, UniformChainHasNoNonlocalPairs)
{
    write(work / "uniform.yaml", "model: {kind: uniform, length: 100}\nensemble: {realizations: 1}\n");
    ASSERT_EQ(run("sample --config " + (work / "uniform.yaml").string() + " --out " + (work / "uniform").string()), 0)
        << log_text();
    const auto summary = read(work / "uniform" / "summary.csv");
    EXPECT_EQ(csv_value(summary, "q_nl"), "0");
    EXPECT_EQ(csv_value(summary, "nonlocal_pairs"), "0");
    EXPECT_EQ(summary.rfind("# fingerprint=", 0), 0u);
}

TEST(Cli, StrongDisorderHistogramHasViolatingTail)
{
    write(work / "d5.yaml", config("{kind: uncorrelated, length: 64, disorder: powerlaw, strength: 5}"));
    ASSERT_EQ(run("sample --config " + (work / "d5.yaml").string() + " --out " + (work / "d5").string()), 0) << log_text();
    std::istringstream in(read(work / "d5" / "hist_cxx_all.csv"));
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    EXPECT_EQ(line, "bin_lo,bin_hi,density");
    double tail = 0.0;
    while (std::getline(in, line)) {
        double lo, hi, density;
        ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf", &lo, &hi, &density), 3);
        if (hi <= -xxbell::nonlocal_cxx_threshold) tail += density * (hi - lo);
    }
    EXPECT_GT(tail, 0.0);
}

TEST(Cli, RerunsAreByteIdenticalAcrossWorkerCounts)
{
    write(work / "rerun.yaml", config("{kind: correlated, length: 32, disorder: powerlaw, strength: 1}"));
    const auto cfg = (work / "rerun.yaml").string();
    ASSERT_EQ(run("sample --config " + cfg + " --out " + (work / "r1").string() + " --workers 1"), 0) << log_text();
    ASSERT_EQ(run("sample --config " + cfg + " --out " + (work / "r2").string(), "XXBELL_WORKERS=4"), 0) << log_text();
    EXPECT_EQ(read(work / "r1" / "accumulator.json"), read(work / "r2" / "accumulator.json"));
    EXPECT_EQ(read(work / "r1" / "summary.csv"), read(work / "r2" / "summary.csv"));
    const auto m1 = nlohmann::json::parse(read(work / "r1" / "manifest.json"));
    const auto m2 = nlohmann::json::parse(read(work / "r2" / "manifest.json"));
    EXPECT_EQ(m1["fingerprint"], m2["fingerprint"]);
    EXPECT_EQ(m1["master_seed"], 5);
    EXPECT_EQ(m1["exit_code"], 0);
    for (const auto& f : m1["outputs"]) EXPECT_TRUE(fs::exists(work / "r1" / f.get<std::string>())) << f;
    const auto acc = nlohmann::json::parse(read(work / "r1" / "accumulator.json"));
    EXPECT_EQ(acc["run_fingerprint"], m1["fingerprint"]);
}

TEST(Cli, PairsCsvUsesOneBasedSites)
{
    write(work / "pairs.yaml", "model: {kind: uncorrelated, length: 8, disorder: powerlaw, strength: 1}\n"
                               "ensemble: {realizations: 2, master_seed: 1}\n");
    ASSERT_EQ(run("sample --pairs-csv --config " + (work / "pairs.yaml").string() + " --out " + (work / "pairs").string()), 0)
        << log_text();
    std::istringstream in(read(work / "pairs" / "pairs.csv"));
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    int rows = 0, min_site = 100, max_site = 0;
    while (std::getline(in, line)) {
        unsigned long long k, seed;
        int i, j;
        ASSERT_EQ(std::sscanf(line.c_str(), "%llu,%llu,%d,%d", &k, &seed, &i, &j), 4);
        min_site = std::min(min_site, i);
        max_site = std::max(max_site, j);
        ++rows;
    }
    EXPECT_EQ(rows, 2 * 28);
    EXPECT_EQ(min_site, 1);
    EXPECT_EQ(max_site, 8);
}

TEST(Cli, HistFromSavedAccumulator)
{
    write(work / "h.yaml", config("{kind: uncorrelated, length: 16, disorder: box, strength: 0.3}"));
    ASSERT_EQ(run("sample --config " + (work / "h.yaml").string() + " --out " + (work / "h").string()), 0) << log_text();
    ASSERT_EQ(run("hist --accumulator " + (work / "h" / "accumulator.json").string() + " --out " + (work / "hh").string()), 0)
        << log_text();
    EXPECT_TRUE(fs::exists(work / "hh" / "hist_cxx_d008.csv"));
    EXPECT_EQ(read(work / "h" / "hist_cxx_all.csv"), read(work / "hh" / "hist_cxx_all.csv"));
}

TEST(Cli, ThresholdAndMaxsepReports)
{
    write(work / "t.yaml", R"(model: {kind: uncorrelated, length: 16, disorder: powerlaw}
ensemble: {realizations: 32, master_seed: 2, max_separation: 4}
threshold: {grid: ["0", "0.5", "2"], resolution: 0.05}
maxsep: {strengths: ["0.5", "5"]}
)");
    ASSERT_EQ(run("threshold --config " + (work / "t.yaml").string() + " --out " + (work / "t").string()), 0) << log_text();
    const auto t = nlohmann::json::parse(read(work / "t" / "threshold.json"));
    ASSERT_EQ(t["estimates"].size(), 1u);
    const auto& e = t["estimates"][0];
    EXPECT_TRUE(e["found"].get<bool>());
    EXPECT_EQ(e["N"], 32);
    EXPECT_LE(e["bracket"][1].get<double>() - e["bracket"][0].get<double>(), 0.05 + 1e-12);

    ASSERT_EQ(run("maxsep --config " + (work / "t.yaml").string() + " --out " + (work / "m").string()), 0) << log_text();
    const auto m = nlohmann::json::parse(read(work / "m" / "maxsep.json"));
    ASSERT_EQ(m["points"].size(), 2u);
    EXPECT_EQ(m["points"][1]["strength"], "5");
    EXPECT_GE(m["points"][1]["entangled"].get<int>(), m["points"][1]["nonlocal"].get<int>());
}

TEST(Cli, ConfigErrorsExitWithCodeTwo)
{
    write(work / "bad.yaml", "model:\n  kind: uncorrelated\n  length: 64\n  disorder: powerlaw\n  strenght: 1\n");
    EXPECT_EQ(run("sample --config " + (work / "bad.yaml").string()), 2);
    EXPECT_NE(log_text().find("line 5"), std::string::npos) << log_text();
    EXPECT_EQ(run("sample"), 2);
    EXPECT_EQ(run("frobnicate"), 2);
    write(work / "ok.yaml", config("{kind: uncorrelated, length: 16, disorder: powerlaw, strength: 1}"));
    EXPECT_EQ(run("sample --config " + (work / "ok.yaml").string(), "XXBELL_WORKERS=zero"), 2);
    EXPECT_EQ(run("sample --config " + (work / "ok.yaml").string() + " --max-separation -2"), 2);
    EXPECT_EQ(run("threshold --config " + (work / "ok.yaml").string()), 2);
}

TEST(Cli, IoErrorsExitWithCodeOne)
{
    EXPECT_EQ(run("sample --config " + (work / "missing.yaml").string()), 1);
    write(work / "ok.yaml", config("{kind: uncorrelated, length: 16, disorder: powerlaw, strength: 1}"));
    write(work / "blocker", "a file, not a directory");
    EXPECT_EQ(run("sample --config " + (work / "ok.yaml").string() + " --out " + (work / "blocker").string()), 1);
}

TEST(Cli, DisallowedCounterExitsWithCodeThree)
{
    // Strong disorder produces near-degenerate sector energies; forbid them.
    write(work / "strict.yaml", config("{kind: uncorrelated, length: 32, disorder: powerlaw, strength: 5}",
                                       "checks: {allow: []}\n"));
    EXPECT_EQ(run("sample --config " + (work / "strict.yaml").string() + " --out " + (work / "strict").string()), 3)
        << log_text();
    EXPECT_NE(log_text().find("degenerate_sector_ties"), std::string::npos);
    EXPECT_EQ(nlohmann::json::parse(read(work / "strict" / "manifest.json"))["exit_code"], 3);
}

TEST(Cli, VerifyPassesAndCatchesCorruption)
{
    EXPECT_EQ(run("verify --max-l 8 --seeds 2 --out " + (work / "v").string()), 0) << log_text();
    const auto v = nlohmann::json::parse(read(work / "v" / "verify.json"));
    EXPECT_TRUE(v["passed"].get<bool>());
    EXPECT_EQ(run("verify --max-l 8 --seeds 2 --corrupt-g 1e-6"), 3);
    EXPECT_NE(log_text().find("FAIL bell"), std::string::npos) << log_text();
    EXPECT_NE(log_text().find("deviation: fidelity"), std::string::npos);
    EXPECT_EQ(run("verify --max-l 16"), 2);
}
