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

// xxbell command-line tool.
//
// Exit codes: 0 ok, 1 I/O error, 2 usage or config error,
// 3 numerical-property failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xxbell/xxbell.hpp"

namespace fs = std::filesystem;
using namespace xxbell;
using ojson = nlohmann::ordered_json;

namespace {

enum ExitCode { exit_ok = 0, exit_io = 1, exit_config = 2, exit_numerical = 3 };

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonFlags {
    std::string config;
    std::optional<int> workers;
    std::optional<std::string> out;
    bool pairs_csv = false;
    std::optional<std::string> max_separation;
    bool debug_spectrum = false;
    std::string accumulator;
};

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string utc_now()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class Outputs {
public:
    Outputs(fs::path dir, std::string fingerprint) : dir_(std::move(dir)), fingerprint_(std::move(fingerprint))
    {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    }

    void write(const std::string& name, const std::string& content)
    {
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        out << content;
        out.close();
        if (!out) throw IoError("cannot write '" + path.string() + "'");
        files_.push_back(name);
    }

    void write_json(const std::string& name, const ojson& j) { write(name, j.dump(2) + "\n"); }

    std::ofstream open(const std::string& name)
    {
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write '" + path.string() + "'");
        files_.push_back(name);
        return out;
    }

    const std::string& fingerprint() const { return fingerprint_; }
    const std::vector<std::string>& files() const { return files_; }
    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::string fingerprint_;
    std::vector<std::string> files_;
};

void write_manifest(Outputs& out, const std::string& command, const ojson& config, std::uint64_t master_seed,
                    const std::string& started, int exit_code)
{
    ojson m;
    m["format"] = "xxbell-manifest";
    m["tool_version"] = version;
    m["command"] = command;
    m["fingerprint"] = out.fingerprint();
    m["master_seed"] = master_seed;
    m["config"] = config;
    m["started"] = started;
    m["finished"] = utc_now();
    m["exit_code"] = exit_code;
    auto files = out.files();
    files.push_back("manifest.json");
    m["outputs"] = files;
    out.write_json("manifest.json", m);
}

RunConfig load_config(const CommonFlags& f)
{
    if (f.config.empty()) throw ConfigError(0, "--config is required");
    auto cfg = parse_config(read_file(f.config));
    if (const char* env = std::getenv("XXBELL_WORKERS"); env && *env) {
        try {
            std::size_t used = 0;
            const int w = std::stoi(env, &used);
            if (used != std::string(env).size() || w < 1) throw std::invalid_argument(env);
            cfg.ensemble.workers = w;
        } catch (const std::exception&) {
            throw ConfigError(0, "XXBELL_WORKERS must be a positive integer, got '" + std::string(env) + "'");
        }
    }
    if (f.workers) cfg.ensemble.workers = *f.workers;
    if (f.out) cfg.output_dir = *f.out;
    if (f.pairs_csv) cfg.pairs_csv = true;
    if (f.debug_spectrum) cfg.debug_spectrum = true;
    if (f.max_separation) {
        if (*f.max_separation == "unlimited") {
            cfg.ensemble.max_separation = unlimited_separation;
        } else {
            std::size_t used = 0;
            int k = 0;
            try {
                k = std::stoi(*f.max_separation, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != f.max_separation->size() || k < 1)
                throw ConfigError(0, "--max-separation must be a positive integer or 'unlimited'");
            cfg.ensemble.max_separation = k;
        }
    }
    return cfg;
}

void require_strength(const RunConfig& cfg)
{
    if (!cfg.has_strength) throw ConfigError(0, "this command needs 'model.strength'");
}

int counters_exit_code(const PropertyCounters& c, const std::set<std::string>& allowed)
{
    int code = exit_ok;
    for (const auto& [name, value] : counter_values(c)) {
        if (value == 0) continue;
        const bool ok = allowed.count(name) > 0;
        std::cerr << (ok ? "note: " : "error: ") << name << " = " << value << (ok ? " (allowed)" : "") << "\n";
        if (!ok) code = exit_numerical;
    }
    return code;
}

std::string counter_label(std::uint64_t k) { return std::to_string(k); }

std::string summary_csv(const EnsembleAccumulator& a, const std::string& fp)
{
    std::ostringstream s;
    s << "# fingerprint=" << fp << "\n";
    s << "quantity,value\n";
    const auto row = [&](const std::string& k, const std::string& v) { s << k << "," << v << "\n"; };
    const auto extreme = [&](const std::string& k, const Extreme& e) { row(k, e.set ? num(e.value) : "NA"); };
    const double n = static_cast<double>(a.realizations);
    row("realizations", counter_label(a.realizations));
    row("pairs", counter_label(a.all.pairs));
    row("entangled_pairs", counter_label(a.all.entangled));
    row("nonlocal_pairs", counter_label(a.all.nonlocal));
    row("q_nl", num(static_cast<double>(a.all.nonlocal) / n));
    row("mean_abs_cxx", a.all.pairs ? num(a.all.abs_cxx.value() / static_cast<double>(a.all.pairs)) : "NA");
    if (a.complete_pairs) {
        row("q_nl_normalized_mean", num(a.q_nl_normalized.mean()));
        row("q_nl_normalized_stderr", num(a.q_nl_normalized.standard_error()));
        row("monogamy_mean", num(a.monogamy.mean()));
        row("monogamy_stderr", num(a.monogamy.standard_error()));
        extreme("monogamy_max", a.max_monogamy);
    }
    extreme("max_abs_cxx", a.max_abs_cxx);
    extreme("max_fidelity", a.all.max_fidelity);
    extreme("max_bell", a.all.max_bell);
    row("max_entangled_separation", a.max_entangled_separation.set ? num(a.max_entangled_separation.value) : "0");
    row("max_nonlocal_separation", a.max_nonlocal_separation.set ? num(a.max_nonlocal_separation.value) : "0");
    row("filtered_pairs", counter_label(a.filtered.pairs));
    row("filtered_entangled_pairs", counter_label(a.filtered.entangled));
    row("filtered_nonlocal_pairs", counter_label(a.filtered.nonlocal));
    for (const auto& [name, value] : counter_values(a.counters)) row(name, counter_label(value));
    return s.str();
}

std::string distance_csv(const EnsembleAccumulator& a, const std::string& fp)
{
    std::ostringstream s;
    s << "# fingerprint=" << fp << "\n";
    s << "separation,pairs,entangled,nonlocal,mean_abs_cxx,max_fidelity,max_bell\n";
    for (std::size_t d = 1; d < a.by_distance.size(); ++d) {
        const auto& c = a.by_distance[d];
        if (c.pairs == 0) continue;
        s << d << "," << c.pairs << "," << c.entangled << "," << c.nonlocal << ","
          << num(c.abs_cxx.value() / static_cast<double>(c.pairs)) << "," << num(c.max_fidelity.value) << ","
          << num(c.max_bell.value) << "\n";
    }
    return s.str();
}

void write_histograms(Outputs& out, const EnsembleAccumulator& a, bool per_distance)
{
    const auto both = [&](const ClassStats& c, const std::string& cls, const std::string& tag) {
        out.write("hist_cxx_" + tag + ".csv", histogram_csv(normalize(c.cxx, "cxx", cls), out.fingerprint()));
        out.write("hist_fidelity_" + tag + ".csv", histogram_csv(normalize(c.fidelity, "fidelity", cls), out.fingerprint()));
    };
    both(a.all, "all", "all");
    both(a.filtered, a.config.value("filter", std::string("filtered")), "filtered");
    if (!per_distance) return;
    for (std::size_t d = 1; d < a.by_distance.size(); ++d) {
        if (a.by_distance[d].pairs == 0) continue;
        char tag[16];
        std::snprintf(tag, sizeof tag, "d%03zu", d);
        both(a.by_distance[d], "ring=" + std::to_string(d), tag);
    }
}

ojson accumulator_document(const EnsembleAccumulator& a, const std::string& run_fingerprint)
{
    auto j = accumulator_to_json(a);
    j["run_fingerprint"] = run_fingerprint;
    return j;
}

int cmd_sample(const CommonFlags& f)
{
    const auto started = utc_now();
    const auto cfg = load_config(f);
    require_strength(cfg);
    Outputs out(cfg.output_dir, cfg.fingerprint());

    std::ofstream pairs, spectrum;
    if (cfg.pairs_csv) {
        pairs = out.open("pairs.csv");
        pairs << "# fingerprint=" << out.fingerprint() << "\n";
        pairs << "realization,seed,i,j,separation,cxx,czz,fidelity,concurrence,bell,entangled,nonlocal\n";
    }
    if (cfg.debug_spectrum) spectrum = out.open("spectrum.jsonl");
    RunOptions opt;
    if (cfg.pairs_csv || cfg.debug_spectrum) {
        opt.observer = [&](const RealizationResult& r) {
            if (cfg.pairs_csv)
                for (const auto& p : r.pairs)
                    pairs << r.index << "," << r.seed << "," << p.i + 1 << "," << p.j + 1 << "," << p.separation << ","
                          << num(p.cxx) << "," << num(p.czz) << "," << num(p.fidelity) << "," << num(p.concurrence)
                          << "," << num(p.bell) << "," << p.entangled << "," << p.nonlocal << "\n";
            if (cfg.debug_spectrum) {
                auto rec = spectrum_record(r.solution, r.seed);
                rec["fingerprint"] = out.fingerprint();
                rec["realization"] = r.index;
                spectrum << rec.dump() << "\n";
            }
        };
    }
    const auto acc = run_ensemble(cfg.ensemble, opt);
    if (pairs.is_open() && !(pairs.flush())) throw IoError("cannot write pairs.csv");
    if (spectrum.is_open() && !(spectrum.flush())) throw IoError("cannot write spectrum.jsonl");

    out.write_json("accumulator.json", accumulator_document(acc, out.fingerprint()));
    out.write("summary.csv", summary_csv(acc, out.fingerprint()));
    out.write("distance.csv", distance_csv(acc, out.fingerprint()));
    write_histograms(out, acc, false);
    const int code = counters_exit_code(acc.counters, cfg.allowed);
    write_manifest(out, "sample", cfg.canonical_json(), cfg.ensemble.master_seed, started, code);
    std::cout << "sample: " << acc.realizations << " realizations, " << acc.all.nonlocal << " nonlocal pairs, output in "
              << out.dir().string() << "\n";
    return code;
}

int cmd_hist(const CommonFlags& f)
{
    const auto started = utc_now();
    if (!f.accumulator.empty()) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(read_file(f.accumulator));
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(0, "accumulator '" + f.accumulator + "' is not valid JSON: " + e.what());
        }
        const auto acc = accumulator_from_json(doc);
        // Merged accumulators carry no run fingerprint; fall back to the population's.
        Outputs out(f.out.value_or("out"), doc.value("run_fingerprint", acc.fingerprint));
        write_histograms(out, acc, true);
        out.write("summary.csv", summary_csv(acc, out.fingerprint()));
        out.write("distance.csv", distance_csv(acc, out.fingerprint()));
        const std::set<std::string> allowed{"underflow_clamps", "degenerate_sector_ties", "dense_fallbacks"};
        const int code = counters_exit_code(acc.counters, allowed);
        auto seed = acc.config.value("master_seed", std::uint64_t{0});
        write_manifest(out, "hist", acc.config, seed, started, code);
        return code;
    }
    const auto cfg = load_config(f);
    require_strength(cfg);
    Outputs out(cfg.output_dir, cfg.fingerprint());
    const auto acc = run_ensemble(cfg.ensemble);
    out.write_json("accumulator.json", accumulator_document(acc, out.fingerprint()));
    write_histograms(out, acc, true);
    out.write("summary.csv", summary_csv(acc, out.fingerprint()));
    out.write("distance.csv", distance_csv(acc, out.fingerprint()));
    const int code = counters_exit_code(acc.counters, cfg.allowed);
    write_manifest(out, "hist", cfg.canonical_json(), cfg.ensemble.master_seed, started, code);
    return code;
}

int cmd_threshold(const CommonFlags& f)
{
    const auto started = utc_now();
    const auto cfg = load_config(f);
    if (!cfg.threshold) throw ConfigError(0, "threshold needs a 'threshold' section");
    Outputs out(cfg.output_dir, cfg.fingerprint());
    auto job = cfg.threshold_job();
    std::vector<OnsetPredicate> predicates;
    if (cfg.threshold->predicate == "both")
        predicates = {OnsetPredicate::Entangled, OnsetPredicate::Nonlocal};
    else
        predicates = {parse_onset_predicate(cfg.threshold->predicate)};

    ojson doc;
    doc["fingerprint"] = out.fingerprint();
    doc["model"] = to_string(job.model);
    doc["L"] = job.length;
    doc["family"] = to_string(job.family);
    doc["filter"] = job.filter ? ojson(job.filter->to_string()) : ojson(nullptr);
    doc["estimates"] = ojson::array();
    for (auto p : predicates) {
        job.predicate = p;
        const auto est = threshold_scan(job);
        doc["estimates"].push_back(threshold_json(est));
        std::cout << "threshold " << to_string(p) << ": ";
        if (!est.found)
            std::cout << "no violation on the grid\n";
        else
            std::cout << "onset " << format_strength(est.onset) << " in [" << format_strength(std::min(est.low, est.high))
                      << ", " << format_strength(std::max(est.low, est.high)) << "]" << (est.lower_open ? " (lower open)" : "")
                      << "\n";
    }
    out.write_json("threshold.json", doc);
    write_manifest(out, "threshold", cfg.canonical_json(), cfg.ensemble.master_seed, started, exit_ok);
    return exit_ok;
}

int cmd_maxsep(const CommonFlags& f)
{
    const auto started = utc_now();
    const auto cfg = load_config(f);
    std::vector<std::string> strengths;
    if (cfg.maxsep)
        strengths = *cfg.maxsep;
    else if (cfg.has_strength)
        strengths = {cfg.ensemble.dist.text};
    else
        throw ConfigError(0, "maxsep needs 'maxsep.strengths' or 'model.strength'");
    Outputs out(cfg.output_dir, cfg.fingerprint());
    const auto& e = cfg.ensemble;
    const auto curve = max_separation_curve(e.model, e.length, e.dist.kind, strengths, e.realizations, e.master_seed,
                                            e.workers);
    const auto witness = [](const Extreme& x) -> ojson {
        if (!x.set) return nullptr;
        return {{"seed", x.seed}, {"realization", x.index}, {"i", x.i + 1}, {"j", x.j + 1}};
    };
    ojson doc;
    doc["fingerprint"] = out.fingerprint();
    doc["model"] = to_string(e.model);
    doc["L"] = e.length;
    doc["family"] = to_string(e.dist.kind);
    doc["points"] = ojson::array();
    std::ostringstream csv;
    csv << "# fingerprint=" << out.fingerprint() << "\nstrength,N,entangled,nonlocal\n";
    for (const auto& p : curve) {
        doc["points"].push_back({{"strength", p.strength},
                                 {"N", p.realizations},
                                 {"entangled", p.max_entangled_separation},
                                 {"nonlocal", p.max_nonlocal_separation},
                                 {"entangled_witness", witness(p.entangled_witness)},
                                 {"nonlocal_witness", witness(p.nonlocal_witness)}});
        csv << p.strength << "," << p.realizations << "," << p.max_entangled_separation << "," << p.max_nonlocal_separation
            << "\n";
        std::cout << "maxsep " << p.strength << ": entangled " << p.max_entangled_separation << ", nonlocal "
                  << p.max_nonlocal_separation << "\n";
    }
    out.write_json("maxsep.json", doc);
    out.write("maxsep.csv", csv.str());
    write_manifest(out, "maxsep", cfg.canonical_json(), e.master_seed, started, exit_ok);
    return exit_ok;
}

struct VerifyFlags {
    int max_l = 12;
    int seeds = 20;
    std::uint64_t master_seed = 0;
    double corrupt_g = 0.0;
    std::optional<std::string> out;
};

int cmd_verify(const VerifyFlags& f)
{
    const auto started = utc_now();
    if (f.max_l > oracle::max_length || f.max_l < 4 || f.max_l % 2 != 0)
        throw ConfigError(0, "--max-l must be even and in [4, " + std::to_string(oracle::max_length) + "]");
    if (f.seeds < 1) throw ConfigError(0, "--seeds must be >= 1");
    VerifyOptions opt;
    opt.lengths.clear();
    for (int l = std::min(8, f.max_l); l <= f.max_l; l += 2) opt.lengths.push_back(l);
    opt.seeds = f.seeds;
    opt.master_seed = f.master_seed;
    opt.corrupt_g = f.corrupt_g;
    const auto report = run_verify(opt);
    const auto doc = verify_json(report);
    for (const auto& row : doc["table"])
        std::cout << (row["pass"].get<bool>() ? "PASS " : "FAIL ") << row["formula"].get<std::string>()
                  << " max_abs_deviation=" << num(row["max_abs_deviation"].get<double>())
                  << " tolerance=" << num(row["tolerance"].get<double>()) << "\n";
    for (const auto& d : report.failures)
        std::cerr << "deviation: " << d.formula << " " << num(d.value) << " > " << num(d.tolerance) << " (" << d.model
                  << " L=" << d.length << " D=" << d.strength << " seed=" << d.seed << " pair=" << d.i + 1 << ","
                  << d.j + 1 << ")\n";
    const int code = report.passed() ? exit_ok : exit_numerical;
    if (f.out) {
        ojson config{{"lengths", opt.lengths}, {"strengths", opt.strengths}, {"seeds", opt.seeds},
                     {"master_seed", opt.master_seed}, {"corrupt_g", opt.corrupt_g}};
        Outputs out(*f.out, hex64(fnv1a64(config.dump())));
        auto j = doc;
        j["fingerprint"] = out.fingerprint();
        out.write_json("verify.json", j);
        write_manifest(out, "verify", config, opt.master_seed, started, code);
    }
    std::cout << (report.passed() ? "verify: pass" : "verify: FAIL") << " (" << report.chains << " chains)\n";
    return code;
}

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_config = true)
{
    auto* c = cmd->add_option("--config", f.config, "YAML run configuration");
    if (needs_config) c->required();
    cmd->add_option("--workers", f.workers, "worker threads (overrides XXBELL_WORKERS and the config)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", f.out, "output directory (overrides output.dir)");
    cmd->add_option("--max-separation", f.max_separation, "ring-distance cap for pair evaluation, or 'unlimited'");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bell nonlocality and entanglement statistics of random XX spin rings"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);

    CommonFlags sample_f, hist_f, thr_f, max_f;
    VerifyFlags ver_f;

    auto* sample = app.add_subcommand("sample", "run an ensemble and write the accumulator, summary and histograms");
    add_common(sample, sample_f);
    sample->add_flag("--pairs-csv", sample_f.pairs_csv, "write every evaluated pair to pairs.csv");
    sample->add_flag("--debug-spectrum", sample_f.debug_spectrum, "write per-realization sector spectra");

    auto* hist = app.add_subcommand("hist", "histograms for all separation classes");
    add_common(hist, hist_f, false);
    hist->add_option("--accumulator", hist_f.accumulator, "use a saved accumulator instead of running the ensemble");

    auto* thr = app.add_subcommand("threshold", "disorder strength at which violations first appear");
    add_common(thr, thr_f);

    auto* maxs = app.add_subcommand("maxsep", "largest ring distance of entangled and nonlocal pairs");
    add_common(maxs, max_f);

    auto* ver = app.add_subcommand("verify", "compare the free-fermion pipeline with exact diagonalization");
    ver->add_option("--max-l", ver_f.max_l, "largest ring length (even, <= 14)");
    ver->add_option("--seeds", ver_f.seeds, "chains per (L, model, D)");
    ver->add_option("--master-seed", ver_f.master_seed, "master seed");
    ver->add_option("--out", ver_f.out, "write verify.json and a manifest here");
    ver->add_option("--corrupt-g", ver_f.corrupt_g, "test hook: perturb G(1,2) by this amount")->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (*sample) return cmd_sample(sample_f);
        if (*hist) {
            if (hist_f.config.empty() && hist_f.accumulator.empty())
                throw ConfigError(0, "hist needs --config or --accumulator");
            return cmd_hist(hist_f);
        }
        if (*thr) return cmd_threshold(thr_f);
        if (*maxs) return cmd_maxsep(max_f);
        if (*ver) return cmd_verify(ver_f);
    } catch (const ConfigError& e) {
        if (e.line() > 0)
            std::cerr << "config error: " << e.what() << "\n";
        else
            std::cerr << "error: " << std::string(e.what()).substr(std::string("line 0: ").size()) << "\n";
        return exit_config;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return exit_io;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return exit_numerical;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return exit_config;
    }
    return exit_ok;
}
