// Prints one line per acceptance criterion. Exits 0 once every check has run;
// with --strict, exits 1 if any criterion failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "fairbv/harness.hpp"
#include "fairbv/io.hpp"
#include "fairbv/metrics.hpp"
#include "fairbv/parallel.hpp"
#include "fairbv/synth.hpp"
#include "oracle.hpp"

using namespace fairbv;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void fail(const std::string& why) {
        if (!pass) detail << "; ";
        else detail.str("");
        pass = false;
        detail << why;
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v, const char* fmt = "%.4g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

const std::vector<std::uint64_t> kSeeds{1, 2, 3};

SuiteResult suite(const std::string& id, std::uint64_t seed) {
    auto def = resolve_suite(id, FAIRBV_SUITE_DIR);
    MetricConfig cfg;
    cfg.policy_fmr = def.policy_fmr;
    return run_suite(def, suite_base(def, seed), cfg, workers());
}

const ReportRow& row(const SuiteResult& r, const std::string& label) {
    for (const auto& x : r.rows)
        if (x.ratio_label == label) return x;
    throw std::runtime_error("row " + label + " missing from " + r.suite_id);
}

const PropertyOutcome& outcome(const SuiteResult& r, const std::string& name) {
    for (const auto& p : r.properties)
        if (p.name == name) return p;
    throw std::runtime_error("property " + name + " missing from " + r.suite_id);
}

void require_outcome(Verdict& v, const SuiteResult& r, const std::string& name) {
    const auto& p = outcome(r, name);
    if (!p.passed || p.skipped)
        v.fail(r.suite_id + " seed " + std::to_string(r.seed) + " " + name + (p.skipped ? " skipped: " : ": ") +
               p.detail);
}

// Criterion 1.
Verdict rate_oracle() {
    Verdict v;
    auto t0 = Clock::now();
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t checks = 0, mismatches = 0;
    auto expect = [&](bool ok) {
        ++checks;
        mismatches += !ok;
    };
    for (int rep = 0; rep < 1000; ++rep) {
        auto pairs = oracle::random_pairs(rng);
        ScoreDataset ds(pairs);
        auto cs = oracle::candidates(pairs);
        std::vector<double> ts = cs;
        ts.push_back(u(rng));
        ts.push_back(cs.front() - 0.01);
        for (double t : ts) {
            auto c = oracle::count_at(pairs, t);
            auto r = rates_at_threshold(ds, t);
            expect(r.fmr == oracle::fmr(c) && r.fnmr == oracle::fnmr(c) && r.tmr == oracle::tmr(c) &&
                   r.tnmr == oracle::tnmr(c));
        }
        std::vector<double> targets{0.0, 0.5, 0.95, 1.0, u(rng), u(rng)};
        for (double target : targets) {
            auto want = oracle::threshold_at_tmr(pairs, target);
            auto got = threshold_at_tmr(ds, target);
            if (want) {
                auto c = oracle::count_at(pairs, *want);
                expect(got.threshold == *want && got.achieved_rate == oracle::fmr(c) &&
                       got.constraint_rate == oracle::tmr(c));
            }
            auto want2 = oracle::threshold_at_tnmr(pairs, target);
            auto got2 = fnmr_at_tnmr(ds, target);
            if (want2) {
                auto c = oracle::count_at(pairs, *want2);
                expect(got2.threshold == *want2 && got2.achieved_rate == oracle::fnmr(c) &&
                       got2.constraint_rate == oracle::tnmr(c));
            } else {
                // No candidate qualifies: the threshold must sit below every
                // distance and still meet the target.
                auto c = oracle::count_at(pairs, got2.threshold);
                expect(got2.threshold < cs.front() && oracle::tnmr(c) >= target);
            }
        }
        auto e = oracle::eer(pairs);
        auto g = eer(ds);
        expect(g.eer == e.eer && g.threshold == e.threshold && g.fmr_at_t == e.fmr && g.fnmr_at_t == e.fnmr);
    }
    double secs = seconds_since(t0);
    if (mismatches) v.fail(std::to_string(mismatches) + " of " + std::to_string(checks) + " checks differ");
    if (secs >= 10.0) v.fail("runtime " + num(secs) + " s");
    if (v.pass) v.detail << checks << " exact checks over 1000 datasets in " << num(secs, "%.2f") << " s";
    return v;
}

GroupRatesTable table(std::vector<double> fmrs, std::vector<double> fnmrs) {
    GroupRatesTable t;
    for (std::size_t i = 0; i < fmrs.size(); ++i) t.entries.push_back({"g" + std::to_string(i), fmrs[i], fnmrs[i]});
    return t;
}

std::vector<double> range(double from, double step, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(from + step * i);
    return out;
}

ScoreDataset eer_tenths(int k) {
    std::vector<double> gen = range(0.1, 0.01, 10 - k), imp;
    for (int i = 0; i < k; ++i) {
        gen.push_back(0.8);
        imp.push_back(0.05 + 0.001 * i);
    }
    for (int i = 0; i < 10 - k; ++i) imp.push_back(0.9 + 0.01 * i);
    return ScoreDataset::from_distances(gen, imp, "A");
}

// Criterion 2.
Verdict metric_examples() {
    Verdict v;
    MetricConfig half;
    half.alpha = 0.5;
    auto near = [&](const char* what, double got, double want) {
        if (!(std::fabs(got - want) <= 1e-12)) v.fail(std::string(what) + " = " + num(got, "%.17g"));
    };
    near("IR", inequity_rate(table({0.01, 0.02, 0.01, 0.01}, {0.1, 0.1, 0.1, 0.1}), half).value, std::sqrt(2.0));
    near("FDR", fdr(table({0.01, 0.03}, {0.05, 0.09}), half), 0.97);
    near("gini", gini(std::vector<double>{0.1, 0.3}), 0.5);
    near("gini", gini(std::vector<double>{0.0, 1.0}), 1.0);
    near("GARBE", garbe(table({0.1, 0.3}, {0.1, 0.3}), half), 0.5);
    near("std EER", std_eer_g({{"A", eer_tenths(1)}, {"B", eer_tenths(2)}}), 0.05);

    std::vector<double> gen = range(0.1, 0.01, 19), imp{0.001, 0.002, 0.003};
    gen.push_back(0.9);
    for (int i = 0; i < 97; ++i) imp.push_back(0.95 + 0.0001 * i);
    std::vector<double> ggen = range(0.1, 0.01, 9), gimp{0.001, 0.002};
    ggen.push_back(0.9);
    for (int i = 0; i < 98; ++i) gimp.push_back(0.95 + 0.0001 * i);
    auto s = sed_g(ScoreDataset::from_distances(ggen, gimp, "A"),
                   {{"A", ScoreDataset::from_distances(gen, imp, "A")}}, MetricConfig{});
    near("SED", s.entries.at(0).sed, 1.0);
    if (v.pass) v.detail << "IR, FDR, gini x2, GARBE, std EER, SED within 1e-12";
    return v;
}

bool exactly_unbiased(const ReportRow& r) {
    return r.ir == 1.0 && r.garbe == 0.0 && r.fdr == 1.0 && r.std_eer_g == 0.0 && r.sed_std == 0.0;
}

std::string describe(const ReportRow& r) {
    return r.ratio_label + " ir=" + num(r.ir, "%.17g") + " garbe=" + num(r.garbe, "%.17g") + " fdr=" +
           num(r.fdr, "%.17g") + " std_eer=" + num(r.std_eer_g, "%.17g") + " sed_std=" + num(r.sed_std, "%.17g") +
           " sed_mean=" + num(r.sed_mean, "%.17g");
}

// Criterion 3.
Verdict unbiased_fixture(const std::map<std::uint64_t, SuiteResult>& t4) {
    Verdict v;
    std::ostringstream vals;
    for (const auto& [seed, r] : t4) {
        const auto& x = row(r, "1:1:1:1");
        if (!exactly_unbiased(x)) v.fail("seed " + std::to_string(seed) + ": " + describe(x));
        if (!(x.sed_mean > 0.0 && x.sed_mean < 2.0))
            v.fail("seed " + std::to_string(seed) + ": sed_mean " + num(x.sed_mean));
        vals << (vals.tellp() ? ", " : "") << "seed " << seed << " " << num(x.sed_mean, "%.3f");
    }
    if (v.pass) v.detail << "IR=1 GARBE=0 FDR=1 stds=0 exactly; sed_mean " << vals.str();
    return v;
}

// Criterion 4.
Verdict convergence() {
    Verdict v;
    const std::vector<int> xs{1, 2, 3, 5, 10, 20, 50};
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    struct Job {
        SynthTarget t;
        double err_tol, tmr_tol;
        std::string name;
    };
    std::vector<Job> jobs;
    for (int x : xs)
        for (auto s : seeds) {
            auto spec = default_spec({x}, ErrorMode::FmrBiased, s);
            auto t = group_target(spec, x, 0);
            t.max_iters = 1000;
            jobs.push_back({t, 1.0 / 3000, 1.0 / 3000, "x=" + std::to_string(x) + " seed " + std::to_string(s)});
        }
    for (auto s : seeds) {
        auto t = global_target_for(default_spec({1}, ErrorMode::FmrBiased, s));
        t.max_iters = 1000;
        jobs.push_back({t, 5.0 / 600000, 1.0 / 3000, "global seed " + std::to_string(s)});
    }
    std::vector<std::string> failures(jobs.size());
    std::vector<double> secs(jobs.size());
    parallel_for(jobs.size(), workers(), [&](std::size_t i) {
        const auto& j = jobs[i];
        auto t0 = Clock::now();
        auto res = hill_climb(j.t);
        secs[i] = seconds_since(t0);
        const auto& a = res.report.achieved;
        double de = std::fabs(a.achieved_rate - j.t.target_error);
        double dc = std::fabs(a.constraint_rate - j.t.target_constraint);
        std::ostringstream f;
        if (de > j.err_tol + 1e-15) f << " FMR miss " << num(de);
        if (dc > j.tmr_tol + 1e-15) f << " TMR miss " << num(dc);
        if (res.report.iterations > 1000) f << " iterations " << res.report.iterations;
        if (secs[i] >= 30.0) f << " runtime " << num(secs[i]) << " s";
        if (f.tellp()) failures[i] = j.name + ":" + f.str();
    });
    std::size_t ok = 0;
    for (const auto& f : failures) {
        if (f.empty()) ++ok;
        else v.fail(f);
    }
    double slowest = *std::max_element(secs.begin(), secs.end());
    if (v.pass)
        v.detail << ok << "/" << jobs.size() << " climbs (7 x values and global, 5 seeds each) within tolerance; "
                 << "slowest " << num(slowest, "%.2f") << " s";
    else
        v.detail << " (" << ok << "/" << jobs.size() << " ok)";
    return v;
}

// Criterion 5.
Verdict monotone(const std::map<std::uint64_t, SuiteResult>& t4, const std::map<std::uint64_t, SuiteResult>& t8) {
    Verdict v;
    for (const auto* set : {&t4, &t8})
        for (const auto& [seed, r] : *set) require_outcome(v, r, "single_disadvantaged_monotone");
    if (v.pass) v.detail << "table4 and table8 monotone for seeds 1, 2, 3";
    return v;
}

// Criterion 6.
Verdict blindness(const std::map<std::uint64_t, SuiteResult>& t5) {
    Verdict v;
    std::ostringstream vals;
    for (const auto& [seed, r] : t5) {
        for (const char* p : {"max_disparity_blindness_3", "max_disparity_blindness_5", "intermediate_sed_mean_3",
                              "intermediate_sed_mean_5"})
            require_outcome(v, r, p);
        vals << " seed " << seed << ":";
        for (const char* l : {"1:1:2:3", "1:1:3:3", "1:1:2:5", "1:1:3:5", "1:1:5:5"})
            vals << " " << num(row(r, l).sed_mean, "%.2f");
    }
    if (v.pass) v.detail << "IR/FDR bitwise equal, sed_mean separates;";
    else v.detail << " |";
    v.detail << " sed_mean over 1:1:2:3 1:1:3:3 1:1:2:5 1:1:3:5 1:1:5:5" << vals.str();
    return v;
}

// Criterion 7.
Verdict global_reference(const std::map<std::uint64_t, SuiteResult>& t7) {
    Verdict v;
    std::ostringstream vals;
    for (const auto& [seed, r] : t7) {
        require_outcome(v, r, "uniform_rows_exact");
        require_outcome(v, r, "global_reference_sensitivity");
        vals << " seed " << seed << ":";
        for (const char* l : {"2:2:2:2", "3:3:3:3", "5:5:5:5"}) vals << " " << num(row(r, l).sed_mean, "%.2f");
    }
    if (v.pass) v.detail << "uniform rows exact, sed_mean strictly increasing;";
    else v.detail << " |";
    v.detail << " sed_mean over 2:2:2:2 3:3:3:3 5:5:5:5" << vals.str();
    return v;
}

// Criterion 8.
Verdict std_confusion(const std::map<std::uint64_t, SuiteResult>& t5) {
    Verdict v;
    std::ostringstream vals;
    for (const auto& [seed, r] : t5) {
        require_outcome(v, r, "std_metric_confusion");
        const auto &a = row(r, "1:1:2:5"), &b = row(r, "1:1:3:5");
        vals << " seed " << seed << ": std_eer " << num(a.std_eer_g) << " vs " << num(b.std_eer_g) << ", sed_std "
             << num(a.sed_std, "%.3f") << " vs " << num(b.sed_std, "%.3f") << ";";
    }
    if (v.pass) v.detail << "1:1:3:5 below 1:1:2:5 on both stds;";
    else v.detail << " |";
    v.detail << " 1:1:2:5 vs 1:1:3:5" << vals.str();
    return v;
}

// Criterion 9.
Verdict determinism() {
    Verdict v;
    auto dir = fs::temp_directory_path() / ("fairbv_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::vector<std::pair<std::string, std::string>> runs{
        {"a.md", ""}, {"b.md", ""}, {"c.md", " --threads 8"}, {"d.json", " --format json"},
        {"e.json", " --format json --threads 8"}};
    for (const auto& [file, extra] : runs) {
        std::string cmd = std::string("\"") + FAIRBV_CLI + "\" scenario table4 --seed 7" + extra + " --out \"" +
                          (dir / file).string() + "\" 2>/dev/null";
        int rc = std::system(cmd.c_str());
        if (rc != 0) v.fail("command failed: " + cmd);
    }
    if (v.pass) {
        auto a = read_file(dir / "a.md");
        if (a.empty()) v.fail("empty report");
        if (read_file(dir / "b.md") != a) v.fail("repeat run differs");
        if (read_file(dir / "c.md") != a) v.fail("--threads 8 run differs");
        if (read_file(dir / "e.json") != read_file(dir / "d.json")) v.fail("json report differs across threads");
        if (v.pass) v.detail << "markdown identical over 2 runs and --threads 8 (" << a.size()
                             << " bytes); json identical across threads";
    }
    fs::remove_all(dir);
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    bool strict = argc > 1 && std::string(argv[1]) == "--strict";
    auto t0 = Clock::now();

    std::map<std::uint64_t, SuiteResult> t4, t5, t7, t8;
    for (auto s : kSeeds) {
        t4.emplace(s, suite("table4", s));
        t5.emplace(s, suite("table5", s));
        t7.emplace(s, suite("table7", s));
        t8.emplace(s, suite("table8", s));
    }

    std::vector<std::function<Verdict()>> criteria{
        rate_oracle,
        metric_examples,
        [&] { return unbiased_fixture(t4); },
        convergence,
        [&] { return monotone(t4, t8); },
        [&] { return blindness(t5); },
        [&] { return global_reference(t7); },
        [&] { return std_confusion(t5); },
        determinism,
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i]();
        } catch (const std::exception& e) {
            v.fail(std::string("error: ") + e.what());
        }
        failed += !v.pass;
        std::cout << "criterion " << i + 1 << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail.str()
                  << std::endl;
    }
    std::cout << "summary: " << criteria.size() - failed << "/" << criteria.size() << " passed in "
              << num(seconds_since(t0), "%.1f") << " s" << std::endl;
    return strict && failed ? 1 : 0;
}
