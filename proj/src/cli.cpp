#include "fairbv/cli.hpp"

#include <iostream>
#include <optional>
#include <set>

#include "CLI11.hpp"
#include "fairbv/errors.hpp"
#include "fairbv/io.hpp"

#ifndef FAIRBV_SUITE_DIR
#define FAIRBV_SUITE_DIR "data/suites"
#endif

namespace fairbv {

namespace {

struct GlobalOpts {
    std::uint64_t seed = 0;
    double alpha = 0.5;
    std::optional<double> policy_fmr;
    std::size_t iters = 1000;
    std::string out;
    std::string format = "json";
    unsigned threads = 1;
    std::optional<double> zero_guard;
    std::string suite_dir = FAIRBV_SUITE_DIR;
};

struct SynthOpts {
    std::optional<double> tmr, fmr, tnmr, fnmr;
    std::size_t genuine = 3000, impostor = 3000;
    std::string group = "g1";
    double step_scale = SynthTarget{}.step_scale;
    double error_step_scale = SynthTarget{}.error_step_scale;
    double anchor_offset = SynthTarget{}.anchor_offset;
};

struct EvalOpts {
    std::vector<std::string> files;
    std::string global;
    std::vector<std::string> groups;
};

struct ScenarioOpts {
    std::string suite;
    bool no_reuse = false;
    std::optional<double> step_scale, error_step_scale, anchor_offset;
};

MetricConfig metric_config(const GlobalOpts& g, double suite_policy) {
    MetricConfig c;
    c.alpha = g.alpha;
    c.policy_fmr = g.policy_fmr.value_or(suite_policy);
    if (g.zero_guard) {
        c.use_zero_guard = true;
        c.zero_guard = *g.zero_guard;
    }
    c.validate();
    return c;
}

void emit(const GlobalOpts& g, const std::string& content, std::ostream& out) {
    if (g.out.empty()) out << content;
    else write_file_atomic(g.out, content);
}

int run_synth(const GlobalOpts& g, const SynthOpts& o, std::ostream& out, std::ostream& err) {
    const bool fmr_kind = o.tmr || o.fmr;
    const bool fnmr_kind = o.tnmr || o.fnmr;
    if (fmr_kind == fnmr_kind)
        throw CLI::ValidationError("synth", "give --tmr/--fmr or --tnmr/--fnmr, not both");
    SynthTarget t;
    t.kind = fmr_kind ? OperatingKind::FmrAtTmr : OperatingKind::FnmrAtTnmr;
    t.target_constraint = fmr_kind ? o.tmr.value_or(0.95) : o.tnmr.value_or(0.95);
    t.target_error = fmr_kind ? o.fmr.value_or(0.001) : o.fnmr.value_or(0.001);
    t.n_genuine = o.genuine;
    t.n_impostor = o.impostor;
    t.seed = g.seed;
    t.max_iters = g.iters;
    t.step_scale = o.step_scale;
    t.error_step_scale = o.error_step_scale;
    t.anchor_offset = o.anchor_offset;
    auto r = hill_climb(t);
    auto ds = ScoreDataset::from_distances(r.candidate.genuine, r.candidate.impostor, o.group);
    emit(g, serialize_dataset(ds), out);
    const auto& rep = r.report;
    err << (fmr_kind ? "FMR " : "FNMR ") << rep.achieved.achieved_rate << " at " << (fmr_kind ? "TMR " : "TNMR ")
        << rep.achieved_constraint << ", threshold " << rep.achieved.threshold << ", " << rep.iterations
        << " iterations, fitness " << rep.fitness << "\n";
    if (!rep.converged) err << "warning: climb did not converge within tolerance\n";
    return kExitOk;
}

int run_eval(const GlobalOpts& g, const EvalOpts& o, std::ostream& out, std::ostream& err) {
    std::vector<PairRecord> pairs;
    for (const auto& f : o.files) {
        auto ds = load_dataset(f);
        pairs.insert(pairs.end(), ds.pairs().begin(), ds.pairs().end());
    }
    ScoreDataset all(std::move(pairs));
    ScoreDataset global = o.global.empty() ? all : load_dataset(o.global);
    std::set<GroupId> groups(o.groups.begin(), o.groups.end());
    if (groups.empty())
        for (const auto& p : all.pairs()) groups.insert({p.group_a, p.group_b});
    auto per_group = partition_by_group(all, groups);
    MetricConfig cfg = metric_config(g, MetricConfig{}.policy_fmr);
    double t = policy_threshold(global, cfg);
    std::string label;
    for (const auto& [name, ds] : per_group) label += (label.empty() ? "" : ":") + name;
    ReportRow row = evaluate_row(label, per_group, global, t, cfg);
    for (const auto& f : row.flags) err << "warning: " << f << "\n";

    // One-row report; the suite fields record what was evaluated.
    SuiteResult r;
    r.suite_id = "eval";
    r.seed = g.seed;
    r.config = cfg;
    r.definition.id = "eval";
    r.definition.title = "files:";
    for (const auto& f : o.files) r.definition.title += " " + f;
    if (!o.global.empty()) r.definition.title += " global: " + o.global;
    r.policy_threshold = t;
    r.rows.push_back(row);
    emit(g, render_report(r, report_format_from(g.format)), out);
    return kExitOk;
}

int run_scenario(const GlobalOpts& g, const ScenarioOpts& o, std::ostream& out, std::ostream& err) {
    auto def = resolve_suite(o.suite, g.suite_dir);
    auto base = suite_base(def, g.seed);
    base.max_iters = g.iters;
    base.reuse = !o.no_reuse;
    if (o.step_scale) base.step_scale = *o.step_scale;
    if (o.error_step_scale) base.error_step_scale = *o.error_step_scale;
    if (o.anchor_offset) base.anchor_offset = *o.anchor_offset;
    MetricConfig cfg = metric_config(g, def.policy_fmr);
    SuiteResult r = run_suite(def, base, cfg, g.threads);
    for (const auto& row : r.rows)
        for (const auto& f : row.flags) err << "warning: " << row.ratio_label << ": " << f << "\n";
    emit(g, render_report(r, report_format_from(g.format)), out);
    return kExitOk;
}

int run_check(const GlobalOpts& g, const std::string& path, std::ostream& out, std::ostream& err) {
    auto r = load_suite_result(path);
    r.properties = check_properties(r);
    bool failed = false;
    for (const auto& p : r.properties) {
        failed |= !p.passed && !p.skipped;
        if (p.skipped) err << "warning: " << p.name << " skipped: " << p.detail << "\n";
    }
    if (g.out.empty() && g.format == "json") {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& p : r.properties)
            j.push_back({{"name", p.name}, {"passed", p.passed}, {"skipped", p.skipped}, {"detail", p.detail}});
        out << j.dump(2) << "\n";
    } else {
        emit(g, render_report(r, report_format_from(g.format)), out);
    }
    return failed ? kExitPropertyFailure : kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fairness metrics and synthetic score data for biometric verification", "fairbv"};
    app.fallthrough();
    app.require_subcommand(1);
    GlobalOpts g;
    app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--alpha", g.alpha, "FMR weight in IR, FDR and GARBE")->check(CLI::Range(0.0, 1.0));
    app.add_option("--policy-fmr", g.policy_fmr, "Policy FMR for IR, FDR and GARBE");
    app.add_option("--iters", g.iters, "Hill-climb iteration budget");
    app.add_option("--out", g.out, "Output file (default stdout)");
    app.add_option("--format", g.format, "json, csv or markdown")->check(CLI::IsMember({"json", "csv", "markdown", "md"}));
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
    app.add_option("--zero-guard", g.zero_guard, "Substitute this for zero denominators (flagged)");
    app.add_option("--suite-dir", g.suite_dir, "Directory of suite definitions");

    SynthOpts so;
    auto* synth = app.add_subcommand("synth", "Hill-climb one dataset to an operating point");
    synth->add_option("--tmr", so.tmr, "Target TMR");
    synth->add_option("--fmr", so.fmr, "Target FMR at that TMR");
    synth->add_option("--tnmr", so.tnmr, "Target TNMR");
    synth->add_option("--fnmr", so.fnmr, "Target FNMR at that TNMR");
    synth->add_option("--genuine", so.genuine, "Genuine pair count");
    synth->add_option("--impostor", so.impostor, "Impostor pair count");
    synth->add_option("--group", so.group, "Group label for every pair");
    synth->add_option("--step-scale", so.step_scale);
    synth->add_option("--error-step-scale", so.error_step_scale);
    synth->add_option("--anchor-offset", so.anchor_offset);

    EvalOpts eo;
    auto* eval = app.add_subcommand("eval", "Metrics for one set of group-labeled dataset files");
    eval->add_option("files", eo.files, "Dataset files")->required();
    eval->add_option("--global", eo.global, "Global reference dataset (default: all input pairs)");
    eval->add_option("--groups", eo.groups, "Group ids (default: every label seen)")->delimiter(',');

    ScenarioOpts sc;
    auto* scenario = app.add_subcommand("scenario", "Run a suite of scenarios");
    scenario->add_option("suite", sc.suite, "Suite name or definition file")->required();
    scenario->add_flag("--no-reuse", sc.no_reuse, "Synthesize every group independently");
    scenario->add_option("--step-scale", sc.step_scale);
    scenario->add_option("--error-step-scale", sc.error_step_scale);
    scenario->add_option("--anchor-offset", sc.anchor_offset);

    std::string check_path;
    auto* check = app.add_subcommand("check", "Re-run property checks on a saved suite result");
    check->add_option("result", check_path, "Suite result JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "fairbv: usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*synth) return run_synth(g, so, out, err);
        if (*eval) return run_eval(g, eo, out, err);
        if (*scenario) return run_scenario(g, sc, out, err);
        if (*check) return run_check(g, check_path, out, err);
    } catch (const CLI::ValidationError& e) {
        err << "fairbv: usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "fairbv: error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitUsage;
}

int cli_main(int argc, const char* const* argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace fairbv
