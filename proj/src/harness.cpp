#include "fairbv/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "fairbv/errors.hpp"
#include "fairbv/parallel.hpp"

namespace fairbv {

namespace {

constexpr double kMargin = 1e-12;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class E>
[[noreturn]] void rethrow_with(const std::string& prefix, const E& e) {
    throw E(prefix + e.what());
}

// Rows named by a property, minus flagged ones. Returns false with a detail
// when a name is missing from the suite.
struct Selected {
    std::vector<const ReportRow*> rows;
    std::vector<std::size_t> positions;
    std::vector<std::string> excluded;
};

bool select_rows(const SuiteResult& r, const PropertySpec& p, Selected& out, std::string& missing) {
    std::map<std::string, const ReportRow*> by_label;
    for (const auto& row : r.rows) by_label.emplace(row.ratio_label, &row);
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        auto it = by_label.find(p.rows[i]);
        if (it == by_label.end()) {
            missing = p.rows[i];
            return false;
        }
        if (it->second->flagged()) {
            out.excluded.push_back(p.rows[i]);
            continue;
        }
        out.rows.push_back(it->second);
        out.positions.push_back(i);
    }
    return true;
}

std::string excluded_note(const Selected& s) {
    if (s.excluded.empty()) return "";
    std::string n = " (excluded flagged:";
    for (const auto& e : s.excluded) n += " " + e;
    return n + ")";
}

PropertyOutcome check_one(const SuiteResult& r, const PropertySpec& p) {
    PropertyOutcome out;
    out.name = p.name;
    Selected s;
    std::string missing;
    if (!select_rows(r, p, s, missing)) {
        out.detail = "row " + missing + " is not part of the suite";
        return out;
    }
    const std::size_t need = p.kind == PropertyKind::UniformExact ? 1 : 2;
    if (p.rows.size() < need) {
        out.passed = true;
        out.detail = "vacuous: fewer than " + std::to_string(need) + " rows named";
        return out;
    }
    if (s.rows.size() < need) {
        out.skipped = true;
        out.detail = "not enough unflagged rows" + excluded_note(s);
        return out;
    }

    std::string detail;
    bool ok = true;
    auto fail = [&](const std::string& why) {
        ok = false;
        if (!detail.empty()) detail += "; ";
        detail += why;
    };

    switch (p.kind) {
        case PropertyKind::Monotone: {
            for (std::size_t i = 1; i < s.rows.size(); ++i) {
                const auto& a = *s.rows[i - 1];
                const auto& b = *s.rows[i];
                for (const char* col : kColumns) {
                    bool strict = s.positions[i - 1] >= p.strict_from &&
                                  std::find(p.strict.begin(), p.strict.end(), col) != p.strict.end();
                    double va = column_value(a, col), vb = column_value(b, col);
                    double step = column_rises_with_bias(col) ? vb - va : va - vb;
                    bool good = strict ? step > kMargin : step >= 0.0;
                    if (!good)
                        fail(std::string(col) + " " + a.ratio_label + "=" + num(va) + " -> " + b.ratio_label +
                             "=" + num(vb));
                }
            }
            if (ok) detail = "all columns move with the disadvantage factor";
            break;
        }
        case PropertyKind::EqualIrFdr: {
            const auto& a = *s.rows.front();
            for (std::size_t i = 1; i < s.rows.size(); ++i) {
                const auto& b = *s.rows[i];
                if (a.ir != b.ir) fail("ir " + a.ratio_label + "=" + num(a.ir) + " vs " + b.ratio_label + "=" + num(b.ir));
                if (a.fdr != b.fdr)
                    fail("fdr " + a.ratio_label + "=" + num(a.fdr) + " vs " + b.ratio_label + "=" + num(b.fdr));
            }
            if (ok) detail = "ir=" + num(a.ir) + " fdr=" + num(a.fdr) + " on all rows";
            break;
        }
        case PropertyKind::UniformExact: {
            for (const auto* row : s.rows) {
                if (row->ir != 1.0) fail(row->ratio_label + " ir=" + num(row->ir));
                if (row->garbe != 0.0) fail(row->ratio_label + " garbe=" + num(row->garbe));
                if (row->fdr != 1.0) fail(row->ratio_label + " fdr=" + num(row->fdr));
                if (row->std_eer_g != 0.0) fail(row->ratio_label + " std_eer_g=" + num(row->std_eer_g));
                if (row->sed_std != 0.0) fail(row->ratio_label + " sed_std=" + num(row->sed_std));
            }
            if (ok) {
                detail = "exact on all rows; sed_mean:";
                for (const auto* row : s.rows) detail += " " + row->ratio_label + "=" + num(row->sed_mean);
            }
            break;
        }
        case PropertyKind::SedMeanIncreasing: {
            for (std::size_t i = 1; i < s.rows.size(); ++i) {
                const auto& a = *s.rows[i - 1];
                const auto& b = *s.rows[i];
                if (!(b.sed_mean - a.sed_mean > kMargin))
                    fail(a.ratio_label + "=" + num(a.sed_mean) + " !< " + b.ratio_label + "=" + num(b.sed_mean));
            }
            if (ok) {
                detail = "sed_mean:";
                for (const auto* row : s.rows) detail += " " + row->ratio_label + "=" + num(row->sed_mean);
            }
            break;
        }
        case PropertyKind::StdInversion: {
            const auto& hi = *s.rows[0];
            const auto& lo = *s.rows[1];
            if (!(hi.std_eer_g - lo.std_eer_g > kMargin))
                fail("std_eer_g " + lo.ratio_label + "=" + num(lo.std_eer_g) + " not below " + hi.ratio_label + "=" +
                     num(hi.std_eer_g));
            if (!(hi.sed_std - lo.sed_std > kMargin))
                fail("sed_std " + lo.ratio_label + "=" + num(lo.sed_std) + " not below " + hi.ratio_label + "=" +
                     num(hi.sed_std));
            if (ok)
                detail = "std_eer_g " + num(lo.std_eer_g) + " < " + num(hi.std_eer_g) + ", sed_std " +
                         num(lo.sed_std) + " < " + num(hi.sed_std);
            break;
        }
    }
    out.passed = ok;
    out.detail = detail + excluded_note(s);
    return out;
}

}  // namespace

double column_value(const ReportRow& row, const std::string& c) {
    if (c == "ir") return row.ir;
    if (c == "garbe") return row.garbe;
    if (c == "fdr") return row.fdr;
    if (c == "std_eer_g") return row.std_eer_g;
    if (c == "sed_std") return row.sed_std;
    if (c == "sed_mean") return row.sed_mean;
    throw InvalidArgument("unknown column: " + c);
}

bool column_rises_with_bias(const std::string& c) { return c != "fdr"; }

std::string to_string(PropertyKind k) {
    switch (k) {
        case PropertyKind::Monotone: return "monotone";
        case PropertyKind::EqualIrFdr: return "equal_ir_fdr";
        case PropertyKind::UniformExact: return "uniform_exact";
        case PropertyKind::SedMeanIncreasing: return "sed_mean_increasing";
        case PropertyKind::StdInversion: return "std_inversion";
    }
    return "?";
}

PropertyKind property_kind_from(const std::string& s) {
    for (auto k : {PropertyKind::Monotone, PropertyKind::EqualIrFdr, PropertyKind::UniformExact,
                   PropertyKind::SedMeanIncreasing, PropertyKind::StdInversion})
        if (to_string(k) == s) return k;
    throw InvalidArgument("unknown property kind: " + s);
}

ScenarioSpec suite_base(const SuiteDefinition& def, std::uint64_t seed) {
    return default_spec({1}, def.mode, seed);
}

ReportRow evaluate_row(const std::string& label, const std::map<GroupId, ScoreDataset>& per_group,
                       const ScoreDataset& global, double policy_t, const MetricConfig& cfg) {
    const std::string prefix = "scenario " + label + ": ";
    try {
        ReportRow row;
        row.ratio_label = label;
        auto tbl = group_rates(per_group, policy_t);
        auto ir = inequity_rate(tbl, cfg);
        row.ir = ir.value;
        row.garbe = garbe(tbl, cfg);
        row.fdr = fdr(tbl, cfg);
        row.std_eer_g = std_eer_g(per_group);
        auto sed = sed_g(global, per_group, cfg);
        row.sed_std = sed.sed_std;
        row.sed_mean = sed.sed_mean;
        if (ir.zero_guarded) row.flags.push_back("zero_guarded:ir");
        if (sed.zero_guarded) row.flags.push_back("zero_guarded:sed");
        return row;
    } catch (const EmptyClassError& e) {
        rethrow_with(prefix, e);
    } catch (const ZeroDenominatorError& e) {
        rethrow_with(prefix, e);
    } catch (const InvalidArgument& e) {
        rethrow_with(prefix, e);
    }
}

SuiteResult run_suite(const SuiteDefinition& def, const ScenarioSpec& base, const MetricConfig& cfg,
                      unsigned threads) {
    cfg.validate();
    if (def.scenarios.empty()) throw InvalidArgument("suite " + def.id + " has no scenarios");
    std::vector<ScenarioSpec> specs;
    for (const auto& label : def.scenarios) {
        ScenarioSpec s = base;
        s.ratios = parse_ratios(label);
        s.mode = def.mode;
        specs.push_back(std::move(s));
    }
    auto bundles = compose_all(specs, threads);

    SuiteResult out;
    out.suite_id = def.id;
    out.seed = base.seed;
    out.config = cfg;
    out.base = base;
    out.base.mode = def.mode;
    out.base.ratios.clear();
    out.definition = def;
    try {
        out.policy_threshold = policy_threshold(bundles.front().global, cfg);
    } catch (const InfeasiblePolicyError& e) {
        rethrow_with("suite " + def.id + ": ", e);
    }

    out.rows.resize(bundles.size());
    parallel_for(bundles.size(), threads, [&](std::size_t i) {
        const auto& b = bundles[i];
        ReportRow row = evaluate_row(b.spec.label(), b.per_group, b.global, out.policy_threshold, cfg);
        std::vector<std::string> flags;
        for (const auto& [g, rep] : b.achieved)
            if (!rep.converged) flags.push_back("unconverged:" + g);
        if (!b.global_report.converged) flags.push_back("unconverged:global");
        flags.insert(flags.end(), row.flags.begin(), row.flags.end());
        row.flags = std::move(flags);
        out.rows[i] = std::move(row);
    });
    // Without reuse the relations are not exact, so they are not asserted.
    if (base.reuse) out.properties = check_properties(out);
    return out;
}

std::vector<PropertyOutcome> check_properties(const SuiteResult& result) {
    if (!result.base.reuse)
        throw PlanError("property checks need a suite built with dataset reuse");
    std::vector<PropertyOutcome> out;
    for (const auto& p : result.definition.properties) out.push_back(check_one(result, p));
    return out;
}

}  // namespace fairbv
