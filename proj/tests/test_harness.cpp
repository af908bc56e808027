#include <gtest/gtest.h>

#include "fairbv/errors.hpp"
#include "fairbv/harness.hpp"

using namespace fairbv;

namespace {

ReportRow row(const std::string& label, double ir, double garbe, double fdr, double se, double ss, double sm) {
    return {label, ir, garbe, fdr, se, ss, sm, {}};
}

SuiteResult result_with(std::vector<ReportRow> rows, std::vector<PropertySpec> props) {
    SuiteResult r;
    r.rows = std::move(rows);
    r.definition.properties = std::move(props);
    return r;
}

const PropertyOutcome& only(const std::vector<PropertyOutcome>& v) {
    EXPECT_EQ(v.size(), 1u);
    return v.front();
}

SuiteDefinition single_suite(ErrorMode mode, double policy) {
    SuiteDefinition d;
    d.id = "single";
    d.mode = mode;
    d.policy_fmr = policy;
    for (int x : {1, 2, 3, 5, 10, 20, 50}) d.scenarios.push_back("1:1:1:" + std::to_string(x));
    d.properties.push_back({"exact", PropertyKind::UniformExact, {"1:1:1:1"}, {}, 0});
    return d;
}

}  // namespace

TEST(Columns, OrderAndDirection) {
    ReportRow r = row("1", 1, 2, 3, 4, 5, 6);
    double want = 1;
    for (const char* c : kColumns) EXPECT_EQ(column_value(r, c), want++);
    EXPECT_FALSE(column_rises_with_bias("fdr"));
    EXPECT_TRUE(column_rises_with_bias("sed_mean"));
    EXPECT_THROW(column_value(r, "nope"), InvalidArgument);
    EXPECT_EQ(property_kind_from(to_string(PropertyKind::StdInversion)), PropertyKind::StdInversion);
}

TEST(Check, EqualIrFdr) {
    PropertySpec p{"eq", PropertyKind::EqualIrFdr, {"a", "b"}, {}, 0};
    EXPECT_TRUE(only(check_properties(result_with({row("a", 2, 0, .9, 0, 0, 1), row("b", 2, 1, .9, 1, 1, 2)}, {p}))).passed);
    EXPECT_FALSE(
        only(check_properties(result_with({row("a", 2, 0, .9, 0, 0, 1), row("b", 2.0000001, 1, .9, 1, 1, 2)}, {p})))
            .passed);
}

TEST(Check, UniformExactAndSedOrdering) {
    PropertySpec u{"u", PropertyKind::UniformExact, {"a", "b"}, {}, 0};
    PropertySpec s{"s", PropertyKind::SedMeanIncreasing, {"a", "b"}, {}, 0};
    auto good = result_with({row("a", 1, 0, 1, 0, 0, 0.4), row("b", 1, 0, 1, 0, 0, 0.9)}, {u, s});
    for (const auto& o : check_properties(good)) EXPECT_TRUE(o.passed) << o.name << " " << o.detail;
    auto bad = result_with({row("a", 1, 0, 1, 0, 1e-18, 0.4), row("b", 1, 0, 1, 0, 0, 0.4 + 1e-13)}, {u, s});
    for (const auto& o : check_properties(bad)) EXPECT_FALSE(o.passed) << o.name;
}

TEST(Check, StdInversion) {
    PropertySpec p{"inv", PropertyKind::StdInversion, {"hi", "lo"}, {}, 0};
    EXPECT_TRUE(only(check_properties(result_with({row("hi", 1, 0, 1, 2e-3, 0.8, 1), row("lo", 1, 0, 1, 1e-3, 0.7, 1)}, {p}))).passed);
    EXPECT_FALSE(only(check_properties(result_with({row("hi", 1, 0, 1, 2e-3, 0.8, 1), row("lo", 1, 0, 1, 1e-3, 0.9, 1)}, {p}))).passed);
}

TEST(Check, MonotoneStrictnessAndFdrDirection) {
    PropertySpec p{"m", PropertyKind::Monotone, {"1", "2", "3"}, {"ir", "sed_mean"}, 1};
    // 1 -> 2 may be flat, 2 -> 3 must rise strictly in ir and sed_mean; FDR falls.
    auto ok = result_with({row("1", 1, 0, 1, 0, 0, .5), row("2", 1, 0, 1, 0, 0, .5), row("3", 2, .1, .9, 1, 1, .6)}, {p});
    EXPECT_TRUE(only(check_properties(ok)).passed) << only(check_properties(ok)).detail;
    auto flat = result_with({row("1", 1, 0, 1, 0, 0, .5), row("2", 2, 0, 1, 0, 0, .5), row("3", 2, .1, .9, 1, 1, .6)}, {p});
    EXPECT_FALSE(only(check_properties(flat)).passed);
    auto fdr_up = result_with({row("1", 1, 0, .9, 0, 0, .5), row("2", 1, 0, 1, 0, 0, .5), row("3", 2, .1, .9, 1, 1, .6)}, {p});
    EXPECT_FALSE(only(check_properties(fdr_up)).passed);
}

TEST(Check, FlaggedRowsExcludedMissingRowsFail) {
    PropertySpec p{"eq", PropertyKind::EqualIrFdr, {"a", "b"}, {}, 0};
    auto a = row("a", 2, 0, .9, 0, 0, 1), b = row("b", 3, 0, .9, 0, 0, 1);
    b.flags.push_back("unconverged:g4");
    auto o = only(check_properties(result_with({a, b}, {p})));
    EXPECT_TRUE(o.skipped);
    EXPECT_FALSE(o.passed);
    PropertySpec q{"eq", PropertyKind::EqualIrFdr, {"a", "zzz"}, {}, 0};
    auto m = only(check_properties(result_with({a}, {q})));
    EXPECT_FALSE(m.passed);
    EXPECT_FALSE(m.skipped);
    PropertySpec v{"one", PropertyKind::EqualIrFdr, {"a"}, {}, 0};
    EXPECT_TRUE(only(check_properties(result_with({a}, {v}))).passed);
}

TEST(Check, RequiresReuse) {
    auto r = result_with({}, {});
    r.base.reuse = false;
    EXPECT_THROW(check_properties(r), PlanError);
}

TEST(RunSuite, SingleDisadvantagedRowsAndDeterminism) {
    auto def = single_suite(ErrorMode::FmrBiased, 1e-4);
    MetricConfig cfg;
    auto a = run_suite(def, suite_base(def, 3), cfg, 1);
    auto b = run_suite(def, suite_base(def, 3), cfg, 4);
    ASSERT_EQ(a.rows.size(), 7u);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].ratio_label, def.scenarios[i]);
        for (const char* c : kColumns) EXPECT_EQ(column_value(a.rows[i], c), column_value(b.rows[i], c));
        EXPECT_EQ(a.rows[i].flags, b.rows[i].flags);
    }
    EXPECT_TRUE(only(a.properties).passed) << only(a.properties).detail;
    EXPECT_EQ(a.policy_threshold, b.policy_threshold);
    // IR rises with the disadvantaged group's factor on every row.
    for (std::size_t i = 1; i < a.rows.size(); ++i) EXPECT_GT(a.rows[i].ir, a.rows[i - 1].ir);
}

TEST(RunSuite, UniformScenariosExactInFnmrMode) {
    SuiteDefinition d;
    d.id = "u";
    d.mode = ErrorMode::FnmrBiased;
    d.policy_fmr = 0.05;
    d.scenarios = {"2:2:2:2", "5:5:5:5"};
    d.properties.push_back({"exact", PropertyKind::UniformExact, {"2:2:2:2", "5:5:5:5"}, {}, 0});
    auto r = run_suite(d, suite_base(d, 1), MetricConfig{}, 2);
    EXPECT_TRUE(only(r.properties).passed) << only(r.properties).detail;
}

TEST(RunSuite, NoReuseSkipsChecksAndEmptySuiteRejected) {
    SuiteDefinition d = single_suite(ErrorMode::FmrBiased, 1e-4);
    d.scenarios = {"1:1"};
    auto base = suite_base(d, 1);
    base.reuse = false;
    auto r = run_suite(d, base, MetricConfig{}, 2);
    EXPECT_TRUE(r.properties.empty());
    d.scenarios.clear();
    EXPECT_THROW(run_suite(d, suite_base(d, 1), MetricConfig{}), InvalidArgument);
}

TEST(EvaluateRow, ErrorsCarryScenario) {
    auto ds = ScoreDataset::from_distances(std::vector<double>{0.1}, std::vector<double>{}, "A");
    auto ok = ScoreDataset::from_distances(std::vector<double>{0.1}, std::vector<double>{0.9}, "B");
    try {
        evaluate_row("1:2", {{"A", ds}, {"B", ok}}, ok, 0.5, MetricConfig{});
        FAIL();
    } catch (const EmptyClassError& e) {
        EXPECT_NE(std::string(e.what()).find("scenario 1:2"), std::string::npos);
    }
}
