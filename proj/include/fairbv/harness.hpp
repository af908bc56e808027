#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fairbv/metrics.hpp"
#include "fairbv/synth.hpp"

namespace fairbv {

struct ReportRow {
    std::string ratio_label;
    double ir = 0.0;
    double garbe = 0.0;
    double fdr = 0.0;
    double std_eer_g = 0.0;
    double sed_std = 0.0;
    double sed_mean = 0.0;
    std::vector<std::string> flags;

    bool flagged() const { return !flags.empty(); }
};

// Column names in report order.
inline constexpr std::array<const char*, 6> kColumns = {"ir", "garbe", "fdr", "std_eer_g", "sed_std", "sed_mean"};
double column_value(const ReportRow& row, const std::string& column);
// FDR falls as bias grows; every other column rises.
bool column_rises_with_bias(const std::string& column);

enum class PropertyKind {
    // Listed rows in order: each column moves in its bias direction, strictly
    // for `strict` columns from row index `strict_from` on.
    Monotone,
    // IR and FDR bitwise equal on all listed rows.
    EqualIrFdr,
    // IR = 1, GARBE = 0, FDR = 1, both STDs = 0 exactly on every listed row.
    UniformExact,
    // sed_mean strictly increasing over the listed rows.
    SedMeanIncreasing,
    // rows[1] scores strictly below rows[0] on std_eer_g and sed_std.
    StdInversion,
};

std::string to_string(PropertyKind k);
PropertyKind property_kind_from(const std::string& s);

struct PropertySpec {
    std::string name;
    PropertyKind kind = PropertyKind::Monotone;
    std::vector<std::string> rows;
    std::vector<std::string> strict;
    std::size_t strict_from = 0;
};

struct PropertyOutcome {
    std::string name;
    bool passed = false;
    // Set when flagged rows left nothing to compare; never counts as a pass.
    bool skipped = false;
    std::string detail;
};

struct SuiteDefinition {
    std::string id;
    std::string title;
    ErrorMode mode = ErrorMode::FmrBiased;
    double policy_fmr = 1e-4;
    std::vector<std::string> scenarios;
    std::vector<PropertySpec> properties;
};

struct SuiteResult {
    std::string suite_id;
    std::uint64_t seed = 0;
    MetricConfig config;
    ScenarioSpec base;
    SuiteDefinition definition;
    double policy_threshold = 0.0;
    std::vector<ReportRow> rows;
    std::vector<PropertyOutcome> properties;
};

// Base scenario for a suite: default targets in the suite's error mode.
ScenarioSpec suite_base(const SuiteDefinition& def, std::uint64_t seed);

// Metrics for one scenario. `policy_t` is the shared threshold for IR, FDR
// and GARBE; per-group rates use the WDI subsets in `per_group`.
ReportRow evaluate_row(const std::string& label, const std::map<GroupId, ScoreDataset>& per_group,
                       const ScoreDataset& global, double policy_t, const MetricConfig& cfg);

SuiteResult run_suite(const SuiteDefinition& def, const ScenarioSpec& base, const MetricConfig& cfg,
                      unsigned threads = 1);

std::vector<PropertyOutcome> check_properties(const SuiteResult& result);

}  // namespace fairbv
