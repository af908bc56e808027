#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "fairbv/verify.hpp"

namespace fairbv {

struct MetricConfig {
    double alpha = 0.5;
    double policy_fmr = 1e-4;
    // Substituted for a zero denominator when use_zero_guard is set.
    double zero_guard = 1e-6;
    bool use_zero_guard = false;

    void validate() const;
};

struct GroupRates {
    GroupId group;
    double fmr = 0.0;
    double fnmr = 0.0;
};

struct GroupRatesTable {
    double threshold = 0.0;
    std::vector<GroupRates> entries;
};

// A metric value that may have been computed with a guarded denominator.
struct Guarded {
    double value = 0.0;
    bool zero_guarded = false;
};

struct SedEntry {
    GroupId group;
    double delta_fmr = 0.0;
    double delta_fnmr = 0.0;
    double sed = 0.0;
};

struct SedBreakdown {
    double mean_eer_threshold = 0.0;
    double global_fmr = 0.0;
    double global_fnmr = 0.0;
    std::vector<SedEntry> entries;
    double sed_mean = 0.0;
    double sed_std = 0.0;
    bool zero_guarded = false;
};

// Mean computed as x0 + mean(x - x0), so a run of identical values gives
// that value back exactly.
double mean_of(std::span<const double> xs);
double population_std(std::span<const double> xs);

double policy_threshold(const ScoreDataset& reference, const MetricConfig& cfg);
GroupRatesTable group_rates(const std::map<GroupId, ScoreDataset>& per_group, double t);

Guarded inequity_rate(const GroupRatesTable& tbl, const MetricConfig& cfg);
double fdr(const GroupRatesTable& tbl, const MetricConfig& cfg);
double gini(std::span<const double> values);
double garbe(const GroupRatesTable& tbl, const MetricConfig& cfg);

double std_eer_g(const std::map<GroupId, ScoreDataset>& per_group);
double mean_eer_threshold(const std::map<GroupId, ScoreDataset>& per_group);
SedBreakdown sed_g(const ScoreDataset& global, const std::map<GroupId, ScoreDataset>& per_group,
                   const MetricConfig& cfg);

}  // namespace fairbv
