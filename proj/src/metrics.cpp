#include "fairbv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fairbv/errors.hpp"

namespace fairbv {

namespace {

void require_groups(std::size_t n, std::size_t min, const char* what) {
    if (n < min)
        throw InvalidArgument(std::string(what) + " needs at least " + std::to_string(min) +
                              " groups, got " + std::to_string(n));
}

std::vector<double> column(const GroupRatesTable& tbl, bool fmr) {
    std::vector<double> out;
    out.reserve(tbl.entries.size());
    for (const auto& e : tbl.entries) out.push_back(fmr ? e.fmr : e.fnmr);
    return out;
}

double spread(const std::vector<double>& xs) {
    auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    return *hi - *lo;
}

Guarded max_min_ratio(const std::vector<double>& xs, const MetricConfig& cfg, const char* name) {
    auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    if (*lo == *hi) return {1.0, false};
    if (*lo > 0.0) return {*hi / *lo, false};
    if (!cfg.use_zero_guard)
        throw ZeroDenominatorError(std::string("minimum group ") + name + " is zero");
    return {*hi / cfg.zero_guard, true};
}

double relative_gap(double group, double global, const MetricConfig& cfg, bool& guarded,
                    const char* name) {
    if (global == 0.0) {
        if (!cfg.use_zero_guard)
            throw ZeroDenominatorError(std::string("global ") + name + " is zero at the mean EER threshold");
        guarded = true;
        global = cfg.zero_guard;
    }
    return std::fabs(1.0 - group / global);
}

}  // namespace

void MetricConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0,1]");
    if (!(policy_fmr > 0.0 && policy_fmr < 1.0)) throw InvalidArgument("policy FMR must lie in (0,1)");
    if (!(zero_guard > 0.0)) throw InvalidArgument("zero guard must be positive");
}

double mean_of(std::span<const double> xs) {
    if (xs.empty()) throw InvalidArgument("mean of an empty set");
    const double x0 = xs[0];
    double acc = 0.0;
    for (double x : xs) acc += x - x0;
    return x0 + acc / static_cast<double>(xs.size());
}

double population_std(std::span<const double> xs) {
    const double m = mean_of(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

double policy_threshold(const ScoreDataset& reference, const MetricConfig& cfg) {
    cfg.validate();
    if (reference.n_genuine() == 0 || reference.n_impostor() == 0)
        throw EmptyClassError("policy threshold needs both classes");
    const auto& imp = reference.impostor_sorted();
    const std::size_t n = imp.size();
    std::size_t lo = 0, hi = n;
    while (lo < hi) {
        std::size_t mid = lo + (hi - lo + 1) / 2;
        if (fmr_from_counts(mid, n) <= cfg.policy_fmr) lo = mid;
        else hi = mid - 1;
    }
    if (lo == n) return std::max(reference.genuine_sorted().back(), imp.back());
    const double v = imp[lo];
    double best = -std::numeric_limits<double>::infinity();
    for (const auto* side : {&reference.genuine_sorted(), &imp}) {
        auto it = std::lower_bound(side->begin(), side->end(), v);
        if (it != side->begin()) best = std::max(best, *(it - 1));
    }
    if (!std::isfinite(best))
        throw InfeasiblePolicyError("no threshold reaches FMR <= " + std::to_string(cfg.policy_fmr));
    return best;
}

GroupRatesTable group_rates(const std::map<GroupId, ScoreDataset>& per_group, double t) {
    GroupRatesTable tbl;
    tbl.threshold = t;
    for (const auto& [g, ds] : per_group) {
        auto r = rates_at_threshold(ds, t);
        tbl.entries.push_back({g, r.fmr, r.fnmr});
    }
    return tbl;
}

Guarded inequity_rate(const GroupRatesTable& tbl, const MetricConfig& cfg) {
    cfg.validate();
    require_groups(tbl.entries.size(), 2, "IR");
    Guarded a = max_min_ratio(column(tbl, true), cfg, "FMR");
    Guarded b = max_min_ratio(column(tbl, false), cfg, "FNMR");
    double v = std::pow(a.value, cfg.alpha) * std::pow(b.value, 1.0 - cfg.alpha);
    return {v, a.zero_guarded || b.zero_guarded};
}

double fdr(const GroupRatesTable& tbl, const MetricConfig& cfg) {
    cfg.validate();
    require_groups(tbl.entries.size(), 2, "FDR");
    return 1.0 - (cfg.alpha * spread(column(tbl, true)) +
                  (1.0 - cfg.alpha) * spread(column(tbl, false)));
}

double gini(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) throw InvalidArgument("gini needs at least 2 values");
    for (double v : values)
        if (!(v >= 0.0)) throw InvalidArgument("gini needs nonnegative values");
    const double m = mean_of(values);
    if (m == 0.0) return 0.0;
    double total = 0.0;
    for (double a : values)
        for (double b : values) total += std::fabs(a - b);
    const double nd = static_cast<double>(n);
    return (nd / (nd - 1.0)) * total / (2.0 * nd * nd * m);
}

double garbe(const GroupRatesTable& tbl, const MetricConfig& cfg) {
    cfg.validate();
    require_groups(tbl.entries.size(), 2, "GARBE");
    return cfg.alpha * gini(column(tbl, true)) + (1.0 - cfg.alpha) * gini(column(tbl, false));
}

double std_eer_g(const std::map<GroupId, ScoreDataset>& per_group) {
    require_groups(per_group.size(), 2, "STD of group EERs");
    std::vector<double> eers;
    for (const auto& [g, ds] : per_group) eers.push_back(eer(ds).eer);
    return population_std(eers);
}

double mean_eer_threshold(const std::map<GroupId, ScoreDataset>& per_group) {
    require_groups(per_group.size(), 1, "mean EER threshold");
    std::vector<double> ts;
    for (const auto& [g, ds] : per_group) ts.push_back(eer(ds).threshold);
    return mean_of(ts);
}

SedBreakdown sed_g(const ScoreDataset& global, const std::map<GroupId, ScoreDataset>& per_group,
                   const MetricConfig& cfg) {
    cfg.validate();
    SedBreakdown out;
    out.mean_eer_threshold = mean_eer_threshold(per_group);
    auto gr = rates_at_threshold(global, out.mean_eer_threshold);
    out.global_fmr = gr.fmr;
    out.global_fnmr = gr.fnmr;
    std::vector<double> seds;
    for (const auto& [g, ds] : per_group) {
        auto r = rates_at_threshold(ds, out.mean_eer_threshold);
        SedEntry e{g};
        e.delta_fmr = relative_gap(r.fmr, gr.fmr, cfg, out.zero_guarded, "FMR");
        e.delta_fnmr = relative_gap(r.fnmr, gr.fnmr, cfg, out.zero_guarded, "FNMR");
        e.sed = e.delta_fmr + e.delta_fnmr;
        seds.push_back(e.sed);
        out.entries.push_back(std::move(e));
    }
    out.sed_mean = mean_of(seds);
    out.sed_std = population_std(seds);
    return out;
}

}  // namespace fairbv
