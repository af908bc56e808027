#include "fairbv/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fairbv/errors.hpp"

namespace fairbv {

namespace {

void validate(const PairRecord& p, std::size_t index) {
    if (!std::isfinite(p.distance) || p.distance < 0.0)
        throw ValidationError("pair " + std::to_string(index) + ": distance must be finite and >= 0");
    if (p.is_genuine && p.group_a != p.group_b)
        throw ValidationError("pair " + std::to_string(index) + ": genuine pair spans groups " +
                              p.group_a + " and " + p.group_b);
}

void require_both_classes(const ScoreDataset& ds) {
    if (ds.n_genuine() == 0) throw EmptyClassError("dataset has no genuine pairs");
    if (ds.n_impostor() == 0) throw EmptyClassError("dataset has no impostor pairs");
}

void require_rate(double r, const char* name) {
    if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument(std::string(name) + " must lie in [0,1]");
}

double smallest_distance(const ScoreDataset& ds) {
    return std::min(ds.genuine_sorted().front(), ds.impostor_sorted().front());
}

// Largest value in a sorted vector strictly below v, if any.
bool largest_below(const std::vector<double>& sorted, double v, double& out) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
    if (it == sorted.begin()) return false;
    out = *(it - 1);
    return true;
}

}  // namespace

ScoreDataset::ScoreDataset() : data_(std::make_shared<const Data>()) {}

ScoreDataset::ScoreDataset(std::vector<PairRecord> pairs) {
    auto d = std::make_shared<Data>();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        validate(pairs[i], i);
        (pairs[i].is_genuine ? d->genuine : d->impostor).push_back(pairs[i].distance);
    }
    std::sort(d->genuine.begin(), d->genuine.end());
    std::sort(d->impostor.begin(), d->impostor.end());
    d->pairs = std::move(pairs);
    data_ = std::move(d);
}

ScoreDataset ScoreDataset::from_distances(std::span<const double> genuine,
                                          std::span<const double> impostor,
                                          const GroupId& group) {
    std::vector<PairRecord> pairs;
    pairs.reserve(genuine.size() + impostor.size());
    for (double d : genuine) pairs.push_back({d, true, group, group});
    for (double d : impostor) pairs.push_back({d, false, group, group});
    return ScoreDataset(std::move(pairs));
}

std::vector<double> ScoreDataset::candidates() const {
    std::vector<double> out;
    out.reserve(data_->genuine.size() + data_->impostor.size());
    std::merge(data_->genuine.begin(), data_->genuine.end(), data_->impostor.begin(),
               data_->impostor.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool ScoreDataset::operator==(const ScoreDataset& other) const {
    return same_storage(other) || data_->pairs == other.data_->pairs;
}

double euclidean_distance(std::span<const double> e1, std::span<const double> e2) {
    if (e1.size() != e2.size())
        throw DimensionError("vector lengths differ: " + std::to_string(e1.size()) + " vs " +
                             std::to_string(e2.size()));
    if (e1.empty()) throw DimensionError("vectors must be non-empty");
    double acc = 0.0;
    for (std::size_t i = 0; i < e1.size(); ++i) {
        double d = e1[i] - e2[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double fmr_from_counts(std::size_t impostor_matched, std::size_t n_impostor) {
    return static_cast<double>(impostor_matched) / static_cast<double>(n_impostor);
}

double fnmr_from_counts(std::size_t genuine_matched, std::size_t n_genuine) {
    return static_cast<double>(n_genuine - genuine_matched) / static_cast<double>(n_genuine);
}

std::size_t count_le(const std::vector<double>& sorted, double t) {
    return static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
}

std::size_t count_gt(const std::vector<double>& sorted, double t) {
    return sorted.size() - count_le(sorted, t);
}

RatesAtThreshold rates_at_threshold(const ScoreDataset& ds, double t) {
    require_both_classes(ds);
    RatesAtThreshold r;
    r.threshold = t;
    r.fmr = fmr_from_counts(count_le(ds.impostor_sorted(), t), ds.n_impostor());
    r.fnmr = fnmr_from_counts(count_le(ds.genuine_sorted(), t), ds.n_genuine());
    r.tmr = complement(r.fnmr);
    r.tnmr = complement(r.fmr);
    return r;
}

OperatingPoint threshold_at_tmr(const ScoreDataset& ds, double target_tmr) {
    require_both_classes(ds);
    require_rate(target_tmr, "target TMR");
    const auto& gen = ds.genuine_sorted();
    const std::size_t n = gen.size();
    // TMR only moves at genuine distances, so the answer is the c-th smallest
    // genuine for the least count c that meets the target.
    std::size_t lo = 0, hi = n;
    while (lo < hi) {
        std::size_t mid = lo + (hi - lo) / 2;
        if (complement(fnmr_from_counts(mid, n)) >= target_tmr) hi = mid;
        else lo = mid + 1;
    }
    double t = lo == 0 ? smallest_distance(ds) : gen[lo - 1];
    auto r = rates_at_threshold(ds, t);
    return {OperatingKind::FmrAtTmr, target_tmr, r.fmr, r.tmr, t};
}

OperatingPoint fnmr_at_tnmr(const ScoreDataset& ds, double target_tnmr) {
    require_both_classes(ds);
    require_rate(target_tnmr, "target TNMR");
    const auto& imp = ds.impostor_sorted();
    const std::size_t n = imp.size();
    // Largest impostor count k still meeting the target.
    std::size_t lo = 0, hi = n;
    while (lo < hi) {
        std::size_t mid = lo + (hi - lo + 1) / 2;
        if (complement(fmr_from_counts(mid, n)) >= target_tnmr) lo = mid;
        else hi = mid - 1;
    }
    double t;
    if (lo == n) {
        t = std::max(ds.genuine_sorted().back(), imp.back());
    } else {
        // The impostor at which FMR reaches its allowance; step back over
        // ties that would push the count past it.
        std::size_t k = lo;
        while (k > 0 && imp[k - 1] == imp[k]) --k;
        if (k > 0) {
            t = imp[k - 1];
        } else {
            double g = 0.0;
            if (largest_below(ds.genuine_sorted(), imp[0], g)) t = g;
            else t = std::nextafter(imp[0], -std::numeric_limits<double>::infinity());
        }
    }
    auto r = rates_at_threshold(ds, t);
    return {OperatingKind::FnmrAtTnmr, target_tnmr, r.fnmr, r.tnmr, t};
}

EerResult eer(const ScoreDataset& ds) {
    require_both_classes(ds);
    const auto& gen = ds.genuine_sorted();
    const auto& imp = ds.impostor_sorted();
    const std::size_t ng = gen.size(), ni = imp.size();
    std::size_t gi = 0, ii = 0;
    EerResult best;
    double best_gap = std::numeric_limits<double>::infinity();
    while (gi < ng || ii < ni) {
        double c;
        if (ii == ni || (gi < ng && gen[gi] <= imp[ii])) c = gen[gi];
        else c = imp[ii];
        while (gi < ng && gen[gi] <= c) ++gi;
        while (ii < ni && imp[ii] <= c) ++ii;
        double fmr = fmr_from_counts(ii, ni);
        double fnmr = fnmr_from_counts(gi, ng);
        double gap = std::fabs(fmr - fnmr);
        if (gap < best_gap) {
            best_gap = gap;
            best = {(fmr + fnmr) / 2.0, c, fmr, fnmr};
        }
    }
    return best;
}

std::map<GroupId, ScoreDataset> partition_by_group(const ScoreDataset& ds,
                                                   const std::set<GroupId>& groups) {
    std::map<GroupId, std::vector<PairRecord>> buckets;
    for (const auto& g : groups) buckets[g];
    for (const auto& p : ds.pairs()) {
        if (!groups.contains(p.group_a)) throw LabelError("unknown group label: " + p.group_a);
        if (!groups.contains(p.group_b)) throw LabelError("unknown group label: " + p.group_b);
        if (p.within_group()) buckets[p.group_a].push_back(p);
    }
    std::map<GroupId, ScoreDataset> out;
    for (auto& [g, pairs] : buckets) out.emplace(g, ScoreDataset(std::move(pairs)));
    return out;
}

}  // namespace fairbv
