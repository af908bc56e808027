#pragma once

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace fairbv {

using GroupId = std::string;

struct PairRecord {
    double distance = 0.0;
    bool is_genuine = false;
    GroupId group_a;
    GroupId group_b;

    bool within_group() const { return group_a == group_b; }
    bool operator==(const PairRecord&) const = default;
};

// Immutable once built. Copies share storage, so passing by value across
// threads is cheap and needs no locking.
class ScoreDataset {
public:
    ScoreDataset();
    explicit ScoreDataset(std::vector<PairRecord> pairs);

    // Fast path for synthesized data: every pair gets the same group label.
    static ScoreDataset from_distances(std::span<const double> genuine,
                                       std::span<const double> impostor,
                                       const GroupId& group);

    const std::vector<PairRecord>& pairs() const { return data_->pairs; }
    std::size_t size() const { return data_->pairs.size(); }
    bool empty() const { return data_->pairs.empty(); }

    // Ascending distances per class, cached at construction.
    const std::vector<double>& genuine_sorted() const { return data_->genuine; }
    const std::vector<double>& impostor_sorted() const { return data_->impostor; }
    std::size_t n_genuine() const { return data_->genuine.size(); }
    std::size_t n_impostor() const { return data_->impostor.size(); }

    // Sorted distinct distances: the candidate threshold set.
    std::vector<double> candidates() const;

    bool same_storage(const ScoreDataset& other) const { return data_ == other.data_; }
    bool operator==(const ScoreDataset& other) const;

private:
    struct Data {
        std::vector<PairRecord> pairs;
        std::vector<double> genuine;
        std::vector<double> impostor;
    };
    std::shared_ptr<const Data> data_;
};

struct RatesAtThreshold {
    double fmr = 0.0;
    double fnmr = 0.0;
    double tmr = 0.0;
    double tnmr = 0.0;
    double threshold = 0.0;
};

enum class OperatingKind { FmrAtTmr, FnmrAtTnmr };

struct OperatingPoint {
    OperatingKind kind = OperatingKind::FmrAtTmr;
    double target_rate = 0.0;
    // FMR for FmrAtTmr, FNMR for FnmrAtTnmr.
    double achieved_rate = 0.0;
    // TMR or TNMR actually reached at the threshold.
    double constraint_rate = 0.0;
    double threshold = 0.0;
};

struct EerResult {
    double eer = 0.0;
    double threshold = 0.0;
    double fmr_at_t = 0.0;
    double fnmr_at_t = 0.0;
};

double euclidean_distance(std::span<const double> e1, std::span<const double> e2);

// Rates from integer counts. Every rate in the library goes through these so
// that independent code paths agree to the last bit.
double fmr_from_counts(std::size_t impostor_matched, std::size_t n_impostor);
double fnmr_from_counts(std::size_t genuine_matched, std::size_t n_genuine);
inline double complement(double rate) { return 1.0 - rate; }

RatesAtThreshold rates_at_threshold(const ScoreDataset& ds, double t);
OperatingPoint threshold_at_tmr(const ScoreDataset& ds, double target_tmr);
OperatingPoint fnmr_at_tnmr(const ScoreDataset& ds, double target_tnmr);
EerResult eer(const ScoreDataset& ds);

std::map<GroupId, ScoreDataset> partition_by_group(const ScoreDataset& ds,
                                                   const std::set<GroupId>& groups);

// Counts over a sorted vector; shared with the synthesizer.
std::size_t count_le(const std::vector<double>& sorted, double t);
std::size_t count_gt(const std::vector<double>& sorted, double t);

}  // namespace fairbv
