#include "fairbv/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fairbv/errors.hpp"
#include "fairbv/parallel.hpp"
#include "fairbv/rng.hpp"

namespace fairbv {

namespace {

constexpr std::uint64_t kGenuineStream = 0;
constexpr std::uint64_t kImpostorStream = 1;

bool is_fmr(const SynthTarget& t) { return t.kind == OperatingKind::FmrAtTmr; }

// Indices whose value lies in [lo, hi]; kept in sync as values move.
class Band {
public:
    Band(const std::vector<double>& values, double centre, double half)
        : lo_(centre - half), hi_(centre + half), pos_(values.size(), kNone) {
        for (std::size_t j = 0; j < values.size(); ++j)
            if (inside(values[j])) add(j);
    }

    bool inside(double v) const { return v >= lo_ && v <= hi_; }
    std::size_t size() const { return members_.size(); }

    // Moves k uniformly chosen distinct members to the front and returns them.
    std::vector<std::size_t> sample(std::size_t k, Rng& rng) {
        for (std::size_t r = 0; r < k; ++r) {
            std::size_t j = r + rng.below(members_.size() - r);
            swap_slots(r, j);
        }
        return {members_.begin(), members_.begin() + static_cast<std::ptrdiff_t>(k)};
    }

    void moved(std::size_t j, double new_value) {
        bool now = inside(new_value);
        if (now && pos_[j] == kNone) add(j);
        else if (!now && pos_[j] != kNone) remove(j);
    }

private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    void add(std::size_t j) {
        pos_[j] = members_.size();
        members_.push_back(j);
    }
    void remove(std::size_t j) {
        std::size_t p = pos_[j];
        swap_slots(p, members_.size() - 1);
        members_.pop_back();
        pos_[j] = kNone;
    }
    void swap_slots(std::size_t a, std::size_t b) {
        std::swap(members_[a], members_[b]);
        pos_[members_[a]] = a;
        pos_[members_[b]] = b;
    }

    double lo_, hi_;
    std::vector<std::size_t> members_;
    std::vector<std::size_t> pos_;
};

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// Count in [0, n] whose rate is closest to the target.
double best_gap(double target, std::size_t n, double (*rate)(std::size_t, std::size_t)) {
    double best = std::fabs(rate(0, n) - target);
    double guess = std::floor(target * static_cast<double>(n));
    for (double c = guess - 1; c <= guess + 2; ++c)
        if (c >= 0 && c <= static_cast<double>(n))
            best = std::min(best, std::fabs(rate(static_cast<std::size_t>(c), n) - target));
    return best;
}

double tmr_of(std::size_t matched, std::size_t n) { return complement(fnmr_from_counts(matched, n)); }
double tnmr_of(std::size_t matched, std::size_t n) { return complement(fmr_from_counts(matched, n)); }
double fmr_of(std::size_t matched, std::size_t n) { return fmr_from_counts(matched, n); }
double fnmr_of_rejected(std::size_t rejected, std::size_t n) { return fnmr_from_counts(n - rejected, n); }

// The climb state. The anchor class carries the constraint (genuine for the
// FMR kind, impostor for the FNMR kind), the other class carries the error.
class Climber {
public:
    Climber(const SynthTarget& t, Candidate& c, Rng& rg, Rng& ri)
        : t_(t),
          fmr_(is_fmr(t)),
          anchor_(fmr_ ? c.genuine : c.impostor),
          other_(fmr_ ? c.impostor : c.genuine),
          ra_(fmr_ ? rg : ri),
          ro_(fmr_ ? ri : rg),
          tau_(t.anchor()) {
        for (double d : anchor_) anchor_count_ += d <= tau_;
        const std::size_t n = anchor_.size();
        // Order statistic of the anchor class that fixes the operating threshold.
        if (fmr_) {
            std::size_t lo = 1, hi = n;
            while (lo < hi) {
                std::size_t mid = lo + (hi - lo) / 2;
                if (tmr_of(mid, n) >= t.target_constraint) hi = mid;
                else lo = mid + 1;
            }
            rank_ = lo - 1;
        } else {
            std::size_t lo = 0, hi = n - 1;
            while (lo < hi) {
                std::size_t mid = lo + (hi - lo + 1) / 2;
                if (tnmr_of(mid, n) >= t.target_constraint) lo = mid;
                else hi = mid - 1;
            }
            // Error side is genuines above the k-th impostor, or at or above
            // the first one when no impostor may match.
            rank_ = lo > 0 ? lo - 1 : 0;
            strict_ = lo > 0;
        }
        min_anchor_gap_ = best_gap(t.target_constraint, n, fmr_ ? tmr_of : tnmr_of);
        min_error_gap_ = best_gap(t.target_error, other_.size(), fmr_ ? fmr_of : fnmr_of_rejected);
        other_sorted_ = other_;
        std::sort(other_sorted_.begin(), other_sorted_.end());
        refresh_reference();
        error_count_ = count_error_side_sorted();
    }

    ConvergenceReport run() {
        ConvergenceReport rep;
        double j = objective(anchor_count_, error_count_);
        std::size_t it = 0;
        std::unique_ptr<Band> band_a, band_o;
        double k = 1.0;
        while (it < t_.max_iters) {
            if (anchor_gap(anchor_count_) > min_anchor_gap_) {
                if (!band_a) band_a = std::make_unique<Band>(anchor_, tau_, t_.step_scale);
                if (band_a->size() == 0) break;
                ++it;
                std::size_t kk = std::min(band_a->size(), std::max<std::size_t>(1, static_cast<std::size_t>(k)));
                auto picks = band_a->sample(kk, ra_);
                std::vector<double> old(kk);
                std::size_t cnt = anchor_count_;
                for (std::size_t p = 0; p < kk; ++p) {
                    std::size_t idx = picks[p];
                    old[p] = anchor_[idx];
                    double nv = clamp01(old[p] + ra_.uniform(-t_.step_scale, t_.step_scale));
                    cnt = cnt - (old[p] <= tau_) + (nv <= tau_);
                    anchor_[idx] = nv;
                }
                double saved_ref = reference_;
                refresh_reference();
                std::size_t ecnt = count_error_side_sorted();
                double nj = objective(cnt, ecnt);
                if (nj < j) {
                    j = nj;
                    anchor_count_ = cnt;
                    error_count_ = ecnt;
                    for (std::size_t p = 0; p < kk; ++p) band_a->moved(picks[p], anchor_[picks[p]]);
                    k = std::min(static_cast<double>(band_a->size()), k * 1.5);
                    ++rep.accepted;
                } else {
                    for (std::size_t p = 0; p < kk; ++p) anchor_[picks[p]] = old[p];
                    reference_ = saved_ref;
                    k = std::max(1.0, k * std::pow(1.5, -0.25));
                }
            } else if (error_gap(error_count_) > min_error_gap_) {
                // The anchor class is frozen from here on, so the operating
                // threshold is too and the error count updates in O(1).
                if (!band_o) band_o = std::make_unique<Band>(other_, reference_, t_.error_step_scale);
                if (band_o->size() == 0) break;
                ++it;
                std::size_t idx = band_o->sample(1, ro_)[0];
                double ov = other_[idx];
                double nv = clamp01(ov + ro_.uniform(-t_.error_step_scale, t_.error_step_scale));
                std::size_t ecnt = error_count_ - on_error_side(ov) + on_error_side(nv);
                double nj = objective(anchor_count_, ecnt);
                if (nj < j) {
                    j = nj;
                    other_[idx] = nv;
                    error_count_ = ecnt;
                    band_o->moved(idx, nv);
                    ++rep.accepted;
                }
            } else {
                break;
            }
            rep.trace.push_back(j);
        }
        rep.iterations = it;
        return rep;
    }

private:
    double anchor_rate(std::size_t cnt) const {
        return fmr_ ? tmr_of(cnt, anchor_.size()) : tnmr_of(cnt, anchor_.size());
    }
    double error_rate(std::size_t cnt) const {
        return fmr_ ? fmr_of(cnt, other_.size()) : fnmr_of_rejected(cnt, other_.size());
    }
    double anchor_gap(std::size_t cnt) const { return std::fabs(anchor_rate(cnt) - t_.target_constraint); }
    double error_gap(std::size_t cnt) const { return std::fabs(error_rate(cnt) - t_.target_error); }
    double objective(std::size_t a, std::size_t e) const { return anchor_gap(a) + error_gap(e); }

    // FMR kind: impostors at or below the operating threshold.
    // FNMR kind: genuines above it.
    bool on_error_side(double d) const {
        if (fmr_) return d <= reference_;
        return strict_ ? d > reference_ : d >= reference_;
    }

    void refresh_reference() {
        scratch_ = anchor_;
        std::nth_element(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(rank_), scratch_.end());
        reference_ = scratch_[rank_];
    }

    std::size_t count_error_side_sorted() const {
        if (fmr_) return count_le(other_sorted_, reference_);
        auto it = strict_ ? std::upper_bound(other_sorted_.begin(), other_sorted_.end(), reference_)
                          : std::lower_bound(other_sorted_.begin(), other_sorted_.end(), reference_);
        return static_cast<std::size_t>(other_sorted_.end() - it);
    }

    const SynthTarget& t_;
    bool fmr_;
    std::vector<double>& anchor_;
    std::vector<double>& other_;
    Rng& ra_;
    Rng& ro_;
    double tau_;
    std::size_t anchor_count_ = 0;
    std::size_t error_count_ = 0;
    std::size_t rank_ = 0;
    bool strict_ = false;
    double reference_ = 0.0;
    double min_anchor_gap_ = 0.0;
    double min_error_gap_ = 0.0;
    std::vector<double> other_sorted_;
    std::vector<double> scratch_;
};

Candidate draw(const SynthTarget& t, Rng& rg, Rng& ri) {
    Candidate c;
    c.genuine.resize(t.n_genuine);
    c.impostor.resize(t.n_impostor);
    for (auto& d : c.genuine) d = 0.5 * rg.uniform01();
    for (auto& d : c.impostor) d = 0.5 + 0.5 * ri.uniform01();
    return c;
}

// Streams depend on the class and its size but not on the target error, so
// climbs that differ only in x start from the same candidate and see the
// same proposals.
Rng genuine_stream(const SynthTarget& t) { return Rng{t.seed, kGenuineStream, t.n_genuine, t.replicate}; }
Rng impostor_stream(const SynthTarget& t) { return Rng{t.seed, kImpostorStream, t.n_impostor, t.replicate}; }

struct Achieved {
    OperatingPoint op;
    double constraint = 0.0;
};

Achieved evaluate(const Candidate& c, const SynthTarget& t) {
    auto ds = ScoreDataset::from_distances(c.genuine, c.impostor, "g");
    auto op = is_fmr(t) ? threshold_at_tmr(ds, t.target_constraint) : fnmr_at_tnmr(ds, t.target_constraint);
    return {op, op.constraint_rate};
}

bool within(double achieved, double target, std::size_t n, double tol_counts) {
    return std::fabs(achieved - target) * static_cast<double>(n) <= tol_counts + 1e-9;
}

}  // namespace

void SynthTarget::validate() const {
    if (!(target_constraint > 0.0 && target_constraint < 1.0))
        throw InvalidArgument("target constraint rate must lie in (0,1)");
    if (!(target_error > 0.0 && target_error < 1.0)) throw InvalidArgument("target error rate must lie in (0,1)");
    if (n_genuine == 0 || n_impostor == 0) throw InvalidArgument("pair counts must be positive");
    if (!(step_scale > 0.0) || !(error_step_scale > 0.0)) throw InvalidArgument("step scales must be positive");
    if (!(anchor_offset >= 0.0 && anchor_offset < 0.5)) throw InvalidArgument("anchor offset must lie in [0,0.5)");
}

double SynthTarget::anchor() const { return is_fmr(*this) ? 0.5 - anchor_offset : 0.5 + anchor_offset; }

Candidate init_candidate(const SynthTarget& t) {
    t.validate();
    Rng rg = genuine_stream(t);
    Rng ri = impostor_stream(t);
    return draw(t, rg, ri);
}

double fitness(const ScoreDataset& ds, const SynthTarget& t) {
    auto op = is_fmr(t) ? threshold_at_tmr(ds, t.target_constraint) : fnmr_at_tnmr(ds, t.target_constraint);
    return std::fabs(op.achieved_rate - t.target_error) + std::fabs(op.constraint_rate - t.target_constraint);
}

double fitness(const Candidate& c, const SynthTarget& t) {
    return fitness(ScoreDataset::from_distances(c.genuine, c.impostor, "g"), t);
}

SynthResult hill_climb(const SynthTarget& t) {
    t.validate();
    Rng rg = genuine_stream(t);
    Rng ri = impostor_stream(t);
    SynthResult out;
    out.candidate = draw(t, rg, ri);
    if (t.max_iters > 0) {
        Climber climber(t, out.candidate, rg, ri);
        out.report = climber.run();
    }
    auto a = evaluate(out.candidate, t);
    out.report.achieved = a.op;
    out.report.achieved_constraint = a.constraint;
    out.report.fitness = std::fabs(a.op.achieved_rate - t.target_error) + std::fabs(a.constraint - t.target_constraint);
    const std::size_t n_err = is_fmr(t) ? t.n_impostor : t.n_genuine;
    const std::size_t n_con = is_fmr(t) ? t.n_genuine : t.n_impostor;
    out.report.converged = within(a.op.achieved_rate, t.target_error, n_err, t.tolerance_counts) &&
                           within(a.constraint, t.target_constraint, n_con, 1.0);
    return out;
}

void ScenarioSpec::validate() const {
    if (ratios.empty()) throw InvalidArgument("scenario needs at least one group");
    for (int x : ratios)
        if (x < 1) throw InvalidArgument("ratios must be positive integers");
    if (!(base_error > 0.0)) throw InvalidArgument("base error must be positive");
    for (int x : ratios)
        if (!(base_error * x < 1.0)) throw InvalidArgument("x times the base error must stay below 1");
}

std::string ScenarioSpec::label() const { return ratio_label(ratios); }

ScenarioSpec default_spec(std::vector<int> ratios, ErrorMode mode, std::uint64_t seed) {
    ScenarioSpec s;
    s.ratios = std::move(ratios);
    s.mode = mode;
    s.seed = seed;
    SynthTarget& g = s.global_target;
    g.kind = mode == ErrorMode::FmrBiased ? OperatingKind::FmrAtTmr : OperatingKind::FnmrAtTnmr;
    g.target_constraint = 0.95;
    g.target_error = 1e-4;
    g.n_genuine = 12000;
    g.n_impostor = 600000;
    g.tolerance_counts = mode == ErrorMode::FmrBiased ? 5.0 : 1.0;
    g.seed = seed;
    g.max_iters = s.max_iters;
    g.step_scale = s.step_scale;
    g.error_step_scale = s.error_step_scale;
    g.anchor_offset = s.anchor_offset;
    return s;
}

SynthTarget group_target(const ScenarioSpec& spec, int x, std::uint64_t replicate) {
    SynthTarget t;
    t.kind = spec.mode == ErrorMode::FmrBiased ? OperatingKind::FmrAtTmr : OperatingKind::FnmrAtTnmr;
    t.target_constraint = spec.constraint;
    t.target_error = spec.base_error * x;
    t.n_genuine = spec.n_genuine;
    t.n_impostor = spec.n_impostor;
    t.seed = spec.seed;
    t.max_iters = spec.max_iters;
    t.step_scale = spec.step_scale;
    t.error_step_scale = spec.error_step_scale;
    t.anchor_offset = spec.anchor_offset;
    t.replicate = replicate;
    return t;
}

SynthTarget global_target_for(const ScenarioSpec& spec) {
    SynthTarget t = spec.global_target;
    t.kind = spec.mode == ErrorMode::FmrBiased ? OperatingKind::FmrAtTmr : OperatingKind::FnmrAtTnmr;
    t.seed = spec.seed;
    t.max_iters = spec.max_iters;
    t.step_scale = spec.step_scale;
    t.error_step_scale = spec.error_step_scale;
    t.anchor_offset = spec.anchor_offset;
    return t;
}

std::vector<int> parse_ratios(const std::string& label) {
    std::vector<int> out;
    std::stringstream ss(label);
    std::string part;
    while (std::getline(ss, part, ':')) {
        if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
            throw InvalidArgument("bad ratio label: " + label);
        out.push_back(std::stoi(part));
    }
    if (out.empty()) throw InvalidArgument("empty ratio label");
    for (int x : out)
        if (x < 1) throw InvalidArgument("ratios must be positive: " + label);
    return out;
}

std::string ratio_label(const std::vector<int>& ratios) {
    std::string s;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        if (i) s += ':';
        s += std::to_string(ratios[i]);
    }
    return s;
}

std::string group_name(std::size_t index) { return "g" + std::to_string(index + 1); }

ReusePlan reuse_plan(const std::vector<ScenarioSpec>& specs) {
    ReusePlan plan;
    if (specs.empty()) return plan;
    const ScenarioSpec& base = specs.front();
    auto same_base = [&](const ScenarioSpec& s) {
        const auto a = global_target_for(s), b = global_target_for(base);
        return s.base_error == base.base_error && s.constraint == base.constraint &&
               s.n_genuine == base.n_genuine && s.n_impostor == base.n_impostor && s.mode == base.mode &&
               s.seed == base.seed && s.max_iters == base.max_iters && s.step_scale == base.step_scale &&
               s.error_step_scale == base.error_step_scale && s.anchor_offset == base.anchor_offset &&
               s.reuse == base.reuse && a.target_error == b.target_error &&
               a.target_constraint == b.target_constraint && a.n_genuine == b.n_genuine &&
               a.n_impostor == b.n_impostor && a.tolerance_counts == b.tolerance_counts;
    };
    std::map<DatasetKey, std::size_t> index;
    for (std::size_t si = 0; si < specs.size(); ++si) {
        const auto& s = specs[si];
        s.validate();
        if (!same_base(s)) throw PlanError("scenario " + s.label() + " does not share the suite's base parameters");
        std::vector<std::size_t> row;
        for (std::size_t gi = 0; gi < s.ratios.size(); ++gi) {
            std::uint64_t rep = s.reuse ? 0 : 1 + si * s.ratios.size() + gi;
            DatasetKey key{s.ratios[gi], s.n_genuine, s.n_impostor, s.mode, rep};
            auto [it, fresh] = index.emplace(key, plan.keys.size());
            if (fresh) {
                plan.keys.push_back(key);
                plan.targets.push_back(group_target(s, key.x, rep));
            }
            row.push_back(it->second);
        }
        plan.slots.push_back(std::move(row));
    }
    plan.global = global_target_for(base);
    return plan;
}

ScoreDataset label_global(const Candidate& c, std::size_t n_groups) {
    if (n_groups == 0) throw InvalidArgument("global labeling needs at least one group");
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t a = 0; a < n_groups; ++a)
        for (std::size_t b = a + 1; b < n_groups; ++b) pairs.emplace_back(group_name(a), group_name(b));
    if (pairs.empty()) pairs.emplace_back(group_name(0), group_name(0));
    std::vector<PairRecord> out;
    out.reserve(c.genuine.size() + c.impostor.size());
    for (std::size_t j = 0; j < c.genuine.size(); ++j) {
        auto g = group_name(j % n_groups);
        out.push_back({c.genuine[j], true, g, g});
    }
    for (std::size_t j = 0; j < c.impostor.size(); ++j) {
        const auto& p = pairs[j % pairs.size()];
        out.push_back({c.impostor[j], false, p.first, p.second});
    }
    return ScoreDataset(std::move(out));
}

std::vector<ScenarioBundle> compose_all(const std::vector<ScenarioSpec>& specs, unsigned threads) {
    ReusePlan plan = reuse_plan(specs);
    if (specs.empty()) return {};

    // Slot 0..n-1 are the group climbs, slot n is the global climb.
    const std::size_t n_jobs = plan.targets.size() + 1;
    std::vector<SynthResult> results(n_jobs);
    parallel_for(n_jobs, threads, [&](std::size_t j) {
        results[j] = hill_climb(j < plan.targets.size() ? plan.targets[j] : plan.global);
    });

    const SynthResult& global = results.back();
    std::map<std::size_t, ScoreDataset> global_by_groups;
    std::map<std::pair<std::size_t, std::size_t>, ScoreDataset> labeled;
    std::vector<ScenarioBundle> out;
    for (std::size_t si = 0; si < specs.size(); ++si) {
        const auto& s = specs[si];
        ScenarioBundle b;
        b.spec = s;
        for (std::size_t gi = 0; gi < s.ratios.size(); ++gi) {
            std::size_t slot = plan.slots[si][gi];
            auto key = std::make_pair(slot, gi);
            auto it = labeled.find(key);
            if (it == labeled.end()) {
                const auto& c = results[slot].candidate;
                it = labeled.emplace(key, ScoreDataset::from_distances(c.genuine, c.impostor, group_name(gi))).first;
            }
            b.per_group.emplace(group_name(gi), it->second);
            b.achieved.emplace(group_name(gi), results[slot].report);
        }
        auto git = global_by_groups.find(s.ratios.size());
        if (git == global_by_groups.end())
            git = global_by_groups.emplace(s.ratios.size(), label_global(global.candidate, s.ratios.size())).first;
        b.global = git->second;
        b.global_report = global.report;
        out.push_back(std::move(b));
    }
    return out;
}

ScenarioBundle compose_scenario(const ScenarioSpec& spec) { return std::move(compose_all({spec}).front()); }

}  // namespace fairbv
