#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fairbv/verify.hpp"

namespace fairbv {

enum class ErrorMode { FmrBiased, FnmrBiased };

struct SynthTarget {
    OperatingKind kind = OperatingKind::FmrAtTmr;
    double target_constraint = 0.95;
    double target_error = 0.001;
    std::size_t n_genuine = 3000;
    std::size_t n_impostor = 3000;
    std::uint64_t seed = 0;
    std::size_t max_iters = 1000;
    // Perturbation half-width for the class that carries the constraint.
    double step_scale = 0.1;
    // Perturbation half-width for the class that carries the error rate.
    double error_step_scale = 0.2;
    // The constraint is climbed at 0.5 - offset (FMR kind) or 0.5 + offset
    // (FNMR kind), inside the anchor class's initial range.
    double anchor_offset = 0.02;
    // Distinguishes independent replicates drawn under one seed.
    std::uint64_t replicate = 0;
    // Allowed miss, in counts of the relevant class, for the converged flag.
    double tolerance_counts = 1.0;

    void validate() const;
    double anchor() const;
};

struct Candidate {
    std::vector<double> genuine;
    std::vector<double> impostor;
};

struct ConvergenceReport {
    OperatingPoint achieved;
    double achieved_constraint = 0.0;
    double fitness = 0.0;
    std::size_t iterations = 0;
    std::size_t accepted = 0;
    bool converged = false;
    // Retained objective after each iteration.
    std::vector<double> trace;
};

struct SynthResult {
    Candidate candidate;
    ConvergenceReport report;
};

Candidate init_candidate(const SynthTarget& t);
double fitness(const Candidate& c, const SynthTarget& t);
double fitness(const ScoreDataset& ds, const SynthTarget& t);
SynthResult hill_climb(const SynthTarget& t);

struct ScenarioSpec {
    std::vector<int> ratios;
    double base_error = 0.001;
    double constraint = 0.95;
    std::size_t n_genuine = 3000;
    std::size_t n_impostor = 3000;
    SynthTarget global_target;
    ErrorMode mode = ErrorMode::FmrBiased;
    std::uint64_t seed = 0;
    std::size_t max_iters = 1000;
    double step_scale = 0.1;
    double error_step_scale = 0.2;
    double anchor_offset = 0.02;
    bool reuse = true;

    void validate() const;
    std::string label() const;
};

// Default group and global targets for one scenario.
ScenarioSpec default_spec(std::vector<int> ratios, ErrorMode mode, std::uint64_t seed);
SynthTarget group_target(const ScenarioSpec& spec, int x, std::uint64_t replicate);
SynthTarget global_target_for(const ScenarioSpec& spec);

std::vector<int> parse_ratios(const std::string& label);
std::string ratio_label(const std::vector<int>& ratios);
std::string group_name(std::size_t index);

struct SynthesizedGroup {
    ScoreDataset dataset;
    ConvergenceReport report;
};

struct ScenarioBundle {
    std::map<GroupId, ScoreDataset> per_group;
    ScoreDataset global;
    ScenarioSpec spec;
    std::map<GroupId, ConvergenceReport> achieved;
    ConvergenceReport global_report;
};

// Group datasets are keyed so that every request for the same (x, counts,
// mode) under one plan resolves to one slot.
struct DatasetKey {
    int x = 1;
    std::size_t n_genuine = 0;
    std::size_t n_impostor = 0;
    ErrorMode mode = ErrorMode::FmrBiased;
    std::uint64_t replicate = 0;
    auto operator<=>(const DatasetKey&) const = default;
};

struct ReusePlan {
    // Slot index per scenario and group position.
    std::vector<std::vector<std::size_t>> slots;
    std::vector<DatasetKey> keys;
    std::vector<SynthTarget> targets;
    SynthTarget global;
};

ReusePlan reuse_plan(const std::vector<ScenarioSpec>& specs);

// Labels the global set: genuine pairs spread over the groups, impostor
// pairs cycled over distinct group pairs.
ScoreDataset label_global(const Candidate& c, std::size_t n_groups);

ScenarioBundle compose_scenario(const ScenarioSpec& spec);

// Builds bundles for every spec from a plan, synthesizing each slot once.
// Slots are climbed on up to `threads` workers; output is independent of it.
std::vector<ScenarioBundle> compose_all(const std::vector<ScenarioSpec>& specs, unsigned threads = 1);

}  // namespace fairbv
