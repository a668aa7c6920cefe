#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bpsforge/pipeline.hpp"
#include "bpsforge/simulator.hpp"

namespace bpsforge {

// Table-5-shaped search space; ranges are fixed by construction.
struct SearchSpace {
    double epsilon_lo = 0.0, epsilon_hi = 1.0;
    double eta_lo = 0.0, eta_hi = 1.0;
    double threshold_lo = 0.0, threshold_hi = 1.0;
    std::vector<RepairMethod> repairs{RepairMethod::alignment, RepairMethod::removal,
                                      RepairMethod::replacement};
    std::vector<BranchingMode> branchings{BranchingMode::random, BranchingMode::equiprobable,
                                          BranchingMode::discovered};
};

struct TrialResult {
    TrialConfig config;
    bool ok = false;
    double loss = 1.0;      // 1 - mean ELS; meaningful only when ok
    double mean_els = 0.0;
    std::string error;      // stage message for failed trials
    std::string model_path; // set when artifacts are kept
    std::optional<BpsModel> bps;
};

struct TpeOptions {
    double gamma = 0.25;        // good/bad split quantile
    std::size_t n_startup = 10; // random trials before density modeling
    std::size_t candidates = 24;
};

// Suggests the next configuration: kernel-density l/g ratio maximization over
// the numeric dimensions and smoothed category frequencies over the
// categorical ones; uniform random during startup or when too few trials
// succeeded.
TrialConfig tpe_suggest(const std::vector<TrialResult>& history, const SearchSpace& space,
                        Rng& rng, const TpeOptions& opts = {});

struct OptimizeOptions {
    int trials = 100;
    int runs_per_trial = 10;
    std::uint64_t seed = 1;
    int jobs = 0;
    int batch = 1;  // >1 uses constant-liar imputation for pending trials
    double timetable_coverage = 0.95;
    AlignOptions align;
    std::string artifact_dir;  // when set, per-trial models are written here
    TpeOptions tpe;
};

struct OptimizeResult {
    std::vector<TrialResult> history;
    int best_index = -1;

    const TrialResult& best() const;
};

// Evaluates one configuration end to end: build the BPS model, simulate
// `runs` times with derived seeds, score mean ELS against the ground truth.
TrialResult run_trial(const EventLog& log, const GroundTruth& ground, const TrialConfig& config,
                      int runs, std::uint64_t seed, int jobs = 0,
                      double timetable_coverage = 0.95, const AlignOptions& align = {},
                      bool force_exponential = false);

OptimizeResult optimize(const EventLog& log, const OptimizeOptions& options);

// Fixed reference configuration: epsilon 0.1, eta 0.4, removal repair,
// equiprobable branching, threshold 0.5, exponential PDFs forced.
TrialResult run_baseline(const EventLog& log, int runs, std::uint64_t seed, int jobs = 0);
TrialConfig baseline_config();

std::string history_csv(const std::vector<TrialResult>& history);

}  // namespace bpsforge
