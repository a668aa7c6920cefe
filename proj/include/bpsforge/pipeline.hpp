#pragma once

#include <map>
#include <string>
#include <vector>

#include "bpsforge/accuracy.hpp"
#include "bpsforge/conformance.hpp"
#include "bpsforge/event_log.hpp"
#include "bpsforge/parameters.hpp"

namespace bpsforge {

// One point of the discovery configuration space (Table-5-shaped).
struct TrialConfig {
    double epsilon = 0.5;
    double eta = 0.5;
    RepairMethod repair = RepairMethod::alignment;
    BranchingMode branching = BranchingMode::discovered;
    double similarity_threshold = 0.5;
};

std::string trial_config_to_string(const TrialConfig& cfg);

struct BuildOptions {
    TrialConfig config;
    // Baseline mode: force exponential PDFs (mean = sample mean) for the
    // inter-arrival and processing times instead of fitted families.
    bool force_exponential = false;
    double timetable_coverage = 0.95;  // <= 0 yields 24/7 pools
    AlignOptions align;
    int jobs = 0;
    std::uint64_t seed = 1;  // randomness for the `random` branching mode
};

struct BuildDiagnostics {
    double mean_fitness_before = 1.0;
    std::size_t conformant_traces = 0;
    std::size_t repaired_trace_count = 0;
    std::size_t replay_clamped_waits = 0;
    bool inter_arrival_cross_day_fallback = false;
    std::map<std::string, Distribution> fitted_durations;
    Distribution fitted_inter_arrival;
};

struct BuildResult {
    BpsModel bps;
    BuildDiagnostics diagnostics;
    Timestamp log_start = 0;  // earliest trace start of the input log
};

// Full processing pipeline: discover, align + repair, replay, fit parameters,
// assemble. Throws the stage's error type on failure (the optimizer records
// those as failed trials).
BuildResult build_bps_model(const EventLog& log, const BuildOptions& options);

// Pre-digested ground truth for repeated ELS scoring.
struct GroundTruth {
    const EventLog* log = nullptr;
    TimedLog timed;
    ConcurrencyRelation relation;

    explicit GroundTruth(const EventLog& ground);
};

struct ScoreResult {
    double els = 0.0;
    double mae_seconds = 0.0;
};

ScoreResult score_simulation(const GroundTruth& ground, const EventLog& simulated,
                             const BptdConfig& cfg = {}, int jobs = 0);

}  // namespace bpsforge
