#include "bpsforge/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "bpsforge/common.hpp"
#include "bpsforge/discovery.hpp"
#include "bpsforge/replay.hpp"

namespace bpsforge {

std::string trial_config_to_string(const TrialConfig& cfg) {
    std::ostringstream out;
    out << "epsilon=" << cfg.epsilon << " eta=" << cfg.eta
        << " repair=" << repair_method_name(cfg.repair)
        << " branching=" << branching_mode_name(cfg.branching)
        << " pool_threshold=" << cfg.similarity_threshold;
    return out.str();
}

BuildResult build_bps_model(const EventLog& log, const BuildOptions& options) {
    if (log.traces.empty()) throw ConfigError("cannot build a BPS model from an empty log");
    BuildResult result;

    ProcessModel model =
        discover_model(log, DiscoveryParams{options.config.epsilon, options.config.eta});

    const std::vector<Alignment> alignments = align_log(model, log, options.align, options.jobs);
    result.diagnostics.mean_fitness_before = mean_fitness(alignments);
    for (const Alignment& a : alignments)
        if (a.conformant()) ++result.diagnostics.conformant_traces;

    const EventLog repaired = repair_log(log, model, options.config.repair, alignments);
    result.diagnostics.repaired_trace_count = repaired.traces.size();

    const LogReplay replay = replay_log(model, repaired, options.jobs);
    result.diagnostics.replay_clamped_waits = replay.clamped_waits;

    // Inter-arrival PDF.
    Distribution inter_arrival;
    if (repaired.traces.size() < 2) {
        inter_arrival = Distribution::fixed_value(0.0);
        log_warn("fewer than two repaired traces; inter-arrival fixed at 0");
    } else {
        const InterArrivalSeries series = inter_arrival_series(repaired);
        result.diagnostics.inter_arrival_cross_day_fallback = series.cross_day_fallback;
        if (options.force_exponential) {
            double sum = 0.0;
            for (double s : series.samples) sum += s;
            const double mean = sum / static_cast<double>(series.samples.size());
            inter_arrival = mean > 0.0 ? Distribution::exponential(mean)
                                       : Distribution::fixed_value(0.0);
        } else {
            inter_arrival = fit_distribution(series.samples);
        }
    }
    result.diagnostics.fitted_inter_arrival = inter_arrival;

    // Resource pools from the repaired log.
    PoolAssignment pools = discover_resource_pools(repaired, options.config.similarity_threshold,
                                                   options.timetable_coverage);

    // Per-activity processing-time PDFs from replay; activities handled by the
    // AUTO pool are zero-duration by definition.
    std::map<std::string, Distribution> durations;
    for (const auto& [label, samples] : replay.duration_samples(repaired)) {
        auto pool_it = pools.activity_pool.find(label);
        if (pool_it != pools.activity_pool.end() && pool_it->second == kAutoResource) {
            durations[label] = Distribution::fixed_value(0.0);
            continue;
        }
        std::vector<double> series(samples.begin(), samples.end());
        if (options.force_exponential) {
            double sum = 0.0;
            for (double s : series) sum += s;
            const double mean = sum / static_cast<double>(series.size());
            durations[label] =
                mean > 0.0 ? Distribution::exponential(mean) : Distribution::fixed_value(0.0);
        } else {
            durations[label] = fit_distribution(series);
        }
    }
    result.diagnostics.fitted_durations = durations;

    // Branching probabilities.
    Rng rng = make_rng(derive_seed(options.seed, 0x6272u /*branching stream*/));
    const std::map<std::string, double> branching =
        branching_probabilities(replay.traversal, model, options.config.branching, &rng);

    result.bps = assemble(std::move(model), std::move(inter_arrival), std::move(durations),
                          branching, std::move(pools),
                          static_cast<long>(log.traces.size()));

    result.log_start = log.traces.front().start();
    for (const Trace& t : log.traces) result.log_start = std::min(result.log_start, t.start());
    return result;
}

GroundTruth::GroundTruth(const EventLog& ground)
    : log(&ground), timed(timed_view(ground)), relation(alpha_oracle(ground)) {}

ScoreResult score_simulation(const GroundTruth& ground, const EventLog& simulated,
                             const BptdConfig& cfg, int jobs) {
    TimedLog tg = ground.timed;  // joint normalization is pair-specific
    TimedLog ts = timed_view(simulated);
    normalize_times(tg, ts);
    const ElsResult r = els(tg, ts, ground.relation, cfg, jobs);
    ScoreResult out;
    out.els = r.similarity;
    out.mae_seconds = cycle_time_mae(*ground.log, simulated, r.pairing);
    return out;
}

}  // namespace bpsforge
