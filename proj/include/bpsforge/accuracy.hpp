#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bpsforge/event_log.hpp"

namespace bpsforge {

// Alpha-style concurrency: {a,b} parallel iff each directly follows the other
// somewhere in the log. Symmetric and irreflexive.
class ConcurrencyRelation {
public:
    void add(const std::string& a, const std::string& b);
    bool contains(const std::string& a, const std::string& b) const;
    std::size_t size() const { return pairs_.size(); }
    const std::set<std::pair<std::string, std::string>>& pairs() const { return pairs_; }

private:
    std::set<std::pair<std::string, std::string>> pairs_;  // normalized a < b
};

ConcurrencyRelation alpha_oracle(const EventLog& log);

struct TimedEvent {
    std::string label;
    double processing = 0.0;  // normalized to [0,1] by normalize_times
    double waiting = 0.0;
};

struct TimedTrace {
    std::string case_id;
    std::vector<TimedEvent> events;
};

using TimedLog = std::vector<TimedTrace>;

// Raw timed view of a log: processing = end - start; waiting = gap to the
// previous event's end in canonical order (clamped at 0, first event 0).
TimedLog timed_view(const EventLog& log);

// Joint per-label min-max normalization of processing and waiting times over
// both logs; a zero range maps to 0.
void normalize_times(TimedLog& ground, TimedLog& simulated);

struct BptdConfig {
    bool dynamic_beta = false;  // per-event beta = p/(p+w), quantized to 2 decimals
    double beta = 0.5;
};

// Business-process trace distance: Damerau-Levenshtein-style DP where matching
// equal labels costs beta|dp| + (1-beta)|dw|, and an adjacent transposition of
// a parallel, co-occurring label pair costs the two crossed label-equal
// matches instead of 1.
double bptd(const TimedTrace& a, const TimedTrace& b, const ConcurrencyRelation& rel,
            const BptdConfig& cfg = {});

// Distance matrix of length-normalized BPTDs: entry (i, j) is
// bptd(a[i], b[j]) / max(|a[i]|, |b[j]|).
std::vector<std::vector<double>> bptd_matrix_serial(const TimedLog& a, const TimedLog& b,
                                                    const ConcurrencyRelation& rel,
                                                    const BptdConfig& cfg = {});
// OpenMP-parallel over rows; identical output to the serial reference.
std::vector<std::vector<double>> bptd_matrix(const TimedLog& a, const TimedLog& b,
                                             const ConcurrencyRelation& rel,
                                             const BptdConfig& cfg = {}, int jobs = 0);

struct ElsResult {
    double similarity = 1.0;       // 1 - mean normalized BPTD over the pairing
    double mean_distance = 0.0;
    std::vector<int> pairing;      // ground index -> simulated index (-1 if padded out)
};

// Event Log Similarity via an exact Hungarian pairing of the distance matrix.
// Unequal trace counts are padded at the maximum cost; padded pairs are
// excluded from the mean.
ElsResult els(const TimedLog& ground, const TimedLog& simulated, const ConcurrencyRelation& rel,
              const BptdConfig& cfg = {}, int jobs = 0);

// Mean absolute error between paired cycle times, in seconds.
double cycle_time_mae(const EventLog& ground, const EventLog& simulated,
                      const std::vector<int>& pairing);

struct EvaluationResult {
    double els = 0.0;
    double mae_seconds = 0.0;
    std::vector<int> pairing;
};

// Full comparison of two raw logs: timed views, joint normalization, alpha
// oracle from the ground log, ELS and cycle-time MAE.
EvaluationResult evaluate_logs(const EventLog& ground, const EventLog& simulated,
                               const BptdConfig& cfg = {}, int jobs = 0);

}  // namespace bpsforge
