#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bpsforge/distributions.hpp"
#include "bpsforge/event_log.hpp"
#include "bpsforge/process_model.hpp"
#include "bpsforge/replay.hpp"

namespace bpsforge {

// Weekly availability window, [start_hour, end_hour) on one weekday
// (Monday = 0). end_hour may be 24.
struct TimeWindow {
    int day = 0;
    int start_hour = 0;
    int end_hour = 24;
};

class Timetable {
public:
    static Timetable always();
    static Timetable from_windows(std::vector<TimeWindow> windows);

    const std::vector<TimeWindow>& windows() const { return windows_; }
    bool is_always() const;
    std::int64_t weekly_seconds() const;

    // Earliest in-window instant at or after t.
    Timestamp next_open(Timestamp t) const;
    // End instant after consuming `working` seconds of in-window time from
    // `start` (which must be in-window).
    Timestamp advance(Timestamp start, std::int64_t working) const;
    bool contains(Timestamp t) const;

private:
    std::vector<TimeWindow> windows_;
    // Merged [start, end) second ranges within the week, sorted.
    std::vector<std::pair<std::int64_t, std::int64_t>> spans_;
    void compile();
};

struct ResourcePool {
    std::string id;
    std::vector<std::string> members;  // sorted
    Timetable timetable;
    bool infinite = false;  // the AUTO pool

    std::size_t size() const { return members.size(); }
};

struct PoolAssignment {
    std::vector<ResourcePool> pools;
    std::map<std::string, std::string> activity_pool;  // activity -> pool id
};

struct BpsModel {
    ProcessModel model;
    Distribution inter_arrival;
    std::map<std::string, Distribution> activity_durations;
    std::map<std::string, double> branching;  // XOR out-flow id -> probability
    std::vector<ResourcePool> pools;
    std::map<std::string, std::string> activity_pool;
    long trace_count_to_simulate = 0;

    const ResourcePool& pool_of(const std::string& activity) const;
    void validate() const;

    std::string to_json_string(int indent = 2) const;
    static BpsModel from_json_string(const std::string& text);
    static BpsModel load(const std::string& path);
    void save(const std::string& path) const;
};

struct InterArrivalSeries {
    std::vector<double> samples;
    bool cross_day_fallback = false;
};

// Consecutive differences of trace start times within each calendar day (the
// first case of a day contributes no sample). Falls back to all consecutive
// differences when no same-day pair exists.
InterArrivalSeries inter_arrival_series(const EventLog& log);

enum class BranchingMode { random, equiprobable, discovered };
const char* branching_mode_name(BranchingMode m);
BranchingMode branching_mode_from_name(const std::string& name);

// Per-gateway probabilities for every XOR-split out-flow. `discovered`
// normalizes replay traversal counts (never-fired gateways fall back to
// equiprobable); `random` draws uniformly and normalizes.
std::map<std::string, double> branching_probabilities(const std::map<std::string, long>& traversal,
                                                      const ProcessModel& model, BranchingMode mode,
                                                      Rng* rng = nullptr);

// Organizational mining: per-resource activity profiles, Pearson correlation
// edges at `similarity_threshold`, connected components as pools. Timetables
// cover at least `coverage_quantile` of the pool's observed start/end hours
// (<= 0 disables coverage mining and yields 24/7).
PoolAssignment discover_resource_pools(const EventLog& log, double similarity_threshold,
                                       double coverage_quantile = 0.95);

BpsModel assemble(ProcessModel model, Distribution inter_arrival,
                  std::map<std::string, Distribution> durations,
                  std::map<std::string, double> branching, PoolAssignment pools, long trace_count);

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace bpsforge
