#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bpsforge/time_util.hpp"

namespace bpsforge {

// Reserved resource name for synthetic events inserted by alignment repair.
inline constexpr const char* kAutoResource = "AUTO";

struct Event {
    std::string case_id;
    std::string activity;
    std::string resource;  // "AUTO" when absent or synthetic
    Timestamp start_ts = 0;
    Timestamp end_ts = 0;

    std::int64_t processing_time() const { return end_ts - start_ts; }
};

struct Trace {
    std::string case_id;
    std::vector<Event> events;

    Timestamp start() const { return events.front().start_ts; }
    Timestamp end() const;
    std::int64_t cycle_time() const { return end() - start(); }
};

struct EventLog {
    std::vector<Trace> traces;

    std::size_t trace_count() const { return traces.size(); }
    std::size_t event_count() const;
};

// Canonical within-trace order: (start_ts, end_ts, activity).
bool event_order_less(const Event& a, const Event& b);
void sort_trace(Trace& trace);

// Groups events by case (first-appearance order of cases), sorts each trace
// canonically, and validates the EventLog invariants. Throws ParseError on an
// empty event set or an event with end < start.
EventLog build_log(std::vector<Event> events);

struct ColumnMap {
    std::string case_id = "case_id";
    std::string activity = "activity";
    std::string start = "start_time";
    std::string end = "end_time";
    std::string resource = "resource";  // empty string = no resource column
};

struct ParseStats {
    std::size_t rows = 0;
    std::size_t auto_resource_inputs = 0;  // rows that carried the reserved name
    std::size_t unpaired_lifecycle = 0;    // XES events repaired to zero duration
};

EventLog parse_csv(const std::string& path, const ColumnMap& columns = {}, char delimiter = ',',
                   ParseStats* stats = nullptr);
EventLog parse_csv_text(const std::string& text, const ColumnMap& columns = {},
                        char delimiter = ',', ParseStats* stats = nullptr);

// Minimal XES subset: <trace> holding <event> elements with concept:name,
// org:resource, time:timestamp and lifecycle:transition in {start, complete}.
// start/complete pairs are fused into one Event; unpaired halves become
// zero-duration events counted in stats->unpaired_lifecycle.
EventLog parse_xes(const std::string& path, ParseStats* stats = nullptr);
EventLog parse_xes_text(const std::string& text, ParseStats* stats = nullptr);

void write_csv(const EventLog& log, std::ostream& out, const ColumnMap& columns = {},
               char delimiter = ',');
void write_csv_file(const EventLog& log, const std::string& path, const ColumnMap& columns = {},
                    char delimiter = ',');
std::string to_csv_string(const EventLog& log, const ColumnMap& columns = {}, char delimiter = ',');

void write_xes(const EventLog& log, std::ostream& out);
void write_xes_file(const EventLog& log, const std::string& path);

struct LogStatistics {
    std::size_t trace_count = 0;
    std::size_t event_count = 0;
    std::size_t distinct_activities = 0;
    double mean_activities_per_trace = 0.0;
    std::size_t max_activities_per_trace = 0;
    double mean_case_duration_s = 0.0;
    std::int64_t max_case_duration_s = 0;
};

LogStatistics log_statistics(const EventLog& log);

bool operator==(const Event& a, const Event& b);
bool operator==(const Trace& a, const Trace& b);
bool operator==(const EventLog& a, const EventLog& b);

}  // namespace bpsforge
