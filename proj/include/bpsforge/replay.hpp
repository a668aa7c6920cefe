#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bpsforge/event_log.hpp"
#include "bpsforge/process_model.hpp"

namespace bpsforge {

struct TraceReplay {
    // Indexed like the trace's events.
    std::vector<std::int64_t> processing;
    std::vector<Timestamp> enablement;
    std::vector<std::int64_t> waiting;
    // Traversal counts per XOR-split out-flow id.
    std::map<std::string, long> traversal;
    std::size_t clamped_waits = 0;  // negative waits clamped to zero
};

struct LogReplay {
    std::vector<TraceReplay> traces;  // indexed like log.traces
    std::map<std::string, long> traversal;
    std::size_t clamped_waits = 0;

    // Processing-time samples per activity label, in log order.
    std::map<std::string, std::vector<std::int64_t>> duration_samples(const EventLog& log) const;
};

// Token replay of a conformant trace: walks events in canonical order, firing
// enabled gateways to quiescence before each event (XOR splits pick the branch
// leading to the pending event) and recording enablement on a set-if-unset
// basis. Throws ReplayError when the trace does not fit the model.
TraceReplay replay_trace(const ProcessModel& m, const Trace& t);

LogReplay replay_log_serial(const ProcessModel& m, const EventLog& log);
// OpenMP-parallel per trace; aggregation is a deterministic fold.
LogReplay replay_log(const ProcessModel& m, const EventLog& log, int jobs = 0);

}  // namespace bpsforge
