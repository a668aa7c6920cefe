#pragma once

#include <string>
#include <vector>

#include "bpsforge/event_log.hpp"
#include "bpsforge/process_model.hpp"

namespace bpsforge {

enum class MoveKind { sm, mm, ml };

struct Move {
    MoveKind kind;
    int log_index = -1;    // event position for SM/ML
    int model_node = -1;   // activity node for SM/MM
};

struct Alignment {
    std::vector<Move> moves;
    int cost = 0;  // number of MM plus ML moves
    double fitness = 1.0;

    bool conformant() const { return cost == 0; }
};

struct AlignOptions {
    // Cap on explored (trace position, marking) states per trace; exceeding it
    // throws AlignmentCapError so the surrounding trial can be failed.
    std::size_t max_states = 2'000'000;
};

// Minimum number of activity firings in any complete run of the model.
int shortest_run_length(const ProcessModel& m, const AlignOptions& opts = {});

// Cost-minimal alignment via uniform-cost search over the synchronous product
// of trace positions and markings (SM and silent gateway moves cost 0, MM and
// ML cost 1). fitness = 1 - cost / (|trace| + shortest model run).
Alignment align_trace(const ProcessModel& m, const Trace& t, const AlignOptions& opts = {});

// Per-trace alignment, OpenMP-parallel; results indexed like log.traces.
std::vector<Alignment> align_log(const ProcessModel& m, const EventLog& log,
                                 const AlignOptions& opts = {}, int jobs = 0);
// Serial reference for the parallel kernel.
std::vector<Alignment> align_log_serial(const ProcessModel& m, const EventLog& log,
                                        const AlignOptions& opts = {});

double mean_fitness(const std::vector<Alignment>& alignments);

enum class RepairMethod { removal, replacement, alignment };

const char* repair_method_name(RepairMethod m);
RepairMethod repair_method_from_name(const std::string& name);

// Repairs the log so every output trace replays on the model with fitness 1.
EventLog repair_log(const EventLog& log, const ProcessModel& m, RepairMethod method,
                    const std::vector<Alignment>& alignments);
EventLog repair_log(const EventLog& log, const ProcessModel& m, RepairMethod method,
                    const AlignOptions& opts = {}, int jobs = 0);

}  // namespace bpsforge
