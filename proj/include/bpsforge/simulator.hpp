#pragma once

#include <cstdint>
#include <vector>

#include "bpsforge/event_log.hpp"
#include "bpsforge/parameters.hpp"

namespace bpsforge {

struct SimConfig {
    std::uint64_t seed = 1;
    long trace_count = 0;  // <= 0 means BpsModel::trace_count_to_simulate
    Timestamp start_timestamp = 0;
    // Work pauses outside timetable windows and resumes (durations are working
    // time). false = run to completion on the wall clock.
    bool pause_outside_windows = true;
};

// Discrete-event simulation of the BPS model: arrivals by successive
// inter-arrival sampling, XOR branches by branching probabilities, work items
// assigned FIFO to the earliest-available pool resource. Deterministic for a
// given (model, config); every case derives its own RNG stream from the seed.
EventLog simulate(const BpsModel& bps, const SimConfig& cfg);

// One log per seed (trace count and start taken from `base`).
std::vector<EventLog> run_batch(const BpsModel& bps, const std::vector<std::uint64_t>& seeds,
                                const SimConfig& base = {}, int jobs = 0);

}  // namespace bpsforge
