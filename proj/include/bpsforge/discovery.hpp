#pragma once

#include <map>
#include <string>
#include <vector>

#include "bpsforge/event_log.hpp"
#include "bpsforge/process_model.hpp"

namespace bpsforge {

struct DiscoveryParams {
    double epsilon = 0.5;  // parallelism threshold in [0,1]
    double eta = 0.5;      // frequency percentile in [0,1]
};

// Activity indices 0..A-1; A is the virtual start marker, A+1 the end marker.
struct DirectlyFollowsGraph {
    std::vector<std::string> activities;  // sorted labels
    int start_marker = 0;
    int end_marker = 0;
    std::vector<std::vector<long>> counts;  // (A+2) x (A+2)

    int index_of(const std::string& label) const;
    long count(int from, int to) const {
        return counts[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
    }
};

DirectlyFollowsGraph build_dfg(const EventLog& log);

// DFG-filtering discovery. Mutual directly-follows pairs whose count balance
// reaches epsilon become AND blocks; per-source edges below the eta
// nearest-rank quantile are pruned (activities that lose start-reachability or
// end-coreachability drop out entirely); the remainder is rendered with
// XOR/AND gateways. The output always passes ProcessModel::validate().
ProcessModel discover_model(const EventLog& log, const DiscoveryParams& params);

// Unordered activity pairs treated as parallel at the given epsilon.
std::vector<std::pair<std::string, std::string>> parallel_pairs(const DirectlyFollowsGraph& dfg,
                                                                double epsilon);

}  // namespace bpsforge
