#include "bpsforge/replay.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bpsforge/common.hpp"

namespace bpsforge {

namespace {

// Static reachability used for XOR branch selection. For each flow:
//  - gateway_reach: activities reachable crossing only gateway nodes
//  - full_reach: activities reachable crossing anything, with hop distance
struct FlowReachability {
    std::vector<std::vector<char>> gateway_reach;  // flow x activity-node
    std::vector<std::vector<int>> full_dist;       // flow x activity-node, -1 unreachable
    std::vector<int> end_dist;                     // flow -> hops to an end event, -1
};

FlowReachability compute_reachability(const ProcessModel& m) {
    FlowReachability r;
    const std::size_t flows = m.flows.size();
    const std::size_t nodes = m.nodes.size();
    r.gateway_reach.assign(flows, std::vector<char>(nodes, 0));
    r.full_dist.assign(flows, std::vector<int>(nodes, -1));
    r.end_dist.assign(flows, -1);

    for (std::size_t f = 0; f < flows; ++f) {
        // Full BFS over flows; a flow "contains" its target node.
        std::deque<std::pair<int, int>> queue{{static_cast<int>(f), 0}};
        std::vector<char> visited(flows, 0);
        visited[f] = 1;
        while (!queue.empty()) {
            auto [flow, dist] = queue.front();
            queue.pop_front();
            const int target = m.flows[static_cast<std::size_t>(flow)].target;
            const NodeKind kind = m.nodes[static_cast<std::size_t>(target)].kind;
            if (kind == NodeKind::activity && r.full_dist[f][static_cast<std::size_t>(target)] < 0)
                r.full_dist[f][static_cast<std::size_t>(target)] = dist;
            if (kind == NodeKind::finish && r.end_dist[f] < 0) r.end_dist[f] = dist;
            for (int next : m.out_flows(target)) {
                if (!visited[static_cast<std::size_t>(next)]) {
                    visited[static_cast<std::size_t>(next)] = 1;
                    queue.push_back({next, dist + 1});
                }
            }
        }

        // Gateway-only BFS: activities reachable without crossing another
        // activity are the ones this token can enable directly.
        std::deque<int> gq{static_cast<int>(f)};
        std::vector<char> gvisited(flows, 0);
        gvisited[f] = 1;
        while (!gq.empty()) {
            const int flow = gq.front();
            gq.pop_front();
            const int target = m.flows[static_cast<std::size_t>(flow)].target;
            const NodeKind kind = m.nodes[static_cast<std::size_t>(target)].kind;
            if (kind == NodeKind::activity) {
                r.gateway_reach[f][static_cast<std::size_t>(target)] = 1;
                continue;  // do not traverse through activities
            }
            for (int next : m.out_flows(target)) {
                if (!gvisited[static_cast<std::size_t>(next)]) {
                    gvisited[static_cast<std::size_t>(next)] = 1;
                    gq.push_back(next);
                }
            }
        }
    }
    return r;
}

struct ReplayRun {
    const ProcessModel& m;
    const Trace& t;
    const FlowReachability& reach;
    Marking marking;
    TraceReplay result;
    // Next event index per activity node whose enablement is still unset.
    std::vector<std::size_t> next_unset;
    std::vector<std::vector<std::size_t>> occurrences;  // activity node -> event indices

    ReplayRun(const ProcessModel& model, const FlowReachability& reachability, const Trace& trace)
        : m(model), t(trace), reach(reachability), marking(initial_marking(model)) {
        result.processing.resize(t.events.size());
        result.enablement.assign(t.events.size(), std::numeric_limits<Timestamp>::min());
        result.waiting.resize(t.events.size());
        occurrences.assign(m.nodes.size(), {});
        next_unset.assign(m.nodes.size(), 0);
        for (std::size_t i = 0; i < t.events.size(); ++i) {
            const int node = m.activity_index(t.events[i].activity);
            if (node < 0)
                throw ReplayError("case '" + t.case_id + "': activity '" + t.events[i].activity +
                                  "' does not appear in the model");
            occurrences[static_cast<std::size_t>(node)].push_back(i);
        }
    }

    bool enablement_unset(std::size_t event_index) const {
        return result.enablement[event_index] == std::numeric_limits<Timestamp>::min();
    }

    // Chooses the XOR branch that leads toward the earliest pending event,
    // preferring gateway-only paths, then closer full paths. Returns -1 when
    // no branch reaches any pending event.
    int choose_branch(int gateway, std::size_t pending_from) const {
        using Score = std::tuple<std::size_t, int, int>;  // (event rank, path kind, hops)
        int best_flow = -1;
        Score best_score{std::numeric_limits<std::size_t>::max(), 0, 0};
        for (int f : m.out_flows(gateway)) {
            bool found = false;
            Score score{};
            for (std::size_t idx = pending_from; idx < t.events.size(); ++idx) {
                const int node = m.activity_index(t.events[idx].activity);
                const int dist =
                    reach.full_dist[static_cast<std::size_t>(f)][static_cast<std::size_t>(node)];
                if (dist < 0) continue;
                const bool via_gateways =
                    reach.gateway_reach[static_cast<std::size_t>(f)]
                                       [static_cast<std::size_t>(node)] != 0;
                score = Score{idx - pending_from, via_gateways ? 0 : 1, dist};
                found = true;
                break;  // earliest pending event reachable from this branch
            }
            if (found && (best_flow < 0 || score < best_score)) {
                best_score = score;
                best_flow = f;
            }
        }
        return best_flow;
    }

    // Branch used after the last event: shortest gateway path to an end event.
    int choose_branch_to_end(int gateway) const {
        int best_flow = -1;
        int best_dist = std::numeric_limits<int>::max();
        for (int f : m.out_flows(gateway)) {
            const int d = reach.end_dist[static_cast<std::size_t>(f)];
            if (d >= 0 && d < best_dist) {
                best_dist = d;
                best_flow = f;
            }
        }
        return best_flow;
    }

    void fire_gateways(std::size_t pending_from, bool drain) {
        const std::size_t cap = m.nodes.size() * m.nodes.size() + 1;
        for (std::size_t iter = 0; iter < cap; ++iter) {
            bool fired = false;
            for (std::size_t n = 0; n < m.nodes.size(); ++n) {
                const NodeKind kind = m.nodes[n].kind;
                const bool silent = is_gateway(kind) || (drain && kind == NodeKind::finish);
                if (!silent) continue;
                if (!is_enabled(m, marking, static_cast<int>(n))) continue;
                if (kind == NodeKind::xor_split) {
                    const int branch = drain && pending_from >= t.events.size()
                                           ? choose_branch_to_end(static_cast<int>(n))
                                           : choose_branch(static_cast<int>(n), pending_from);
                    if (branch < 0) {
                        if (drain) continue;
                        throw ReplayError("case '" + t.case_id + "': no branch of gateway " +
                                          m.nodes[n].id + " leads to a pending event");
                    }
                    marking = fire(m, marking, static_cast<int>(n), branch);
                    ++result.traversal[m.flows[static_cast<std::size_t>(branch)].id];
                } else {
                    marking = fire(m, marking, static_cast<int>(n));
                }
                fired = true;
            }
            if (!fired) return;
        }
        throw ReplayError("case '" + t.case_id + "': gateway quiescence loop exceeded " +
                          std::to_string(cap) + " iterations (livelock)");
    }

    void record_enablement(Timestamp current_time) {
        for (std::size_t n = 0; n < m.nodes.size(); ++n) {
            if (m.nodes[n].kind != NodeKind::activity) continue;
            if (!is_enabled(m, marking, static_cast<int>(n))) continue;
            std::size_t& cursor = next_unset[n];
            const auto& occ = occurrences[n];
            while (cursor < occ.size() && !enablement_unset(occ[cursor])) ++cursor;
            if (cursor < occ.size()) result.enablement[occ[cursor]] = current_time;
        }
    }

    TraceReplay run() {
        Timestamp current_time = t.events.front().start_ts;
        for (std::size_t i = 0; i < t.events.size(); ++i) {
            const Event& e = t.events[i];
            result.processing[i] = e.processing_time();
            fire_gateways(i, false);
            record_enablement(current_time);

            const int node = m.activity_index(e.activity);
            if (!is_enabled(m, marking, node))
                throw ReplayError("case '" + t.case_id + "': activity '" + e.activity +
                                  "' is not enabled at event " + std::to_string(i) +
                                  " (non-conformant trace?)");
            if (enablement_unset(i)) result.enablement[i] = current_time;
            std::int64_t wait = e.start_ts - result.enablement[i];
            if (wait < 0) {
                wait = 0;
                ++result.clamped_waits;
            }
            result.waiting[i] = wait;
            marking = fire(m, marking, node);
            current_time = e.end_ts;
        }
        fire_gateways(t.events.size(), true);
        return std::move(result);
    }
};

}  // namespace

TraceReplay replay_trace(const ProcessModel& m, const Trace& t) {
    if (t.events.empty()) throw ReplayError("cannot replay an empty trace");
    const FlowReachability reach = compute_reachability(m);
    ReplayRun run(m, reach, t);
    return run.run();
}

std::map<std::string, std::vector<std::int64_t>> LogReplay::duration_samples(
    const EventLog& log) const {
    std::map<std::string, std::vector<std::int64_t>> samples;
    for (std::size_t i = 0; i < log.traces.size(); ++i) {
        const Trace& t = log.traces[i];
        for (std::size_t j = 0; j < t.events.size(); ++j)
            samples[t.events[j].activity].push_back(traces[i].processing[j]);
    }
    return samples;
}

namespace {

LogReplay aggregate(std::vector<TraceReplay> per_trace) {
    LogReplay out;
    out.traces = std::move(per_trace);
    for (const TraceReplay& tr : out.traces) {
        for (const auto& [flow, count] : tr.traversal) out.traversal[flow] += count;
        out.clamped_waits += tr.clamped_waits;
    }
    return out;
}

}  // namespace

LogReplay replay_log_serial(const ProcessModel& m, const EventLog& log) {
    const FlowReachability reach = compute_reachability(m);
    std::vector<TraceReplay> per_trace(log.traces.size());
    for (std::size_t i = 0; i < log.traces.size(); ++i) {
        if (log.traces[i].events.empty())
            throw ReplayError("cannot replay empty trace '" + log.traces[i].case_id + "'");
        ReplayRun run(m, reach, log.traces[i]);
        per_trace[i] = run.run();
    }
    return aggregate(std::move(per_trace));
}

LogReplay replay_log(const ProcessModel& m, const EventLog& log, int jobs) {
    const FlowReachability reach = compute_reachability(m);
    std::vector<TraceReplay> per_trace(log.traces.size());
    std::exception_ptr error;
#ifdef _OPENMP
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (std::size_t i = 0; i < log.traces.size(); ++i) {
        try {
            if (log.traces[i].events.empty())
                throw ReplayError("cannot replay empty trace '" + log.traces[i].case_id + "'");
            ReplayRun run(m, reach, log.traces[i]);
            per_trace[i] = run.run();
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            {
                if (!error) error = std::current_exception();
            }
        }
    }
    if (error) std::rethrow_exception(error);
    return aggregate(std::move(per_trace));
}

}  // namespace bpsforge
