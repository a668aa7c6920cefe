#include "bpsforge/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bpsforge/common.hpp"

namespace bpsforge {

namespace {

std::int64_t sample_duration(const Distribution& d, Rng& rng) {
    const double draw = d.sample(rng);
    return std::max<std::int64_t>(0, std::llround(draw));
}

struct CaseState {
    Marking marking;
    Rng rng;
    long in_flight = 0;
    bool done = false;
    std::vector<Event> events;
};

// Work item waiting for a pool resource. Earlier cases go first, so a case's
// follow-up work item beats a later case queued at the same instant.
struct WorkItem {
    long case_index;
    Timestamp enabled;
    std::string label;
    std::uint64_t seq;
    int node;
    std::int64_t duration;

    bool operator<(const WorkItem& other) const {
        return std::tie(case_index, enabled, label, seq) <
               std::tie(other.case_index, other.enabled, other.label, other.seq);
    }
};

struct QueueKey {
    Timestamp time;
    long case_index;  // wake events use LONG_MAX so same-instant completions go first
    std::string label;
    std::uint64_t seq;

    bool operator>(const QueueKey& other) const {
        return std::tie(time, case_index, label, seq) >
               std::tie(other.time, other.case_index, other.label, other.seq);
    }
};

struct SimEvent {
    QueueKey key;
    enum class Kind { arrival, work_done, wake } kind;
    int activity_node = -1;
    int pool = -1;  // wake target

    bool operator>(const SimEvent& other) const { return key > other.key; }
};

class Simulation {
public:
    Simulation(const BpsModel& bps, const SimConfig& cfg)
        : bps_(bps),
          cfg_(cfg),
          trace_count_(cfg.trace_count > 0 ? cfg.trace_count : bps.trace_count_to_simulate) {
        if (trace_count_ < 1) throw ConfigError("simulation needs trace_count >= 1");
        for (const ResourcePool& p : bps_.pools) {
            pool_ids_[p.id] = static_cast<int>(pools_.size());
            pools_.push_back(&p);
            queues_.emplace_back();
            busy_until_.emplace_back(p.members.size(), std::numeric_limits<Timestamp>::min());
        }
        for (std::size_t i = 0; i < bps_.model.nodes.size(); ++i) {
            const ModelNode& n = bps_.model.nodes[i];
            if (n.kind == NodeKind::activity) {
                duration_of_[static_cast<int>(i)] = &bps_.activity_durations.at(n.label);
                activity_pool_[static_cast<int>(i)] = pool_ids_.at(bps_.activity_pool.at(n.label));
            }
        }
    }

    EventLog run() {
        schedule_arrivals();
        while (!queue_.empty()) {
            const SimEvent ev = queue_.top();
            queue_.pop();
            switch (ev.kind) {
                case SimEvent::Kind::arrival:
                    start_case(ev.key.case_index, ev.key.time);
                    break;
                case SimEvent::Kind::work_done:
                    complete_work(ev.key.case_index, ev.activity_node, ev.key.time);
                    break;
                case SimEvent::Kind::wake:
                    try_dispatch(ev.pool, ev.key.time);
                    break;
            }
        }
        EventLog log;
        for (long c = 0; c < trace_count_; ++c) {
            CaseState& cs = cases_[static_cast<std::size_t>(c)];
            if (!cs.done)
                throw SimulationError("case " + std::to_string(c + 1) +
                                      " did not complete (model deadlock)");
            Trace t;
            t.case_id = std::to_string(c + 1);
            t.events = std::move(cs.events);
            sort_trace(t);
            log.traces.push_back(std::move(t));
        }
        return log;
    }

private:
    const BpsModel& bps_;
    const SimConfig& cfg_;
    long trace_count_;
    std::vector<CaseState> cases_;
    std::map<std::string, int> pool_ids_;
    std::vector<const ResourcePool*> pools_;
    std::vector<std::set<WorkItem>> queues_;
    std::vector<std::vector<Timestamp>> busy_until_;  // pool -> member -> time
    std::map<int, const Distribution*> duration_of_;
    std::map<int, int> activity_pool_;
    std::priority_queue<SimEvent, std::vector<SimEvent>, std::greater<>> queue_;
    std::uint64_t seq_ = 0;

    void schedule_arrivals() {
        cases_.resize(static_cast<std::size_t>(trace_count_));
        Timestamp arrival = cfg_.start_timestamp;
        for (long c = 0; c < trace_count_; ++c) {
            CaseState& cs = cases_[static_cast<std::size_t>(c)];
            cs.rng = make_rng(
                derive_seed(cfg_.seed, 0x6361u /*case stream*/, static_cast<std::uint64_t>(c)));
            if (c > 0) {
                const double gap = bps_.inter_arrival.sample(cs.rng);
                arrival += std::max<std::int64_t>(0, std::llround(gap));
            }
            queue_.push(SimEvent{QueueKey{arrival, c, "", seq_++}, SimEvent::Kind::arrival, -1, -1});
        }
    }

    void start_case(long c, Timestamp now) {
        cases_[static_cast<std::size_t>(c)].marking = initial_marking(bps_.model);
        advance_case(c, now);
    }

    void complete_work(long c, int node, Timestamp now) {
        CaseState& cs = cases_[static_cast<std::size_t>(c)];
        --cs.in_flight;
        const int out = bps_.model.out_flows(node).front();
        if (cs.marking.test(out))
            throw SimulationError("unsafe marking during simulation at flow " +
                                  bps_.model.flows[static_cast<std::size_t>(out)].id);
        cs.marking.set(out);
        advance_case(c, now);
        // The freed resource can pick up queued work now.
        try_dispatch(activity_pool_.at(node), now);
    }

    // Fires gateways to quiescence (XOR branches sampled from the branching
    // map), hands enabled activities to their pools, and consumes end tokens.
    void advance_case(long c, Timestamp now) {
        CaseState& cs = cases_[static_cast<std::size_t>(c)];
        const std::size_t cap = bps_.model.nodes.size() * bps_.model.nodes.size() + 1;
        for (std::size_t iter = 0; iter < cap; ++iter) {
            bool progressed = false;
            for (std::size_t n = 0; n < bps_.model.nodes.size(); ++n) {
                const ModelNode& node = bps_.model.nodes[n];
                if (node.kind == NodeKind::start) continue;
                if (!is_enabled(bps_.model, cs.marking, static_cast<int>(n))) continue;
                progressed = true;
                switch (node.kind) {
                    case NodeKind::xor_split:
                        cs.marking = fire(bps_.model, cs.marking, static_cast<int>(n),
                                          sample_branch(static_cast<int>(n), cs.rng));
                        break;
                    case NodeKind::activity:
                        enqueue_activity(c, static_cast<int>(n), now);
                        break;
                    default:
                        cs.marking = fire(bps_.model, cs.marking, static_cast<int>(n));
                        break;
                }
            }
            if (!progressed) break;
            if (iter + 1 == cap)
                throw SimulationError("gateway livelock in case " + std::to_string(c + 1));
        }
        if (cs.marking.none() && cs.in_flight == 0) cs.done = true;
    }

    int sample_branch(int gateway, Rng& rng) {
        const auto& outs = bps_.model.out_flows(gateway);
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        double acc = 0.0;
        for (int f : outs) {
            acc += bps_.branching.at(bps_.model.flows[static_cast<std::size_t>(f)].id);
            if (u < acc) return f;
        }
        return outs.back();
    }

    // Consumes the activity's in-token and samples its duration immediately
    // (the case stream stays deterministic under any interleaving). AUTO-pool
    // work needs no resource; everything else waits in the pool queue.
    void enqueue_activity(long c, int node, Timestamp enabled) {
        CaseState& cs = cases_[static_cast<std::size_t>(c)];
        cs.marking.reset(bps_.model.in_flows(node).front());
        ++cs.in_flight;

        const std::string& label = bps_.model.nodes[static_cast<std::size_t>(node)].label;
        const std::int64_t duration = sample_duration(*duration_of_.at(node), cs.rng);
        const int pool = activity_pool_.at(node);

        if (pools_[static_cast<std::size_t>(pool)]->infinite) {
            const Timestamp end = enabled + duration;
            cs.events.push_back(Event{std::to_string(c + 1), label, kAutoResource, enabled, end});
            queue_.push(
                SimEvent{QueueKey{end, c, label, seq_++}, SimEvent::Kind::work_done, node, pool});
            return;
        }
        queues_[static_cast<std::size_t>(pool)].insert(
            WorkItem{c, enabled, label, seq_++, node, duration});
        try_dispatch(pool, enabled);
    }

    // Starts queued work on resources that are free right now. When the
    // timetable is closed, a wake event at the next window opening retries.
    void try_dispatch(int pool, Timestamp now) {
        const ResourcePool& p = *pools_[static_cast<std::size_t>(pool)];
        auto& waiting = queues_[static_cast<std::size_t>(pool)];
        auto& busy = busy_until_[static_cast<std::size_t>(pool)];

        while (!waiting.empty()) {
            int member = -1;
            for (std::size_t r = 0; r < busy.size(); ++r) {
                if (busy[r] <= now) {
                    member = static_cast<int>(r);
                    break;
                }
            }
            if (member < 0) return;  // next completion will retry

            const Timestamp open = p.timetable.next_open(now);
            if (open > now) {
                queue_.push(SimEvent{QueueKey{open, std::numeric_limits<long>::max(),
                                              p.id, seq_++},
                                     SimEvent::Kind::wake, -1, pool});
                return;
            }

            const WorkItem item = *waiting.begin();
            waiting.erase(waiting.begin());
            const Timestamp start = now;
            const Timestamp end = cfg_.pause_outside_windows
                                      ? p.timetable.advance(start, item.duration)
                                      : start + item.duration;
            busy[static_cast<std::size_t>(member)] = end;
            cases_[static_cast<std::size_t>(item.case_index)].events.push_back(
                Event{std::to_string(item.case_index + 1), item.label,
                      p.members[static_cast<std::size_t>(member)], start, end});
            queue_.push(SimEvent{QueueKey{end, item.case_index, item.label, seq_++},
                                 SimEvent::Kind::work_done, item.node, pool});
        }
    }
};

}  // namespace

EventLog simulate(const BpsModel& bps, const SimConfig& cfg) {
    bps.validate();
    Simulation sim(bps, cfg);
    return sim.run();
}

std::vector<EventLog> run_batch(const BpsModel& bps, const std::vector<std::uint64_t>& seeds,
                                const SimConfig& base, int jobs) {
    if (seeds.empty()) throw ConfigError("run_batch needs at least one seed");
    std::vector<EventLog> out(seeds.size());
    std::exception_ptr error;
#ifdef _OPENMP
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        try {
            SimConfig cfg = base;
            cfg.seed = seeds[i];
            out[i] = simulate(bps, cfg);
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
    return out;
}

}  // namespace bpsforge
