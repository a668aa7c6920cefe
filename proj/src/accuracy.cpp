#include "bpsforge/accuracy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bpsforge/common.hpp"
#include "bpsforge/discovery.hpp"
#include "bpsforge/hungarian.hpp"

namespace bpsforge {

void ConcurrencyRelation::add(const std::string& a, const std::string& b) {
    if (a == b) return;  // irreflexive
    pairs_.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
}

bool ConcurrencyRelation::contains(const std::string& a, const std::string& b) const {
    if (a == b) return false;
    return pairs_.count(a < b ? std::make_pair(a, b) : std::make_pair(b, a)) > 0;
}

ConcurrencyRelation alpha_oracle(const EventLog& log) {
    const DirectlyFollowsGraph dfg = build_dfg(log);
    ConcurrencyRelation rel;
    const int a = static_cast<int>(dfg.activities.size());
    for (int i = 0; i < a; ++i)
        for (int j = i + 1; j < a; ++j)
            if (dfg.count(i, j) > 0 && dfg.count(j, i) > 0)
                rel.add(dfg.activities[static_cast<std::size_t>(i)],
                        dfg.activities[static_cast<std::size_t>(j)]);
    return rel;
}

TimedLog timed_view(const EventLog& log) {
    TimedLog out;
    out.reserve(log.traces.size());
    for (const Trace& t : log.traces) {
        TimedTrace tt;
        tt.case_id = t.case_id;
        Timestamp prev_end = 0;
        for (std::size_t i = 0; i < t.events.size(); ++i) {
            const Event& e = t.events[i];
            TimedEvent te;
            te.label = e.activity;
            te.processing = static_cast<double>(e.processing_time());
            te.waiting = i == 0 ? 0.0
                                : std::max(0.0, static_cast<double>(e.start_ts - prev_end));
            prev_end = e.end_ts;
            tt.events.push_back(std::move(te));
        }
        out.push_back(std::move(tt));
    }
    return out;
}

void normalize_times(TimedLog& ground, TimedLog& simulated) {
    struct Range {
        double p_min = std::numeric_limits<double>::infinity(), p_max = -1.0;
        double w_min = std::numeric_limits<double>::infinity(), w_max = -1.0;
    };
    std::map<std::string, Range> ranges;
    auto scan = [&](const TimedLog& log) {
        for (const TimedTrace& t : log) {
            for (const TimedEvent& e : t.events) {
                Range& r = ranges[e.label];
                r.p_min = std::min(r.p_min, e.processing);
                r.p_max = std::max(r.p_max, e.processing);
                r.w_min = std::min(r.w_min, e.waiting);
                r.w_max = std::max(r.w_max, e.waiting);
            }
        }
    };
    scan(ground);
    scan(simulated);

    auto apply = [&](TimedLog& log) {
        for (TimedTrace& t : log) {
            for (TimedEvent& e : t.events) {
                const Range& r = ranges[e.label];
                e.processing =
                    r.p_max > r.p_min ? (e.processing - r.p_min) / (r.p_max - r.p_min) : 0.0;
                e.waiting = r.w_max > r.w_min ? (e.waiting - r.w_min) / (r.w_max - r.w_min) : 0.0;
            }
        }
    };
    apply(ground);
    apply(simulated);
}

namespace {

// Interned representation for the DP inner loop.
struct IndexedTrace {
    std::vector<int> labels;
    std::vector<double> p;
    std::vector<double> w;
    std::vector<char> has_label;  // over the shared label universe
};

struct LabelUniverse {
    std::unordered_map<std::string, int> ids;

    int intern(const std::string& label) {
        auto [it, _] = ids.emplace(label, static_cast<int>(ids.size()));
        return it->second;
    }
};

IndexedTrace index_trace(const TimedTrace& t, LabelUniverse& universe) {
    IndexedTrace out;
    out.labels.reserve(t.events.size());
    for (const TimedEvent& e : t.events) {
        out.labels.push_back(universe.intern(e.label));
        out.p.push_back(e.processing);
        out.w.push_back(e.waiting);
    }
    return out;
}

void fill_presence(IndexedTrace& t, std::size_t universe_size) {
    t.has_label.assign(universe_size, 0);
    for (int l : t.labels) t.has_label[static_cast<std::size_t>(l)] = 1;
}

// Paper-style dynamic beta: share of processing time in the event's total
// time, quantized to two decimals.
double dynamic_beta(double p, double w) {
    const double total = p + w;
    if (total <= 0.0) return 0.5;
    return std::floor(p / total * 100.0) / 100.0;
}

struct BptdKernel {
    const ConcurrencyRelation& rel;
    const BptdConfig& cfg;
    std::vector<char> parallel;  // universe x universe
    std::size_t universe = 0;

    void build_parallel(const LabelUniverse& labels) {
        universe = labels.ids.size();
        parallel.assign(universe * universe, 0);
        for (const auto& [a, b] : rel.pairs()) {
            auto ia = labels.ids.find(a);
            auto ib = labels.ids.find(b);
            if (ia == labels.ids.end() || ib == labels.ids.end()) continue;
            parallel[static_cast<std::size_t>(ia->second) * universe +
                     static_cast<std::size_t>(ib->second)] = 1;
            parallel[static_cast<std::size_t>(ib->second) * universe +
                     static_cast<std::size_t>(ia->second)] = 1;
        }
    }

    bool is_parallel(int a, int b) const {
        return parallel[static_cast<std::size_t>(a) * universe + static_cast<std::size_t>(b)] != 0;
    }

    // Time cost of matching event i of `a` with event j of `b`; beta comes
    // from the first sequence's event in dynamic mode.
    double time_cost(const IndexedTrace& a, std::size_t i, const IndexedTrace& b,
                     std::size_t j) const {
        const double beta = cfg.dynamic_beta ? dynamic_beta(a.p[i], a.w[i]) : cfg.beta;
        return beta * std::abs(a.p[i] - b.p[j]) + (1.0 - beta) * std::abs(a.w[i] - b.w[j]);
    }

    double distance(const IndexedTrace& a, const IndexedTrace& b) const {
        const std::size_t n = a.labels.size(), m = b.labels.size();
        std::vector<double> prev2(m + 1), prev(m + 1), cur(m + 1);
        for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<double>(j);
        for (std::size_t i = 1; i <= n; ++i) {
            cur[0] = static_cast<double>(i);
            for (std::size_t j = 1; j <= m; ++j) {
                const int la = a.labels[i - 1], lb = b.labels[j - 1];
                const double sub = la == lb ? time_cost(a, i - 1, b, j - 1) : 1.0;
                double best = std::min({prev[j] + 1.0, cur[j - 1] + 1.0, prev[j - 1] + sub});
                if (i > 1 && j > 1 && a.labels[i - 1] == b.labels[j - 2] &&
                    a.labels[i - 2] == b.labels[j - 1]) {
                    double trans = 1.0;
                    const int swapped_a = a.labels[i - 2], swapped_b = a.labels[i - 1];
                    if (swapped_a != swapped_b && is_parallel(swapped_a, swapped_b) &&
                        cooccur(a, b, swapped_a) && cooccur(a, b, swapped_b)) {
                        trans = time_cost(a, i - 1, b, j - 2) + time_cost(a, i - 2, b, j - 1);
                    }
                    best = std::min(best, prev2[j - 2] + trans);
                }
                cur[j] = best;
            }
            std::swap(prev2, prev);
            std::swap(prev, cur);
        }
        return prev[m];
    }

    static bool cooccur(const IndexedTrace& a, const IndexedTrace& b, int label) {
        return a.has_label[static_cast<std::size_t>(label)] &&
               b.has_label[static_cast<std::size_t>(label)];
    }
};

struct IndexedLogs {
    LabelUniverse universe;
    std::vector<IndexedTrace> a, b;
    BptdKernel kernel;

    IndexedLogs(const TimedLog& la, const TimedLog& lb, const ConcurrencyRelation& rel,
                const BptdConfig& cfg)
        : kernel{rel, cfg, {}, 0} {
        a.reserve(la.size());
        b.reserve(lb.size());
        for (const TimedTrace& t : la) a.push_back(index_trace(t, universe));
        for (const TimedTrace& t : lb) b.push_back(index_trace(t, universe));
        for (IndexedTrace& t : a) fill_presence(t, universe.ids.size());
        for (IndexedTrace& t : b) fill_presence(t, universe.ids.size());
        kernel.build_parallel(universe);
    }
};

}  // namespace

double bptd(const TimedTrace& a, const TimedTrace& b, const ConcurrencyRelation& rel,
            const BptdConfig& cfg) {
    IndexedLogs indexed({a}, {b}, rel, cfg);
    return indexed.kernel.distance(indexed.a.front(), indexed.b.front());
}

namespace {

std::vector<std::vector<double>> bptd_matrix_impl(const TimedLog& a, const TimedLog& b,
                                                  const ConcurrencyRelation& rel,
                                                  const BptdConfig& cfg, int jobs, bool parallel) {
    IndexedLogs indexed(a, b, rel, cfg);
    std::vector<std::vector<double>> matrix(a.size(), std::vector<double>(b.size(), 0.0));

    auto fill_row = [&](std::size_t i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            const std::size_t longest =
                std::max<std::size_t>(1, std::max(indexed.a[i].labels.size(),
                                                  indexed.b[j].labels.size()));
            matrix[i][j] = indexed.kernel.distance(indexed.a[i], indexed.b[j]) /
                           static_cast<double>(longest);
        }
    };

    if (parallel) {
#ifdef _OPENMP
        const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
        for (std::size_t i = 0; i < a.size(); ++i) fill_row(i);
    } else {
        for (std::size_t i = 0; i < a.size(); ++i) fill_row(i);
    }
    return matrix;
}

}  // namespace

std::vector<std::vector<double>> bptd_matrix_serial(const TimedLog& a, const TimedLog& b,
                                                    const ConcurrencyRelation& rel,
                                                    const BptdConfig& cfg) {
    return bptd_matrix_impl(a, b, rel, cfg, 1, false);
}

std::vector<std::vector<double>> bptd_matrix(const TimedLog& a, const TimedLog& b,
                                             const ConcurrencyRelation& rel, const BptdConfig& cfg,
                                             int jobs) {
    return bptd_matrix_impl(a, b, rel, cfg, jobs, true);
}

ElsResult els(const TimedLog& ground, const TimedLog& simulated, const ConcurrencyRelation& rel,
              const BptdConfig& cfg, int jobs) {
    if (ground.empty() || simulated.empty())
        throw ConfigError("ELS needs two non-empty logs");
    const std::vector<std::vector<double>> distances =
        bptd_matrix(ground, simulated, rel, cfg, jobs);

    const std::size_t rows = ground.size(), cols = simulated.size();
    const std::size_t n = std::max(rows, cols);
    if (rows != cols)
        log_warn("trace counts differ (" + std::to_string(rows) + " vs " + std::to_string(cols) +
                 "); padding the assignment at maximum cost");

    double max_cost = 0.0;
    for (const auto& row : distances)
        for (double d : row) max_cost = std::max(max_cost, d);

    std::vector<std::vector<double>> padded(n, std::vector<double>(n, max_cost));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) padded[i][j] = distances[i][j];

    std::vector<int> assignment;
    hungarian(padded, assignment);

    ElsResult out;
    out.pairing.assign(rows, -1);
    double sum = 0.0;
    std::size_t paired = 0;
    for (std::size_t i = 0; i < rows; ++i) {
        const int j = assignment[i];
        if (j < 0 || static_cast<std::size_t>(j) >= cols) continue;
        out.pairing[i] = j;
        sum += distances[i][static_cast<std::size_t>(j)];
        ++paired;
    }
    out.mean_distance = paired > 0 ? sum / static_cast<double>(paired) : 0.0;
    out.similarity = 1.0 - out.mean_distance;
    return out;
}

double cycle_time_mae(const EventLog& ground, const EventLog& simulated,
                      const std::vector<int>& pairing) {
    double sum = 0.0;
    std::size_t paired = 0;
    for (std::size_t i = 0; i < pairing.size() && i < ground.traces.size(); ++i) {
        const int j = pairing[i];
        if (j < 0 || static_cast<std::size_t>(j) >= simulated.traces.size()) continue;
        sum += std::abs(static_cast<double>(ground.traces[i].cycle_time()) -
                        static_cast<double>(simulated.traces[static_cast<std::size_t>(j)].cycle_time()));
        ++paired;
    }
    return paired > 0 ? sum / static_cast<double>(paired) : 0.0;
}

EvaluationResult evaluate_logs(const EventLog& ground, const EventLog& simulated,
                               const BptdConfig& cfg, int jobs) {
    TimedLog tg = timed_view(ground);
    TimedLog ts = timed_view(simulated);
    normalize_times(tg, ts);
    const ConcurrencyRelation rel = alpha_oracle(ground);
    const ElsResult r = els(tg, ts, rel, cfg, jobs);
    EvaluationResult out;
    out.els = r.similarity;
    out.pairing = r.pairing;
    out.mae_seconds = cycle_time_mae(ground, simulated, r.pairing);
    return out;
}

}  // namespace bpsforge
