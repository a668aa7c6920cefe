#include "bpsforge/conformance.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <queue>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bpsforge/common.hpp"

namespace bpsforge {

namespace {

struct SearchState {
    int position;  // next trace event to explain
    Marking marking;

    bool operator==(const SearchState& other) const {
        return position == other.position && marking == other.marking;
    }
};

struct SearchStateHash {
    std::size_t operator()(const SearchState& s) const {
        return splitmix64(static_cast<std::uint64_t>(s.position) * 0x100000001b3ULL ^
                          s.marking.hash());
    }
};

struct Transition {
    int parent;
    MoveKind kind;
    int log_index;
    int model_node;
    bool recorded;  // gateway/end firings are silent and not recorded as moves
};

// Uniform-cost search shared by align_trace and shortest_run_length. For the
// latter the "trace" is empty and activity firings cost 1 instead of MM.
struct ProductSearch {
    const ProcessModel& model;
    const std::vector<int>* trace_labels;  // activity node per event, -1 if absent from model
    std::size_t max_states;

    struct Node {
        SearchState state;
        int cost;
        Transition via;
    };

    std::vector<Node> nodes;
    std::unordered_map<SearchState, int, SearchStateHash> best;
    using QueueEntry = std::pair<int, int>;  // (cost, node index)

    int run(std::vector<Move>* moves_out) {
        const int trace_len = trace_labels ? static_cast<int>(trace_labels->size()) : 0;
        std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> queue;

        SearchState init{0, initial_marking(model)};
        nodes.push_back(Node{init, 0, Transition{-1, MoveKind::sm, -1, -1, false}});
        best.emplace(init, 0);
        queue.emplace(0, 0);

        while (!queue.empty()) {
            auto [cost, idx] = queue.top();
            queue.pop();
            const Node node = nodes[static_cast<std::size_t>(idx)];
            const SearchState& st = node.state;
            auto seen = best.find(st);
            if (seen != best.end() && seen->second < cost) continue;  // stale entry

            if (st.position == trace_len && st.marking.none()) {
                if (moves_out != nullptr) reconstruct(idx, *moves_out);
                return cost;
            }
            if (best.size() > max_states)
                throw AlignmentCapError("alignment search exceeded state cap (" +
                                        std::to_string(max_states) + " states)");

            auto push = [&](SearchState next, int extra, Transition via) {
                const int next_cost = cost + extra;
                auto [it, inserted] = best.emplace(next, next_cost);
                if (!inserted && it->second <= next_cost) return;
                it->second = next_cost;
                via.parent = idx;
                nodes.push_back(Node{std::move(next), next_cost, via});
                queue.emplace(next_cost, static_cast<int>(nodes.size()) - 1);
            };

            for (std::size_t n = 0; n < model.nodes.size(); ++n) {
                const NodeKind kind = model.nodes[n].kind;
                if (kind == NodeKind::start) continue;
                if (!is_enabled(model, st.marking, static_cast<int>(n))) continue;

                if (kind == NodeKind::xor_split) {
                    for (int branch : model.out_flows(static_cast<int>(n))) {
                        push({st.position, fire(model, st.marking, static_cast<int>(n), branch)},
                             0, Transition{-1, MoveKind::mm, -1, static_cast<int>(n), false});
                    }
                } else if (kind == NodeKind::activity) {
                    Marking fired = fire(model, st.marking, static_cast<int>(n));
                    // Synchronous move when the next event carries this label.
                    if (st.position < trace_len &&
                        (*trace_labels)[static_cast<std::size_t>(st.position)] ==
                            static_cast<int>(n)) {
                        push({st.position + 1, fired}, 0,
                             Transition{-1, MoveKind::sm, st.position, static_cast<int>(n), true});
                    }
                    push({st.position, std::move(fired)}, 1,
                         Transition{-1, MoveKind::mm, -1, static_cast<int>(n), true});
                } else {  // joins, and-split, end event: silent, deterministic
                    push({st.position, fire(model, st.marking, static_cast<int>(n))}, 0,
                         Transition{-1, MoveKind::mm, -1, static_cast<int>(n), false});
                }
            }
            if (st.position < trace_len) {
                push({st.position + 1, st.marking}, 1,
                     Transition{-1, MoveKind::ml, st.position, -1, true});
            }
        }
        throw AlignmentError("model has no complete run (unsound or deadlocking model)");
    }

    void reconstruct(int idx, std::vector<Move>& moves) {
        std::vector<Move> reversed;
        while (idx > 0) {
            const Transition& via = nodes[static_cast<std::size_t>(idx)].via;
            if (via.recorded) reversed.push_back(Move{via.kind, via.log_index, via.model_node});
            idx = via.parent;
        }
        moves.assign(reversed.rbegin(), reversed.rend());
    }
};

}  // namespace

int shortest_run_length(const ProcessModel& m, const AlignOptions& opts) {
    ProductSearch search{m, nullptr, opts.max_states, {}, {}};
    return search.run(nullptr);
}

namespace {

Alignment align_with_run_length(const ProcessModel& m, const Trace& t, int run_length,
                                const AlignOptions& opts) {
    std::vector<int> labels;
    labels.reserve(t.events.size());
    for (const Event& e : t.events) labels.push_back(m.activity_index(e.activity));

    ProductSearch search{m, &labels, opts.max_states, {}, {}};
    Alignment out;
    out.cost = search.run(&out.moves);
    const double worst = static_cast<double>(t.events.size()) + static_cast<double>(run_length);
    out.fitness = worst > 0.0 ? 1.0 - static_cast<double>(out.cost) / worst : 1.0;
    return out;
}

}  // namespace

Alignment align_trace(const ProcessModel& m, const Trace& t, const AlignOptions& opts) {
    return align_with_run_length(m, t, shortest_run_length(m, opts), opts);
}

std::vector<Alignment> align_log_serial(const ProcessModel& m, const EventLog& log,
                                        const AlignOptions& opts) {
    const int run_length = shortest_run_length(m, opts);
    std::vector<Alignment> out(log.traces.size());
    for (std::size_t i = 0; i < log.traces.size(); ++i)
        out[i] = align_with_run_length(m, log.traces[i], run_length, opts);
    return out;
}

std::vector<Alignment> align_log(const ProcessModel& m, const EventLog& log,
                                 const AlignOptions& opts, int jobs) {
    const int run_length = shortest_run_length(m, opts);
    std::vector<Alignment> out(log.traces.size());
    std::exception_ptr error;
#ifdef _OPENMP
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (std::size_t i = 0; i < log.traces.size(); ++i) {
        try {
            out[i] = align_with_run_length(m, log.traces[i], run_length, opts);
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

double mean_fitness(const std::vector<Alignment>& alignments) {
    if (alignments.empty()) return 1.0;
    double sum = 0.0;
    for (const Alignment& a : alignments) sum += a.fitness;
    return sum / static_cast<double>(alignments.size());
}

const char* repair_method_name(RepairMethod m) {
    switch (m) {
        case RepairMethod::removal: return "removal";
        case RepairMethod::replacement: return "replacement";
        case RepairMethod::alignment: return "alignment";
    }
    return "?";
}

RepairMethod repair_method_from_name(const std::string& name) {
    if (name == "removal") return RepairMethod::removal;
    if (name == "replacement" || name == "replace") return RepairMethod::replacement;
    if (name == "alignment" || name == "repair") return RepairMethod::alignment;
    throw ConfigError("unknown repair method: " + name);
}

namespace {

// Unit-cost optimal string alignment distance over interned activity labels,
// used by replacement repair's similarity ranking.
int osa_distance(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
    for (std::size_t i = 1; i <= n; ++i) d[i][0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) d[0][j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            const int sub = a[i - 1] == b[j - 1] ? 0 : 1;
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + sub});
            if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1])
                d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
        }
    }
    return d[n][m];
}

std::vector<int> interned_labels(const Trace& t, std::unordered_map<std::string, int>& symbols) {
    std::vector<int> out;
    out.reserve(t.events.size());
    for (const Event& e : t.events) {
        auto [it, _] = symbols.emplace(e.activity, static_cast<int>(symbols.size()));
        out.push_back(it->second);
    }
    return out;
}

Trace repair_by_alignment(const Trace& t, const ProcessModel& m, const Alignment& alignment) {
    Trace out;
    out.case_id = t.case_id;
    Timestamp anchor = t.events.front().start_ts;
    for (const Move& move : alignment.moves) {
        switch (move.kind) {
            case MoveKind::sm: {
                const Event& e = t.events[static_cast<std::size_t>(move.log_index)];
                out.events.push_back(e);
                anchor = e.end_ts;
                break;
            }
            case MoveKind::mm: {
                Event synth;
                synth.case_id = t.case_id;
                synth.activity = m.nodes[static_cast<std::size_t>(move.model_node)].label;
                synth.resource = kAutoResource;
                synth.start_ts = anchor;
                synth.end_ts = anchor;
                out.events.push_back(std::move(synth));
                break;
            }
            case MoveKind::ml:
                break;  // drop the log event
        }
    }
    return out;
}

}  // namespace

EventLog repair_log(const EventLog& log, const ProcessModel& m, RepairMethod method,
                    const std::vector<Alignment>& alignments) {
    EventLog out;
    switch (method) {
        case RepairMethod::removal: {
            for (std::size_t i = 0; i < log.traces.size(); ++i)
                if (alignments[i].conformant()) out.traces.push_back(log.traces[i]);
            if (out.traces.empty())
                throw AlignmentError("removal repair would leave an empty log");
            return out;
        }
        case RepairMethod::replacement: {
            std::vector<std::size_t> conformant;
            for (std::size_t i = 0; i < log.traces.size(); ++i)
                if (alignments[i].conformant()) conformant.push_back(i);
            if (conformant.empty())
                throw AlignmentError("replacement repair needs at least one conformant trace");
            std::unordered_map<std::string, int> symbols;
            std::vector<std::vector<int>> words(log.traces.size());
            for (std::size_t i = 0; i < log.traces.size(); ++i)
                words[i] = interned_labels(log.traces[i], symbols);

            for (std::size_t i = 0; i < log.traces.size(); ++i) {
                if (alignments[i].conformant()) {
                    out.traces.push_back(log.traces[i]);
                    continue;
                }
                double best_sim = -1.0;
                std::size_t best_j = conformant.front();
                for (std::size_t j : conformant) {
                    const std::size_t longest = std::max(words[i].size(), words[j].size());
                    const double sim =
                        1.0 - static_cast<double>(osa_distance(words[i], words[j])) /
                                  static_cast<double>(longest);
                    if (sim > best_sim ||
                        (sim == best_sim && log.traces[j].case_id < log.traces[best_j].case_id)) {
                        best_sim = sim;
                        best_j = j;
                    }
                }
                Trace copy = log.traces[best_j];
                copy.case_id = log.traces[i].case_id;
                for (Event& e : copy.events) e.case_id = copy.case_id;
                out.traces.push_back(std::move(copy));
            }
            return out;
        }
        case RepairMethod::alignment: {
            for (std::size_t i = 0; i < log.traces.size(); ++i) {
                if (alignments[i].conformant()) out.traces.push_back(log.traces[i]);
                else out.traces.push_back(repair_by_alignment(log.traces[i], m, alignments[i]));
            }
            return out;
        }
    }
    throw ConfigError("unknown repair method");
}

EventLog repair_log(const EventLog& log, const ProcessModel& m, RepairMethod method,
                    const AlignOptions& opts, int jobs) {
    return repair_log(log, m, method, align_log(m, log, opts, jobs));
}

}  // namespace bpsforge
