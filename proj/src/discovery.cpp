#include "bpsforge/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>

#include "bpsforge/common.hpp"

namespace bpsforge {

int DirectlyFollowsGraph::index_of(const std::string& label) const {
    auto it = std::lower_bound(activities.begin(), activities.end(), label);
    if (it == activities.end() || *it != label) return -1;
    return static_cast<int>(it - activities.begin());
}

DirectlyFollowsGraph build_dfg(const EventLog& log) {
    if (log.traces.empty()) throw ModelError("cannot build a DFG from an empty log");
    std::set<std::string> labels;
    for (const Trace& t : log.traces)
        for (const Event& e : t.events) labels.insert(e.activity);

    DirectlyFollowsGraph dfg;
    dfg.activities.assign(labels.begin(), labels.end());
    const int a = static_cast<int>(dfg.activities.size());
    dfg.start_marker = a;
    dfg.end_marker = a + 1;
    dfg.counts.assign(static_cast<std::size_t>(a + 2), std::vector<long>(static_cast<std::size_t>(a + 2), 0));

    for (const Trace& t : log.traces) {
        int prev = dfg.start_marker;
        for (const Event& e : t.events) {
            const int cur = dfg.index_of(e.activity);
            ++dfg.counts[static_cast<std::size_t>(prev)][static_cast<std::size_t>(cur)];
            prev = cur;
        }
        ++dfg.counts[static_cast<std::size_t>(prev)][static_cast<std::size_t>(dfg.end_marker)];
    }
    return dfg;
}

std::vector<std::pair<std::string, std::string>> parallel_pairs(const DirectlyFollowsGraph& dfg,
                                                                double epsilon) {
    std::vector<std::pair<std::string, std::string>> pairs;
    const int a = static_cast<int>(dfg.activities.size());
    for (int i = 0; i < a; ++i) {
        for (int j = i + 1; j < a; ++j) {
            const long ij = dfg.count(i, j), ji = dfg.count(j, i);
            if (ij <= 0 || ji <= 0) continue;
            const double balance =
                static_cast<double>(std::min(ij, ji)) / static_cast<double>(std::max(ij, ji));
            if (balance >= epsilon) pairs.emplace_back(dfg.activities[static_cast<std::size_t>(i)],
                                                       dfg.activities[static_cast<std::size_t>(j)]);
        }
    }
    return pairs;
}

namespace {

struct Edge {
    int from, to;
    long count;
};

// Nearest-rank quantile threshold over one source's out-edge counts.
// eta <= 0 keeps everything.
long quantile_threshold(std::vector<long> counts, double eta) {
    if (counts.empty() || eta <= 0.0) return 0;
    std::sort(counts.begin(), counts.end());
    const std::size_t m = counts.size();
    std::size_t rank = static_cast<std::size_t>(std::ceil(eta * static_cast<double>(m)));
    rank = std::min(std::max<std::size_t>(rank, 1), m);
    return counts[rank - 1];
}

struct FilteredGraph {
    int node_count;  // activities + start/end markers
    int start, end;
    std::vector<std::vector<char>> parallel;  // activity x activity
    std::vector<Edge> edges;
};

std::pair<std::vector<char>, std::vector<char>> reach_sets(int node_count, int start, int end,
                                                           const std::vector<Edge>& edges) {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(node_count)),
        in(static_cast<std::size_t>(node_count));
    for (std::size_t k = 0; k < edges.size(); ++k) {
        out[static_cast<std::size_t>(edges[k].from)].push_back(static_cast<int>(k));
        in[static_cast<std::size_t>(edges[k].to)].push_back(static_cast<int>(k));
    }
    std::vector<char> reach(static_cast<std::size_t>(node_count), 0),
        coreach(static_cast<std::size_t>(node_count), 0);
    std::deque<int> q{start};
    reach[static_cast<std::size_t>(start)] = 1;
    while (!q.empty()) {
        int n = q.front();
        q.pop_front();
        for (int k : out[static_cast<std::size_t>(n)]) {
            int to = edges[static_cast<std::size_t>(k)].to;
            if (!reach[static_cast<std::size_t>(to)]) {
                reach[static_cast<std::size_t>(to)] = 1;
                q.push_back(to);
            }
        }
    }
    q.push_back(end);
    coreach[static_cast<std::size_t>(end)] = 1;
    while (!q.empty()) {
        int n = q.front();
        q.pop_front();
        for (int k : in[static_cast<std::size_t>(n)]) {
            int from = edges[static_cast<std::size_t>(k)].from;
            if (!coreach[static_cast<std::size_t>(from)]) {
                coreach[static_cast<std::size_t>(from)] = 1;
                q.push_back(from);
            }
        }
    }
    return {reach, coreach};
}

FilteredGraph filter_graph(const DirectlyFollowsGraph& dfg, const DiscoveryParams& params) {
    const int a = static_cast<int>(dfg.activities.size());
    const int n = a + 2;
    FilteredGraph g;
    g.node_count = n;
    g.start = dfg.start_marker;
    g.end = dfg.end_marker;
    g.parallel.assign(static_cast<std::size_t>(a), std::vector<char>(static_cast<std::size_t>(a), 0));
    for (const auto& [la, lb] : parallel_pairs(dfg, params.epsilon)) {
        const int i = dfg.index_of(la), j = dfg.index_of(lb);
        g.parallel[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
        g.parallel[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = 1;
    }

    // Directly-follows edges between parallel activities are interleaving
    // artifacts; drop them before frequency filtering.
    std::vector<Edge> all;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const long c = dfg.count(i, j);
            if (c <= 0) continue;
            if (i < a && j < a && g.parallel[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
                continue;
            all.push_back(Edge{i, j, c});
        }
    }

    std::vector<char> kept(all.size(), 0);
    std::vector<std::vector<long>> per_source(static_cast<std::size_t>(n));
    for (const Edge& e : all) per_source[static_cast<std::size_t>(e.from)].push_back(e.count);
    std::vector<long> thresholds(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i)
        thresholds[static_cast<std::size_t>(i)] =
            quantile_threshold(per_source[static_cast<std::size_t>(i)], params.eta);
    for (std::size_t k = 0; k < all.size(); ++k)
        kept[k] = all[k].count >= thresholds[static_cast<std::size_t>(all[k].from)];

    auto kept_edges = [&]() {
        std::vector<Edge> es;
        for (std::size_t k = 0; k < all.size(); ++k)
            if (kept[k]) es.push_back(all[k]);
        return es;
    };

    // Fallback: if filtering cut every start-to-end path, re-insert the
    // highest-count pruned edge that leaves the reachable region, repeat.
    for (std::size_t guard = 0; guard <= all.size(); ++guard) {
        auto [reach, coreach] = reach_sets(n, g.start, g.end, kept_edges());
        if (reach[static_cast<std::size_t>(g.end)]) break;
        long best = -1;
        std::size_t best_k = all.size();
        for (std::size_t k = 0; k < all.size(); ++k) {
            if (kept[k]) continue;
            if (!reach[static_cast<std::size_t>(all[k].from)]) continue;
            if (reach[static_cast<std::size_t>(all[k].to)]) continue;
            if (all[k].count > best) {
                best = all[k].count;
                best_k = k;
            }
        }
        if (best_k == all.size())
            throw ModelError("frequency filtering disconnected the graph beyond repair");
        kept[best_k] = 1;
        log_warn("frequency filter disconnected the graph; restored edge with count " +
                 std::to_string(best));
    }

    // Retain only nodes on some start-to-end path; edges between them survive.
    auto [reach, coreach] = reach_sets(n, g.start, g.end, kept_edges());
    for (const Edge& e : kept_edges()) {
        if (reach[static_cast<std::size_t>(e.from)] && coreach[static_cast<std::size_t>(e.from)] &&
            reach[static_cast<std::size_t>(e.to)] && coreach[static_cast<std::size_t>(e.to)])
            g.edges.push_back(e);
    }
    if (g.edges.empty()) throw ModelError("no edges survive filtering");
    return g;
}

// Builds the gateway-structured model from the filtered graph. Each kept edge
// (u, v) becomes one sequence flow from u's exit structure to v's entry
// structure; parallel sibling groups get AND gateways, alternatives XOR.
class ModelBuilder {
public:
    ModelBuilder(const DirectlyFollowsGraph& dfg, FilteredGraph graph)
        : dfg_(dfg), g_(std::move(graph)) {}

    ProcessModel build() {
        collect_nodes();
        for (int n : ordered_nodes_) make_core_node(n);
        for (int n : ordered_nodes_) build_exit(n);
        for (int n : ordered_nodes_) build_entry(n);
        for (const Edge& e : g_.edges) connect(e);
        model_.finalize();
        model_.validate();
        return std::move(model_);
    }

private:
    const DirectlyFollowsGraph& dfg_;
    FilteredGraph g_;
    ProcessModel model_;
    std::vector<int> ordered_nodes_;
    std::map<int, int> core_;                      // graph node -> model node
    std::map<int, std::vector<int>> successors_;   // sorted, deduplicated
    std::map<int, std::vector<int>> predecessors_;
    // Flow endpoints per graph edge: exit_port_[{u,v}] is the model node the
    // u->v flow leaves from, entry_port_[{u,v}] the node it enters.
    std::map<std::pair<int, int>, int> exit_port_;
    std::map<std::pair<int, int>, int> entry_port_;
    int flow_seq_ = 0;

    std::string node_name(int n) const {
        if (n == g_.start) return "start";
        if (n == g_.end) return "end";
        return dfg_.activities[static_cast<std::size_t>(n)];
    }

    bool parallel(int x, int y) const {
        const int a = static_cast<int>(dfg_.activities.size());
        if (x >= a || y >= a) return false;
        return g_.parallel[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] != 0;
    }

    void collect_nodes() {
        std::set<int> seen;
        for (const Edge& e : g_.edges) {
            seen.insert(e.from);
            seen.insert(e.to);
            successors_[e.from].push_back(e.to);
            predecessors_[e.to].push_back(e.from);
        }
        for (auto& [n, v] : successors_) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }
        for (auto& [n, v] : predecessors_) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }
        // Activities in sorted-label order (== index order), then markers.
        for (int n : seen)
            if (n != g_.start && n != g_.end) ordered_nodes_.push_back(n);
        std::sort(ordered_nodes_.begin(), ordered_nodes_.end());
        ordered_nodes_.insert(ordered_nodes_.begin(), g_.start);
        ordered_nodes_.push_back(g_.end);
    }

    int add_node(NodeKind kind, const std::string& id, const std::string& label = "") {
        model_.nodes.push_back(ModelNode{id, kind, label});
        return static_cast<int>(model_.nodes.size()) - 1;
    }

    void add_flow(int from, int to) {
        model_.flows.push_back(Flow{"f" + std::to_string(flow_seq_++), from, to});
    }

    void make_core_node(int n) {
        if (n == g_.start) core_[n] = add_node(NodeKind::start, "start");
        else if (n == g_.end) core_[n] = add_node(NodeKind::finish, "end");
        else core_[n] = add_node(NodeKind::activity, "act:" + node_name(n), node_name(n));
    }

    // Groups members by the parallel relation (connected components, so a
    // chain of pairwise-parallel activities lands in one AND block).
    std::vector<std::vector<int>> parallel_groups(const std::vector<int>& members) const {
        std::vector<std::vector<int>> groups;
        std::vector<char> used(members.size(), 0);
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (used[i]) continue;
            std::vector<int> group{members[i]};
            used[i] = 1;
            for (std::size_t gi = 0; gi < group.size(); ++gi) {
                for (std::size_t j = i + 1; j < members.size(); ++j) {
                    if (!used[j] && parallel(group[gi], members[j])) {
                        used[j] = 1;
                        group.push_back(members[j]);
                    }
                }
            }
            std::sort(group.begin(), group.end());
            groups.push_back(std::move(group));
        }
        return groups;
    }

    void build_exit(int n) {
        auto it = successors_.find(n);
        if (it == successors_.end()) return;  // only the end marker
        const auto groups = parallel_groups(it->second);
        int source = core_[n];
        if (groups.size() > 1) {
            const int xs = add_node(NodeKind::xor_split, "xs:" + node_name(n));
            add_flow(source, xs);
            source = xs;
        }
        int group_no = 0;
        for (const auto& group : groups) {
            if (group.size() > 1) {
                const int as = add_node(NodeKind::and_split,
                                        "as:" + node_name(n) + ":" + std::to_string(group_no));
                add_flow(source, as);
                for (int v : group) exit_port_[{n, v}] = as;
            } else {
                exit_port_[{n, group.front()}] = source;
            }
            ++group_no;
        }
    }

    void build_entry(int n) {
        auto it = predecessors_.find(n);
        if (it == predecessors_.end()) return;  // only the start marker
        const auto groups = parallel_groups(it->second);
        int target = core_[n];
        if (groups.size() > 1) {
            const int xj = add_node(NodeKind::xor_join, "xj:" + node_name(n));
            add_flow(xj, target);
            target = xj;
        }
        int group_no = 0;
        for (const auto& group : groups) {
            if (group.size() > 1) {
                const int aj = add_node(NodeKind::and_join,
                                        "aj:" + node_name(n) + ":" + std::to_string(group_no));
                add_flow(aj, target);
                for (int u : group) entry_port_[{u, n}] = aj;
            } else {
                entry_port_[{group.front(), n}] = target;
            }
            ++group_no;
        }
    }

    void connect(const Edge& e) {
        const auto key = std::make_pair(e.from, e.to);
        if (!connected_.insert(key).second) return;
        add_flow(exit_port_.at(key), entry_port_.at(key));
    }

    std::set<std::pair<int, int>> connected_;
};

}  // namespace

ProcessModel discover_model(const EventLog& log, const DiscoveryParams& params) {
    if (log.traces.empty()) throw ModelError("cannot discover a model from an empty log");
    if (params.epsilon < 0.0 || params.epsilon > 1.0 || params.eta < 0.0 || params.eta > 1.0)
        throw ConfigError("discovery parameters must lie in [0,1]");
    const DirectlyFollowsGraph dfg = build_dfg(log);
    FilteredGraph graph = filter_graph(dfg, params);
    return ModelBuilder(dfg, std::move(graph)).build();
}

}  // namespace bpsforge
