#include "bpsforge/process_model.hpp"

#include <algorithm>
#include <deque>

#include <nlohmann/json.hpp>

#include "bpsforge/common.hpp"

namespace bpsforge {

const char* node_kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::start: return "start";
        case NodeKind::finish: return "end";
        case NodeKind::activity: return "activity";
        case NodeKind::xor_split: return "xor_split";
        case NodeKind::xor_join: return "xor_join";
        case NodeKind::and_split: return "and_split";
        case NodeKind::and_join: return "and_join";
    }
    return "?";
}

NodeKind node_kind_from_name(const std::string& name) {
    if (name == "start") return NodeKind::start;
    if (name == "end") return NodeKind::finish;
    if (name == "activity") return NodeKind::activity;
    if (name == "xor_split") return NodeKind::xor_split;
    if (name == "xor_join") return NodeKind::xor_join;
    if (name == "and_split") return NodeKind::and_split;
    if (name == "and_join") return NodeKind::and_join;
    throw ModelError("unknown node kind: " + name);
}

std::size_t Marking::count() const {
    std::size_t n = 0;
    for (std::uint64_t w : words_) n += static_cast<std::size_t>(__builtin_popcountll(w));
    return n;
}

std::size_t Marking::hash() const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (std::uint64_t w : words_) h = splitmix64(h ^ w);
    return static_cast<std::size_t>(h);
}

void ProcessModel::finalize() {
    out_flows_.assign(nodes.size(), {});
    in_flows_.assign(nodes.size(), {});
    node_by_id_.clear();
    flow_by_id_.clear();
    activity_by_label_.clear();
    start_node_ = -1;
    end_nodes_.clear();

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!node_by_id_.emplace(nodes[i].id, static_cast<int>(i)).second)
            throw ModelError("duplicate node id: " + nodes[i].id);
        if (nodes[i].kind == NodeKind::start) {
            if (start_node_ >= 0) throw ModelError("model has more than one start event");
            start_node_ = static_cast<int>(i);
        } else if (nodes[i].kind == NodeKind::finish) {
            end_nodes_.push_back(static_cast<int>(i));
        } else if (nodes[i].kind == NodeKind::activity) {
            if (!activity_by_label_.emplace(nodes[i].label, static_cast<int>(i)).second)
                throw ModelError("duplicate activity label: " + nodes[i].label);
        }
    }
    for (std::size_t f = 0; f < flows.size(); ++f) {
        const Flow& fl = flows[f];
        if (fl.source < 0 || fl.source >= static_cast<int>(nodes.size()) || fl.target < 0 ||
            fl.target >= static_cast<int>(nodes.size()))
            throw ModelError("flow " + fl.id + " references an unknown node");
        if (!flow_by_id_.emplace(fl.id, static_cast<int>(f)).second)
            throw ModelError("duplicate flow id: " + fl.id);
        out_flows_[static_cast<std::size_t>(fl.source)].push_back(static_cast<int>(f));
        in_flows_[static_cast<std::size_t>(fl.target)].push_back(static_cast<int>(f));
    }
}

void ProcessModel::validate() const {
    if (start_node_ < 0) throw ModelError("model has no start event");
    if (end_nodes_.empty()) throw ModelError("model has no end event");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const ModelNode& n = nodes[i];
        const std::size_t ins = in_flows_[i].size();
        const std::size_t outs = out_flows_[i].size();
        switch (n.kind) {
            case NodeKind::start:
                if (ins != 0 || outs != 1)
                    throw ModelError("start event must have 0 in-flows and 1 out-flow");
                break;
            case NodeKind::finish:
                if (outs != 0 || ins == 0)
                    throw ModelError("end event must have in-flows and no out-flows");
                break;
            case NodeKind::activity:
                if (ins != 1 || outs != 1)
                    throw ModelError("activity '" + n.label +
                                     "' must have exactly 1 in-flow and 1 out-flow");
                break;
            case NodeKind::xor_split:
            case NodeKind::and_split:
                if (ins != 1 || outs < 2)
                    throw ModelError("split gateway " + n.id +
                                     " must have 1 in-flow and >=2 out-flows");
                break;
            case NodeKind::xor_join:
            case NodeKind::and_join:
                if (ins < 2 || outs != 1)
                    throw ModelError("join gateway " + n.id +
                                     " must have >=2 in-flows and 1 out-flow");
                break;
        }
    }

    // Reachability from start and co-reachability to some end event.
    std::vector<char> reach(nodes.size(), 0), coreach(nodes.size(), 0);
    std::deque<int> queue{start_node_};
    reach[static_cast<std::size_t>(start_node_)] = 1;
    while (!queue.empty()) {
        const int n = queue.front();
        queue.pop_front();
        for (int f : out_flows_[static_cast<std::size_t>(n)]) {
            const int to = flows[static_cast<std::size_t>(f)].target;
            if (!reach[static_cast<std::size_t>(to)]) {
                reach[static_cast<std::size_t>(to)] = 1;
                queue.push_back(to);
            }
        }
    }
    for (int e : end_nodes_) {
        coreach[static_cast<std::size_t>(e)] = 1;
        queue.push_back(e);
    }
    while (!queue.empty()) {
        const int n = queue.front();
        queue.pop_front();
        for (int f : in_flows_[static_cast<std::size_t>(n)]) {
            const int from = flows[static_cast<std::size_t>(f)].source;
            if (!coreach[static_cast<std::size_t>(from)]) {
                coreach[static_cast<std::size_t>(from)] = 1;
                queue.push_back(from);
            }
        }
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!reach[i]) throw ModelError("node " + nodes[i].id + " unreachable from start");
        if (!coreach[i]) throw ModelError("node " + nodes[i].id + " cannot reach an end event");
    }
}

int ProcessModel::node_index(const std::string& id) const {
    auto it = node_by_id_.find(id);
    if (it == node_by_id_.end()) throw ModelError("unknown node id: " + id);
    return it->second;
}

int ProcessModel::activity_index(const std::string& label) const {
    auto it = activity_by_label_.find(label);
    return it == activity_by_label_.end() ? -1 : it->second;
}

int ProcessModel::flow_index(const std::string& id) const {
    auto it = flow_by_id_.find(id);
    if (it == flow_by_id_.end()) throw ModelError("unknown flow id: " + id);
    return it->second;
}

Marking initial_marking(const ProcessModel& m) {
    Marking mk(m.flows.size());
    mk.set(m.out_flows(m.start_node()).front());
    return mk;
}

bool is_enabled(const ProcessModel& m, const Marking& mk, int node) {
    const auto& ins = m.in_flows(node);
    if (ins.empty()) return false;
    if (m.nodes[static_cast<std::size_t>(node)].kind == NodeKind::and_join) {
        for (int f : ins)
            if (!mk.test(f)) return false;
        return true;
    }
    for (int f : ins)
        if (mk.test(f)) return true;
    return false;
}

Marking fire(const ProcessModel& m, const Marking& mk, int node, int chosen_branch) {
    if (!is_enabled(m, mk, node))
        throw ModelError("firing disabled node " + m.nodes[static_cast<std::size_t>(node)].id);
    const NodeKind kind = m.nodes[static_cast<std::size_t>(node)].kind;
    Marking next = mk;

    if (kind == NodeKind::and_join) {
        for (int f : m.in_flows(node)) next.reset(f);
    } else {
        // Consume exactly one marked in-flow (XOR-join semantics; single
        // in-flow for everything else).
        for (int f : m.in_flows(node)) {
            if (next.test(f)) {
                next.reset(f);
                break;
            }
        }
    }

    auto produce = [&](int f) {
        if (next.test(f))
            throw ModelError("unsafe model: second token on flow " +
                             m.flows[static_cast<std::size_t>(f)].id);
        next.set(f);
    };

    switch (kind) {
        case NodeKind::and_split:
            for (int f : m.out_flows(node)) produce(f);
            break;
        case NodeKind::xor_split: {
            if (chosen_branch < 0)
                throw ModelError("xor split " + m.nodes[static_cast<std::size_t>(node)].id +
                                 " fired without a chosen branch");
            const auto& outs = m.out_flows(node);
            if (std::find(outs.begin(), outs.end(), chosen_branch) == outs.end())
                throw ModelError("chosen branch is not an out-flow of " +
                                 m.nodes[static_cast<std::size_t>(node)].id);
            produce(chosen_branch);
            break;
        }
        case NodeKind::finish:
            break;  // consumes only
        default:
            produce(m.out_flows(node).front());
            break;
    }
    return next;
}

std::string ProcessModel::to_json_string(int indent) const {
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array();
    for (const ModelNode& n : nodes) {
        nlohmann::json jn{{"id", n.id}, {"kind", node_kind_name(n.kind)}};
        if (n.kind == NodeKind::activity) jn["label"] = n.label;
        j["nodes"].push_back(std::move(jn));
    }
    j["flows"] = nlohmann::json::array();
    for (const Flow& f : flows) {
        j["flows"].push_back({{"id", f.id},
                              {"source", nodes[static_cast<std::size_t>(f.source)].id},
                              {"target", nodes[static_cast<std::size_t>(f.target)].id}});
    }
    return j.dump(indent);
}

ProcessModel ProcessModel::from_json_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& err) {
        throw ModelError(std::string("invalid model JSON: ") + err.what());
    }
    ProcessModel m;
    if (!j.contains("nodes") || !j.contains("flows"))
        throw ModelError("model JSON must contain 'nodes' and 'flows'");
    std::unordered_map<std::string, int> ids;
    for (const auto& jn : j["nodes"]) {
        ModelNode n;
        n.id = jn.at("id").get<std::string>();
        n.kind = node_kind_from_name(jn.at("kind").get<std::string>());
        if (jn.contains("label")) n.label = jn["label"].get<std::string>();
        ids.emplace(n.id, static_cast<int>(m.nodes.size()));
        m.nodes.push_back(std::move(n));
    }
    for (const auto& jf : j["flows"]) {
        Flow f;
        f.id = jf.at("id").get<std::string>();
        const std::string src = jf.at("source").get<std::string>();
        const std::string dst = jf.at("target").get<std::string>();
        auto si = ids.find(src), di = ids.find(dst);
        if (si == ids.end() || di == ids.end())
            throw ModelError("flow " + f.id + " references an unknown node id");
        f.source = si->second;
        f.target = di->second;
        m.flows.push_back(std::move(f));
    }
    m.finalize();
    m.validate();
    return m;
}

}  // namespace bpsforge
