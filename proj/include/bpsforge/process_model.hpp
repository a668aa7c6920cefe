#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace bpsforge {

enum class NodeKind { start, finish, activity, xor_split, xor_join, and_split, and_join };

const char* node_kind_name(NodeKind k);
NodeKind node_kind_from_name(const std::string& name);

inline bool is_gateway(NodeKind k) {
    return k == NodeKind::xor_split || k == NodeKind::xor_join || k == NodeKind::and_split ||
           k == NodeKind::and_join;
}

struct ModelNode {
    std::string id;
    NodeKind kind = NodeKind::activity;
    std::string label;  // only meaningful for activities
};

struct Flow {
    std::string id;
    int source = -1;  // node index
    int target = -1;
};

// Token marking over sequence flows: one bit per flow.
class Marking {
public:
    Marking() = default;
    explicit Marking(std::size_t flow_count) : size_(flow_count), words_((flow_count + 63) / 64) {}

    bool test(int flow) const {
        return (words_[static_cast<std::size_t>(flow) >> 6] >> (flow & 63)) & 1u;
    }
    void set(int flow) { words_[static_cast<std::size_t>(flow) >> 6] |= 1ull << (flow & 63); }
    void reset(int flow) { words_[static_cast<std::size_t>(flow) >> 6] &= ~(1ull << (flow & 63)); }
    bool none() const {
        for (std::uint64_t w : words_)
            if (w != 0) return false;
        return true;
    }
    std::size_t count() const;
    std::size_t size() const { return size_; }

    bool operator==(const Marking& other) const { return words_ == other.words_; }
    std::size_t hash() const;

private:
    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

struct MarkingHash {
    std::size_t operator()(const Marking& m) const { return m.hash(); }
};

class ProcessModel {
public:
    std::vector<ModelNode> nodes;
    std::vector<Flow> flows;

    // Rebuilds adjacency and id lookups; call after mutating nodes/flows.
    void finalize();
    // Checks the structural invariants; throws ModelError when violated.
    void validate() const;

    int node_index(const std::string& id) const;
    int activity_index(const std::string& label) const;  // -1 when absent
    const std::vector<int>& out_flows(int node) const { return out_flows_[static_cast<std::size_t>(node)]; }
    const std::vector<int>& in_flows(int node) const { return in_flows_[static_cast<std::size_t>(node)]; }
    int start_node() const { return start_node_; }
    const std::vector<int>& end_nodes() const { return end_nodes_; }
    int flow_index(const std::string& id) const;

    std::string to_json_string(int indent = 2) const;
    static ProcessModel from_json_string(const std::string& text);

private:
    std::vector<std::vector<int>> out_flows_;
    std::vector<std::vector<int>> in_flows_;
    std::unordered_map<std::string, int> node_by_id_;
    std::unordered_map<std::string, int> flow_by_id_;
    std::unordered_map<std::string, int> activity_by_label_;
    int start_node_ = -1;
    std::vector<int> end_nodes_;
};

Marking initial_marking(const ProcessModel& m);

// AND-join: token on every in-flow. Everything else: token on any in-flow.
bool is_enabled(const ProcessModel& m, const Marking& mk, int node);

// Fires `node`, returning the successor marking. XOR splits need chosen_branch
// (a flow index among the node's out-flows). Producing a token on an already
// marked flow signals an unsafe model and throws ModelError.
Marking fire(const ProcessModel& m, const Marking& mk, int node, int chosen_branch = -1);

}  // namespace bpsforge
