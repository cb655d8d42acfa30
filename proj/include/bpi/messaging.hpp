#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace bpi {

using NodeId = int;

// Directed forest (undirected acyclic). Nodes are 0..size()-1; edges run
// parent -> child.
class Tree {
public:
    Tree() = default;
    // Throws InvalidArgument when the undirected graph has a cycle or an edge
    // endpoint is out of range.
    Tree(std::size_t size, std::vector<std::pair<NodeId, NodeId>> edges);

    std::size_t size() const { return neighbors_.size(); }
    const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }
    const std::vector<NodeId>& neighbors(NodeId x) const { return neighbors_.at(static_cast<std::size_t>(x)); }
    const std::vector<NodeId>& parents(NodeId x) const { return parents_.at(static_cast<std::size_t>(x)); }
    const std::vector<NodeId>& children(NodeId x) const { return children_.at(static_cast<std::size_t>(x)); }
    bool is_edge(NodeId parent, NodeId child) const;
    bool adjacent(NodeId x, NodeId y) const { return is_edge(x, y) || is_edge(y, x); }
    int component(NodeId x) const { return component_.at(static_cast<std::size_t>(x)); }
    std::size_t component_count() const { return component_count_; }

private:
    std::vector<std::pair<NodeId, NodeId>> edges_;
    std::vector<std::vector<NodeId>> neighbors_, parents_, children_;
    std::vector<int> component_;
    std::size_t component_count_ = 0;
};

// Breadth-first reference path (inclusive). Throws InvalidArgument when the
// nodes are in different components.
std::vector<NodeId> bfs_path(const Tree& tree, NodeId x, NodeId y);

// Nodes reachable from x without crossing the edge to `avoid` (x included).
std::vector<NodeId> side_of(const Tree& tree, NodeId x, NodeId avoid);

struct HubIndex {
    std::vector<NodeId> hubs;
    std::map<std::pair<NodeId, NodeId>, std::vector<NodeId>> hub_paths;  // interior nodes only
    std::vector<std::optional<std::pair<NodeId, std::vector<NodeId>>>> nearest;  // node -> (hub, node..hub)
};

// ceil(sqrt(n)) hubs: highest degree first, kept at least two edges apart
// while possible.
std::vector<NodeId> choose_hubs(const Tree& tree);
HubIndex build_hub_index(const Tree& tree, std::vector<NodeId> hubs);
HubIndex build_hub_index(const Tree& tree);

// x -> nearest hub -> hub -> nearest hub -> y, with every loop erased. Falls
// back to BFS when a hub is missing for either end.
std::vector<NodeId> tree_path(const Tree& tree, const HubIndex& index, NodeId x, NodeId y);

struct EvidentialCore {
    std::vector<NodeId> nodes;                       // ascending
    std::vector<std::pair<NodeId, NodeId>> edges;    // parent -> child, ascending
    std::vector<NodeId> roots;
    std::vector<NodeId> leaves;

    bool contains(NodeId x) const;
};

// Smallest subforest holding every marked node (repeated pruning of unmarked
// leaves). Throws InvalidArgument when `marked` is empty.
EvidentialCore evidential_core(const Tree& tree, const std::vector<NodeId>& marked);

// Smallest connected subtree that meets every group (each group a connected
// node set). With `root`, the smallest such subtree containing it. Ties go to
// the lexicographically least node list.
EvidentialCore covering_core(const Tree& tree, const std::vector<std::vector<NodeId>>& groups,
                             std::optional<NodeId> root = std::nullopt);

EvidentialCore core_from_nodes(const Tree& tree, std::vector<NodeId> nodes);

struct Message {
    NodeId from = 0;
    NodeId to = 0;
    bool downward = false;  // from is the parent of to

    friend bool operator==(const Message&, const Message&) = default;
};

using Schedule = std::vector<Message>;

Message make_message(const Tree& tree, NodeId from, NodeId to);

// One message per core edge, all oriented toward the pivot; messages from
// core leaves come first. Throws InvalidArgument when the pivot is outside.
Schedule collection_schedule(const Tree& tree, const EvidentialCore& core, NodeId pivot);

struct Distribution {
    NodeId gate = 0;
    std::vector<NodeId> path;  // gate .. target
    Schedule schedule;
};

// Gate: first informed node on the path from target. Throws InvalidArgument
// when no informed node shares the target's component.
Distribution distribution_schedule(const Tree& tree, const std::vector<NodeId>& informed, NodeId target);

}  // namespace bpi
