#include "bpi/messaging.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>

#include "bpi/errors.hpp"

namespace bpi {

namespace {

std::size_t at(NodeId x) { return static_cast<std::size_t>(x); }

// BFS distances and predecessors from one source; -1 when unreachable.
struct Reach {
    std::vector<int> dist;
    std::vector<NodeId> pred;
};

Reach reach_from(const Tree& tree, NodeId source) {
    Reach r{std::vector<int>(tree.size(), -1), std::vector<NodeId>(tree.size(), -1)};
    std::deque<NodeId> queue{source};
    r.dist[at(source)] = 0;
    while (!queue.empty()) {
        NodeId x = queue.front();
        queue.pop_front();
        for (NodeId y : tree.neighbors(x)) {
            if (r.dist[at(y)] >= 0) continue;
            r.dist[at(y)] = r.dist[at(x)] + 1;
            r.pred[at(y)] = x;
            queue.push_back(y);
        }
    }
    return r;
}

// Path source..y read off predecessor links.
std::vector<NodeId> trace(const Reach& r, NodeId y) {
    std::vector<NodeId> path;
    for (NodeId v = y; v != -1; v = r.pred[at(v)]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
}

}  // namespace

Tree::Tree(std::size_t size, std::vector<std::pair<NodeId, NodeId>> edges)
    : edges_(std::move(edges)), neighbors_(size), parents_(size), children_(size), component_(size, -1) {
    std::vector<std::size_t> uf(size);
    std::iota(uf.begin(), uf.end(), std::size_t{0});
    auto find = [&](std::size_t a) {
        while (uf[a] != a) a = uf[a] = uf[uf[a]];
        return a;
    };
    for (auto [p, c] : edges_) {
        if (p < 0 || c < 0 || at(p) >= size || at(c) >= size) throw InvalidArgument("tree edge endpoint out of range");
        std::size_t a = find(at(p)), b = find(at(c));
        if (a == b) throw InvalidArgument("edges do not form a forest");
        uf[a] = b;
        neighbors_[at(p)].push_back(c);
        neighbors_[at(c)].push_back(p);
        children_[at(p)].push_back(c);
        parents_[at(c)].push_back(p);
    }
    for (std::size_t i = 0; i < size; ++i) {
        std::sort(neighbors_[i].begin(), neighbors_[i].end());
        std::sort(parents_[i].begin(), parents_[i].end());
        std::sort(children_[i].begin(), children_[i].end());
    }
    for (std::size_t i = 0; i < size; ++i) {
        if (component_[i] >= 0) continue;
        Reach r = reach_from(*this, static_cast<NodeId>(i));
        for (std::size_t j = 0; j < size; ++j)
            if (r.dist[j] >= 0) component_[j] = static_cast<int>(component_count_);
        ++component_count_;
    }
}

bool Tree::is_edge(NodeId parent, NodeId child) const {
    const auto& c = children(parent);
    return std::binary_search(c.begin(), c.end(), child);
}

std::vector<NodeId> bfs_path(const Tree& tree, NodeId x, NodeId y) {
    Reach r = reach_from(tree, x);
    if (r.dist[at(y)] < 0) throw InvalidArgument("nodes are in different components");
    return trace(r, y);
}

std::vector<NodeId> side_of(const Tree& tree, NodeId x, NodeId avoid) {
    std::vector<NodeId> out{x};
    std::vector<std::pair<NodeId, NodeId>> stack{{x, avoid}};
    while (!stack.empty()) {
        auto [v, from] = stack.back();
        stack.pop_back();
        for (NodeId w : tree.neighbors(v)) {
            if (w == from) continue;
            out.push_back(w);
            stack.push_back({w, v});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<NodeId> choose_hubs(const Tree& tree) {
    const std::size_t n = tree.size();
    if (n == 0) return {};
    const auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
        return tree.neighbors(a).size() > tree.neighbors(b).size();
    });
    std::vector<NodeId> hubs;
    std::vector<bool> taken(n, false);
    for (NodeId v : order) {
        if (hubs.size() == k) break;
        bool spread = std::none_of(hubs.begin(), hubs.end(), [&](NodeId h) { return tree.adjacent(h, v); });
        if (spread) {
            hubs.push_back(v);
            taken[at(v)] = true;
        }
    }
    for (NodeId v : order) {
        if (hubs.size() == k) break;
        if (!taken[at(v)]) hubs.push_back(v);
    }
    std::sort(hubs.begin(), hubs.end());
    return hubs;
}

HubIndex build_hub_index(const Tree& tree) { return build_hub_index(tree, choose_hubs(tree)); }

HubIndex build_hub_index(const Tree& tree, std::vector<NodeId> hubs) {
    std::sort(hubs.begin(), hubs.end());
    hubs.erase(std::unique(hubs.begin(), hubs.end()), hubs.end());
    HubIndex index;
    index.hubs = hubs;
    index.nearest.assign(tree.size(), std::nullopt);

    // Hub-to-hub paths from one depth-first walk per hub.
    for (NodeId h : hubs) {
        std::vector<NodeId> pred(tree.size(), -2);
        pred[at(h)] = -1;
        std::vector<NodeId> stack{h};
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            for (NodeId w : tree.neighbors(v)) {
                if (pred[at(w)] != -2) continue;
                pred[at(w)] = v;
                stack.push_back(w);
            }
        }
        for (NodeId g : hubs) {
            if (g == h || pred[at(g)] == -2) continue;
            std::vector<NodeId> interior;
            for (NodeId v = pred[at(g)]; v != h; v = pred[at(v)]) interior.push_back(v);
            std::reverse(interior.begin(), interior.end());
            index.hub_paths[{h, g}] = std::move(interior);
        }
    }

    // Multi-source BFS: each node keeps the path to its closest hub.
    std::vector<NodeId> toward(tree.size(), -2);
    std::deque<NodeId> queue;
    for (NodeId h : hubs) {
        toward[at(h)] = -1;
        queue.push_back(h);
    }
    while (!queue.empty()) {
        NodeId v = queue.front();
        queue.pop_front();
        for (NodeId w : tree.neighbors(v)) {
            if (toward[at(w)] != -2) continue;
            toward[at(w)] = v;
            queue.push_back(w);
        }
    }
    for (std::size_t v = 0; v < tree.size(); ++v) {
        if (toward[v] == -2) continue;
        std::vector<NodeId> path{static_cast<NodeId>(v)};
        while (toward[at(path.back())] != -1) path.push_back(toward[at(path.back())]);
        NodeId hub = path.back();
        index.nearest[v] = std::make_pair(hub, std::move(path));
    }
    return index;
}

std::vector<NodeId> tree_path(const Tree& tree, const HubIndex& index, NodeId x, NodeId y) {
    if (x == y) return {x};
    if (tree.component(x) != tree.component(y)) throw InvalidArgument("nodes are in different components");
    const auto& nx = index.nearest.at(at(x));
    const auto& ny = index.nearest.at(at(y));
    if (!nx || !ny) return bfs_path(tree, x, y);
    std::vector<NodeId> walk = nx->second;
    if (nx->first != ny->first) {
        auto it = index.hub_paths.find({nx->first, ny->first});
        if (it == index.hub_paths.end()) return bfs_path(tree, x, y);
        walk.insert(walk.end(), it->second.begin(), it->second.end());
        walk.push_back(ny->first);
    }
    walk.insert(walk.end(), ny->second.rbegin() + 1, ny->second.rend());

    // Loop erasure: from each node jump past its last occurrence.
    std::vector<NodeId> path;
    for (std::size_t i = 0; i < walk.size();) {
        path.push_back(walk[i]);
        std::size_t last = i;
        for (std::size_t j = walk.size(); j-- > i;) {
            if (walk[j] == walk[i]) {
                last = j;
                break;
            }
        }
        i = last + 1;
    }
    return path;
}

bool EvidentialCore::contains(NodeId x) const { return std::binary_search(nodes.begin(), nodes.end(), x); }

EvidentialCore core_from_nodes(const Tree& tree, std::vector<NodeId> nodes) {
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    EvidentialCore core;
    core.nodes = nodes;
    std::vector<bool> in(tree.size(), false);
    for (NodeId v : nodes) in[at(v)] = true;
    for (auto [p, c] : tree.edges())
        if (in[at(p)] && in[at(c)]) core.edges.push_back({p, c});
    std::sort(core.edges.begin(), core.edges.end());
    for (NodeId v : nodes) {
        auto inside = [&](NodeId w) { return in[at(w)]; };
        if (std::none_of(tree.parents(v).begin(), tree.parents(v).end(), inside)) core.roots.push_back(v);
        if (std::none_of(tree.children(v).begin(), tree.children(v).end(), inside)) core.leaves.push_back(v);
    }
    return core;
}

EvidentialCore evidential_core(const Tree& tree, const std::vector<NodeId>& marked) {
    if (marked.empty()) throw InvalidArgument("evidential core needs at least one marked node");
    std::vector<bool> is_marked(tree.size(), false), alive(tree.size(), false);
    std::set<int> comps;
    for (NodeId m : marked) {
        is_marked[at(m)] = true;
        comps.insert(tree.component(m));
    }
    std::vector<int> degree(tree.size(), 0);
    for (std::size_t v = 0; v < tree.size(); ++v) {
        alive[v] = comps.count(tree.component(static_cast<NodeId>(v))) != 0;
        degree[v] = static_cast<int>(tree.neighbors(static_cast<NodeId>(v)).size());
    }
    std::vector<NodeId> queue;
    for (std::size_t v = 0; v < tree.size(); ++v)
        if (alive[v] && !is_marked[v] && degree[v] <= 1) queue.push_back(static_cast<NodeId>(v));
    while (!queue.empty()) {
        NodeId v = queue.back();
        queue.pop_back();
        if (!alive[at(v)]) continue;
        alive[at(v)] = false;
        for (NodeId w : tree.neighbors(v)) {
            if (!alive[at(w)]) continue;
            if (--degree[at(w)] <= 1 && !is_marked[at(w)]) queue.push_back(w);
        }
    }
    std::vector<NodeId> nodes;
    for (std::size_t v = 0; v < tree.size(); ++v)
        if (alive[v]) nodes.push_back(static_cast<NodeId>(v));
    return core_from_nodes(tree, std::move(nodes));
}

EvidentialCore covering_core(const Tree& tree, const std::vector<std::vector<NodeId>>& groups,
                             std::optional<NodeId> root) {
    if (groups.empty()) throw InvalidArgument("covering core needs at least one group");
    std::optional<std::vector<NodeId>> best;
    auto consider = [&](NodeId r) {
        Reach reach = reach_from(tree, r);
        std::set<NodeId> nodes{r};
        for (const auto& g : groups) {
            NodeId hit = -1;
            for (NodeId v : g)
                if (reach.dist[at(v)] >= 0 && (hit < 0 || reach.dist[at(v)] < reach.dist[at(hit)])) hit = v;
            if (hit < 0) return;
            for (NodeId v : trace(reach, hit)) nodes.insert(v);
        }
        std::vector<NodeId> list(nodes.begin(), nodes.end());
        if (!best || list.size() < best->size() || (list.size() == best->size() && list < *best))
            best = std::move(list);
    };
    if (root) {
        consider(*root);
    } else {
        for (std::size_t r = 0; r < tree.size(); ++r) consider(static_cast<NodeId>(r));
    }
    if (!best) throw InvalidArgument("groups are not reachable within one component");
    return core_from_nodes(tree, std::move(*best));
}

Message make_message(const Tree& tree, NodeId from, NodeId to) {
    if (!tree.adjacent(from, to)) throw InvalidArgument("message between non-adjacent nodes");
    return Message{from, to, tree.is_edge(from, to)};
}

Schedule collection_schedule(const Tree& tree, const EvidentialCore& core, NodeId pivot) {
    if (!core.contains(pivot)) throw InvalidArgument("pivot is outside the core");
    std::vector<NodeId> toward(tree.size(), -1);
    std::vector<int> pending(tree.size(), 0);
    std::vector<NodeId> stack{pivot};
    std::vector<bool> seen(tree.size(), false);
    seen[at(pivot)] = true;
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (NodeId w : tree.neighbors(v)) {
            if (seen[at(w)] || !core.contains(w)) continue;
            seen[at(w)] = true;
            toward[at(w)] = v;
            ++pending[at(v)];
            stack.push_back(w);
        }
    }
    std::deque<NodeId> ready;
    for (NodeId v : core.nodes)
        if (v != pivot && pending[at(v)] == 0) ready.push_back(v);
    Schedule out;
    while (!ready.empty()) {
        NodeId v = ready.front();
        ready.pop_front();
        NodeId up = toward[at(v)];
        out.push_back(make_message(tree, v, up));
        if (--pending[at(up)] == 0 && up != pivot) ready.push_back(up);
    }
    return out;
}

Distribution distribution_schedule(const Tree& tree, const std::vector<NodeId>& informed, NodeId target) {
    std::vector<bool> is_informed(tree.size(), false);
    for (NodeId v : informed) is_informed[at(v)] = true;
    Distribution d;
    if (is_informed[at(target)]) {
        d.gate = target;
        d.path = {target};
        return d;
    }
    Reach r = reach_from(tree, target);
    NodeId gate = -1;
    for (std::size_t v = 0; v < tree.size(); ++v)
        if (is_informed[v] && r.dist[v] >= 0 && (gate < 0 || r.dist[v] < r.dist[at(gate)])) gate = static_cast<NodeId>(v);
    if (gate < 0) throw InvalidArgument("no informed node in the target's component");
    d.gate = gate;
    d.path = trace(r, gate);
    std::reverse(d.path.begin(), d.path.end());
    for (std::size_t i = 0; i + 1 < d.path.size(); ++i) d.schedule.push_back(make_message(tree, d.path[i], d.path[i + 1]));
    return d;
}

}  // namespace bpi
