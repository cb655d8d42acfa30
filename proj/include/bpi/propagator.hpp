#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "evidence.hpp"
#include "factor.hpp"
#include "messaging.hpp"
#include "varset.hpp"

namespace bpi {

using Inbound = std::vector<std::pair<NodeId, Factor>>;

// A Kernel supplies, for a tree whose nodes carry variable sets:
//   Factor boundary(NodeId from, NodeId to, const EvidenceSet&) const;
//   Factor compute(NodeId from, NodeId to, const Inbound&, const EvidenceSet&) const;
//   Factor belief(NodeId node, const Inbound&, const EvidenceSet&) const;
//   std::vector<Factor> compute_outgoing(NodeId from, const std::vector<NodeId>& targets,
//                                        const Inbound& all, const EvidenceSet&, bool divide) const;
//
// A message from -> to is a boundary message when every evidence variable on
// the sender's side of the edge is also a variable of the receiver. Boundary
// messages come from the kernel's closed form; all others are computed from
// inbound messages and memoized under (edge, evidence behind the sender).
template <class Kernel>
class Propagator {
public:
    Propagator(const Tree& tree, std::vector<VarSet> node_vars, Kernel kernel)
        : tree_(&tree), vars_(std::move(node_vars)), kernel_(std::move(kernel)) {
        for (auto [p, c] : tree.edges()) {
            behind_[{p, c}] = union_of(side_of(tree, p, c));
            behind_[{c, p}] = union_of(side_of(tree, c, p));
        }
    }

    const Tree& tree() const { return *tree_; }
    const Kernel& kernel() const { return kernel_; }
    const VarSet& vars(NodeId x) const { return vars_.at(static_cast<std::size_t>(x)); }
    const VarSet& behind(NodeId from, NodeId to) const { return behind_.at({from, to}); }

    bool is_boundary(NodeId from, NodeId to, const EvidenceSet& ev) const {
        return vars(to).contains_all(ev.variables_in(behind(from, to)));
    }

    bool available(NodeId from, NodeId to, const EvidenceSet& ev) const {
        return is_boundary(from, to, ev) || cache_.count(key(from, to, ev)) != 0;
    }

    // Boundary or memoized message; throws when neither.
    Factor incoming(NodeId from, NodeId to, const EvidenceSet& ev) const {
        if (is_boundary(from, to, ev)) return kernel_.boundary(from, to, ev);
        auto it = cache_.find(key(from, to, ev));
        if (it == cache_.end())
            throw InvalidArgument("missing prerequisite message " + std::to_string(from) + "->" + std::to_string(to));
        return it->second;
    }

    Inbound inbound(NodeId node, std::optional<NodeId> except, const EvidenceSet& ev) const {
        Inbound in;
        for (NodeId w : tree_->neighbors(node))
            if (!except || w != *except) in.emplace_back(w, incoming(w, node, ev));
        return in;
    }

    // Executes one scheduled message.
    void send(NodeId from, NodeId to, const EvidenceSet& ev) {
        ++sent_;
        if (is_boundary(from, to, ev)) return;
        auto k = key(from, to, ev);
        if (cache_.count(k)) return;
        cache_.emplace(std::move(k), kernel_.compute(from, to, inbound(from, to, ev), ev));
        ++computed_;
    }

    void execute(const Schedule& schedule, const EvidenceSet& ev) {
        for (const Message& m : schedule) send(m.from, m.to, ev);
    }

    Factor belief(NodeId node, const EvidenceSet& ev) const {
        return kernel_.belief(node, inbound(node, std::nullopt, ev), ev);
    }

    std::size_t sent() const { return sent_; }
    std::size_t computed() const { return computed_; }
    std::size_t cached() const { return cache_.size(); }
    void clear_cache() { cache_.clear(); }

private:
    using Key = std::tuple<NodeId, NodeId, std::string>;

    VarSet union_of(const std::vector<NodeId>& nodes) const {
        VarSet out;
        for (NodeId v : nodes) out |= vars(v);
        return out;
    }
    Key key(NodeId from, NodeId to, const EvidenceSet& ev) const {
        return {from, to, ev.fingerprint(behind(from, to))};
    }

    const Tree* tree_;
    std::vector<VarSet> vars_;
    Kernel kernel_;
    std::map<std::pair<NodeId, NodeId>, VarSet> behind_;
    std::map<Key, Factor> cache_;
    std::size_t sent_ = 0;
    std::size_t computed_ = 0;
};

struct SessionCounts {
    std::size_t collection = 0;    // messages scheduled in the last collection
    std::size_t distribution = 0;  // messages scheduled by distribution since
    std::size_t computed = 0;      // messages actually evaluated since
};

// Pruned two-phase inference over a forest: per evidential component, a
// minimal core, collection to a pivot, then gate-based distribution on demand.
template <class Kernel>
class TreeSession {
public:
    struct Component {
        EvidentialCore core;
        NodeId pivot = 0;
        std::vector<NodeId> informed;
        double evidence_prob = 1.0;
    };

    TreeSession(const Tree& tree, std::vector<VarSet> node_vars, Kernel kernel)
        : prop_(tree, std::move(node_vars), std::move(kernel)) {}

    // Throws ImpossibleEvidence (state left unchanged) or InvalidArgument for
    // a pivot that is not in a minimum core.
    void set_evidence(const EvidenceSet& ev, std::optional<NodeId> pivot = std::nullopt) {
        const Tree& tree = prop_.tree();
        std::map<int, std::vector<VarId>> by_comp;
        for (VarId e : ev.variables()) {
            auto homes = homes_of(e);
            if (homes.empty()) throw InvalidArgument("evidence variable not in any node");
            by_comp[tree.component(homes.front())].push_back(e);
        }
        if (pivot && !by_comp.count(tree.component(*pivot)))
            throw InvalidArgument("pivot is in a component without evidence");

        std::map<int, Component> comps;
        const std::size_t before_sent = prop_.sent(), before_computed = prop_.computed();
        double prob = 1.0;
        for (const auto& [c, evars] : by_comp) {
            std::vector<std::vector<NodeId>> groups;
            for (VarId e : evars) groups.push_back(homes_of(e));
            Component comp;
            comp.core = covering_core(tree, groups);
            if (pivot && tree.component(*pivot) == c) {
                EvidentialCore rooted = covering_core(tree, groups, *pivot);
                if (rooted.nodes.size() != comp.core.nodes.size())
                    throw InvalidArgument("pivot " + std::to_string(*pivot) + " is not in a minimum evidential core");
                comp.core = std::move(rooted);
                comp.pivot = *pivot;
            } else {
                comp.pivot = default_pivot(comp.core, evars.front());
            }
            prop_.execute(collection_schedule(tree, comp.core, comp.pivot), ev);
            comp.informed = {comp.pivot};
            comp.evidence_prob = prop_.belief(comp.pivot, ev).sum();
            prob *= comp.evidence_prob;
            comps.emplace(c, std::move(comp));
        }
        if (!(prob > 0.0)) throw ImpossibleEvidence();
        ev_ = ev;
        comps_ = std::move(comps);
        evidence_prob_ = prob;
        counts_ = SessionCounts{prop_.sent() - before_sent, 0, prop_.computed() - before_computed};
        mark_sent_ = prop_.sent();
        mark_computed_ = before_computed;
    }

    const EvidenceSet& evidence() const { return ev_; }
    double evidence_prob() const { return evidence_prob_; }
    const std::map<int, Component>& components() const { return comps_; }
    SessionCounts counts() const {
        SessionCounts c = counts_;
        c.distribution = prop_.sent() - mark_sent_;
        c.computed = prop_.computed() - mark_computed_;
        return c;
    }
    const Propagator<Kernel>& propagator() const { return prop_; }

    // Distributes toward `node` through its gate; returns the gate and the
    // number of messages scheduled.
    std::pair<NodeId, std::size_t> inform(NodeId node) {
        auto it = comps_.find(prop_.tree().component(node));
        if (it == comps_.end()) return {node, 0};
        Distribution d = distribution_schedule(prop_.tree(), it->second.informed, node);
        prop_.execute(d.schedule, ev_);
        for (NodeId v : d.path)
            if (std::find(it->second.informed.begin(), it->second.informed.end(), v) == it->second.informed.end())
                it->second.informed.push_back(v);
        return {d.gate, d.schedule.size()};
    }

    // Pr{node variables, evidence} over the whole forest.
    Factor belief(NodeId node) {
        inform(node);
        Factor b = prop_.belief(node, ev_);
        const int c = prop_.tree().component(node);
        double others = 1.0;
        for (const auto& [k, comp] : comps_)
            if (k != c) others *= comp.evidence_prob;
        if (others != 1.0) {
            std::vector<double> vals = b.values();
            for (double& x : vals) x *= others;
            b = Factor(b.scope(), b.cards(), std::move(vals));
        }
        return b;
    }

    std::vector<NodeId> homes_of(VarId v) const {
        std::vector<NodeId> out;
        for (std::size_t x = 0; x < prop_.tree().size(); ++x)
            if (prop_.vars(static_cast<NodeId>(x)).contains(v)) out.push_back(static_cast<NodeId>(x));
        return out;
    }

private:
    NodeId default_pivot(const EvidentialCore& core, VarId first) const {
        for (NodeId x : core.nodes)
            if (prop_.vars(x).contains(first)) return x;
        return core.nodes.front();
    }

    Propagator<Kernel> prop_;
    EvidenceSet ev_;
    std::map<int, Component> comps_;
    double evidence_prob_ = 1.0;
    SessionCounts counts_;
    std::size_t mark_sent_ = 0;
    std::size_t mark_computed_ = 0;
};

// Unpruned propagation: every message on every edge, inward to the lowest id
// of each component and back out, with no boundary shortcuts. Returns the
// belief of every node: the joint of its variables with all evidence.
template <class Kernel>
std::vector<Factor> full_sweep(const Tree& tree, const Kernel& kernel, const EvidenceSet& ev, bool divide) {
    std::map<std::pair<NodeId, NodeId>, Factor> store;
    auto inbound = [&](NodeId node, std::optional<NodeId> except) {
        Inbound in;
        for (NodeId w : tree.neighbors(node))
            if (!except || w != *except) in.emplace_back(w, store.at({w, node}));
        return in;
    };
    std::vector<NodeId> toward(tree.size(), -1);
    std::vector<std::vector<NodeId>> below(tree.size());
    std::vector<NodeId> order;  // pre-order per component
    std::vector<bool> seen(tree.size(), false);
    for (std::size_t r = 0; r < tree.size(); ++r) {
        if (seen[r]) continue;
        std::vector<NodeId> stack{static_cast<NodeId>(r)};
        seen[r] = true;
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            order.push_back(v);
            for (NodeId w : tree.neighbors(v)) {
                if (seen[static_cast<std::size_t>(w)]) continue;
                seen[static_cast<std::size_t>(w)] = true;
                toward[static_cast<std::size_t>(w)] = v;
                below[static_cast<std::size_t>(v)].push_back(w);
                stack.push_back(w);
            }
        }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        NodeId v = *it, up = toward[static_cast<std::size_t>(v)];
        if (up >= 0) store[{v, up}] = kernel.compute(v, up, inbound(v, up), ev);
    }
    for (NodeId v : order) {
        const auto& targets = below[static_cast<std::size_t>(v)];
        if (targets.empty()) continue;
        auto out = kernel.compute_outgoing(v, targets, inbound(v, std::nullopt), ev, divide);
        for (std::size_t i = 0; i < targets.size(); ++i) store[{v, targets[i]}] = std::move(out[i]);
    }
    std::vector<Factor> beliefs;
    for (std::size_t v = 0; v < tree.size(); ++v)
        beliefs.push_back(kernel.belief(static_cast<NodeId>(v), inbound(static_cast<NodeId>(v), std::nullopt), ev));

    // Scale each component by the evidence probability of the others.
    std::vector<double> comp_prob(tree.component_count(), -1.0);
    for (std::size_t v = 0; v < tree.size(); ++v) {
        auto c = static_cast<std::size_t>(tree.component(static_cast<NodeId>(v)));
        if (comp_prob[c] < 0.0) comp_prob[c] = beliefs[v].sum();
    }
    for (std::size_t v = 0; v < tree.size(); ++v) {
        auto c = static_cast<std::size_t>(tree.component(static_cast<NodeId>(v)));
        double others = 1.0;
        for (std::size_t k = 0; k < comp_prob.size(); ++k)
            if (k != c) others *= comp_prob[k];
        if (others == 1.0) continue;
        std::vector<double> vals = beliefs[v].values();
        for (double& x : vals) x *= others;
        beliefs[v] = Factor(beliefs[v].scope(), beliefs[v].cards(), std::move(vals));
    }
    return beliefs;
}

}  // namespace bpi
