#pragma once

#include <map>
#include <optional>
#include <vector>

#include "bp_build.hpp"
#include "evidence.hpp"
#include "factor.hpp"
#include "messaging.hpp"
#include "posterior.hpp"
#include "propagator.hpp"

namespace bpi {

// Evidence-free border marginals Pr{B}, in border order (parents first).
std::vector<Factor> preload_priors(const BorderPolytree& bp);

// Border messages. Inbound messages are keyed by the sending border: from a
// parent, the factor over the parent's members; from a child, a factor over a
// subset of the receiver's members. Indicators enter through the restricted
// cohort tables, so each evidence variable is weighted where it is recruited.
class BpKernel {
public:
    BpKernel(const BorderPolytree& bp, const Tree& tree, const std::vector<Factor>& priors)
        : bp_(&bp), tree_(&tree), priors_(&priors) {}

    // Outside parent: its prior times its indicator. Outside child: I of the receiver.
    Factor boundary(NodeId from, NodeId to, const EvidenceSet& ev) const;
    // Π(B) over the members of B.
    Factor border_pi(NodeId b, const Inbound& in, const EvidenceSet& ev) const;
    // Λ(B): product of the messages from B's children present in `in`.
    Factor border_lambda(NodeId b, const Inbound& in) const;
    // Message from a border to one of its children.
    Factor pi_message(NodeId from, NodeId to, const Inbound& in, const EvidenceSet& ev) const;
    // Message from a border to one of its parents.
    Factor lambda_message(NodeId from, NodeId to, const Inbound& in, const EvidenceSet& ev) const;

    Factor compute(NodeId from, NodeId to, const Inbound& in, const EvidenceSet& ev) const;
    Factor belief(NodeId node, const Inbound& in, const EvidenceSet& ev) const;
    std::vector<Factor> compute_outgoing(NodeId from, const std::vector<NodeId>& targets, const Inbound& all,
                                         const EvidenceSet& ev, bool divide) const;

private:
    const Border& border(NodeId b) const { return bp_->borders[static_cast<std::size_t>(b)]; }
    const Factor* from_neighbor(const Inbound& in, NodeId w) const;

    const BorderPolytree* bp_;
    const Tree* tree_;
    const std::vector<Factor>* priors_;
};

// A border polytree with its tree and priors, ready for repeated queries.
// Sessions keep references into the engine, so it must outlive them.
class BpEngine {
public:
    explicit BpEngine(const BayesianNetwork& bn);
    explicit BpEngine(BorderPolytree bp);

    const BayesianNetwork& network() const { return *bp_.source; }
    const BorderPolytree& bp() const { return bp_; }
    const Tree& tree() const { return tree_; }
    const std::vector<Factor>& priors() const { return priors_; }
    BpKernel kernel() const { return BpKernel(bp_, tree_, priors_); }

    // Lowest-id border containing v.
    NodeId home(VarId v) const;
    // Border with exactly these members, if any.
    std::optional<NodeId> find_border(const VarSet& members) const;

    QueryResult query(const EvidenceSet& ev, const std::vector<VarId>& queries,
                      std::optional<NodeId> pivot = std::nullopt) const;
    // Every border's Pr{B, evidence} from an unpruned sweep.
    std::vector<Factor> sweep_beliefs(const EvidenceSet& ev, bool divide) const;
    // Posterior of every variable (index = variable id) from one sweep.
    std::vector<Posterior> asynchronous_sweep(const EvidenceSet& ev, bool divide = false) const;

private:
    BorderPolytree bp_;
    Tree tree_;
    std::vector<Factor> priors_;
};

// Incremental evidence over one engine: messages are memoized across
// evidence changes, and the previous pivot is kept while it stays valid.
class QuerySession {
public:
    explicit QuerySession(const BpEngine& engine);

    const BpEngine& engine() const { return *engine_; }
    const EvidenceSet& evidence() const { return session_.evidence(); }
    double evidence_prob() const { return session_.evidence_prob(); }
    SessionCounts counts() const { return session_.counts(); }
    std::vector<NodeId> pivots() const;
    const std::map<int, TreeSession<BpKernel>::Component>& components() const { return session_.components(); }
    std::size_t cached_messages() const { return session_.propagator().cached(); }
    // Core borders of every evidential component, ascending.
    std::vector<NodeId> core() const;

    // Each of these throws ImpossibleEvidence and leaves the session as it was.
    void set_evidence(const EvidenceSet& ev, std::optional<NodeId> pivot = std::nullopt);
    void observe(VarId v, std::vector<int> allowed);
    void retract(VarId v);
    void reset() { set_evidence(EvidenceSet{}); }

    Posterior posterior(VarId q);
    // Pr{B, evidence}.
    Factor border_belief(NodeId b) { return session_.belief(b); }

private:
    const BpEngine* engine_;
    TreeSession<BpKernel> session_;
};

QueryResult bp_query(const BayesianNetwork& bn, const EvidenceSet& ev, const std::vector<VarId>& queries,
                     std::optional<NodeId> pivot = std::nullopt);

}  // namespace bpi
