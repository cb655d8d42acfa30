#pragma once

#include <map>
#include <optional>
#include <vector>

#include "evidence.hpp"
#include "factor.hpp"
#include "messaging.hpp"
#include "network.hpp"
#include "posterior.hpp"
#include "propagator.hpp"

namespace bpi {

// Node graph of a singly connected network (node id = variable id). Throws
// InvalidArgument when the network has an undirected cycle.
Tree polytree_of(const BayesianNetwork& bn);

// Prior marginals Pr{V} by one topological pass (parents of a polytree node
// are independent).
std::vector<Factor> polytree_priors(const BayesianNetwork& bn);

// Edge messages over single variables. Inbound messages are keyed by the
// sending neighbor: Π_X(H) from parents, Λ_C(X) from children.
class PolytreeKernel {
public:
    PolytreeKernel(const BayesianNetwork& bn, const Tree& tree, const std::vector<Factor>& priors)
        : bn_(&bn), tree_(&tree), priors_(&priors) {}

    // Outside parent: its prior times its indicator. Outside child: I of the receiver.
    Factor boundary(NodeId from, NodeId to, const EvidenceSet& ev) const;
    // Π_Y(X), X a parent of Y.
    Factor pi_message(VarId x, VarId y, const Inbound& in, const EvidenceSet& ev) const;
    // Λ_X(H), H a parent of X.
    Factor lambda_message(VarId x, VarId h, const Inbound& in, const EvidenceSet& ev) const;
    // Π(X) = Σ_{parents} Pr_r{X|parents} ∏ Π_X(H).
    Factor node_pi(VarId x, const Inbound& in, const EvidenceSet& ev) const;
    // Λ(X) = I_X ∏ Λ_C(X).
    Factor node_lambda(VarId x, const Inbound& in, const EvidenceSet& ev) const;

    Factor compute(NodeId from, NodeId to, const Inbound& in, const EvidenceSet& ev) const;
    Factor belief(NodeId node, const Inbound& in, const EvidenceSet& ev) const;
    std::vector<Factor> compute_outgoing(NodeId from, const std::vector<NodeId>& targets, const Inbound& all,
                                         const EvidenceSet& ev, bool divide) const;

private:
    Factor local(VarId x, const EvidenceSet& ev) const;  // Pr_r{X | parents}

    const BayesianNetwork* bn_;
    const Tree* tree_;
    const std::vector<Factor>* priors_;
};

// Network preprocessed for repeated polytree queries.
class PolytreeEngine {
public:
    explicit PolytreeEngine(const BayesianNetwork& bn);

    const BayesianNetwork& network() const { return *bn_; }
    const Tree& tree() const { return tree_; }
    const std::vector<Factor>& priors() const { return priors_; }
    PolytreeKernel kernel() const { return PolytreeKernel(*bn_, tree_, priors_); }

    // Evidential core, collection to the pivot, then one distribution per
    // query. Throws ImpossibleEvidence.
    QueryResult query(const EvidenceSet& ev, const std::vector<VarId>& queries,
                      std::optional<VarId> pivot = std::nullopt) const;
    // Unpruned propagation, optionally with the division shortcuts.
    std::vector<Posterior> sweep(const EvidenceSet& ev, bool divide) const;

private:
    const BayesianNetwork* bn_;
    Tree tree_;
    std::vector<Factor> priors_;
};

QueryResult polytree_query(const BayesianNetwork& bn, const EvidenceSet& ev, const std::vector<VarId>& queries,
                           std::optional<VarId> pivot = std::nullopt);

}  // namespace bpi
