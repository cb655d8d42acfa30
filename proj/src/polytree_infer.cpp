#include "bpi/polytree_infer.hpp"

#include "bpi/errors.hpp"

namespace bpi {

namespace {

Factor single_indicator(const BayesianNetwork& bn, VarId x, const EvidenceSet& ev) {
    VarSet s = VarSet::single(x);
    auto cards = bn.cards(s);
    return restrict(Factor::ones(s, cards), ev);
}

// All positive entries: safe to divide by.
bool strictly_positive(const Factor& f) {
    for (double x : f.values())
        if (!(x > 0.0)) return false;
    return true;
}

}  // namespace

Tree polytree_of(const BayesianNetwork& bn) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (VarId v = 0; v < static_cast<VarId>(bn.size()); ++v)
        for (VarId p : bn.parent_set(v)) edges.emplace_back(p, v);
    try {
        return Tree(bn.size(), std::move(edges));
    } catch (const InvalidArgument&) {
        throw InvalidArgument("network is not singly connected");
    }
}

std::vector<Factor> polytree_priors(const BayesianNetwork& bn) {
    std::vector<Factor> priors(bn.size());
    for (VarId v : topological_order(bn)) {
        Factor f = bn.cpt(v);
        for (VarId p : bn.parent_set(v)) f = multiply(f, priors[static_cast<std::size_t>(p)]);
        priors[static_cast<std::size_t>(v)] = marginal(f, VarSet::single(v));
    }
    return priors;
}

Factor PolytreeKernel::local(VarId x, const EvidenceSet& ev) const { return restrict(bn_->cpt(x), ev); }

Factor PolytreeKernel::boundary(NodeId from, NodeId to, const EvidenceSet& ev) const {
    if (tree_->is_edge(from, to))
        return restrict((*priors_)[static_cast<std::size_t>(from)], ev);
    return single_indicator(*bn_, to, ev);
}

Factor PolytreeKernel::node_pi(VarId x, const Inbound& in, const EvidenceSet& ev) const {
    Factor f = local(x, ev);
    for (const auto& [w, m] : in)
        if (tree_->is_edge(w, x)) f = multiply(f, m);
    return marginal(f, VarSet::single(x));
}

Factor PolytreeKernel::node_lambda(VarId x, const Inbound& in, const EvidenceSet& ev) const {
    Factor f = single_indicator(*bn_, x, ev);
    for (const auto& [w, m] : in)
        if (tree_->is_edge(x, w)) f = multiply(f, m);
    return f;
}

Factor PolytreeKernel::pi_message(VarId x, VarId y, const Inbound& in, const EvidenceSet& ev) const {
    Factor f = node_pi(x, in, ev);
    for (const auto& [w, m] : in)
        if (w != y && tree_->is_edge(x, w)) f = multiply(f, m);
    return f;
}

Factor PolytreeKernel::lambda_message(VarId x, VarId h, const Inbound& in, const EvidenceSet& ev) const {
    Factor f = local(x, ev);
    for (const auto& [w, m] : in)
        if (w != h) f = multiply(f, m);
    return marginal(f, VarSet::single(h));
}

Factor PolytreeKernel::compute(NodeId from, NodeId to, const Inbound& in, const EvidenceSet& ev) const {
    return tree_->is_edge(from, to) ? pi_message(from, to, in, ev) : lambda_message(from, to, in, ev);
}

Factor PolytreeKernel::belief(NodeId node, const Inbound& in, const EvidenceSet& ev) const {
    return multiply(node_pi(node, in, ev), node_lambda(node, in, ev));
}

std::vector<Factor> PolytreeKernel::compute_outgoing(NodeId from, const std::vector<NodeId>& targets,
                                                     const Inbound& all, const EvidenceSet& ev, bool divide) const {
    const VarId x = from;
    Factor pi = node_pi(x, all, ev);
    Factor lam_all = Factor::scalar(1.0);   // ∏ Λ_C(X) over all children
    Factor pi_all = Factor::scalar(1.0);    // ∏ Π_X(H) over all parents
    for (const auto& [w, m] : all) {
        if (tree_->is_edge(x, w)) lam_all = multiply(lam_all, m);
        else pi_all = multiply(pi_all, m);
    }
    std::vector<Factor> out;
    for (NodeId t : targets) {
        const Factor* own = nullptr;
        for (const auto& [w, m] : all)
            if (w == t) own = &m;
        if (tree_->is_edge(x, t)) {
            if (divide && own && strictly_positive(*own)) out.push_back(multiply(pi, bpi::divide(lam_all, *own)));
            else out.push_back(pi_message(x, t, all, ev));
        } else {
            if (divide && own && strictly_positive(*own)) {
                Factor f = multiply(multiply(local(x, ev), lam_all), bpi::divide(pi_all, *own));
                out.push_back(marginal(f, VarSet::single(t)));
            } else {
                out.push_back(lambda_message(x, t, all, ev));
            }
        }
    }
    return out;
}

PolytreeEngine::PolytreeEngine(const BayesianNetwork& bn)
    : bn_(&bn), tree_(polytree_of(bn)), priors_(polytree_priors(bn)) {}

QueryResult PolytreeEngine::query(const EvidenceSet& ev, const std::vector<VarId>& queries,
                                  std::optional<VarId> pivot) const {
    std::vector<VarSet> vars;
    for (VarId v = 0; v < static_cast<VarId>(bn_->size()); ++v) vars.push_back(VarSet::single(v));
    TreeSession<PolytreeKernel> session(tree_, std::move(vars), kernel());
    session.set_evidence(ev, pivot);
    QueryResult r;
    r.evidence_prob = session.evidence_prob();
    r.collection_messages = session.counts().collection;
    for (const auto& [c, comp] : session.components()) r.pivots.push_back(comp.pivot);
    for (VarId q : queries) r.posteriors.emplace(q, make_posterior(session.belief(q)));
    r.distribution_messages = session.counts().distribution;
    return r;
}

std::vector<Posterior> PolytreeEngine::sweep(const EvidenceSet& ev, bool divide) const {
    std::vector<Posterior> out;
    for (Factor& b : full_sweep(tree_, kernel(), ev, divide)) out.push_back(make_posterior(std::move(b)));
    return out;
}

QueryResult polytree_query(const BayesianNetwork& bn, const EvidenceSet& ev, const std::vector<VarId>& queries,
                           std::optional<VarId> pivot) {
    return PolytreeEngine(bn).query(ev, queries, pivot);
}

}  // namespace bpi
