#include "bpi/bp_infer.hpp"

#include <algorithm>

#include "bpi/errors.hpp"

namespace bpi {

namespace {

bool strictly_positive(const Factor& f) {
    return std::all_of(f.values().begin(), f.values().end(), [](double x) { return x > 0.0; });
}

Factor indicator_over(const BayesianNetwork& bn, const VarSet& scope, const EvidenceSet& ev) {
    auto cards = bn.cards(scope);
    return indicator(scope, cards, ev);
}

std::size_t at(NodeId x) { return static_cast<std::size_t>(x); }

}  // namespace

std::vector<Factor> preload_priors(const BorderPolytree& bp) {
    std::vector<Factor> priors(bp.borders.size());
    for (const Border& b : bp.borders) {
        Factor f;
        switch (b.kind) {
            case Border::Kind::Root:
                f = b.cohort_table;
                break;
            case Border::Kind::Type1:
                f = marginal(multiply(b.cohort_table, priors[at(b.parents[0])]), b.members);
                break;
            case Border::Kind::Type2:
                f = Factor::scalar(1.0);
                for (std::size_t k = 0; k < b.parents.size(); ++k)
                    f = multiply(f, marginal(priors[at(b.parents[k])], b.carried[k]));
                break;
        }
        priors[at(b.id)] = std::move(f);
    }
    return priors;
}

const Factor* BpKernel::from_neighbor(const Inbound& in, NodeId w) const {
    for (const auto& [n, m] : in)
        if (n == w) return &m;
    return nullptr;
}

Factor BpKernel::boundary(NodeId from, NodeId to, const EvidenceSet& ev) const {
    if (tree_->is_edge(from, to)) return restrict((*priors_)[at(from)], ev);
    return indicator_over(*bp_->source, border(to).members, ev);
}

Factor BpKernel::border_pi(NodeId b, const Inbound& in, const EvidenceSet& ev) const {
    const Border& bd = border(b);
    auto parent_msg = [&](NodeId p) -> const Factor& {
        const Factor* m = from_neighbor(in, p);
        if (!m) throw InvalidArgument("missing prerequisite message " + std::to_string(p) + "->" + std::to_string(b));
        return *m;
    };
    switch (bd.kind) {
        case Border::Kind::Root:
            return restrict(bd.cohort_table, ev);
        case Border::Kind::Type1:
            return marginal(multiply(restrict(bd.cohort_table, ev), parent_msg(bd.parents[0])), bd.members);
        case Border::Kind::Type2: {
            Factor f = Factor::scalar(1.0);
            for (std::size_t k = 0; k < bd.parents.size(); ++k)
                f = multiply(f, marginal(parent_msg(bd.parents[k]), bd.carried[k]));
            return f;
        }
    }
    return Factor::scalar(1.0);
}

Factor BpKernel::border_lambda(NodeId b, const Inbound& in) const {
    Factor f = Factor::scalar(1.0);
    for (const auto& [w, m] : in)
        if (tree_->is_edge(b, w)) f = multiply(f, m);
    return f;
}

Factor BpKernel::pi_message(NodeId from, NodeId to, const Inbound& in, const EvidenceSet& ev) const {
    Factor f = border_pi(from, in, ev);
    for (const auto& [w, m] : in)
        if (w != to && tree_->is_edge(from, w)) f = multiply(f, m);
    return f;
}

Factor BpKernel::lambda_message(NodeId from, NodeId to, const Inbound& in, const EvidenceSet& ev) const {
    const Border& bd = border(from);
    Factor lam = Factor::scalar(1.0);
    for (const auto& [w, m] : in)
        if (w != to && tree_->is_edge(from, w)) lam = multiply(lam, m);
    if (bd.kind == Border::Kind::Type1)
        return sum_out(multiply(restrict(bd.cohort_table, ev), lam), bd.cohort);
    // Junction: weight by the other parents' carried marginals, keep this parent's part.
    std::size_t mine = bd.parents.size();
    for (std::size_t k = 0; k < bd.parents.size(); ++k) {
        if (bd.parents[k] == to) {
            mine = k;
            continue;
        }
        const Factor* m = from_neighbor(in, bd.parents[k]);
        if (!m) throw InvalidArgument("missing prerequisite message " + std::to_string(bd.parents[k]) + "->" +
                                      std::to_string(from));
        lam = multiply(lam, marginal(*m, bd.carried[k]));
    }
    if (mine == bd.parents.size()) throw InvalidArgument("border " + std::to_string(to) + " is not a parent");
    return marginal(lam, bd.carried[mine]);
}

Factor BpKernel::compute(NodeId from, NodeId to, const Inbound& in, const EvidenceSet& ev) const {
    return tree_->is_edge(from, to) ? pi_message(from, to, in, ev) : lambda_message(from, to, in, ev);
}

Factor BpKernel::belief(NodeId node, const Inbound& in, const EvidenceSet& ev) const {
    return multiply(border_pi(node, in, ev), border_lambda(node, in));
}

std::vector<Factor> BpKernel::compute_outgoing(NodeId from, const std::vector<NodeId>& targets, const Inbound& all,
                                               const EvidenceSet& ev, bool divide) const {
    const Border& bd = border(from);
    std::vector<Factor> out;
    std::optional<Factor> pi, lam_all, carried_all;
    for (NodeId t : targets) {
        const Factor* own = from_neighbor(all, t);
        if (tree_->is_edge(from, t)) {
            if (divide && own && strictly_positive(*own)) {
                if (!pi) pi = border_pi(from, all, ev);
                if (!lam_all) lam_all = border_lambda(from, all);
                out.push_back(multiply(*pi, bpi::divide(*lam_all, *own)));
            } else {
                Inbound rest;
                for (const auto& [w, m] : all)
                    if (w != t) rest.emplace_back(w, m);
                out.push_back(pi_message(from, t, rest, ev));
            }
            continue;
        }
        // Toward a parent. Only a junction has several parents to divide out.
        auto k = std::find(bd.parents.begin(), bd.parents.end(), t) - bd.parents.begin();
        if (divide && bd.kind == Border::Kind::Type2 && own) {
            Factor mine = marginal(*own, bd.carried[static_cast<std::size_t>(k)]);
            if (strictly_positive(mine)) {
                if (!lam_all) lam_all = border_lambda(from, all);
                if (!carried_all) {
                    carried_all = Factor::scalar(1.0);
                    for (std::size_t j = 0; j < bd.parents.size(); ++j)
                        carried_all = multiply(*carried_all, marginal(*from_neighbor(all, bd.parents[j]), bd.carried[j]));
                }
                Factor f = multiply(*lam_all, bpi::divide(*carried_all, mine));
                out.push_back(marginal(f, bd.carried[static_cast<std::size_t>(k)]));
                continue;
            }
        }
        out.push_back(lambda_message(from, t, all, ev));
    }
    return out;
}

BpEngine::BpEngine(const BayesianNetwork& bn) : BpEngine(build_bp(bn)) {}

BpEngine::BpEngine(BorderPolytree bp) : bp_(std::move(bp)), tree_(bp_.tree()), priors_(preload_priors(bp_)) {}

NodeId BpEngine::home(VarId v) const {
    for (const Border& b : bp_.borders)
        if (b.members.contains(v)) return b.id;
    throw InvalidArgument("variable " + std::to_string(v) + " is in no border");
}

std::optional<NodeId> BpEngine::find_border(const VarSet& members) const {
    for (const Border& b : bp_.borders)
        if (b.members == members) return b.id;
    return std::nullopt;
}

QueryResult BpEngine::query(const EvidenceSet& ev, const std::vector<VarId>& queries,
                            std::optional<NodeId> pivot) const {
    QuerySession session(*this);
    session.set_evidence(ev, pivot);
    QueryResult r;
    r.evidence_prob = session.evidence_prob();
    r.collection_messages = session.counts().collection;
    r.pivots = session.pivots();
    for (VarId q : queries) r.posteriors.emplace(q, session.posterior(q));
    r.distribution_messages = session.counts().distribution;
    return r;
}

std::vector<Factor> BpEngine::sweep_beliefs(const EvidenceSet& ev, bool divide) const {
    return full_sweep(tree_, kernel(), ev, divide);
}

std::vector<Posterior> BpEngine::asynchronous_sweep(const EvidenceSet& ev, bool divide) const {
    auto beliefs = sweep_beliefs(ev, divide);
    std::vector<Posterior> out;
    for (VarId v = 0; v < static_cast<VarId>(network().size()); ++v)
        out.push_back(make_posterior(marginal(beliefs[at(home(v))], VarSet::single(v))));
    return out;
}

QuerySession::QuerySession(const BpEngine& engine)
    : engine_(&engine), session_(engine.tree(), engine.bp().member_sets(), engine.kernel()) {}

std::vector<NodeId> QuerySession::pivots() const {
    std::vector<NodeId> out;
    for (const auto& [c, comp] : session_.components()) out.push_back(comp.pivot);
    return out;
}

std::vector<NodeId> QuerySession::core() const {
    std::vector<NodeId> out;
    for (const auto& [c, comp] : session_.components())
        out.insert(out.end(), comp.core.nodes.begin(), comp.core.nodes.end());
    std::sort(out.begin(), out.end());
    return out;
}

void QuerySession::set_evidence(const EvidenceSet& ev, std::optional<NodeId> pivot) {
    if (pivot || session_.components().size() != 1) {
        session_.set_evidence(ev, pivot);
        return;
    }
    // Keep the previous pivot when it is still in a minimum core.
    try {
        session_.set_evidence(ev, session_.components().begin()->second.pivot);
    } catch (const InvalidArgument&) {
        session_.set_evidence(ev);
    }
}

void QuerySession::observe(VarId v, std::vector<int> allowed) {
    EvidenceSet ev = evidence();
    ev.set(v, std::move(allowed), engine_->network().card(v));
    set_evidence(ev);
}

void QuerySession::retract(VarId v) {
    EvidenceSet ev = evidence();
    ev.retract(v);
    set_evidence(ev);
}

Posterior QuerySession::posterior(VarId q) {
    return make_posterior(marginal(session_.belief(engine_->home(q)), VarSet::single(q)));
}

QueryResult bp_query(const BayesianNetwork& bn, const EvidenceSet& ev, const std::vector<VarId>& queries,
                     std::optional<NodeId> pivot) {
    return BpEngine(bn).query(ev, queries, pivot);
}

}  // namespace bpi
