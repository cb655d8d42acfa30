#include "bpi/oracle.hpp"

#include <functional>

#include "bpi/errors.hpp"

namespace bpi {

namespace {

// Calls visit(assignment, probability) for every full assignment, in
// row-major order with the highest id fastest.
void enumerate(const BayesianNetwork& bn, std::size_t cap,
               const std::function<void(const std::vector<int>&, double)>& visit) {
    const std::size_t n = bn.size();
    double states = 1.0;
    for (const auto& v : bn.variables()) states *= v.cardinality;
    if (states > static_cast<double>(cap))
        throw InvalidArgument("joint state space exceeds the oracle cap");

    // Per-variable CPT lookup: scope members and their row-major strides.
    std::vector<std::vector<VarId>> scope(n);
    std::vector<std::vector<std::size_t>> stride(n);
    for (std::size_t v = 0; v < n; ++v) {
        const Factor& cpt = bn.cpt(static_cast<VarId>(v));
        scope[v].assign(cpt.scope().begin(), cpt.scope().end());
        stride[v].assign(scope[v].size(), 1);
        for (std::size_t i = scope[v].size(); i-- > 1;)
            stride[v][i - 1] = stride[v][i] * static_cast<std::size_t>(cpt.cards()[i]);
    }

    std::vector<int> a(n, 0);
    while (true) {
        double p = 1.0;
        for (std::size_t v = 0; v < n && p != 0.0; ++v) {
            std::size_t idx = 0;
            for (std::size_t i = 0; i < scope[v].size(); ++i)
                idx += stride[v][i] * static_cast<std::size_t>(a[static_cast<std::size_t>(scope[v][i])]);
            p *= bn.cpt(static_cast<VarId>(v)).values()[idx];
        }
        visit(a, p);
        std::size_t k = n;
        while (k > 0) {
            --k;
            if (++a[k] < bn.card(static_cast<VarId>(k))) break;
            a[k] = 0;
            if (k == 0) return;
        }
        if (n == 0) return;
    }
}

bool consistent(const EvidenceSet& ev, const std::vector<int>& a) {
    for (const auto& [v, allowed] : ev.entries()) {
        bool ok = false;
        for (int x : allowed) ok = ok || x == a[static_cast<std::size_t>(v)];
        if (!ok) return false;
    }
    return true;
}

}  // namespace

Factor joint(const BayesianNetwork& bn, std::size_t cap) {
    std::vector<double> vals;
    enumerate(bn, cap, [&](const std::vector<int>&, double p) { vals.push_back(p); });
    return Factor(bn.all(), bn.cards(bn.all()), std::move(vals));
}

double oracle_event_prob(const BayesianNetwork& bn, const EvidenceSet& ev, std::size_t cap) {
    double total = 0.0;
    enumerate(bn, cap, [&](const std::vector<int>& a, double p) {
        if (consistent(ev, a)) total += p;
    });
    return total;
}

Factor oracle_marginal(const BayesianNetwork& bn, const EvidenceSet& ev, const VarSet& vars, std::size_t cap) {
    auto cards = bn.cards(vars);
    std::size_t size = 1;
    for (int c : cards) size *= static_cast<std::size_t>(c);
    std::vector<double> vals(size, 0.0);
    enumerate(bn, cap, [&](const std::vector<int>& a, double p) {
        if (!consistent(ev, a)) return;
        std::size_t idx = 0;
        std::size_t i = 0;
        for (VarId v : vars) idx = idx * static_cast<std::size_t>(cards[i++]) + static_cast<std::size_t>(a[static_cast<std::size_t>(v)]);
        vals[idx] += p;
    });
    return Factor(vars, std::move(cards), std::move(vals));
}

Factor oracle_posterior(const BayesianNetwork& bn, const EvidenceSet& ev, VarId q, std::size_t cap) {
    Factor m = oracle_marginal(bn, ev, VarSet::single(q), cap);
    double total = 0.0;
    for (double x : m.values()) total += x;
    if (total <= 0.0) throw ImpossibleEvidence();
    std::vector<double> vals = m.values();
    for (double& x : vals) x /= total;
    return Factor(m.scope(), m.cards(), std::move(vals));
}

}  // namespace bpi
