#pragma once

#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "bpi/bn_format.hpp"
#include "bpi/factor.hpp"
#include "bpi/network.hpp"
#include "bpi/oracle.hpp"
#include "bpi/random_bn.hpp"

namespace bpi::test {

inline BayesianNetwork fixture(const std::string& name) {
    return load_network(std::string(BPI_FIXTURE_DIR) + "/" + name);
}

inline VarSet vars(const BayesianNetwork& bn, std::initializer_list<const char*> names) {
    VarSet out;
    for (const char* n : names) out.insert(bn.id_of(n));
    return out;
}

inline VarId var(const BayesianNetwork& bn, const char* name) { return bn.id_of(name); }

// Entry of f at an assignment given for (at least) its scope, computed with
// explicit strides rather than through the Factor accessors.
inline double entry(const Factor& f, const std::vector<int>& full) {
    std::size_t index = 0;
    for (std::size_t i = 0; i < f.scope().size(); ++i)
        index = index * static_cast<std::size_t>(f.cards()[i]) +
                static_cast<std::size_t>(full[static_cast<std::size_t>(f.scope().ids()[i])]);
    return f.values()[index];
}

// Calls fn(assignment) for every assignment of variables 0..cards.size()-1.
template <class Fn>
void for_each_assignment(const std::vector<int>& cards, Fn fn) {
    std::vector<int> a(cards.size(), 0);
    while (true) {
        fn(a);
        std::size_t i = cards.size();
        while (i > 0) {
            --i;
            if (++a[i] < cards[i]) break;
            a[i] = 0;
            if (i == 0) return;
        }
        if (cards.empty()) return;
    }
}

inline Factor random_factor(std::mt19937_64& rng, const VarSet& scope, const std::vector<int>& all_cards) {
    std::vector<int> cards;
    std::size_t size = 1;
    for (VarId v : scope) {
        cards.push_back(all_cards[static_cast<std::size_t>(v)]);
        size *= static_cast<std::size_t>(cards.back());
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> values(size);
    for (double& x : values) x = u(rng);
    return Factor(scope, cards, values);
}

inline void check_close(const Factor& a, const Factor& b, double tol) {
    REQUIRE(a.scope() == b.scope());
    CHECK(max_abs_diff(a, b) <= tol);
}

// The enumerated joint kept for repeated reference queries on one network.
class JointOracle {
public:
    explicit JointOracle(const BayesianNetwork& bn) : bn_(&bn), joint_(joint(bn)) {}

    Factor marginal(const EvidenceSet& ev, const VarSet& keep) const {
        return sum_out(restrict(joint_, ev), bn_->all() - keep);
    }
    double event_prob(const EvidenceSet& ev) const { return restrict(joint_, ev).sum(); }
    Factor posterior(const EvidenceSet& ev, VarId q) const { return normalize(marginal(ev, VarSet::single(q))).first; }
    // Every variable's posterior from one restriction of the joint.
    std::vector<Factor> posteriors(const EvidenceSet& ev) const {
        Factor r = restrict(joint_, ev);
        std::vector<Factor> out;
        for (VarId q : bn_->all()) out.push_back(normalize(sum_out(r, bn_->all() - VarSet::single(q))).first);
        return out;
    }

private:
    const BayesianNetwork* bn_;
    Factor joint_;
};

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace bpi::test
