#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "evidence.hpp"
#include "factor.hpp"
#include "network.hpp"
#include "posterior.hpp"

namespace bpi {

struct ChainStep {
    std::size_t index = 0;
    std::optional<VarId> promoted;  // empty: fictitious promotion (and step 0)
    VarSet cohort;
    VarSet border;
    Factor cohort_table;  // product of the cohort's CPTs; scalar 1 for an empty cohort
    int rule = 0;         // 1..8, 0 for step 0
};

struct BorderChain {
    const BayesianNetwork* source = nullptr;
    std::vector<ChainStep> steps;

    std::size_t gamma() const { return steps.size() - 1; }
};

// A co-parentless set of roots: the closure of the first root (by id) whose
// root co-parent closure is co-parentless, else the smallest such subset of
// roots. Some DAGs have none; then the lowest root. `within` restricts the
// network to a parentless subset.
VarSet initial_border(const BayesianNetwork& bn);
VarSet initial_border(const BayesianNetwork& bn, const VarSet& within);

struct Move {
    std::optional<VarId> promoted;
    VarSet cohort;
    int rule = 0;
    VarId key = 0;  // promoted variable, or the seed of a fictitious cohort
    VarSet result;  // border after the move
};

// Hooks that let the macro-node stretching reuse the promotion policy.
struct MovePolicy {
    // Whether `v` may be promoted under `rule` (1, 2, 3 or 6).
    std::function<bool(VarId, int)> may_promote;
    // Border produced by the move; defaults to (border \ promoted) ∪ cohort.
    std::function<VarSet(const Move&)> result_border;
};

// Cohort of `v` under one of the promotion rules 1, 2, 3, 6, or nullopt when
// the rule does not apply.
std::optional<VarSet> promotion_cohort(const BayesianNetwork& bn, const VarSet& bottom, VarId v, int rule);

// Best move: first rule in 1..8 with a candidate, then the smallest resulting
// state space, then the lowest key. nullopt only when `bottom` is empty and
// no Rule 1 promotion is allowed.
std::optional<Move> best_move(const BayesianNetwork& bn, const VarSet& border, const VarSet& bottom,
                              const MovePolicy& policy = {});

// Greedy choice for the plain chain: requires a non-empty bottom.
Move choose_next(const BayesianNetwork& bn, const VarSet& border, const VarSet& bottom);

// Product of the CPTs of `cohort` (scalar 1 when empty).
Factor cohort_table(const BayesianNetwork& bn, const VarSet& cohort);

// State-space size of a set of variables.
double state_space(const BayesianNetwork& bn, const VarSet& vs);

// Forced order entries: nullopt is "-" (initial border at position 0, a
// fictitious promotion afterwards). Once the order runs out the greedy policy
// completes the chain. Throws InvalidArgument on an illegal entry.
using PromotionOrder = std::vector<std::optional<VarId>>;
BorderChain build_chain(const BayesianNetwork& bn, const std::optional<PromotionOrder>& forced = std::nullopt);
PromotionOrder parse_promotion_order(const std::string& text, const BayesianNetwork& bn);

// Structural identities of a chain; empty when all hold.
std::vector<std::string> check_chain(const BorderChain& chain);

struct PassResult {
    std::vector<Factor> pi;      // scope = border j
    std::vector<Factor> lambda;  // scope ⊆ border j
    std::size_t alpha = 0;       // first step whose cohort holds evidence (steps.size() if none)
    std::size_t beta = 0;        // last such step (0 if none)
};

std::vector<Factor> downward_pass(const BorderChain& chain, const EvidenceSet& ev);
std::vector<Factor> upward_pass(const BorderChain& chain, const EvidenceSet& ev);
PassResult run_passes(const BorderChain& chain, const EvidenceSet& ev);

// From border `at` (default: the lowest j whose border holds q). Throws
// ImpossibleEvidence when the evidence has probability zero.
Posterior chain_posterior(const BorderChain& chain, const PassResult& passes, VarId q,
                          std::optional<std::size_t> at = std::nullopt);
Posterior chain_posterior(const BorderChain& chain, const EvidenceSet& ev, VarId q);

}  // namespace bpi
