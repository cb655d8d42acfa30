#pragma once

#include <map>
#include <vector>

#include "factor.hpp"

namespace bpi {

struct Posterior {
    Factor unnormalized;  // Pr{Q, evidence}
    Factor posterior;     // Pr{Q | evidence}
    double evidence_prob = 0.0;
};

// Throws ImpossibleEvidence when the factor sums to zero.
inline Posterior make_posterior(Factor unnormalized) {
    Posterior out;
    auto [post, total] = normalize(unnormalized);
    out.unnormalized = std::move(unnormalized);
    out.posterior = std::move(post);
    out.evidence_prob = total;
    return out;
}

// Answer to a batch query; message counts refer to the pruned schedules.
struct QueryResult {
    std::map<VarId, Posterior> posteriors;
    double evidence_prob = 1.0;
    std::size_t collection_messages = 0;
    std::size_t distribution_messages = 0;
    std::vector<int> pivots;  // one per evidential component
};

}  // namespace bpi
