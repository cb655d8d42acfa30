#pragma once

#include <cstddef>

#include "evidence.hpp"
#include "factor.hpp"
#include "network.hpp"

namespace bpi {

// Brute-force enumeration. Deliberately naive: one loop over every joint
// assignment, no factor algebra, so it shares no code path with the engines.

inline constexpr std::size_t kDefaultJointCap = std::size_t{1} << 24;

// Joint over all variables (scope 0..n-1). Throws InvalidArgument when the
// state space exceeds `cap`.
Factor joint(const BayesianNetwork& bn, std::size_t cap = kDefaultJointCap);

double oracle_event_prob(const BayesianNetwork& bn, const EvidenceSet& ev,
                         std::size_t cap = kDefaultJointCap);

// Normalized Pr{Q | ev}. Throws ImpossibleEvidence when Pr{ev} = 0.
Factor oracle_posterior(const BayesianNetwork& bn, const EvidenceSet& ev, VarId q,
                        std::size_t cap = kDefaultJointCap);

// Unnormalized Pr{vars, ev} over an arbitrary variable set.
Factor oracle_marginal(const BayesianNetwork& bn, const EvidenceSet& ev, const VarSet& vars,
                       std::size_t cap = kDefaultJointCap);

}  // namespace bpi
