#pragma once

#include <cstdint>
#include <random>

#include "evidence.hpp"
#include "network.hpp"

namespace bpi {

struct RandomNetworkOptions {
    int min_card = 2;
    int max_card = 4;
    int max_parents = 3;
    double edge_prob = 0.35;
    std::uint64_t joint_cap = std::uint64_t{1} << 18;
};

// Random DAG with shuffled ids (so id order is not a topological order),
// cardinalities within the options and strictly positive CPTs.
BayesianNetwork random_dag(std::mt19937_64& rng, int n, const RandomNetworkOptions& opt = {});
// Random singly connected network (a single undirected tree).
BayesianNetwork random_polytree(std::mt19937_64& rng, int n, const RandomNetworkOptions& opt = {});
// `count` distinct variables; each soft (a proper subset of two or more
// values) with probability `soft_prob`, otherwise hard.
EvidenceSet random_evidence(std::mt19937_64& rng, const BayesianNetwork& bn, int count, double soft_prob = 0.3);

}  // namespace bpi
