#include "bpi/random_bn.hpp"

#include <algorithm>
#include <numeric>

namespace bpi {

namespace {

std::vector<int> random_cards(std::mt19937_64& rng, int n, const RandomNetworkOptions& opt) {
    std::uniform_int_distribution<int> card(opt.min_card, opt.max_card);
    std::vector<int> cards(static_cast<std::size_t>(n));
    for (int& c : cards) c = card(rng);
    auto joint = [&] {
        std::uint64_t j = 1;
        for (int c : cards) j *= static_cast<std::uint64_t>(c);
        return j;
    };
    while (joint() > opt.joint_cap) {
        auto big = std::max_element(cards.begin(), cards.end());
        if (*big <= opt.min_card) break;
        --*big;
    }
    return cards;
}

// `edges` are (parent, child) in topological positions; ids get shuffled here.
BayesianNetwork assemble(std::mt19937_64& rng, int n, const std::vector<std::pair<int, int>>& edges,
                         const RandomNetworkOptions& opt) {
    std::vector<int> id(static_cast<std::size_t>(n));
    std::iota(id.begin(), id.end(), 0);
    std::shuffle(id.begin(), id.end(), rng);
    auto cards = random_cards(rng, n, opt);

    std::vector<Variable> vars(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        auto& var = vars[static_cast<std::size_t>(v)];
        var.id = v;
        var.name = "X" + std::to_string(v);
        var.cardinality = cards[static_cast<std::size_t>(v)];
        for (int k = 0; k < var.cardinality; ++k) var.labels.push_back("s" + std::to_string(k));
    }
    std::vector<std::vector<VarId>> parents(static_cast<std::size_t>(n));
    for (auto [p, c] : edges) parents[static_cast<std::size_t>(id[static_cast<std::size_t>(c)])].push_back(id[static_cast<std::size_t>(p)]);
    for (auto& ps : parents) std::sort(ps.begin(), ps.end());

    std::uniform_real_distribution<double> weight(0.05, 1.0);
    std::vector<Factor> cpts;
    for (VarId v = 0; v < n; ++v) {
        const auto& ps = parents[static_cast<std::size_t>(v)];
        std::size_t rows = 1;
        for (VarId p : ps) rows *= static_cast<std::size_t>(cards[static_cast<std::size_t>(p)]);
        const auto c = static_cast<std::size_t>(cards[static_cast<std::size_t>(v)]);
        std::vector<double> values;
        for (std::size_t r = 0; r < rows; ++r) {
            std::vector<double> row(c);
            for (double& x : row) x = weight(rng);
            double sum = std::accumulate(row.begin(), row.end(), 0.0);
            for (double x : row) values.push_back(x / sum);
        }
        cpts.push_back(make_cpt(vars, v, ps, values));
    }
    return BayesianNetwork(std::move(vars), std::move(parents), std::move(cpts));
}

}  // namespace

BayesianNetwork random_dag(std::mt19937_64& rng, int n, const RandomNetworkOptions& opt) {
    std::bernoulli_distribution edge(opt.edge_prob);
    std::vector<std::pair<int, int>> edges;
    for (int c = 1; c < n; ++c) {
        std::vector<int> earlier(static_cast<std::size_t>(c));
        std::iota(earlier.begin(), earlier.end(), 0);
        std::shuffle(earlier.begin(), earlier.end(), rng);
        int taken = 0;
        for (int p : earlier)
            if (taken < opt.max_parents && edge(rng)) {
                edges.emplace_back(p, c);
                ++taken;
            }
    }
    return assemble(rng, n, edges, opt);
}

BayesianNetwork random_polytree(std::mt19937_64& rng, int n, const RandomNetworkOptions& opt) {
    std::vector<std::pair<int, int>> edges;
    std::bernoulli_distribution down(0.5);
    for (int k = 1; k < n; ++k) {
        int other = std::uniform_int_distribution<int>(0, k - 1)(rng);
        // Positions are not a topological order here, so orient freely and let
        // the tree shape rule out cycles.
        if (down(rng))
            edges.emplace_back(other, k);
        else
            edges.emplace_back(k, other);
    }
    return assemble(rng, n, edges, opt);
}

EvidenceSet random_evidence(std::mt19937_64& rng, const BayesianNetwork& bn, int count, double soft_prob) {
    std::vector<VarId> vars(bn.size());
    std::iota(vars.begin(), vars.end(), 0);
    std::shuffle(vars.begin(), vars.end(), rng);
    std::bernoulli_distribution soft(soft_prob);
    EvidenceSet ev;
    for (int k = 0; k < count && k < static_cast<int>(vars.size()); ++k) {
        VarId v = vars[static_cast<std::size_t>(k)];
        int c = bn.card(v);
        std::vector<int> values(static_cast<std::size_t>(c));
        std::iota(values.begin(), values.end(), 0);
        std::shuffle(values.begin(), values.end(), rng);
        std::size_t keep = 1;
        if (c > 2 && soft(rng)) keep = std::uniform_int_distribution<std::size_t>(2, static_cast<std::size_t>(c) - 1)(rng);
        values.resize(keep);
        std::sort(values.begin(), values.end());
        ev.set(v, values, c);
    }
    return ev;
}

}  // namespace bpi
