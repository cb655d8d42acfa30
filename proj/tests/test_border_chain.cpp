#include "bpi/border_chain.hpp"
#include "bpi/errors.hpp"
#include "bpi/oracle.hpp"
#include "helpers.hpp"

using namespace bpi;
using namespace bpi::test;

namespace {

BorderChain table_one_chain(const BayesianNetwork& bn) {
    return build_chain(bn, parse_promotion_order("-,A,B,C,D,F,H,G,I", bn));
}

// Co-parents restricted to the set's own parents and children (the 𝒦 check).
bool co_parentless(const BayesianNetwork& bn, const VarSet& xs) { return set_co_parents(bn, xs).empty(); }

}  // namespace

TEST_CASE("initial border") {
    auto bn = fixture("bn_a.bn");
    CHECK(initial_border(bn) == vars(bn, {"A", "B"}));

    auto chain3 = parse_network(
        "node A 2 a b\nnode B 2 a b\nnode C 2 a b\nparents B A\nparents C B\n"
        "cpt A .5 .5\ncpt B .5 .5 .5 .5\ncpt C .5 .5 .5 .5\n");
    CHECK(initial_border(chain3) == VarSet{0});

    std::mt19937_64 rng(4);
    for (int i = 0; i < 100; ++i) {
        auto g = random_dag(rng, 10);
        VarSet b = initial_border(g);
        REQUIRE_FALSE(b.empty());
        CHECK(g.roots().contains_all(b));
        // Co-parentless whenever any subset of the roots is.
        const VarSet root_set = g.roots();
        const auto& roots = root_set.ids();
        bool exists = false;
        for (unsigned mask = 1; mask < (1u << roots.size()) && !exists; ++mask) {
            VarSet s;
            for (std::size_t k = 0; k < roots.size(); ++k)
                if (mask >> k & 1u) s.insert(roots[k]);
            exists = co_parentless(g, s);
        }
        CHECK(co_parentless(g, b) == exists);
    }
}

TEST_CASE("reference order on BN A") {
    auto bn = fixture("bn_a.bn");
    BorderChain chain = table_one_chain(bn);
    REQUIRE(chain.gamma() == 8);

    const std::vector<VarSet> borders{
        vars(bn, {"A", "B"}),           vars(bn, {"B", "C", "D", "F"}), vars(bn, {"C", "D", "F"}),
        vars(bn, {"D", "F", "H"}),      vars(bn, {"F", "H", "I"}),      vars(bn, {"H", "I"}),
        vars(bn, {"G", "I", "J", "K"}), vars(bn, {"I", "J", "K"}),      vars(bn, {"J", "K", "L"})};
    const std::vector<VarSet> cohorts{vars(bn, {"A", "B"}), vars(bn, {"C", "D", "F"}), {}, vars(bn, {"H"}),
                                      vars(bn, {"I"}),      {},                        vars(bn, {"G", "J", "K"}),
                                      {},                   vars(bn, {"L"})};
    const std::vector<int> rules{0, 2, 1, 2, 2, 1, 3, 1, 2};
    const char* promoted[] = {nullptr, "A", "B", "C", "D", "F", "H", "G", "I"};
    for (std::size_t j = 0; j <= 8; ++j) {
        CAPTURE(j);
        const ChainStep& s = chain.steps[j];
        CHECK(s.border == borders[j]);
        CHECK(s.cohort == cohorts[j]);
        CHECK(s.rule == rules[j]);
        if (promoted[j]) {
            REQUIRE(s.promoted);
            CHECK(*s.promoted == var(bn, promoted[j]));
        } else {
            CHECK_FALSE(s.promoted);
        }
        // Φ(C_j) is the product of the cohort's CPTs.
        VarSet phi_scope = cohorts[j] | set_parents(bn, cohorts[j]);
        CHECK(s.cohort_table.scope() == phi_scope);
        if (cohorts[j].empty()) CHECK(s.cohort_table == Factor::scalar(1.0));
    }
    CHECK(check_chain(chain).empty());
}

TEST_CASE("greedy moves on BN A") {
    auto bn = fixture("bn_a.bn");
    Move m = choose_next(bn, vars(bn, {"A", "B"}), bn.all() - vars(bn, {"A", "B"}));
    CHECK(m.rule == 2);
    CHECK(m.cohort == vars(bn, {"C", "D", "F"}));
    REQUIRE(m.promoted);
    CHECK(*m.promoted == var(bn, "A"));

    Move b = choose_next(bn, vars(bn, {"B", "C", "D", "F"}), bn.all() - vars(bn, {"A", "B", "C", "D", "F"}));
    CHECK(b.rule == 1);
    CHECK(b.cohort.empty());
    CHECK(*b.promoted == var(bn, "B"));
}

TEST_CASE("fictitious recruit of a leaf whose parents are all in the border") {
    // Border {A}; bottom {B, C} where C's only parent A is blocked from Rule 2
    // because B still hangs off A through the policy below.
    auto bn = parse_network(
        "node A 2 a b\nnode B 2 a b\nnode C 2 a b\nparents C B\n"
        "cpt A .5 .5\ncpt B .5 .5\ncpt C .5 .5 .5 .5\n");
    MovePolicy never;
    never.may_promote = [](VarId, int) { return false; };
    auto m = best_move(bn, VarSet{0}, VarSet{1, 2}, never);
    REQUIRE(m);
    CHECK_FALSE(m->promoted);
    CHECK(m->cohort == VarSet{1});  // B is a bottom root: the root recruit rule
    CHECK(m->rule == 5);

    auto leafy = parse_network(
        "node A 2 a b\nnode B 2 a b\nparents B A\ncpt A .5 .5\ncpt B .5 .5 .5 .5\n");
    auto r4 = best_move(leafy, VarSet{0}, VarSet{1}, never);
    REQUIRE(r4);
    CHECK(r4->rule == 4);
    CHECK(r4->cohort == VarSet{1});
    CHECK_FALSE(r4->promoted);
}

TEST_CASE("directed chain") {
    auto bn = parse_network(
        "node A 2 a b\nnode B 2 a b\nnode C 2 a b\nparents B A\nparents C B\n"
        "cpt A .5 .5\ncpt B .5 .5 .5 .5\ncpt C .5 .5 .5 .5\n");
    auto chain = build_chain(bn);
    REQUIRE(chain.steps.size() == 3);
    CHECK(chain.steps[0].border == VarSet{0});
    CHECK(chain.steps[1].border == VarSet{1});
    CHECK(chain.steps[2].border == VarSet{2});
}

TEST_CASE("illegal forced orders") {
    auto bn = fixture("bn_a.bn");
    CHECK_THROWS_AS(build_chain(bn, parse_promotion_order("A,B", bn)), InvalidArgument);  // must start with -
    CHECK_THROWS_AS(build_chain(bn, parse_promotion_order("-,C", bn)), InvalidArgument);  // C not in border
    CHECK_THROWS_AS(build_chain(bn, parse_promotion_order("-,A,B,C,D,F,H,G,I,J,K,L", bn)), InvalidArgument);
    CHECK_THROWS(parse_promotion_order("-,Q", bn));
}

TEST_CASE("chain identities on random DAGs") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 200; ++i) {
        auto bn = random_dag(rng, 2 + i % 9);
        auto chain = build_chain(bn);
        CAPTURE(emit_network(bn));
        CHECK(check_chain(chain).empty());
        VarSet seen;
        for (std::size_t j = 0; j < chain.steps.size(); ++j) {
            const ChainStep& s = chain.steps[j];
            CHECK_FALSE(s.cohort.intersects(seen));
            seen |= s.cohort;
            if (j == 0) continue;
            const VarSet& prev = chain.steps[j - 1].border;
            VarSet expect = prev | s.cohort;
            if (s.promoted) expect.erase(*s.promoted);
            CHECK(s.border == expect);
            CHECK(prev.contains_all(set_parents(bn, s.cohort)));
        }
        CHECK(seen == bn.all());
    }
}

TEST_CASE("worked trace on BN A with evidence H=h, K=k") {
    auto bn = fixture("bn_a.bn");
    auto chain = table_one_chain(bn);
    auto ev = parse_evidence("H=h,K=k", bn);
    PassResult r = run_passes(chain, ev);
    CHECK(r.alpha == 3);
    CHECK(r.beta == 6);

    // Π(B_5) lives on {H,I} with H restricted; it sums to Pr{h}.
    CHECK(r.pi[5].scope() == vars(bn, {"H", "I"}));
    check_close(r.pi[5], oracle_marginal(bn, parse_evidence("H=h", bn), vars(bn, {"H", "I"})), 1e-12);

    check_close(r.pi[8], oracle_marginal(bn, ev, vars(bn, {"J", "K", "L"})), 1e-9);

    // Λ at and after the last evidence step is just I_K, read as a table on the border.
    for (std::size_t j : {6u, 7u, 8u}) {
        CAPTURE(j);
        const VarSet& b = chain.steps[j].border;
        Factor ik = multiply(Factor(vars(bn, {"K"}), {2}, {1.0, 0.0}), Factor::ones(b, bn.cards(b)));
        check_close(multiply(r.lambda[j], Factor::ones(b, bn.cards(b))), ik, 1e-12);
    }

    // Λ(B_0) = Pr{h,k | A,B}.
    Factor lam0 = divide(oracle_marginal(bn, ev, vars(bn, {"A", "B"})),
                         oracle_marginal(bn, EvidenceSet{}, vars(bn, {"A", "B"})));
    check_close(r.lambda[0], lam0, 1e-9);

    const double pe = oracle_event_prob(bn, ev);
    for (std::size_t j = 0; j <= chain.gamma(); ++j) {
        CAPTURE(j);
        Factor belief = multiply(r.pi[j], r.lambda[j]);
        check_close(belief, oracle_marginal(bn, ev, chain.steps[j].border), 1e-9);
        CHECK(rel_diff(belief.sum(), pe) <= 1e-9);
    }
    for (std::size_t j = 0; j < r.alpha; ++j)
        check_close(r.pi[j], oracle_marginal(bn, EvidenceSet{}, chain.steps[j].border), 1e-12);
}

TEST_CASE("query from any border holding it") {
    auto bn = fixture("bn_a.bn");
    auto chain = table_one_chain(bn);
    auto ev = parse_evidence("H=h,K=k", bn);
    PassResult r = run_passes(chain, ev);
    const VarId i = var(bn, "I");
    Posterior first = chain_posterior(chain, r, i, 4);
    for (std::size_t j : {5u, 6u, 7u}) CHECK(max_abs_diff(chain_posterior(chain, r, i, j).posterior, first.posterior) <= 1e-12);
    check_close(first.posterior, oracle_posterior(bn, ev, i), 1e-9);

    Posterior a = chain_posterior(chain, r, var(bn, "A"));
    check_close(a.posterior, oracle_posterior(bn, ev, var(bn, "A")), 1e-9);
    CHECK(rel_diff(a.evidence_prob, oracle_event_prob(bn, ev)) <= 1e-9);
}

TEST_CASE("empty evidence") {
    auto bn = fixture("bn_a.bn");
    auto chain = build_chain(bn);
    PassResult r = run_passes(chain, EvidenceSet{});
    for (std::size_t j = 0; j <= chain.gamma(); ++j) {
        check_close(r.pi[j], oracle_marginal(bn, EvidenceSet{}, chain.steps[j].border), 1e-12);
        for (double x : r.lambda[j].values()) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));
    }
    for (VarId v = 0; v < static_cast<VarId>(bn.size()); ++v)
        check_close(chain_posterior(chain, r, v).posterior, oracle_posterior(bn, EvidenceSet{}, v), 1e-12);
}

TEST_CASE("chain posteriors match the oracle on random networks") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 60; ++i) {
        auto bn = random_dag(rng, 3 + i % 8);
        auto chain = build_chain(bn);
        for (int e = 0; e < 3; ++e) {
            auto ev = random_evidence(rng, bn, 1 + e, 0.5);
            PassResult r = run_passes(chain, ev);
            const double pe = oracle_event_prob(bn, ev);
            for (std::size_t j = 0; j <= chain.gamma(); ++j)
                CHECK(rel_diff(multiply(r.pi[j], r.lambda[j]).sum(), pe) <= 1e-9);
            for (VarId v = 0; v < static_cast<VarId>(bn.size()); ++v)
                check_close(chain_posterior(chain, r, v).posterior, oracle_posterior(bn, ev, v), 1e-9);
        }
    }
}

TEST_CASE("impossible evidence") {
    auto bn = fixture("dyspnoea.bn");
    auto chain = build_chain(bn);
    CHECK_THROWS_AS(chain_posterior(chain, parse_evidence("E=no,L=yes", bn), var(bn, "A")), ImpossibleEvidence);
}
