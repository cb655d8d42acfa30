#include "bpi/errors.hpp"
#include "bpi/oracle.hpp"
#include "helpers.hpp"

using namespace bpi;
using namespace bpi::test;

namespace {

const char* kTwoChain =
    "node A 2 a0 a1\n"
    "node B 2 b0 b1\n"
    "parents B A\n"
    "cpt A 0.4 0.6\n"
    "cpt B 0.5 0.5 0.1 0.9\n";

}  // namespace

TEST_CASE("joint of a single root is its CPT") {
    auto bn = parse_network("node A 3 x y z\ncpt A 0.2 0.3 0.5\n");
    CHECK(joint(bn) == bn.cpt(0));
}

TEST_CASE("joint of a two-node chain") {
    auto bn = parse_network(kTwoChain);
    Factor j = joint(bn);
    REQUIRE(j.size() == 4);
    CHECK(j[0] == doctest::Approx(0.2));
    CHECK(j[1] == doctest::Approx(0.2));
    CHECK(j[2] == doctest::Approx(0.06));
    CHECK(j[3] == doctest::Approx(0.54));
}

TEST_CASE("joint entries are CPT products and marginals are consistent") {
    auto bn = fixture("bn_a.bn");
    Factor j = joint(bn);
    CHECK(j.sum() == doctest::Approx(1.0).epsilon(1e-9));
    std::vector<int> cards = bn.cards(bn.all());
    for_each_assignment(cards, [&](const std::vector<int>& a) {
        double p = 1.0;
        for (VarId v = 0; v < static_cast<VarId>(bn.size()); ++v) p *= entry(bn.cpt(v), a);
        CHECK(entry(j, a) == doctest::Approx(p).epsilon(1e-12));
    });
    // Each family marginal divided by the parents' marginal reproduces the CPT.
    for (VarId v = 0; v < static_cast<VarId>(bn.size()); ++v) {
        VarSet family = bn.parent_set(v) | VarSet::single(v);
        Factor fam = sum_out(j, bn.all() - family);
        Factor par = sum_out(j, bn.all() - bn.parent_set(v));
        check_close(divide(fam, par), bn.cpt(v), 1e-12);
    }
}

TEST_CASE("joint cap") {
    auto bn = fixture("bn_c.bn");
    CHECK_THROWS_AS(joint(bn, 1000), InvalidArgument);
}

TEST_CASE("event probability") {
    auto bn = fixture("bn_a.bn");
    CHECK(oracle_event_prob(bn, EvidenceSet{}) == doctest::Approx(1.0).epsilon(1e-12));

    auto ev = parse_evidence("H=h,K=k", bn);
    double p = oracle_event_prob(bn, ev);
    CHECK(p > 0.0);
    Factor all = Factor::scalar(1.0);
    for (VarId v = 0; v < static_cast<VarId>(bn.size()); ++v) all = multiply(all, restrict(bn.cpt(v), ev));
    CHECK(sum_out(all, bn.all()).sum() == doctest::Approx(p).epsilon(1e-12));

    // A full hard assignment picks out one joint entry.
    std::vector<int> a{0, 1, 0, 1, 1, 0, 0, 1, 0, 1, 1};
    EvidenceSet full;
    for (VarId v = 0; v < static_cast<VarId>(bn.size()); ++v) full.set(v, {a[static_cast<std::size_t>(v)]}, 2);
    CHECK(oracle_event_prob(bn, full) == doctest::Approx(entry(joint(bn), a)).epsilon(1e-12));
}

TEST_CASE("posterior") {
    auto bn = parse_network(kTwoChain);
    Factor prior = oracle_posterior(bn, EvidenceSet{}, 1);
    CHECK(prior[0] == doctest::Approx(0.26));
    CHECK(prior[1] == doctest::Approx(0.74));

    EvidenceSet ev;
    ev.set(1, {1}, 2);
    Factor post = oracle_posterior(bn, ev, 0);
    CHECK(post[0] == doctest::Approx(0.2 / 0.74));
    Factor point = oracle_posterior(bn, ev, 1);
    CHECK(point[0] == 0.0);
    CHECK(point[1] == doctest::Approx(1.0));

    auto asia = fixture("dyspnoea.bn");
    // E is "T or L", so E=no with T=yes cannot happen.
    CHECK_THROWS_AS(oracle_posterior(asia, parse_evidence("E=no,T=yes", asia), 0), ImpossibleEvidence);
}

TEST_CASE("oracle marginal agrees with summing the restricted joint in any order") {
    auto bn = fixture("bn_a.bn");
    auto ev = parse_evidence("H=h,K=k", bn);
    Factor j = restrict(joint(bn), ev);
    VarSet keep = vars(bn, {"A", "J"});
    Factor m = oracle_marginal(bn, ev, keep);
    check_close(m, sum_out(j, bn.all() - keep), 1e-12);
    VarSet rest = bn.all() - keep;
    Factor stepwise = j;
    for (auto it = rest.ids().rbegin(); it != rest.ids().rend(); ++it) stepwise = sum_out(stepwise, {*it});
    check_close(m, stepwise, 1e-12);
    CHECK(oracle_posterior(bn, ev, var(bn, "A")).sum() == doctest::Approx(1.0));
}

TEST_CASE("cached joint agrees with direct enumeration") {
    auto bn = fixture("bn_a.bn");
    JointOracle cached(bn);
    for (const char* text : {"", "H=h,K=k", "A=a,L=nl"}) {
        auto ev = *text ? parse_evidence(text, bn) : EvidenceSet{};
        CHECK(cached.event_prob(ev) == doctest::Approx(oracle_event_prob(bn, ev)).epsilon(1e-12));
        check_close(cached.marginal(ev, vars(bn, {"C", "J"})), oracle_marginal(bn, ev, vars(bn, {"C", "J"})), 1e-14);
        check_close(cached.posterior(ev, var(bn, "G")), oracle_posterior(bn, ev, var(bn, "G")), 1e-12);
    }
}
