#include <set>

#include "bpi/bp_build.hpp"
#include "bpi/errors.hpp"
#include "bpi/validate.hpp"
#include "helpers.hpp"

using namespace bpi;
using namespace bpi::test;

namespace {

// Variables reachable from `from` along directed edges (excluding `from` itself
// unless it lies on a cycle).
VarSet reachable(const BayesianNetwork& bn, const VarSet& from, bool downward) {
    VarSet seen;
    std::vector<VarId> stack(from.begin(), from.end());
    while (!stack.empty()) {
        VarId x = stack.back();
        stack.pop_back();
        VarSet next = downward ? bn.children(x) : bn.parent_set(x);
        for (VarId y : next)
            if (!seen.contains(y)) {
                seen.insert(y);
                stack.push_back(y);
            }
    }
    return seen;
}

// A set is closed when nothing outside it is both below and above it.
bool closed(const BayesianNetwork& bn, const VarSet& s) {
    return ((reachable(bn, s, true) & reachable(bn, s, false)) - s).empty();
}

std::set<VarSet> partition(const MacroPolytree& mp) { return {mp.macros.begin(), mp.macros.end()}; }

bool has_border(const BorderPolytree& bp, const VarSet& members) {
    for (const Border& b : bp.borders)
        if (b.members == members) return true;
    return false;
}

void check_structure(const BayesianNetwork& bn) {
    MacroPolytree mp = stage1(bn);
    auto problems = check_macro_polytree(mp);
    CHECK(problems.empty());
    CHECK(mp.order().size() == mp.macros.size());
    for (const VarSet& m : mp.macros) CHECK(closed(bn, m));

    BorderPolytree bp = stage2(mp);
    BpDiagnostics d = verify_bp(bp);
    for (const auto& e : d.errors) MESSAGE(e);
    CHECK(d.ok());

    // Cohorts inside each macro partition it.
    std::vector<VarSet> recruited(mp.macros.size());
    for (const Border& b : bp.borders) {
        const auto m = static_cast<std::size_t>(b.macro);
        CHECK(mp.macros[m].contains_all(b.cohort));
        CHECK_FALSE(recruited[m].intersects(b.cohort));
        recruited[m] |= b.cohort;
    }
    for (std::size_t m = 0; m < mp.macros.size(); ++m) CHECK(recruited[m] == mp.macros[m]);
}

}  // namespace

TEST_CASE("aggregation closure") {
    auto bn = fixture("bn_a.bn");
    CHECK(aggregation_closure(bn, vars(bn, {"A", "H"})) == vars(bn, {"A", "C", "D", "H"}));
    CHECK(aggregation_closure(bn, vars(bn, {"A", "C", "D", "H"})) == vars(bn, {"A", "C", "D", "H"}));
    CHECK(aggregation_closure(bn, vars(bn, {"L"})) == vars(bn, {"L"}));

    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        auto g = random_dag(rng, 3 + i % 10);
        VarSet seed;
        std::bernoulli_distribution pick(0.3);
        for (VarId v = 0; v < static_cast<VarId>(g.size()); ++v)
            if (pick(rng)) seed.insert(v);
        if (seed.empty()) seed.insert(0);
        VarSet c = aggregation_closure(g, seed);
        CHECK(c.contains_all(seed));
        CHECK(closed(g, c));
        CHECK(aggregation_closure(g, c) == c);
        // Minimal: no closed superset of the seed is smaller.
        if (g.size() > 9) continue;
        const auto n = static_cast<unsigned>(g.size());
        std::size_t best = g.size();
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            VarSet s;
            for (VarId v = 0; v < static_cast<VarId>(n); ++v)
                if (mask >> v & 1u) s.insert(v);
            if (s.contains_all(seed) && closed(g, s)) best = std::min(best, s.size());
        }
        CHECK(c.size() == best);
    }
}

TEST_CASE("BN C partition") {
    auto bn = fixture("bn_c.bn");
    MacroPolytree mp = stage1(bn);
    CHECK(check_macro_polytree(mp).empty());
    auto parts = partition(mp);
    for (auto names : {vars(bn, {"R", "T"}), vars(bn, {"B", "C"}), vars(bn, {"X", "Y"}), vars(bn, {"I", "H"}),
                       vars(bn, {"N", "M", "S", "U", "V", "Q"}), vars(bn, {"D", "F", "O", "P"})})
        CHECK(parts.count(names) == 1);
    std::size_t singles = 0;
    for (const VarSet& m : mp.macros) singles += m.size() == 1;
    CHECK(singles + 6 == mp.macros.size());
    CHECK(singles == 6);  // K, L, Z, A, G, J
}

TEST_CASE("BN C borders") {
    auto bn = fixture("bn_c.bn");
    BorderPolytree bp = build_bp(bn);
    BpDiagnostics d = verify_bp(bp);
    CHECK(d.ok());
    CHECK(has_border(bp, vars(bn, {"N", "M", "U", "V"})));
    CHECK(has_border(bp, vars(bn, {"N", "M", "Q"})));
    CHECK(has_border(bp, vars(bn, {"D", "F", "O", "P"})));

    // The junction that lets N go: {N,P} joined with {B,C} and {G}, then N is
    // promoted with cohort O.
    const Border* junction = nullptr;
    for (const Border& b : bp.borders)
        if (b.kind == Border::Kind::Type2 && b.members == vars(bn, {"N", "P", "B", "C", "G"})) junction = &b;
    REQUIRE(junction);
    std::set<VarSet> carried(junction->carried.begin(), junction->carried.end());
    CHECK(carried == std::set<VarSet>{vars(bn, {"N", "P"}), vars(bn, {"B", "C"}), vars(bn, {"G"})});
    std::vector<VarSet> parent_members;
    for (int p : junction->parents) parent_members.push_back(bp.borders[static_cast<std::size_t>(p)].members);
    CHECK(std::find(parent_members.begin(), parent_members.end(), vars(bn, {"N", "P"})) != parent_members.end());

    const Border* next = nullptr;
    for (const Border& b : bp.borders)
        if (b.kind == Border::Kind::Type1 && b.parents == std::vector<int>{junction->id}) next = &b;
    REQUIRE(next);
    REQUIRE(next->promoted);
    CHECK(*next->promoted == var(bn, "N"));
    CHECK(next->cohort == vars(bn, {"O"}));
    CHECK(next->members == vars(bn, {"B", "C", "G", "O", "P"}));

    // {N,P,Q} leads to {N,P}, which feeds the junction.
    auto q = std::find_if(bp.borders.begin(), bp.borders.end(),
                          [&](const Border& b) { return b.members == vars(bn, {"N", "P", "Q"}); });
    REQUIRE(q != bp.borders.end());
    const Border& np = bp.borders[static_cast<std::size_t>(q->id + 1)];
    CHECK(np.members == vars(bn, {"N", "P"}));
    CHECK(np.parents == std::vector<int>{q->id});
}

TEST_CASE("polytrees give singleton macros") {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 50; ++i) {
        auto bn = random_polytree(rng, 2 + i % 15);
        MacroPolytree mp = stage1(bn);
        CHECK(mp.macros.size() == bn.size());
        for (const VarSet& m : mp.macros) CHECK(m.size() == 1);
        CHECK(verify_bp(stage2(mp)).ok());
    }
    auto b = fixture("polytree_b.bn");
    CHECK(stage1(b).macros.size() == b.size());
}

TEST_CASE("a single-variable macro is one border") {
    auto bn = fixture("bn_c.bn");
    BorderPolytree bp = build_bp(bn);
    for (std::size_t m = 0; m < bp.macros.macros.size(); ++m) {
        if (bp.macros.macros[m].size() != 1) continue;
        std::vector<const Border*> own;
        for (const Border& b : bp.borders)
            if (b.macro == static_cast<int>(m) && b.kind != Border::Kind::Type2) own.push_back(&b);
        REQUIRE(own.size() == 1);
        CHECK(own[0]->cohort == bp.macros.macros[m]);
        // A root macro's border is the variable itself; otherwise the border
        // also keeps what remains of the parent border after the promotion.
        if (bp.macros.parents(static_cast<int>(m)).empty()) CHECK(own[0]->members == bp.macros.macros[m]);
        else CHECK(own[0]->members.contains_all(bp.macros.macros[m]));
    }
}

TEST_CASE("fixtures pass verification") {
    for (const char* name : {"bn_a.bn", "bn_c.bn", "dyspnoea.bn", "polytree_b.bn"}) {
        CAPTURE(name);
        check_structure(fixture(name));
    }
    auto asia = fixture("dyspnoea.bn");
    BpDiagnostics d = verify_bp(build_bp(asia));
    CHECK(d.ok());
    CHECK(build_bp(asia).tree().component_count() == 1);
}

TEST_CASE("random DAGs pass verification") {
    std::mt19937_64 rng(101);
    for (int i = 0; i < 500; ++i) {
        RandomNetworkOptions opt;
        opt.edge_prob = 0.2 + 0.1 * (i % 5);
        auto bn = random_dag(rng, 2 + i % 11, opt);
        CAPTURE(emit_network(bn));
        check_structure(bn);
    }
}

TEST_CASE("hand-built violations are flagged") {
    auto bn = parse_network(
        "node A 2 a b\nnode B 2 a b\nnode C 2 a b\nparents B A\nparents C B\n"
        "cpt A .5 .5\ncpt B .5 .5 .5 .5\ncpt C .5 .5 .5 .5\n");
    BorderPolytree good = bp_from_chain(build_chain(bn));
    REQUIRE(good.borders.size() == 3);
    CHECK(verify_bp(good).ok());

    // A, promoted at border 1, comes back at border 2.
    BorderPolytree bad = good;
    Border& last = bad.borders[2];
    last.cohort = VarSet{0, 2};
    last.cohort_table = multiply(bn.cpt(0), bn.cpt(2));
    last.members = VarSet{0, 2};
    BpDiagnostics d = verify_bp(bad);
    CHECK_FALSE(d.ok());
    auto mentions = [&](const std::string& needle) {
        return std::any_of(d.errors.begin(), d.errors.end(),
                           [&](const std::string& e) { return e.find(needle) != std::string::npos; });
    };
    CHECK(mentions("recruited again"));
    CHECK(mentions("running intersection fails for A"));

    // C never recruited.
    BorderPolytree missing = good;
    missing.borders.pop_back();
    CHECK_FALSE(verify_bp(missing).ok());

    // Parent after child.
    BorderPolytree order = good;
    order.borders[1].parents = {2};
    CHECK_FALSE(verify_bp(order).ok());
}

TEST_CASE("listings are deterministic") {
    auto bn = fixture("bn_c.bn");
    BorderPolytree a = build_bp(bn), b = build_bp(bn);
    CHECK(border_listing(a) == border_listing(b));
    CHECK(partition_listing(a.macros) == partition_listing(b.macros));
    CHECK(to_dot(a) == to_dot(b));
    CHECK(to_dot(a).rfind("digraph", 0) == 0);
}
