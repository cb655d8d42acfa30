#include "bpi/border_chain.hpp"

#include <algorithm>
#include <cstdint>
#include <sstream>

#include "bpi/errors.hpp"

namespace bpi {

namespace {

VarSet bottom_ancestors(const BayesianNetwork& bn, const VarSet& seed, const VarSet& bottom) {
    VarSet out = seed;
    std::vector<VarId> frontier(seed.begin(), seed.end());
    while (!frontier.empty()) {
        VarId v = frontier.back();
        frontier.pop_back();
        for (VarId p : bn.parent_set(v)) {
            if (bottom.contains(p) && !out.contains(p)) {
                out.insert(p);
                frontier.push_back(p);
            }
        }
    }
    return out;
}

// Roots of `within`: members with no parent inside it.
VarSet roots_within(const BayesianNetwork& bn, const VarSet& within) {
    VarSet out;
    for (VarId v : within)
        if (!bn.parent_set(v).intersects(within)) out.insert(v);
    return out;
}

VarSet co_parents_within(const BayesianNetwork& bn, const VarSet& xs, const VarSet& within) {
    return set_co_parents(bn, xs) & within;
}

}  // namespace

double state_space(const BayesianNetwork& bn, const VarSet& vs) {
    double s = 1.0;
    for (VarId v : vs) s *= bn.card(v);
    return s;
}

Factor cohort_table(const BayesianNetwork& bn, const VarSet& cohort) {
    Factor out = Factor::scalar(1.0);
    for (VarId v : cohort) out = multiply(out, bn.cpt(v));
    return out;
}

constexpr std::size_t kExhaustiveRoots = 16;

VarSet initial_border(const BayesianNetwork& bn) { return initial_border(bn, bn.all()); }

VarSet initial_border(const BayesianNetwork& bn, const VarSet& within) {
    const VarSet roots = roots_within(bn, within);
    for (VarId start : roots) {
        VarSet x = VarSet::single(start);
        while (true) {
            VarSet k = co_parents_within(bn, x, within);
            if (k.empty()) return x;
            VarSet grown = x;
            for (VarId c : k) {
                if (roots.contains(c)) grown.insert(c);
                else grown |= ancestors(bn, c) & roots;
            }
            if (grown == x) break;
            x = grown;
        }
    }
    // The closure can overshoot; search root subsets by size, then id order.
    if (roots.size() <= kExhaustiveRoots) {
        const auto n = roots.size();
        std::vector<VarSet> found;
        for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask) {
            VarSet x;
            for (std::size_t k = 0; k < n; ++k)
                if (mask >> k & 1u) x.insert(roots.ids()[k]);
            if (co_parents_within(bn, x, within).empty()) found.push_back(std::move(x));
        }
        if (!found.empty())
            return *std::min_element(found.begin(), found.end(), [](const VarSet& a, const VarSet& b) {
                return a.size() != b.size() ? a.size() < b.size() : a < b;
            });
    }
    // No co-parentless set of roots exists (a root's child can have a non-root
    // co-parent that is not itself a child of any root). Every rule still
    // keeps the chain parentless, so start from the lowest root.
    return roots.empty() ? VarSet{} : VarSet::single(roots.front());
}

std::optional<VarSet> promotion_cohort(const BayesianNetwork& bn, const VarSet& bottom, VarId v, int rule) {
    const VarSet kids = bn.children(v) & bottom;
    if (rule == 1) return kids.empty() ? std::optional<VarSet>(VarSet{}) : std::nullopt;
    if (kids.empty()) return std::nullopt;
    if (rule == 6) return bottom_ancestors(bn, kids, bottom);
    VarSet co;
    for (VarId c : kids) co |= bn.parent_set(c);
    co = (co & bottom) - kids;
    if (rule == 2) return co.empty() ? std::optional<VarSet>(kids) : std::nullopt;
    if (rule == 3) {
        if (co.empty()) return std::nullopt;
        for (VarId c : co)
            if (bn.parent_set(c).intersects(bottom)) return std::nullopt;
        return kids | co;
    }
    return std::nullopt;
}

std::optional<Move> best_move(const BayesianNetwork& bn, const VarSet& border, const VarSet& bottom,
                              const MovePolicy& policy) {
    auto result_of = [&](const Move& m) {
        if (policy.result_border) return policy.result_border(m);
        VarSet r = border | m.cohort;
        if (m.promoted) r.erase(*m.promoted);
        return r;
    };
    for (int rule = 1; rule <= 8; ++rule) {
        std::optional<Move> best;
        double best_size = 0.0;
        auto offer = [&](Move m) {
            m.rule = rule;
            m.result = result_of(m);
            double size = state_space(bn, m.result);
            if (!best || size < best_size || (size == best_size && m.key < best->key)) {
                best = std::move(m);
                best_size = size;
            }
        };
        if (rule == 1 || rule == 2 || rule == 3 || rule == 6) {
            for (VarId v : border) {
                if (policy.may_promote && !policy.may_promote(v, rule)) continue;
                if (auto c = promotion_cohort(bn, bottom, v, rule)) offer(Move{v, *c, rule, v, {}});
            }
        } else if (rule == 8) {
            if (!bottom.empty()) offer(Move{std::nullopt, bottom, rule, bottom.front(), {}});
        } else {
            for (VarId s : bottom) {
                const VarSet& ps = bn.parent_set(s);
                if (rule == 4 && (ps.empty() || ps.intersects(bottom))) continue;
                if (rule == 5 && !ps.empty()) continue;
                VarSet cohort = rule == 7 ? bottom_ancestors(bn, VarSet::single(s), bottom) : VarSet::single(s);
                offer(Move{std::nullopt, cohort, rule, s, {}});
            }
        }
        if (best) return best;
    }
    return std::nullopt;
}

Move choose_next(const BayesianNetwork& bn, const VarSet& border, const VarSet& bottom) {
    if (bottom.empty()) throw InvalidArgument("choose_next needs a non-empty bottom part");
    return *best_move(bn, border, bottom);
}

PromotionOrder parse_promotion_order(const std::string& text, const BayesianNetwork& bn) {
    PromotionOrder out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto b = item.find_first_not_of(" \t");
        auto e = item.find_last_not_of(" \t");
        std::string tok = b == std::string::npos ? "" : item.substr(b, e - b + 1);
        if (tok == "-" || tok == "0" || tok == "∅") out.push_back(std::nullopt);
        else if (tok.empty()) throw InvalidArgument("empty entry in promotion order");
        else out.push_back(bn.id_of(tok));
    }
    return out;
}

BorderChain build_chain(const BayesianNetwork& bn, const std::optional<PromotionOrder>& forced) {
    if (forced && !forced->empty() && forced->front())
        throw InvalidArgument("promotion order must start with '-' for the initial border");
    BorderChain chain;
    chain.source = &bn;
    VarSet border = initial_border(bn);
    VarSet bottom = bn.all() - border;
    chain.steps.push_back(ChainStep{0, std::nullopt, border, border, cohort_table(bn, border), 0});

    const MovePolicy fictitious_only{[](VarId, int) { return false; }, {}};
    std::size_t j = 1;
    while (!bottom.empty()) {
        Move m;
        if (forced && j < forced->size()) {
            const auto& entry = (*forced)[j];
            if (!entry) {
                m = *best_move(bn, border, bottom, fictitious_only);
            } else {
                VarId v = *entry;
                if (!border.contains(v))
                    throw InvalidArgument("cannot promote " + bn.name(v) + ": not in border " + bn.format(border));
                for (int rule : {1, 2, 3, 6}) {
                    if (auto c = promotion_cohort(bn, bottom, v, rule)) {
                        m = Move{v, *c, rule, v, (border - VarSet::single(v)) | *c};
                        break;
                    }
                }
            }
        } else {
            m = choose_next(bn, border, bottom);
        }
        border = m.result;
        bottom -= m.cohort;
        chain.steps.push_back(ChainStep{j, m.promoted, m.cohort, border, cohort_table(bn, m.cohort), m.rule});
        ++j;
    }
    if (forced && j < forced->size())
        throw InvalidArgument("promotion order is longer than the chain (" + std::to_string(j) + " steps)");
    return chain;
}

std::vector<std::string> check_chain(const BorderChain& chain) {
    const BayesianNetwork& bn = *chain.source;
    std::vector<std::string> out;
    auto fail = [&](std::size_t j, const std::string& what) {
        out.push_back("step " + std::to_string(j) + ": " + what);
    };
    if (chain.steps.empty()) return {"empty chain"};
    const ChainStep& s0 = chain.steps.front();
    if (s0.border != s0.cohort) fail(0, "initial border differs from its cohort");
    for (VarId v : s0.border)
        if (!bn.is_root(v)) fail(0, bn.name(v) + " is not a root");
    if (!set_co_parents(bn, s0.border).empty() && set_co_parents(bn, initial_border(bn)).empty())
        fail(0, "initial border has co-parents");
    VarSet covered;
    for (std::size_t j = 0; j < chain.steps.size(); ++j) {
        const ChainStep& s = chain.steps[j];
        if (s.index != j) fail(j, "index mismatch");
        if (s.cohort.intersects(covered)) fail(j, "cohort overlaps an earlier cohort");
        covered |= s.cohort;
        if (s.cohort_table.scope() != (s.cohort | set_parents(bn, s.cohort)))
            fail(j, "cohort table scope is not the cohort and its parents");
        if (j == 0) continue;
        const VarSet& prev = chain.steps[j - 1].border;
        VarSet expect = prev | s.cohort;
        if (s.promoted) {
            if (!prev.contains(*s.promoted)) fail(j, "promoted variable not in previous border");
            expect.erase(*s.promoted);
        }
        if (s.border != expect) fail(j, "border is not (previous \\ promoted) ∪ cohort");
        if (!(prev | s.cohort).contains_all(set_parents(bn, s.cohort)))
            fail(j, "cohort has a parent outside the previous border");
    }
    if (covered != bn.all()) out.push_back("cohorts do not cover every variable");
    return out;
}

namespace {

Factor border_indicator(const BayesianNetwork& bn, const VarSet& border, const EvidenceSet& ev) {
    VarSet vs = ev.variables_in(border);
    auto cards = bn.cards(vs);
    return indicator(vs, cards, ev);
}

}  // namespace

std::vector<Factor> downward_pass(const BorderChain& chain, const EvidenceSet& ev) {
    std::vector<Factor> pi;
    pi.reserve(chain.steps.size());
    for (const ChainStep& s : chain.steps) {
        Factor phi = restrict(s.cohort_table, ev);
        if (pi.empty()) {
            pi.push_back(std::move(phi));
            continue;
        }
        Factor joint = multiply(phi, pi.back());
        pi.push_back(s.promoted ? sum_out(joint, VarSet::single(*s.promoted)) : std::move(joint));
    }
    return pi;
}

std::vector<Factor> upward_pass(const BorderChain& chain, const EvidenceSet& ev) {
    const BayesianNetwork& bn = *chain.source;
    const std::size_t n = chain.steps.size();
    std::vector<Factor> lambda(n);
    lambda[n - 1] = border_indicator(bn, chain.steps[n - 1].border, ev);
    for (std::size_t j = n - 1; j > 0; --j) {
        const ChainStep& s = chain.steps[j];
        Factor up = sum_out(multiply(restrict(s.cohort_table, ev), lambda[j]), s.cohort);
        // The promoted variable's own indicator is not carried by the cohort.
        lambda[j - 1] = multiply(up, border_indicator(bn, chain.steps[j - 1].border, ev));
    }
    return lambda;
}

PassResult run_passes(const BorderChain& chain, const EvidenceSet& ev) {
    PassResult r;
    r.pi = downward_pass(chain, ev);
    r.lambda = upward_pass(chain, ev);
    r.alpha = chain.steps.size();
    r.beta = 0;
    for (std::size_t j = 0; j < chain.steps.size(); ++j) {
        if (!ev.variables_in(chain.steps[j].cohort).empty()) {
            r.alpha = std::min(r.alpha, j);
            r.beta = j;
        }
    }
    return r;
}

Posterior chain_posterior(const BorderChain& chain, const PassResult& passes, VarId q,
                          std::optional<std::size_t> at) {
    std::size_t j = 0;
    if (at) {
        j = *at;
        if (j >= chain.steps.size() || !chain.steps[j].border.contains(q))
            throw InvalidArgument("border " + std::to_string(j) + " does not hold the query variable");
    } else {
        while (!chain.steps[j].border.contains(q)) ++j;
    }
    return make_posterior(marginal(multiply(passes.pi[j], passes.lambda[j]), VarSet::single(q)));
}

Posterior chain_posterior(const BorderChain& chain, const EvidenceSet& ev, VarId q) {
    return chain_posterior(chain, run_passes(chain, ev), q);
}

}  // namespace bpi
