#include "bpi/bp_build.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "bpi/errors.hpp"

namespace bpi {

namespace {

std::size_t at(int x) { return static_cast<std::size_t>(x); }

}  // namespace

VarSet aggregation_closure(const BayesianNetwork& bn, const VarSet& seed) {
    VarSet s = seed;
    while (true) {
        VarSet between = descendants(bn, s) & ancestors(bn, s);
        between -= s;
        if (between.empty()) return s;
        s |= between;
    }
}

std::vector<int> MacroPolytree::parents(int m) const {
    std::vector<int> out;
    for (auto [p, c] : edges)
        if (c == m) out.push_back(p);
    return out;
}

std::vector<int> MacroPolytree::children(int m) const {
    std::vector<int> out;
    for (auto [p, c] : edges)
        if (p == m) out.push_back(c);
    return out;
}

std::vector<int> MacroPolytree::order() const {
    std::vector<int> indeg(macros.size(), 0);
    for (auto [p, c] : edges) ++indeg[at(c)];
    std::set<int> ready;
    for (std::size_t m = 0; m < macros.size(); ++m)
        if (indeg[m] == 0) ready.insert(static_cast<int>(m));
    std::vector<int> out;
    while (!ready.empty()) {
        int m = *ready.begin();
        ready.erase(ready.begin());
        out.push_back(m);
        for (int c : children(m))
            if (--indeg[at(c)] == 0) ready.insert(c);
    }
    if (out.size() != macros.size()) throw InvalidArgument("macro-node quotient has a directed cycle");
    return out;
}

std::string MacroPolytree::format(int m) const { return source->format(macros.at(at(m))); }

namespace {

// Growing partition of the recruited variables with the quotient over the
// recruited edges.
class Grouping {
public:
    explicit Grouping(std::size_t n) : group_(n, -1) {}

    int group(VarId v) const { return group_[at(v)]; }
    const VarSet& members(int g) const { return groups_[at(g)]; }

    int add(VarId v) {
        group_[at(v)] = static_cast<int>(groups_.size());
        groups_.push_back(VarSet::single(v));
        return group_[at(v)];
    }
    void add_edge(VarId p, VarId c) { edges_.emplace_back(p, c); }

    bool has_edge(int from, int to) const {
        for (auto [p, c] : edges_)
            if (group(p) == from && group(c) == to) return true;
        return false;
    }

    std::vector<int> neighbors(int g) const {
        std::set<int> out;
        for (auto [p, c] : edges_) {
            int gp = group(p), gc = group(c);
            if (gp == g && gc != g) out.insert(gc);
            if (gc == g && gp != g) out.insert(gp);
        }
        return {out.begin(), out.end()};
    }

    // Undirected quotient path from a to b (inclusive), empty if none.
    std::vector<int> path(int a, int b) const {
        std::map<int, int> pred{{a, -1}};
        std::deque<int> queue{a};
        while (!queue.empty()) {
            int g = queue.front();
            queue.pop_front();
            if (g == b) break;
            for (int h : neighbors(g)) {
                if (pred.count(h)) continue;
                pred[h] = g;
                queue.push_back(h);
            }
        }
        if (!pred.count(b)) return {};
        std::vector<int> out;
        for (int g = b; g != -1; g = pred[g]) out.push_back(g);
        std::reverse(out.begin(), out.end());
        return out;
    }

    int merge(const std::vector<int>& gs) {
        int keep = *std::min_element(gs.begin(), gs.end());
        for (int g : gs) {
            if (g == keep) continue;
            for (VarId v : groups_[at(g)]) group_[at(v)] = keep;
            groups_[at(keep)] |= groups_[at(g)];
            groups_[at(g)] = VarSet{};
        }
        return keep;
    }

    // Absorbs every group lying on a directed quotient path that leaves and
    // re-enters group g.
    int close(int g) {
        while (true) {
            auto reach = [&](bool forward) {
                std::set<int> seen;
                std::vector<int> stack{g};
                while (!stack.empty()) {
                    int x = stack.back();
                    stack.pop_back();
                    for (auto [p, c] : edges_) {
                        int from = group(forward ? p : c), to = group(forward ? c : p);
                        if (from == x && to != g && to != x && !seen.count(to)) {
                            seen.insert(to);
                            stack.push_back(to);
                        }
                    }
                }
                return seen;
            };
            auto down = reach(true), up = reach(false);
            std::vector<int> both{g};
            for (int x : down)
                if (up.count(x)) both.push_back(x);
            if (both.size() == 1) return g;
            g = merge(both);
        }
    }

    std::vector<VarSet> alive() const {
        std::vector<VarSet> out;
        for (const auto& s : groups_)
            if (!s.empty()) out.push_back(s);
        return out;
    }

private:
    std::vector<int> group_;
    std::vector<VarSet> groups_;
    std::vector<std::pair<VarId, VarId>> edges_;
};

MacroPolytree make_macro_polytree(const BayesianNetwork& bn, std::vector<VarSet> macros) {
    std::sort(macros.begin(), macros.end(), [](const VarSet& a, const VarSet& b) { return a.front() < b.front(); });
    MacroPolytree mp;
    mp.source = &bn;
    mp.macros = std::move(macros);
    mp.macro_of.assign(bn.size(), -1);
    for (std::size_t m = 0; m < mp.macros.size(); ++m)
        for (VarId v : mp.macros[m]) mp.macro_of[at(v)] = static_cast<int>(m);
    std::set<std::pair<int, int>> edges;
    for (VarId v = 0; v < static_cast<VarId>(bn.size()); ++v)
        for (VarId p : bn.parent_set(v))
            if (mp.macro_of[at(p)] != mp.macro_of[at(v)]) edges.insert({mp.macro_of[at(p)], mp.macro_of[at(v)]});
    mp.edges.assign(edges.begin(), edges.end());
    return mp;
}

}  // namespace

MacroPolytree stage1(const BayesianNetwork& bn) {
    Grouping g(bn.size());
    for (VarId tau : topological_order(bn)) {
        g.add(tau);
        const VarSet& ps = bn.parent_set(tau);
        std::size_t i = 0;
        for (VarId p : ps) {
            const bool last_edge = ++i == ps.size();
            int gp = g.group(p), gt = g.group(tau);
            std::vector<int> loop = gp == gt ? std::vector<int>{} : g.path(gp, gt);
            int merged = -1;
            if (loop.size() > 2) {
                // Parent-to-parent part of the loop (the receiving group excluded).
                std::vector<int> between(loop.begin(), loop.end() - 1);
                if (last_edge && between.size() == 2) {
                    int lower = g.has_edge(between[0], between[1]) ? between[1] : between[0];
                    merged = g.merge({gt, lower});
                } else {
                    std::vector<int> keep;
                    for (std::size_t k = 0; k < between.size(); ++k) {
                        bool interior = k > 0 && k + 1 < between.size();
                        bool source = interior && g.has_edge(between[k], between[k - 1]) &&
                                      g.has_edge(between[k], between[k + 1]);
                        if (!source) keep.push_back(between[k]);
                    }
                    merged = g.merge(keep);
                }
            }
            g.add_edge(p, tau);
            if (merged >= 0) g.close(merged);
        }
    }
    return make_macro_polytree(bn, g.alive());
}

std::vector<std::string> check_macro_polytree(const MacroPolytree& mp) {
    const BayesianNetwork& bn = *mp.source;
    std::vector<std::string> out;
    VarSet seen;
    for (const auto& m : mp.macros) {
        if (m.intersects(seen)) out.push_back("macro nodes overlap");
        seen |= m;
        if (aggregation_closure(bn, m) != m) out.push_back("macro node " + bn.format(m) + " is not aggregation-closed");
    }
    if (seen != bn.all()) out.push_back("macro nodes do not cover every variable");
    try {
        mp.order();
    } catch (const InvalidArgument&) {
        out.push_back("quotient digraph has a directed cycle");
    }
    std::set<std::pair<int, int>> undirected;
    for (auto [p, c] : mp.edges) undirected.insert({std::min(p, c), std::max(p, c)});
    if (undirected.size() == mp.edges.size()) {
        try {
            Tree(mp.macros.size(), mp.edges);
        } catch (const InvalidArgument&) {
            out.push_back("quotient is not singly connected");
        }
    } else {
        out.push_back("two macro nodes joined in both directions");
    }
    return out;
}

std::vector<std::pair<int, int>> BorderPolytree::edges() const {
    std::vector<std::pair<int, int>> out;
    for (const auto& b : borders)
        for (int p : b.parents) out.emplace_back(p, b.id);
    std::sort(out.begin(), out.end());
    return out;
}

Tree BorderPolytree::tree() const { return Tree(borders.size(), edges()); }

std::vector<VarSet> BorderPolytree::member_sets() const {
    std::vector<VarSet> out;
    for (const auto& b : borders) out.push_back(b.members);
    return out;
}

std::vector<int> BorderPolytree::homes(VarId v) const {
    std::vector<int> out;
    for (const auto& b : borders)
        if (b.members.contains(v)) out.push_back(b.id);
    return out;
}

std::string BorderPolytree::describe(int border) const { return source->format(borders.at(at(border)).members); }

namespace {

class Stretcher {
public:
    Stretcher(const MacroPolytree& mp, BorderPolytree& bp) : mp_(mp), bn_(*mp.source), bp_(bp) {
        for (auto [g, d] : mp.edges) carried_[{g, d}] = mp.macros[at(g)] & set_parents(bn_, mp.macros[at(d)]);
    }

    void run() {
        for (int d : mp_.order()) stretch(d);
    }

private:
    struct Pending {
        VarSet carried;
        int attach = -1;
        bool joined = false;
    };

    int emit(Border b, int macro) {
        b.id = static_cast<int>(bp_.borders.size());
        b.macro = macro;
        bp_.borders.push_back(std::move(b));
        chain_.push_back(bp_.borders.back().id);
        return bp_.borders.back().id;
    }

    void stretch(int d) {
        const VarSet& members = mp_.macros[at(d)];
        chain_.clear();
        std::vector<Pending> pend;
        for (int g : mp_.parents(d)) pend.push_back({carried_.at({g, d}), attach_.at({g, d}), false});
        std::vector<VarSet> child_sets;
        VarSet carried_members;
        for (int c : mp_.children(d)) {
            child_sets.push_back(carried_.at({d, c}));
            carried_members |= child_sets.back();
        }

        int last = -1;
        VarSet border, bottom = members, recruited;
        if (pend.empty()) {
            Border b;
            b.kind = Border::Kind::Root;
            b.members = b.cohort = initial_border(bn_, members);
            b.cohort_table = cohort_table(bn_, b.cohort);
            border = b.members;
            bottom -= border;
            recruited |= border;
            last = emit(std::move(b), d);
        }

        // A carried member stays until its whole carried set has been recruited.
        auto blocked = [&](VarId v) {
            for (const auto& s : child_sets)
                if (s.contains(v) && !recruited.contains_all(s)) return true;
            return false;
        };

        while (!bottom.empty()) {
            VarSet ext;
            for (const auto& p : pend)
                if (!p.joined) ext |= p.carried;
            auto needed_for = [&](const Move& m) {
                VarSet need = set_parents(bn_, m.cohort);
                if (m.promoted) need.insert(*m.promoted);
                need -= border;
                std::vector<std::size_t> out;
                for (std::size_t k = 0; k < pend.size(); ++k)
                    if (!pend[k].joined && pend[k].carried.intersects(need)) out.push_back(k);
                return out;
            };
            MovePolicy policy;
            policy.may_promote = [&](VarId v, int rule) {
                if (ext.contains(v)) return rule == 2 || rule == 3 || rule == 6;
                if (!members.contains(v)) return true;
                if (blocked(v)) return false;
                return !(rule == 1 && carried_members.contains(v));
            };
            policy.result_border = [&](const Move& m) {
                VarSet r = border | m.cohort;
                for (std::size_t k : needed_for(m)) r |= pend[k].carried;
                if (m.promoted) r.erase(*m.promoted);
                return r;
            };
            Move m = *best_move(bn_, border | ext, bottom, policy);

            int parent = last;
            VarSet base = border;
            auto need = needed_for(m);
            if (!need.empty()) {
                const Pending& first = pend[need.front()];
                if (last < 0 && need.size() == 1 && first.carried == bp_.borders[at(first.attach)].members) {
                    parent = first.attach;
                    base = first.carried;
                } else {
                    Border j;
                    j.kind = Border::Kind::Type2;
                    if (last >= 0) {
                        j.parents.push_back(last);
                        j.carried.push_back(border);
                    }
                    for (std::size_t k : need) {
                        j.parents.push_back(pend[k].attach);
                        j.carried.push_back(pend[k].carried);
                    }
                    for (const auto& s : j.carried) j.members |= s;
                    base = j.members;
                    parent = emit(std::move(j), d);
                }
                for (std::size_t k : need) pend[k].joined = true;
            }

            Border b;
            b.cohort = m.cohort;
            b.cohort_table = cohort_table(bn_, m.cohort);
            if (parent < 0) {
                b.kind = Border::Kind::Root;
                b.members = m.cohort;
            } else {
                b.kind = Border::Kind::Type1;
                b.parents = {parent};
                b.promoted = m.promoted;
                b.rule = m.rule;
                b.members = base | m.cohort;
                if (m.promoted) b.members.erase(*m.promoted);
            }
            border = b.members;
            bottom -= m.cohort;
            recruited |= m.cohort;
            last = emit(std::move(b), d);
        }

        // Trim down to the carried sets that are still together.
        VarSet keep;
        for (const auto& s : child_sets)
            if (border.contains_all(s)) keep |= s;
        if (!keep.empty()) {
            for (VarId v : border - keep) {
                Border b;
                b.kind = Border::Kind::Type1;
                b.parents = {last};
                b.promoted = v;
                b.rule = 1;
                b.cohort_table = Factor::scalar(1.0);
                b.members = border - VarSet::single(v);
                border = b.members;
                last = emit(std::move(b), d);
            }
        }

        for (int c : mp_.children(d)) {
            const VarSet& s = carried_.at({d, c});
            int found = -1;
            for (int id : chain_)
                if (bp_.borders[at(id)].members.contains_all(s)) found = id;
            if (found < 0) throw InvalidArgument("carried set " + bn_.format(s) + " never co-located");
            attach_[{d, c}] = found;
        }
    }

    const MacroPolytree& mp_;
    const BayesianNetwork& bn_;
    BorderPolytree& bp_;
    std::map<std::pair<int, int>, VarSet> carried_;
    std::map<std::pair<int, int>, int> attach_;
    std::vector<int> chain_;
};

}  // namespace

BorderPolytree stage2(const MacroPolytree& mp) {
    BorderPolytree bp;
    bp.source = mp.source;
    bp.macros = mp;
    Stretcher(mp, bp).run();
    return bp;
}

BorderPolytree build_bp(const BayesianNetwork& bn) { return stage2(stage1(bn)); }

BorderPolytree bp_from_chain(const BorderChain& chain) {
    const BayesianNetwork& bn = *chain.source;
    BorderPolytree bp;
    bp.source = &bn;
    bp.macros = make_macro_polytree(bn, {bn.all()});
    for (const ChainStep& s : chain.steps) {
        Border b;
        b.id = static_cast<int>(s.index);
        b.members = s.border;
        b.cohort = s.cohort;
        b.cohort_table = s.cohort_table;
        if (s.index == 0) {
            b.kind = Border::Kind::Root;
        } else {
            b.kind = Border::Kind::Type1;
            b.parents = {b.id - 1};
            b.promoted = s.promoted;
            b.rule = s.rule;
        }
        bp.borders.push_back(std::move(b));
    }
    return bp;
}

BpDiagnostics verify_bp(const BorderPolytree& bp) {
    const BayesianNetwork& bn = *bp.source;
    BpDiagnostics d;
    auto err = [&](int id, const std::string& what) {
        d.errors.push_back("border " + std::to_string(id) + " " + bp.describe(id) + ": " + what);
    };

    std::optional<Tree> tree;
    try {
        tree.emplace(bp.tree());
    } catch (const InvalidArgument&) {
        d.errors.push_back("border graph is not a polytree");
    }

    std::vector<int> recruited_at(bn.size(), -1);
    for (const Border& b : bp.borders) {
        if (b.id != static_cast<int>(&b - bp.borders.data())) err(b.id, "id does not match position");
        for (int p : b.parents)
            if (p >= b.id) err(b.id, "parent does not precede child");
        if (b.kind != Border::Kind::Type2) {
            for (VarId v : b.cohort) {
                if (recruited_at[at(v)] >= 0) err(b.id, bn.name(v) + " recruited again");
                recruited_at[at(v)] = b.id;
            }
            if (b.cohort_table.scope() != (b.cohort | set_parents(bn, b.cohort)))
                err(b.id, "cohort table scope mismatch");
        }
        switch (b.kind) {
            case Border::Kind::Root:
                if (!b.parents.empty()) err(b.id, "root border with parents");
                if (b.members != b.cohort) err(b.id, "root border members differ from its cohort");
                if (!set_parents(bn, b.cohort).empty()) err(b.id, "root cohort has outside parents");
                break;
            case Border::Kind::Type1: {
                if (b.parents.size() != 1) {
                    err(b.id, "type-1 border needs exactly one parent");
                    break;
                }
                const VarSet& up = bp.borders[at(b.parents[0])].members;
                VarSet expect = up | b.cohort;
                if (b.promoted) {
                    if (!up.contains(*b.promoted)) err(b.id, "promoted variable not in parent border");
                    expect.erase(*b.promoted);
                }
                if (b.cohort.intersects(up)) err(b.id, "cohort overlaps parent border");
                if (b.members != expect) err(b.id, "members are not (parent ∪ cohort) \\ promoted");
                if (!(up | b.cohort).contains_all(set_parents(bn, b.cohort)))
                    err(b.id, "cohort parent outside parent border");
                break;
            }
            case Border::Kind::Type2: {
                if (b.parents.empty() || b.parents.size() != b.carried.size()) {
                    err(b.id, "junction parent/carried mismatch");
                    break;
                }
                VarSet all;
                for (std::size_t k = 0; k < b.parents.size(); ++k) {
                    if (!bp.borders[at(b.parents[k])].members.contains_all(b.carried[k]))
                        err(b.id, "carried set not inside its parent border");
                    if (b.carried[k].intersects(all)) err(b.id, "carried sets overlap");
                    all |= b.carried[k];
                }
                if (all != b.members) err(b.id, "junction members differ from the carried sets");
                break;
            }
        }
    }
    for (VarId v = 0; v < static_cast<VarId>(bn.size()); ++v)
        if (recruited_at[at(v)] < 0) d.errors.push_back("variable " + bn.name(v) + " never recruited");

    if (tree) {
        for (VarId v = 0; v < static_cast<VarId>(bn.size()); ++v) {
            auto homes = bp.homes(v);
            if (homes.empty()) continue;
            std::set<int> in(homes.begin(), homes.end()), seen{homes.front()};
            std::vector<int> stack{homes.front()};
            while (!stack.empty()) {
                int x = stack.back();
                stack.pop_back();
                for (int w : tree->neighbors(x))
                    if (in.count(w) && !seen.count(w)) {
                        seen.insert(w);
                        stack.push_back(w);
                    }
            }
            if (seen.size() != in.size())
                d.errors.push_back("running intersection fails for " + bn.name(v));
        }
    }

    const MacroPolytree& mp = bp.macros;
    for (auto [g, c] : mp.edges) {
        VarSet s = mp.macros[at(g)] & set_parents(bn, mp.macros[at(c)]);
        bool together = std::any_of(bp.borders.begin(), bp.borders.end(), [&](const Border& b) {
            return b.macro == g && b.members.contains_all(s);
        });
        if (!together) d.errors.push_back("carried set " + bn.format(s) + " never together in one border");
    }
    std::map<std::pair<int, int>, int> between;
    for (auto [p, c] : bp.edges()) {
        int mp_ = bp.borders[at(p)].macro, mc = bp.borders[at(c)].macro;
        if (mp_ != mc) ++between[{std::min(mp_, mc), std::max(mp_, mc)}];
    }
    for (auto [pair, count] : between)
        if (count > 1)
            d.errors.push_back("macro nodes " + mp.format(pair.first) + " and " + mp.format(pair.second) +
                               " joined by " + std::to_string(count) + " edges");

    // Expected for most BPs; reported for information only.
    VarSet split;
    for (VarId v = 0; v < static_cast<VarId>(bn.size()); ++v) {
        VarSet family = bn.parent_set(v) | VarSet::single(v);
        bool kept = std::any_of(bp.borders.begin(), bp.borders.end(),
                                [&](const Border& b) { return b.members.contains_all(family); });
        if (!kept) split.insert(v);
    }
    if (!split.empty()) d.notes.push_back("not family preserving; families split for " + bn.format(split));
    return d;
}

std::string partition_listing(const MacroPolytree& mp) {
    std::ostringstream out;
    out << "macro\tmembers\tparents\n";
    for (std::size_t m = 0; m < mp.macros.size(); ++m) {
        out << m << '\t' << mp.format(static_cast<int>(m)) << '\t';
        auto ps = mp.parents(static_cast<int>(m));
        if (ps.empty()) out << '-';
        for (std::size_t i = 0; i < ps.size(); ++i) out << (i ? "," : "") << ps[i];
        out << '\n';
    }
    return out.str();
}

namespace {

const char* kind_name(Border::Kind k) {
    switch (k) {
        case Border::Kind::Root: return "root";
        case Border::Kind::Type1: return "type1";
        case Border::Kind::Type2: return "type2";
    }
    return "?";
}

}  // namespace

std::string border_listing(const BorderPolytree& bp) {
    const BayesianNetwork& bn = *bp.source;
    std::ostringstream out;
    out << "id\tmacro\tkind\tmembers\tparents\tpromoted\tcohort\trule\n";
    for (const Border& b : bp.borders) {
        out << b.id << '\t' << b.macro << '\t' << kind_name(b.kind) << '\t' << bn.format(b.members) << '\t';
        if (b.parents.empty()) out << '-';
        for (std::size_t k = 0; k < b.parents.size(); ++k) {
            out << (k ? "," : "") << b.parents[k];
            if (b.kind == Border::Kind::Type2) out << ':' << bn.format(b.carried[k]);
        }
        out << '\t' << (b.promoted ? bn.name(*b.promoted) : "-") << '\t';
        out << (b.kind == Border::Kind::Type2 ? "-" : bn.format(b.cohort)) << '\t';
        out << (b.kind == Border::Kind::Type1 ? std::to_string(b.rule) : "-") << '\n';
    }
    return out.str();
}

std::string to_dot(const BorderPolytree& bp) {
    const BayesianNetwork& bn = *bp.source;
    std::ostringstream out;
    out << "digraph bp {\n  node [shape=box];\n";
    for (std::size_t m = 0; m < bp.macros.macros.size(); ++m) {
        out << "  subgraph cluster_" << m << " {\n    label=\"" << bp.macros.format(static_cast<int>(m)) << "\";\n";
        for (const Border& b : bp.borders)
            if (b.macro == static_cast<int>(m))
                out << "    b" << b.id << " [label=\"" << bn.format(b.members) << "\""
                    << (b.kind == Border::Kind::Type2 ? ", style=dashed" : "") << "];\n";
        out << "  }\n";
    }
    for (auto [p, c] : bp.edges()) out << "  b" << p << " -> b" << c << ";\n";
    out << "}\n";
    return out.str();
}

}  // namespace bpi
