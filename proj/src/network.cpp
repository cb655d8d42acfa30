#include "bpi/network.hpp"

#include <functional>
#include <queue>
#include <set>

#include "bpi/errors.hpp"

namespace bpi {

BayesianNetwork::BayesianNetwork(std::vector<Variable> variables, std::vector<std::vector<VarId>> parents,
                                 std::vector<Factor> cpts)
    : variables_(std::move(variables)), parents_(std::move(parents)), cpts_(std::move(cpts)) {
    const auto n = variables_.size();
    if (parents_.size() != n || cpts_.size() != n) throw InvalidArgument("network: parent or CPT list length mismatch");
    std::set<std::string> names;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& var = variables_[i];
        if (var.id != static_cast<VarId>(i)) throw InvalidArgument("network: variable ids must be 0..n-1 in order");
        if (var.cardinality < 1 || var.labels.size() != static_cast<std::size_t>(var.cardinality))
            throw InvalidArgument("network: variable " + var.name + " has inconsistent labels");
        if (!names.insert(var.name).second) throw InvalidArgument("network: duplicate variable name " + var.name);
        std::set<std::string> labels(var.labels.begin(), var.labels.end());
        if (labels.size() != var.labels.size()) throw InvalidArgument("network: duplicate label in " + var.name);
    }
    parent_sets_.resize(n);
    children_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (VarId p : parents_[i]) {
            if (p < 0 || static_cast<std::size_t>(p) >= n) throw InvalidArgument("network: parent id out of range");
            if (p == static_cast<VarId>(i)) throw InvalidArgument("network: variable is its own parent");
        }
        parent_sets_[i] = VarSet(parents_[i]);
        if (parent_sets_[i].size() != parents_[i].size()) throw InvalidArgument("network: duplicate parent");
        for (VarId p : parents_[i]) children_[static_cast<std::size_t>(p)].insert(static_cast<VarId>(i));
    }
    for (std::size_t i = 0; i < n; ++i) {
        VarSet scope = parent_sets_[i] | VarSet::single(static_cast<VarId>(i));
        if (cpts_[i].scope() != scope || cpts_[i].cards() != cards(scope))
            throw InvalidArgument("network: CPT of " + variables_[i].name + " has the wrong scope");
    }
}

std::vector<int> BayesianNetwork::cards(const VarSet& vs) const {
    std::vector<int> out;
    out.reserve(vs.size());
    for (VarId v : vs) out.push_back(card(v));
    return out;
}

std::optional<VarId> BayesianNetwork::find(const std::string& name) const {
    for (const auto& v : variables_)
        if (v.name == name) return v.id;
    return std::nullopt;
}

VarId BayesianNetwork::id_of(const std::string& name) const {
    auto v = find(name);
    if (!v) throw InvalidArgument("unknown variable " + name);
    return *v;
}

std::optional<int> BayesianNetwork::label_index(VarId v, const std::string& label) const {
    const auto& labels = variable(v).labels;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return static_cast<int>(i);
    return std::nullopt;
}

VarSet BayesianNetwork::all() const {
    std::vector<VarId> ids(size());
    for (std::size_t i = 0; i < size(); ++i) ids[i] = static_cast<VarId>(i);
    return VarSet(std::move(ids));
}

VarSet BayesianNetwork::roots() const {
    VarSet r;
    for (const auto& v : variables_)
        if (is_root(v.id)) r.insert(v.id);
    return r;
}

std::string BayesianNetwork::format(const VarSet& vs) const {
    std::string s = "{";
    bool first = true;
    for (VarId v : vs) {
        if (!first) s += ',';
        s += name(v);
        first = false;
    }
    return s + "}";
}

Factor make_cpt(const std::vector<Variable>& variables, VarId child, const std::vector<VarId>& parents,
                const std::vector<double>& declared_values) {
    auto card = [&](VarId v) { return variables.at(static_cast<std::size_t>(v)).cardinality; };
    std::vector<VarId> declared = parents;
    declared.push_back(child);  // child fastest
    VarSet scope(declared);
    std::vector<int> cards;
    for (VarId v : scope) cards.push_back(card(v));
    std::size_t n = 1;
    for (int c : cards) n *= static_cast<std::size_t>(c);
    if (declared_values.size() != n) throw InvalidArgument("CPT value count mismatch");

    // Canonical stride of each declared position.
    std::vector<std::size_t> canon_stride(scope.size());
    std::size_t s = 1;
    for (std::size_t k = scope.size(); k-- > 0;) {
        canon_stride[k] = s;
        s *= static_cast<std::size_t>(cards[k]);
    }
    std::vector<std::size_t> stride(declared.size());
    std::vector<int> dcard(declared.size());
    for (std::size_t k = 0; k < declared.size(); ++k) {
        auto pos = static_cast<std::size_t>(std::lower_bound(scope.begin(), scope.end(), declared[k]) - scope.begin());
        stride[k] = canon_stride[pos];
        dcard[k] = card(declared[k]);
    }
    std::vector<double> vals(n);
    std::vector<int> digit(declared.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t idx = 0;
        for (std::size_t k = 0; k < declared.size(); ++k) idx += stride[k] * static_cast<std::size_t>(digit[k]);
        vals[idx] = declared_values[i];
        for (std::size_t k = declared.size(); k-- > 0;) {
            if (++digit[k] < dcard[k]) break;
            digit[k] = 0;
        }
    }
    return Factor(std::move(scope), std::move(cards), std::move(vals));
}

std::vector<double> declared_cpt_values(const BayesianNetwork& bn, VarId v) {
    std::vector<VarId> declared = bn.parents(v);
    declared.push_back(v);
    const Factor& f = bn.cpt(v);
    std::vector<int> dcard;
    for (VarId d : declared) dcard.push_back(bn.card(d));
    std::vector<std::size_t> pos(declared.size());
    for (std::size_t k = 0; k < declared.size(); ++k)
        pos[k] = static_cast<std::size_t>(std::lower_bound(f.scope().begin(), f.scope().end(), declared[k]) - f.scope().begin());
    std::vector<double> out(f.size());
    std::vector<int> digit(declared.size(), 0), canon(declared.size(), 0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        for (std::size_t k = 0; k < declared.size(); ++k) canon[pos[k]] = digit[k];
        out[i] = f.at(canon);
        for (std::size_t k = declared.size(); k-- > 0;) {
            if (++digit[k] < dcard[k]) break;
            digit[k] = 0;
        }
    }
    return out;
}

namespace {

VarSet closure(const BayesianNetwork& bn, const VarSet& start, bool upward) {
    VarSet seen;
    std::vector<VarId> stack(start.begin(), start.end());
    while (!stack.empty()) {
        VarId v = stack.back();
        stack.pop_back();
        const VarSet& next = upward ? bn.parent_set(v) : bn.children(v);
        for (VarId w : next) {
            if (seen.contains(w)) continue;
            seen.insert(w);
            stack.push_back(w);
        }
    }
    return seen;
}

void check_id(const BayesianNetwork& bn, VarId v) {
    if (v < 0 || static_cast<std::size_t>(v) >= bn.size()) throw InvalidArgument("unknown variable id " + std::to_string(v));
}

}  // namespace

VarSet co_parents(const BayesianNetwork& bn, VarId v) {
    check_id(bn, v);
    VarSet out;
    for (VarId c : bn.children(v)) out |= bn.parent_set(c);
    out.erase(v);
    return out;
}

VarSet ancestors(const BayesianNetwork& bn, VarId v) {
    check_id(bn, v);
    return closure(bn, VarSet::single(v), true);
}

VarSet descendants(const BayesianNetwork& bn, VarId v) {
    check_id(bn, v);
    return closure(bn, VarSet::single(v), false);
}

VarSet ancestors(const BayesianNetwork& bn, const VarSet& xs) {
    for (VarId v : xs) check_id(bn, v);
    return closure(bn, xs, true);
}

VarSet descendants(const BayesianNetwork& bn, const VarSet& xs) {
    for (VarId v : xs) check_id(bn, v);
    return closure(bn, xs, false);
}

VarSet set_parents(const BayesianNetwork& bn, const VarSet& xs) {
    VarSet h;
    for (VarId v : xs) {
        check_id(bn, v);
        h |= bn.parent_set(v);
    }
    return h - xs;
}

VarSet set_children(const BayesianNetwork& bn, const VarSet& xs) {
    VarSet l;
    for (VarId v : xs) {
        check_id(bn, v);
        l |= bn.children(v);
    }
    return l - (xs | set_parents(bn, xs));
}

VarSet set_co_parents(const BayesianNetwork& bn, const VarSet& xs) {
    VarSet k;
    for (VarId v : xs) k |= co_parents(bn, v);
    return k - (xs | set_parents(bn, xs) | set_children(bn, xs));
}

std::vector<VarId> topological_order(const BayesianNetwork& bn) {
    std::vector<std::size_t> indeg(bn.size());
    std::priority_queue<VarId, std::vector<VarId>, std::greater<>> ready;
    for (std::size_t i = 0; i < bn.size(); ++i) {
        indeg[i] = bn.parents(static_cast<VarId>(i)).size();
        if (indeg[i] == 0) ready.push(static_cast<VarId>(i));
    }
    std::vector<VarId> order;
    while (!ready.empty()) {
        VarId v = ready.top();
        ready.pop();
        order.push_back(v);
        for (VarId c : bn.children(v))
            if (--indeg[static_cast<std::size_t>(c)] == 0) ready.push(c);
    }
    if (order.size() != bn.size()) throw InvalidArgument("network has a directed cycle");
    return order;
}

std::vector<VarId> find_cycle(const BayesianNetwork& bn) {
    const std::size_t n = bn.size();
    std::vector<int> state(n, 0);  // 0 new, 1 on stack, 2 done
    std::vector<VarId> stack;
    std::vector<VarId> cycle;
    std::function<bool(VarId)> dfs = [&](VarId v) {
        state[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
        for (VarId c : bn.children(v)) {
            auto& s = state[static_cast<std::size_t>(c)];
            if (s == 1) {
                auto it = std::find(stack.begin(), stack.end(), c);
                cycle.assign(it, stack.end());
                cycle.push_back(c);
                return true;
            }
            if (s == 0 && dfs(c)) return true;
        }
        stack.pop_back();
        state[static_cast<std::size_t>(v)] = 2;
        return false;
    };
    for (std::size_t i = 0; i < n; ++i)
        if (state[i] == 0 && dfs(static_cast<VarId>(i))) return cycle;
    return {};
}

}  // namespace bpi
