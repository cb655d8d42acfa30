#include "bpi/factor.hpp"

#include <cmath>
#include <numeric>

#include "bpi/errors.hpp"

namespace bpi {

namespace {

std::size_t product(const std::vector<int>& cards) {
    std::size_t n = 1;
    for (int c : cards) n *= static_cast<std::size_t>(c);
    return n;
}

// Stride of each variable of `target` inside a factor with (scope, cards);
// zero when the variable is absent.
std::vector<std::size_t> strides_in(const VarSet& target, const VarSet& scope,
                                    const std::vector<int>& cards) {
    std::vector<std::size_t> own(scope.size());
    std::size_t s = 1;
    for (std::size_t k = scope.size(); k-- > 0;) {
        own[k] = s;
        s *= static_cast<std::size_t>(cards[k]);
    }
    std::vector<std::size_t> out(target.size(), 0);
    const auto& sv = scope.ids();
    for (std::size_t k = 0; k < target.size(); ++k) {
        auto it = std::lower_bound(sv.begin(), sv.end(), target.ids()[k]);
        if (it != sv.end() && *it == target.ids()[k]) out[k] = own[static_cast<std::size_t>(it - sv.begin())];
    }
    return out;
}

}  // namespace

Factor::Factor(VarSet scope, std::vector<int> cards, std::vector<double> values)
    : scope_(std::move(scope)), cards_(std::move(cards)), values_(std::move(values)) {
    if (cards_.size() != scope_.size()) throw InvalidArgument("factor: cardinality list does not match scope");
    for (int c : cards_)
        if (c < 1) throw InvalidArgument("factor: cardinality must be at least 1");
    if (values_.size() != product(cards_)) throw InvalidArgument("factor: value count does not match cardinalities");
    for (double v : values_)
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("factor: entries must be finite and non-negative");
}

Factor Factor::scalar(double v) { return Factor({}, {}, {v}); }

Factor Factor::ones(VarSet scope, std::vector<int> cards) {
    std::size_t n = product(cards);
    return Factor(std::move(scope), std::move(cards), std::vector<double>(n, 1.0));
}

int Factor::card_of(VarId v) const {
    const auto& ids = scope_.ids();
    auto it = std::lower_bound(ids.begin(), ids.end(), v);
    if (it == ids.end() || *it != v) throw InvalidArgument("factor: variable not in scope");
    return cards_[static_cast<std::size_t>(it - ids.begin())];
}

double Factor::at(std::span<const int> assignment) const {
    if (assignment.size() != scope_.size()) throw InvalidArgument("factor: assignment length mismatch");
    std::size_t idx = 0;
    for (std::size_t k = 0; k < assignment.size(); ++k) idx = idx * static_cast<std::size_t>(cards_[k]) + static_cast<std::size_t>(assignment[k]);
    return values_[idx];
}

double Factor::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

Factor multiply(const Factor& f, const Factor& g) {
    VarSet scope = f.scope() | g.scope();
    std::vector<int> cards;
    cards.reserve(scope.size());
    for (VarId v : scope) {
        bool in_f = f.scope().contains(v);
        bool in_g = g.scope().contains(v);
        if (in_f && in_g && f.card_of(v) != g.card_of(v))
            throw InvalidArgument("multiply: cardinality mismatch for a shared variable");
        cards.push_back(in_f ? f.card_of(v) : g.card_of(v));
    }
    auto sf = strides_in(scope, f.scope(), f.cards());
    auto sg = strides_in(scope, g.scope(), g.cards());
    std::size_t n = product(cards);
    std::vector<double> out(n);
    std::vector<int> digit(scope.size(), 0);
    std::size_t i_f = 0, i_g = 0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = f[i_f] * g[i_g];
        for (std::size_t k = scope.size(); k-- > 0;) {
            if (++digit[k] < cards[k]) {
                i_f += sf[k];
                i_g += sg[k];
                break;
            }
            digit[k] = 0;
            i_f -= sf[k] * static_cast<std::size_t>(cards[k] - 1);
            i_g -= sg[k] * static_cast<std::size_t>(cards[k] - 1);
        }
    }
    return Factor(std::move(scope), std::move(cards), std::move(out));
}

Factor sum_out(const Factor& f, const VarSet& vars) {
    if (!f.scope().contains_all(vars)) throw InvalidArgument("sum_out: variable not in scope");
    return marginal(f, f.scope() - vars);
}

Factor marginal(const Factor& f, const VarSet& keep) {
    VarSet scope = f.scope() & keep;
    if (scope == f.scope()) return f;
    std::vector<int> cards;
    for (VarId v : scope) cards.push_back(f.card_of(v));
    // Walk f in order and accumulate into the kept coordinates.
    auto s_out = strides_in(f.scope(), scope, cards);
    const auto& fc = f.cards();
    std::vector<double> out(product(cards), 0.0);
    std::vector<int> digit(fc.size(), 0);
    std::size_t j = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        out[j] += f[i];
        for (std::size_t k = fc.size(); k-- > 0;) {
            if (++digit[k] < fc[k]) {
                j += s_out[k];
                break;
            }
            digit[k] = 0;
            j -= s_out[k] * static_cast<std::size_t>(fc[k] - 1);
        }
    }
    return Factor(std::move(scope), std::move(cards), std::move(out));
}

Factor restrict(const Factor& f, const EvidenceSet& ev) {
    VarSet evs = ev.variables_in(f.scope());
    if (evs.empty()) return f;
    std::vector<int> cards;
    for (VarId v : f.scope()) cards.push_back(f.card_of(v));
    Factor mask = indicator(f.scope(), cards, ev);
    return multiply(f, mask);
}

Factor indicator(const VarSet& scope, std::span<const int> cards, const EvidenceSet& ev) {
    if (cards.size() != scope.size()) throw InvalidArgument("indicator: cardinality list does not match scope");
    std::vector<VarId> ids;
    std::vector<int> ic;
    for (std::size_t k = 0; k < scope.size(); ++k) {
        if (!ev.has(scope.ids()[k])) continue;
        ids.push_back(scope.ids()[k]);
        ic.push_back(cards[k]);
    }
    if (ids.empty()) return Factor::scalar(1.0);
    std::size_t n = product(ic);
    std::vector<double> vals(n, 0.0);
    std::vector<int> digit(ids.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        bool ok = true;
        for (std::size_t k = 0; k < ids.size() && ok; ++k) ok = ev.allows(ids[k], digit[k]);
        vals[i] = ok ? 1.0 : 0.0;
        for (std::size_t k = ids.size(); k-- > 0;) {
            if (++digit[k] < ic[k]) break;
            digit[k] = 0;
        }
    }
    return Factor(VarSet(std::move(ids)), std::move(ic), std::move(vals));
}

std::pair<Factor, double> normalize(const Factor& f) {
    double z = f.sum();
    if (!(z > 0.0)) throw ImpossibleEvidence();
    std::vector<double> vals = f.values();
    for (double& v : vals) v /= z;
    return {Factor(f.scope(), f.cards(), std::move(vals)), z};
}

Factor divide(const Factor& f, const Factor& g) {
    if (!f.scope().contains_all(g.scope())) throw InvalidArgument("divide: divisor scope not contained");
    for (double v : g.values())
        if (!(v > 0.0)) throw InvalidArgument("divide: divisor has a zero entry");
    std::vector<double> out(f.size());
    auto sg = strides_in(f.scope(), g.scope(), g.cards());
    const auto& fc = f.cards();
    std::vector<int> digit(fc.size(), 0);
    std::size_t j = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        out[i] = f[i] / g[j];
        for (std::size_t k = fc.size(); k-- > 0;) {
            if (++digit[k] < fc[k]) {
                j += sg[k];
                break;
            }
            digit[k] = 0;
            j -= sg[k] * static_cast<std::size_t>(fc[k] - 1);
        }
    }
    return Factor(f.scope(), f.cards(), std::move(out));
}

double max_abs_diff(const Factor& a, const Factor& b) {
    if (a.scope() != b.scope() || a.cards() != b.cards()) return INFINITY;
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

bool approx_equal(const Factor& a, const Factor& b, double abs_tol) { return max_abs_diff(a, b) <= abs_tol; }

}  // namespace bpi
