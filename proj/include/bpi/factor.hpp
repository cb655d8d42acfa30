#pragma once

#include <span>
#include <utility>
#include <vector>

#include "evidence.hpp"
#include "varset.hpp"

namespace bpi {

// Dense non-negative table. Scope ascending by id, row-major, last scope
// variable fastest.
class Factor {
public:
    Factor() : values_{1.0} {}
    Factor(VarSet scope, std::vector<int> cards, std::vector<double> values);

    static Factor scalar(double v);
    static Factor ones(VarSet scope, std::vector<int> cards);

    const VarSet& scope() const { return scope_; }
    const std::vector<int>& cards() const { return cards_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    bool is_scalar() const { return scope_.empty(); }

    int card_of(VarId v) const;
    double operator[](std::size_t i) const { return values_[i]; }
    // Entry at a full assignment given in scope order.
    double at(std::span<const int> assignment) const;
    double sum() const;

    friend bool operator==(const Factor&, const Factor&) = default;

private:
    VarSet scope_;
    std::vector<int> cards_;
    std::vector<double> values_;
};

Factor multiply(const Factor& f, const Factor& g);
Factor sum_out(const Factor& f, const VarSet& vars);
// Sums out everything except `keep` (keep need not be inside the scope).
Factor marginal(const Factor& f, const VarSet& keep);
// Zeroes entries that use a disallowed value of an evidence variable in scope.
Factor restrict(const Factor& f, const EvidenceSet& ev);
// 0/1 factor over the evidence variables of `scope`; scalar 1 when none.
// `cards` lists the cardinality of each member of `scope`.
Factor indicator(const VarSet& scope, std::span<const int> cards, const EvidenceSet& ev);
// Entries divided by their sum; returns (normalized, sum). Throws
// ImpossibleEvidence when the sum is zero.
std::pair<Factor, double> normalize(const Factor& f);
// Entrywise f / g where g's scope is contained in f's; the caller guarantees
// g has no zero entry.
Factor divide(const Factor& f, const Factor& g);

bool approx_equal(const Factor& a, const Factor& b, double abs_tol);
double max_abs_diff(const Factor& a, const Factor& b);

}  // namespace bpi
