#pragma once

#include <map>
#include <string>
#include <vector>

#include "varset.hpp"

namespace bpi {

// Allowed value indices per evidential variable. A variable whose allowed set
// is its full range is not stored.
class EvidenceSet {
public:
    // Throws InvalidArgument on an empty set or out-of-range index.
    void set(VarId v, std::vector<int> allowed, int cardinality);
    void retract(VarId v) { allowed_.erase(v); }

    bool empty() const { return allowed_.empty(); }
    std::size_t size() const { return allowed_.size(); }
    bool has(VarId v) const { return allowed_.count(v) != 0; }
    bool allows(VarId v, int value) const;
    const std::vector<int>& allowed(VarId v) const { return allowed_.at(v); }
    const std::map<VarId, std::vector<int>>& entries() const { return allowed_; }

    VarSet variables() const;
    VarSet variables_in(const VarSet& scope) const;

    // Compact key of the evidence restricted to `scope`; equal keys mean equal
    // indicator columns over that scope.
    std::string fingerprint(const VarSet& scope) const;

    friend bool operator==(const EvidenceSet&, const EvidenceSet&) = default;

private:
    std::map<VarId, std::vector<int>> allowed_;
};

}  // namespace bpi
