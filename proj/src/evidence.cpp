#include "bpi/evidence.hpp"

#include <algorithm>

#include "bpi/errors.hpp"

namespace bpi {

void EvidenceSet::set(VarId v, std::vector<int> allowed, int cardinality) {
    std::sort(allowed.begin(), allowed.end());
    allowed.erase(std::unique(allowed.begin(), allowed.end()), allowed.end());
    if (allowed.empty()) throw InvalidArgument("evidence with an empty allowed set");
    if (allowed.front() < 0 || allowed.back() >= cardinality)
        throw InvalidArgument("evidence value index out of range");
    if (static_cast<int>(allowed.size()) == cardinality) {
        allowed_.erase(v);
        return;
    }
    allowed_[v] = std::move(allowed);
}

bool EvidenceSet::allows(VarId v, int value) const {
    auto it = allowed_.find(v);
    if (it == allowed_.end()) return true;
    return std::binary_search(it->second.begin(), it->second.end(), value);
}

VarSet EvidenceSet::variables() const {
    std::vector<VarId> ids;
    for (const auto& [v, _] : allowed_) ids.push_back(v);
    return VarSet(std::move(ids));
}

VarSet EvidenceSet::variables_in(const VarSet& scope) const {
    std::vector<VarId> ids;
    for (const auto& [v, _] : allowed_)
        if (scope.contains(v)) ids.push_back(v);
    return VarSet(std::move(ids));
}

std::string EvidenceSet::fingerprint(const VarSet& scope) const {
    std::string key;
    for (const auto& [v, vals] : allowed_) {
        if (!scope.contains(v)) continue;
        key += std::to_string(v);
        key += '=';
        for (int x : vals) {
            key += std::to_string(x);
            key += '|';
        }
        key += ';';
    }
    return key;
}

}  // namespace bpi
