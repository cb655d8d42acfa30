#pragma once

#include <algorithm>
#include <initializer_list>
#include <string>
#include <vector>

namespace bpi {

using VarId = int;

// Sorted, duplicate-free list of variable ids.
class VarSet {
public:
    VarSet() = default;
    VarSet(std::initializer_list<VarId> ids) : ids_(ids) { canonicalize(); }
    explicit VarSet(std::vector<VarId> ids) : ids_(std::move(ids)) { canonicalize(); }

    static VarSet single(VarId v) { return VarSet({v}); }

    const std::vector<VarId>& ids() const { return ids_; }
    auto begin() const { return ids_.begin(); }
    auto end() const { return ids_.end(); }
    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }
    VarId front() const { return ids_.front(); }

    bool contains(VarId v) const { return std::binary_search(ids_.begin(), ids_.end(), v); }
    bool contains_all(const VarSet& o) const {
        return std::includes(ids_.begin(), ids_.end(), o.ids_.begin(), o.ids_.end());
    }
    bool intersects(const VarSet& o) const {
        auto a = ids_.begin();
        auto b = o.ids_.begin();
        while (a != ids_.end() && b != o.ids_.end()) {
            if (*a == *b) return true;
            if (*a < *b) ++a; else ++b;
        }
        return false;
    }

    void insert(VarId v) {
        auto it = std::lower_bound(ids_.begin(), ids_.end(), v);
        if (it == ids_.end() || *it != v) ids_.insert(it, v);
    }
    void erase(VarId v) {
        auto it = std::lower_bound(ids_.begin(), ids_.end(), v);
        if (it != ids_.end() && *it == v) ids_.erase(it);
    }

    friend VarSet operator|(const VarSet& a, const VarSet& b) {
        VarSet r;
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r.ids_));
        return r;
    }
    friend VarSet operator&(const VarSet& a, const VarSet& b) {
        VarSet r;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r.ids_));
        return r;
    }
    friend VarSet operator-(const VarSet& a, const VarSet& b) {
        VarSet r;
        std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r.ids_));
        return r;
    }
    VarSet& operator|=(const VarSet& o) { return *this = *this | o; }
    VarSet& operator-=(const VarSet& o) { return *this = *this - o; }

    friend bool operator==(const VarSet&, const VarSet&) = default;
    friend auto operator<=>(const VarSet&, const VarSet&) = default;

private:
    void canonicalize() {
        std::sort(ids_.begin(), ids_.end());
        ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
    }

    std::vector<VarId> ids_;
};

}  // namespace bpi
