#pragma once

#include <optional>
#include <string>
#include <vector>

#include "factor.hpp"
#include "varset.hpp"

namespace bpi {

struct Variable {
    VarId id = 0;
    std::string name;
    int cardinality = 0;
    std::vector<std::string> labels;

    friend bool operator==(const Variable&, const Variable&) = default;
};

// Discrete network: variables, ordered parent lists and one CPT per variable
// stored as a factor over {V} ∪ parents. Acyclicity and normalization are
// checked by validate(), so a cyclic network can still be built and reported.
class BayesianNetwork {
public:
    BayesianNetwork() = default;
    BayesianNetwork(std::vector<Variable> variables, std::vector<std::vector<VarId>> parents,
                    std::vector<Factor> cpts);

    std::size_t size() const { return variables_.size(); }
    const std::vector<Variable>& variables() const { return variables_; }
    const Variable& variable(VarId v) const { return variables_.at(static_cast<std::size_t>(v)); }
    const std::string& name(VarId v) const { return variable(v).name; }
    int card(VarId v) const { return variable(v).cardinality; }
    std::vector<int> cards(const VarSet& vs) const;
    std::optional<VarId> find(const std::string& name) const;
    VarId id_of(const std::string& name) const;  // throws InvalidArgument
    std::optional<int> label_index(VarId v, const std::string& label) const;

    // Parents in declared order.
    const std::vector<VarId>& parents(VarId v) const { return parents_.at(static_cast<std::size_t>(v)); }
    const VarSet& parent_set(VarId v) const { return parent_sets_.at(static_cast<std::size_t>(v)); }
    const VarSet& children(VarId v) const { return children_.at(static_cast<std::size_t>(v)); }
    const Factor& cpt(VarId v) const { return cpts_.at(static_cast<std::size_t>(v)); }
    VarSet all() const;
    VarSet roots() const;
    bool is_root(VarId v) const { return parents(v).empty(); }

    std::string format(const VarSet& vs) const;  // "{A,B}"

    friend bool operator==(const BayesianNetwork&, const BayesianNetwork&) = default;

private:
    std::vector<Variable> variables_;
    std::vector<std::vector<VarId>> parents_;
    std::vector<VarSet> parent_sets_;
    std::vector<VarSet> children_;
    std::vector<Factor> cpts_;
};

// CPT factor from values laid out as in the file format: rows over the
// declared parents (first most significant), child value fastest.
Factor make_cpt(const std::vector<Variable>& variables, VarId child, const std::vector<VarId>& parents,
                const std::vector<double>& declared_values);
// Inverse of make_cpt.
std::vector<double> declared_cpt_values(const BayesianNetwork& bn, VarId v);

// Structure queries.
VarSet co_parents(const BayesianNetwork& bn, VarId v);
VarSet ancestors(const BayesianNetwork& bn, VarId v);
VarSet descendants(const BayesianNetwork& bn, VarId v);
VarSet ancestors(const BayesianNetwork& bn, const VarSet& xs);
VarSet descendants(const BayesianNetwork& bn, const VarSet& xs);
// Parents of the set minus the set.
VarSet set_parents(const BayesianNetwork& bn, const VarSet& xs);
// Children of the set minus (set ∪ its parents).
VarSet set_children(const BayesianNetwork& bn, const VarSet& xs);
// Co-parents of the set minus (set ∪ its parents ∪ its children).
VarSet set_co_parents(const BayesianNetwork& bn, const VarSet& xs);
// Kahn order, lowest id first among ready variables; throws InvalidArgument on
// a cycle.
std::vector<VarId> topological_order(const BayesianNetwork& bn);
// A directed cycle as a closed vertex list (first == last), empty if acyclic.
std::vector<VarId> find_cycle(const BayesianNetwork& bn);

}  // namespace bpi
