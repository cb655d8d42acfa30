#pragma once

#include <optional>
#include <string>
#include <vector>

#include "border_chain.hpp"
#include "factor.hpp"
#include "messaging.hpp"
#include "network.hpp"

namespace bpi {

// Smallest superset of `seed` that contains every variable lying on a directed
// path between two of its members.
VarSet aggregation_closure(const BayesianNetwork& bn, const VarSet& seed);

struct MacroPolytree {
    const BayesianNetwork* source = nullptr;
    std::vector<VarSet> macros;               // ordered by smallest member id
    std::vector<int> macro_of;                // variable -> macro index
    std::vector<std::pair<int, int>> edges;   // quotient edges parent -> child, ascending

    std::vector<int> parents(int m) const;
    std::vector<int> children(int m) const;
    // Kahn order, lowest index first.
    std::vector<int> order() const;
    std::string format(int m) const;
};

// Recruits variables in topological order (lowest id first among ready ones)
// and their parent edges in ascending parent id, opening each loop as it
// appears.
MacroPolytree stage1(const BayesianNetwork& bn);

// Empty when the partition is a valid macro-node polytree.
std::vector<std::string> check_macro_polytree(const MacroPolytree& mp);

struct Border {
    enum class Kind { Root, Type1, Type2 };

    int id = 0;
    VarSet members;
    Kind kind = Kind::Root;
    int macro = 0;

    // Root and type 1: the variables recruited here and the product of their CPTs.
    VarSet cohort;
    Factor cohort_table;
    // Type 1.
    std::optional<VarId> promoted;
    int rule = 0;
    // Type 1 has one parent; type 2 one per joined border, each with the
    // subset of it carried into the junction.
    std::vector<int> parents;
    std::vector<VarSet> carried;
};

struct BorderPolytree {
    const BayesianNetwork* source = nullptr;
    MacroPolytree macros;
    std::vector<Border> borders;  // ids are indices; parents precede children

    std::vector<std::pair<int, int>> edges() const;  // parent -> child, ascending
    Tree tree() const;
    std::vector<VarSet> member_sets() const;
    std::vector<int> homes(VarId v) const;  // borders holding v, ascending
    std::string describe(int border) const;  // "{A,B}"
};

// Stretches every macro node into a chain of borders, in macro topological
// order, keeping each parent macro's carried set together and joining parent
// macros through type-2 junctions.
BorderPolytree stage2(const MacroPolytree& mp);
BorderPolytree build_bp(const BayesianNetwork& bn);

// One border per chain step, as a single macro node.
BorderPolytree bp_from_chain(const BorderChain& chain);

struct BpDiagnostics {
    std::vector<std::string> errors;
    std::vector<std::string> notes;
    bool ok() const { return errors.empty(); }
};

BpDiagnostics verify_bp(const BorderPolytree& bp);

// Text listings and Graphviz rendering for the CLI.
std::string partition_listing(const MacroPolytree& mp);
std::string border_listing(const BorderPolytree& bp);
std::string to_dot(const BorderPolytree& bp);

}  // namespace bpi
