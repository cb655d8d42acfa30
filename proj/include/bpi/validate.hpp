#pragma once

#include <string>
#include <vector>

#include "network.hpp"

namespace bpi {

struct Diagnostics {
    enum class Kind { Acyclicity, Normalization, Positivity };
    struct Item {
        Kind kind;
        bool hard;
        VarId variable;
        std::string message;
    };
    std::vector<Item> items;

    bool ok() const;  // no hard errors
    std::size_t hard_count() const;
    std::size_t warning_count() const;
};

inline constexpr double kNormalizationTolerance = 1e-9;

Diagnostics validate(const BayesianNetwork& bn);

}  // namespace bpi
