#pragma once

#include <string>
#include <string_view>

#include "evidence.hpp"
#include "network.hpp"

namespace bpi {

// `.bn` text: `node <name> <k> <labels...>`, `parents <name> <p...>`,
// `cpt <name> <values...>`, `#` comments. Throws ParseError with the line.
BayesianNetwork parse_network(std::string_view text);
BayesianNetwork load_network(const std::string& path);
// Canonical text; parse_network(emit_network(bn)) reproduces bn exactly.
std::string emit_network(const BayesianNetwork& bn);

// `X=a`, `X=a|b`, comma- or newline-separated. Throws ParseError.
EvidenceSet parse_evidence(std::string_view text, const BayesianNetwork& bn);
std::string format_evidence(const EvidenceSet& ev, const BayesianNetwork& bn);

}  // namespace bpi
