#include "bpi/validate.hpp"

#include <cmath>
#include <sstream>

namespace bpi {

bool Diagnostics::ok() const { return hard_count() == 0; }

std::size_t Diagnostics::hard_count() const {
    std::size_t n = 0;
    for (const auto& it : items) n += it.hard ? 1 : 0;
    return n;
}

std::size_t Diagnostics::warning_count() const { return items.size() - hard_count(); }

Diagnostics validate(const BayesianNetwork& bn) {
    Diagnostics d;
    auto cycle = find_cycle(bn);
    if (!cycle.empty()) {
        std::string path;
        for (std::size_t i = 0; i < cycle.size(); ++i) path += (i ? "->" : "") + bn.name(cycle[i]);
        d.items.push_back({Diagnostics::Kind::Acyclicity, true, cycle.front(), "directed cycle " + path});
    }
    for (const auto& var : bn.variables()) {
        auto vals = declared_cpt_values(bn, var.id);
        const auto& pars = bn.parents(var.id);
        const auto k = static_cast<std::size_t>(var.cardinality);
        bool warned = false;
        std::vector<int> digit(pars.size(), 0);
        for (std::size_t row = 0; row * k < vals.size(); ++row) {
            double sum = 0.0;
            for (std::size_t x = 0; x < k; ++x) {
                double p = vals[row * k + x];
                sum += p;
                if (p == 0.0 && !warned) {
                    d.items.push_back({Diagnostics::Kind::Positivity, false, var.id,
                                       "CPT of " + var.name + " has a zero entry"});
                    warned = true;
                }
            }
            if (std::fabs(sum - 1.0) > kNormalizationTolerance) {
                std::ostringstream msg;
                msg.precision(12);
                msg << "CPT of " << var.name << " not normalized";
                if (!pars.empty()) {
                    msg << " for ";
                    for (std::size_t i = 0; i < pars.size(); ++i)
                        msg << (i ? "," : "") << bn.name(pars[i]) << "="
                            << bn.variable(pars[i]).labels[static_cast<std::size_t>(digit[i])];
                }
                msg << " (sum " << sum << ")";
                d.items.push_back({Diagnostics::Kind::Normalization, true, var.id, msg.str()});
            }
            for (std::size_t i = pars.size(); i-- > 0;) {
                if (++digit[i] < bn.card(pars[i])) break;
                digit[i] = 0;
            }
        }
    }
    return d;
}

}  // namespace bpi
