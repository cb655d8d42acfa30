#include "bpi/bn_format.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "bpi/errors.hpp"
#include "bpi/validate.hpp"

namespace bpi {

namespace {

std::vector<std::string> tokens(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.emplace_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

double parse_real(const std::string& tok, int line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) throw ParseError(line, "bad number '" + tok + "'");
    return v;
}

struct PendingNode {
    Variable var;
    int line = 0;
    std::vector<std::string> parent_names;
    int parents_line = 0;
    std::vector<double> cpt;
    int cpt_line = 0;
    bool has_parents = false;
    bool has_cpt = false;
};

}  // namespace

BayesianNetwork parse_network(std::string_view text) {
    std::vector<PendingNode> nodes;
    std::map<std::string, std::size_t> index;
    int lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++lineno;
        if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
        auto tok = tokens(line);
        if (tok.empty()) continue;
        const std::string& kw = tok[0];
        if (kw == "node") {
            if (tok.size() < 3) throw ParseError(lineno, "node needs a name and a cardinality");
            int k = 0;
            auto [p, ec] = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), k);
            if (ec != std::errc() || p != tok[2].data() + tok[2].size() || k < 1)
                throw ParseError(lineno, "bad cardinality '" + tok[2] + "'");
            if (tok.size() != static_cast<std::size_t>(k) + 3)
                throw ParseError(lineno, "node " + tok[1] + " declares " + tok[2] + " values but lists " +
                                             std::to_string(tok.size() - 3) + " labels");
            if (index.count(tok[1])) throw ParseError(lineno, "duplicate node " + tok[1]);
            PendingNode n;
            n.var.id = static_cast<VarId>(nodes.size());
            n.var.name = tok[1];
            n.var.cardinality = k;
            n.var.labels.assign(tok.begin() + 3, tok.end());
            for (std::size_t a = 0; a < n.var.labels.size(); ++a)
                for (std::size_t b = a + 1; b < n.var.labels.size(); ++b)
                    if (n.var.labels[a] == n.var.labels[b])
                        throw ParseError(lineno, "duplicate label " + n.var.labels[a] + " in node " + tok[1]);
            n.line = lineno;
            index[tok[1]] = nodes.size();
            nodes.push_back(std::move(n));
        } else if (kw == "parents" || kw == "cpt") {
            if (tok.size() < 2) throw ParseError(lineno, kw + " needs a node name");
            auto it = index.find(tok[1]);
            if (it == index.end()) throw ParseError(lineno, "unknown node " + tok[1]);
            auto& n = nodes[it->second];
            if (kw == "parents") {
                if (n.has_parents) throw ParseError(lineno, "parents of " + tok[1] + " declared twice");
                n.has_parents = true;
                n.parents_line = lineno;
                n.parent_names.assign(tok.begin() + 2, tok.end());
            } else {
                if (n.has_cpt) throw ParseError(lineno, "cpt of " + tok[1] + " declared twice");
                n.has_cpt = true;
                n.cpt_line = lineno;
                for (std::size_t i = 2; i < tok.size(); ++i) n.cpt.push_back(parse_real(tok[i], lineno));
            }
        } else {
            throw ParseError(lineno, "unknown keyword '" + kw + "'");
        }
    }

    std::vector<Variable> vars;
    std::vector<std::vector<VarId>> parents;
    for (const auto& n : nodes) vars.push_back(n.var);
    for (const auto& n : nodes) {
        std::vector<VarId> ps;
        for (const auto& pn : n.parent_names) {
            auto it = index.find(pn);
            if (it == index.end()) throw ParseError(n.parents_line, "unknown parent " + pn + " of " + n.var.name);
            VarId p = static_cast<VarId>(it->second);
            if (p == n.var.id) throw ParseError(n.parents_line, n.var.name + " lists itself as a parent");
            if (std::find(ps.begin(), ps.end(), p) != ps.end())
                throw ParseError(n.parents_line, "duplicate parent " + pn + " of " + n.var.name);
            ps.push_back(p);
        }
        parents.push_back(std::move(ps));
    }
    std::vector<Factor> cpts;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        if (!n.has_cpt) throw ParseError(n.line, "node " + n.var.name + " has no cpt");
        std::size_t expect = static_cast<std::size_t>(n.var.cardinality);
        for (VarId p : parents[i]) expect *= static_cast<std::size_t>(vars[static_cast<std::size_t>(p)].cardinality);
        if (n.cpt.size() != expect)
            throw ParseError(n.cpt_line, "cpt of " + n.var.name + " has " + std::to_string(n.cpt.size()) +
                                             " values, expected " + std::to_string(expect));
        for (double v : n.cpt)
            if (!(v >= 0.0)) throw ParseError(n.cpt_line, "cpt of " + n.var.name + " has a negative entry");
        cpts.push_back(make_cpt(vars, n.var.id, parents[i], n.cpt));
    }
    BayesianNetwork bn(std::move(vars), std::move(parents), std::move(cpts));
    auto diag = validate(bn);
    for (const auto& item : diag.items) {
        if (!item.hard) continue;
        const auto& n = nodes[static_cast<std::size_t>(item.variable)];
        int line = item.kind == Diagnostics::Kind::Acyclicity ? n.parents_line : n.cpt_line;
        throw ParseError(line, item.message);
    }
    return bn;
}

BayesianNetwork load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_network(ss.str());
}

std::string emit_network(const BayesianNetwork& bn) {
    std::string out;
    for (const auto& v : bn.variables()) {
        out += "node " + v.name + " " + std::to_string(v.cardinality);
        for (const auto& l : v.labels) out += " " + l;
        out += "\n";
    }
    for (const auto& v : bn.variables()) {
        if (bn.parents(v.id).empty()) continue;
        out += "parents " + v.name;
        for (VarId p : bn.parents(v.id)) out += " " + bn.name(p);
        out += "\n";
    }
    char buf[40];
    for (const auto& v : bn.variables()) {
        out += "cpt " + v.name;
        for (double x : declared_cpt_values(bn, v.id)) {
            std::snprintf(buf, sizeof buf, " %.17g", x);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

EvidenceSet parse_evidence(std::string_view text, const BayesianNetwork& bn) {
    EvidenceSet ev;
    std::string item;
    auto flush = [&](int line) {
        auto tok = tokens(item);
        item.clear();
        if (tok.empty()) return;
        if (tok.size() != 1) throw ParseError(line, "bad evidence item");
        const std::string& t = tok[0];
        auto eq = t.find('=');
        if (eq == std::string::npos) throw ParseError(line, "evidence '" + t + "' needs X=label");
        std::string name = t.substr(0, eq);
        auto v = bn.find(name);
        if (!v) throw ParseError(line, "unknown evidence variable " + name);
        if (ev.has(*v)) throw ParseError(line, "evidence on " + name + " given twice");
        std::vector<int> allowed;
        std::string rest = t.substr(eq + 1);
        std::size_t start = 0;
        while (true) {
            auto bar = rest.find('|', start);
            std::string label = rest.substr(start, bar == std::string::npos ? std::string::npos : bar - start);
            if (label.empty()) throw ParseError(line, "empty label in evidence on " + name);
            auto idx = bn.label_index(*v, label);
            if (!idx) throw ParseError(line, "unknown label " + label + " of " + name);
            allowed.push_back(*idx);
            if (bar == std::string::npos) break;
            start = bar + 1;
        }
        ev.set(*v, std::move(allowed), bn.card(*v));
    };
    int line = 1;
    for (char c : text) {
        if (c == ',' || c == '\n') {
            flush(line);
            if (c == '\n') ++line;
        } else {
            item += c;
        }
    }
    flush(line);
    return ev;
}

std::string format_evidence(const EvidenceSet& ev, const BayesianNetwork& bn) {
    std::string out;
    for (const auto& [v, vals] : ev.entries()) {
        if (!out.empty()) out += ",";
        out += bn.name(v) + "=";
        for (std::size_t i = 0; i < vals.size(); ++i)
            out += (i ? "|" : "") + bn.variable(v).labels[static_cast<std::size_t>(vals[i])];
    }
    return out;
}

}  // namespace bpi
