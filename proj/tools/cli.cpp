#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include "bpi/bn_format.hpp"
#include "bpi/border_chain.hpp"
#include "bpi/bp_build.hpp"
#include "bpi/bp_infer.hpp"
#include "bpi/errors.hpp"
#include "bpi/messaging.hpp"
#include "bpi/oracle.hpp"
#include "bpi/polytree_infer.hpp"
#include "bpi/random_bn.hpp"
#include "bpi/validate.hpp"

namespace bpi::cli {

namespace {

using json = nlohmann::ordered_json;

// Bad flags or arguments that CLI11 cannot see (exit 2).
struct UsageError : Error {
    using Error::Error;
};

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string trim(std::string s) {
    auto blank = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && blank(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && blank(static_cast<unsigned char>(s[i]))) ++i;
    return s.substr(i);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep))
        if (auto t = trim(item); !t.empty()) out.push_back(t);
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// A path, or random:<n> / polytree:<n> for a generated network.
BayesianNetwork load(const std::string& source, std::uint64_t seed) {
    for (const std::string prefix : {"random:", "polytree:"}) {
        if (source.rfind(prefix, 0) != 0) continue;
        int n = 0;
        try {
            n = std::stoi(source.substr(prefix.size()));
        } catch (const std::exception&) {
            throw UsageError("bad network size in '" + source + "'");
        }
        if (n < 1 || n > 64) throw UsageError("network size must be within 1..64");
        std::mt19937_64 rng(seed);
        return prefix == "random:" ? random_dag(rng, n) : random_polytree(rng, n);
    }
    return load_network(source);
}

std::vector<VarId> var_list(const BayesianNetwork& bn, const std::string& text) {
    std::vector<VarId> out;
    if (trim(text).empty()) {
        for (VarId v = 0; v < static_cast<VarId>(bn.size()); ++v) out.push_back(v);
        return out;
    }
    for (const auto& name : split(text, ',')) out.push_back(bn.id_of(name));
    return out;
}

std::string names(const BayesianNetwork& bn, const VarSet& vs) {
    if (vs.empty()) return "-";
    std::string out;
    for (VarId v : vs) out += (out.empty() ? "" : ",") + bn.name(v);
    return out;
}

json name_array(const BayesianNetwork& bn, const VarSet& vs) {
    json a = json::array();
    for (VarId v : vs) a.push_back(bn.name(v));
    return a;
}

json evidence_json(const BayesianNetwork& bn, const EvidenceSet& ev) {
    json o = json::object();
    for (const auto& [v, allowed] : ev.entries()) {
        json labels = json::array();
        for (int k : allowed) labels.push_back(bn.variable(v).labels[static_cast<std::size_t>(k)]);
        o[bn.name(v)] = labels;
    }
    return o;
}

// "Pr{C|A,B} Pr{D|A,B}", or "1" for an empty cohort.
std::string phi_text(const BayesianNetwork& bn, const VarSet& cohort) {
    if (cohort.empty()) return "1";
    std::string out;
    for (VarId v : cohort) {
        out += (out.empty() ? "Pr{" : " Pr{") + bn.name(v);
        const auto& ps = bn.parents(v);
        for (std::size_t i = 0; i < ps.size(); ++i) out += (i ? "," : "|") + bn.name(ps[i]);
        out += "}";
    }
    return out;
}

std::string border_label(const BorderPolytree& bp, NodeId b) { return std::to_string(b) + ":" + bp.describe(b); }

std::string log_ratio(double post, double prior) {
    if (!(prior > 0.0)) return "-";
    if (!(post > 0.0)) return "-inf";
    return num(std::log(post / prior));
}

json log_ratio_json(double post, double prior) {
    if (!(prior > 0.0) || !(post > 0.0)) return nullptr;
    return std::log(post / prior);
}

struct Answer {
    std::map<VarId, Factor> posterior;
    double evidence_prob = 1.0;
    std::optional<std::size_t> collection, distribution;
    std::vector<std::string> pivots;
};

std::optional<NodeId> parse_border(const BpEngine& engine, const std::string& text) {
    if (text.empty()) return std::nullopt;
    if (std::all_of(text.begin(), text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        int id = std::stoi(text);
        if (id < 0 || id >= static_cast<int>(engine.bp().borders.size()))
            throw UsageError("no border with id " + text);
        return id;
    }
    std::string inner = text;
    if (inner.front() == '{' && inner.back() == '}') inner = inner.substr(1, inner.size() - 2);
    VarSet members;
    for (const auto& name : split(inner, ',')) members.insert(engine.network().id_of(name));
    auto b = engine.find_border(members);
    if (!b) throw UsageError("no border with members " + text);
    return b;
}

Answer answer(const std::string& engine, const BayesianNetwork& bn, const EvidenceSet& ev,
              const std::vector<VarId>& queries, const std::string& pivot) {
    Answer a;
    if (engine == "oracle") {
        if (!pivot.empty()) throw UsageError("the oracle engine takes no pivot");
        a.evidence_prob = oracle_event_prob(bn, ev);
        if (!(a.evidence_prob > 0.0)) throw ImpossibleEvidence();
        for (VarId q : queries) a.posterior[q] = oracle_posterior(bn, ev, q);
    } else if (engine == "chain") {
        BorderChain chain = build_chain(bn);
        PassResult passes = run_passes(chain, ev);
        std::optional<std::size_t> at;
        if (!pivot.empty()) {
            try {
                at = static_cast<std::size_t>(std::stoul(pivot));
            } catch (const std::exception&) {
                throw UsageError("chain pivot must be a border index");
            }
            if (*at >= chain.steps.size()) throw UsageError("chain has no border " + pivot);
            a.pivots.push_back(std::to_string(*at) + ":" + bn.format(chain.steps[*at].border));
        }
        for (VarId q : queries) {
            std::optional<std::size_t> here;
            if (at && chain.steps[*at].border.contains(q)) here = at;
            Posterior p = chain_posterior(chain, passes, q, here);
            a.evidence_prob = p.evidence_prob;
            a.posterior[q] = p.posterior;
        }
    } else if (engine == "polytree") {
        std::optional<VarId> piv;
        if (!pivot.empty()) piv = bn.id_of(pivot);
        QueryResult r = polytree_query(bn, ev, queries, piv);
        a.evidence_prob = r.evidence_prob;
        a.collection = r.collection_messages;
        a.distribution = r.distribution_messages;
        for (int p : r.pivots) a.pivots.push_back(bn.name(p));
        for (auto& [q, p] : r.posteriors) a.posterior[q] = p.posterior;
    } else if (engine == "bp") {
        BpEngine eng(bn);
        QueryResult r = eng.query(ev, queries, parse_border(eng, pivot));
        a.evidence_prob = r.evidence_prob;
        a.collection = r.collection_messages;
        a.distribution = r.distribution_messages;
        for (int p : r.pivots) a.pivots.push_back(border_label(eng.bp(), p));
        for (auto& [q, p] : r.posteriors) a.posterior[q] = p.posterior;
    } else {
        throw UsageError("unknown engine '" + engine + "'");
    }
    return a;
}

void table_rows(std::ostream& out, const BayesianNetwork& bn, VarId q, const Factor& prior, const Factor* post) {
    for (int k = 0; k < bn.card(q); ++k) {
        const auto i = static_cast<std::size_t>(k);
        out << bn.name(q) << '\t' << bn.variable(q).labels[i] << '\t' << num(prior[i]);
        if (post) out << '\t' << num((*post)[i]) << '\t' << log_ratio((*post)[i], prior[i]);
        out << '\n';
    }
}

json table_json(const BayesianNetwork& bn, VarId q, const Factor& prior, const Factor* post) {
    json rows = json::array();
    for (int k = 0; k < bn.card(q); ++k) {
        const auto i = static_cast<std::size_t>(k);
        json row{{"value", bn.variable(q).labels[i]}, {"prior", prior[i]}};
        if (post) {
            row["posterior"] = (*post)[i];
            row["log_ratio"] = log_ratio_json((*post)[i], prior[i]);
        }
        rows.push_back(row);
    }
    return json{{"variable", bn.name(q)}, {"rows", rows}};
}

// Shared flags; each subcommand binds the ones it accepts.
struct Options {
    std::string network;
    bool json = false;
    std::uint64_t seed = 1;
    std::string evidence, evidence_file, queries, engine = "bp", pivot, order, hubs, from, to;
};

EvidenceSet read_evidence(const BayesianNetwork& bn, const Options& o) {
    std::string text = o.evidence;
    if (!o.evidence_file.empty()) text += "\n" + read_file(o.evidence_file);
    return parse_evidence(text, bn);
}

int cmd_validate(const Options& o, std::ostream& out) {
    // Hard problems surface from the parser; what is left are warnings.
    BayesianNetwork bn = load(o.network, o.seed);
    Diagnostics d = validate(bn);
    if (o.json) {
        json items = json::array();
        for (const auto& it : d.items)
            items.push_back({{"severity", it.hard ? "error" : "warning"}, {"variable", bn.name(it.variable)},
                             {"message", it.message}});
        out << json{{"ok", d.ok()}, {"variables", bn.size()}, {"diagnostics", items}}.dump(2) << '\n';
    } else {
        for (const auto& it : d.items)
            out << (it.hard ? "error" : "warning") << '\t' << bn.name(it.variable) << '\t' << it.message << '\n';
        out << "status\t" << (d.ok() ? "ok" : "invalid") << '\t' << bn.size() << " variables\n";
    }
    return d.ok() ? 0 : 1;
}

int cmd_chain(const Options& o, std::ostream& out, std::ostream& err) {
    BayesianNetwork bn = load(o.network, o.seed);
    std::optional<PromotionOrder> order;
    if (!o.order.empty()) order = parse_promotion_order(o.order, bn);
    BorderChain chain = build_chain(bn, order);
    for (const auto& issue : check_chain(chain)) err << "warning: " << issue << '\n';
    if (o.json) {
        json steps = json::array();
        for (const ChainStep& s : chain.steps) {
            json phi = json::array();
            for (VarId v : s.cohort) {
                json ps = json::array();
                for (VarId p : bn.parents(v)) ps.push_back(bn.name(p));
                phi.push_back({{"child", bn.name(v)}, {"parents", ps}});
            }
            steps.push_back({{"j", s.index},
                             {"promoted", s.promoted ? json(bn.name(*s.promoted)) : json(nullptr)},
                             {"kept", name_array(bn, s.border - s.cohort)},
                             {"cohort", name_array(bn, s.cohort)},
                             {"border", name_array(bn, s.border)},
                             {"phi", phi},
                             {"phi_scope", name_array(bn, s.cohort_table.scope())},
                             {"rule", s.index == 0 ? json(nullptr) : json(s.rule)}});
        }
        out << json{{"gamma", chain.gamma()}, {"steps", steps}}.dump(2) << '\n';
        return 0;
    }
    out << "j\tpromoted\tkept\tcohort\tborder\tphi\trule\n";
    for (const ChainStep& s : chain.steps) {
        out << s.index << '\t' << (s.promoted ? bn.name(*s.promoted) : "-") << '\t' << names(bn, s.border - s.cohort)
            << '\t' << names(bn, s.cohort) << '\t' << names(bn, s.border) << '\t' << phi_text(bn, s.cohort) << '\t'
            << (s.index == 0 ? "-" : std::to_string(s.rule)) << '\n';
    }
    return 0;
}

int cmd_build_bp(const Options& o, std::ostream& out) {
    BayesianNetwork bn = load(o.network, o.seed);
    MacroPolytree mp = stage1(bn);
    BorderPolytree bp = stage2(mp);
    BpDiagnostics d = verify_bp(bp);
    if (o.json) {
        json macros = json::array();
        for (std::size_t m = 0; m < mp.macros.size(); ++m)
            macros.push_back({{"id", m}, {"members", name_array(bn, mp.macros[m])}, {"parents", mp.parents(static_cast<int>(m))}});
        json borders = json::array();
        for (const Border& b : bp.borders) {
            const char* kind = b.kind == Border::Kind::Root ? "root" : b.kind == Border::Kind::Type1 ? "type1" : "type2";
            json jb{{"id", b.id}, {"macro", b.macro}, {"kind", kind}, {"members", name_array(bn, b.members)},
                    {"parents", b.parents}};
            if (b.kind == Border::Kind::Type2) {
                json carried = json::array();
                for (const auto& c : b.carried) carried.push_back(name_array(bn, c));
                jb["carried"] = carried;
            } else {
                jb["promoted"] = b.promoted ? json(bn.name(*b.promoted)) : json(nullptr);
                jb["cohort"] = name_array(bn, b.cohort);
                jb["rule"] = b.kind == Border::Kind::Type1 ? json(b.rule) : json(nullptr);
            }
            borders.push_back(jb);
        }
        out << json{{"macros", macros},
                    {"borders", borders},
                    {"verify", {{"errors", d.errors}, {"notes", d.notes}}},
                    {"dot", to_dot(bp)}}
                       .dump(2)
            << '\n';
    } else {
        out << "# partition\n" << partition_listing(mp) << "# borders\n" << border_listing(bp) << "# verify\n";
        for (const auto& e : d.errors) out << "error\t" << e << '\n';
        for (const auto& n : d.notes) out << "note\t" << n << '\n';
        out << "status\t" << (d.ok() ? "ok" : "failed") << '\n';
        out << "# dot\n" << to_dot(bp);
    }
    return d.ok() ? 0 : 1;
}

int cmd_prior(const Options& o, std::ostream& out) {
    BayesianNetwork bn = load(o.network, o.seed);
    auto qs = var_list(bn, o.queries);
    Answer a = answer(o.engine, bn, EvidenceSet{}, qs, "");
    if (o.json) {
        json vars = json::array();
        for (VarId q : qs) vars.push_back(table_json(bn, q, a.posterior.at(q), nullptr));
        out << json{{"engine", o.engine}, {"priors", vars}}.dump(2) << '\n';
    } else {
        out << "variable\tvalue\tprior\n";
        for (VarId q : qs) table_rows(out, bn, q, a.posterior.at(q), nullptr);
    }
    return 0;
}

int cmd_query(const Options& o, std::ostream& out) {
    BayesianNetwork bn = load(o.network, o.seed);
    EvidenceSet ev = read_evidence(bn, o);
    auto qs = var_list(bn, o.queries);
    Answer prior = answer(o.engine, bn, EvidenceSet{}, qs, "");
    Answer post = answer(o.engine, bn, ev, qs, o.pivot);
    if (o.json) {
        json vars = json::array();
        for (VarId q : qs) vars.push_back(table_json(bn, q, prior.posterior.at(q), &post.posterior.at(q)));
        json j{{"engine", o.engine}, {"evidence", evidence_json(bn, ev)}, {"evidence_prob", post.evidence_prob}};
        if (post.collection) j["collection_messages"] = *post.collection;
        if (post.distribution) j["distribution_messages"] = *post.distribution;
        j["pivots"] = post.pivots;
        j["queries"] = vars;
        out << j.dump(2) << '\n';
        return 0;
    }
    out << "# engine\t" << o.engine << '\n';
    out << "# evidence\t" << (ev.empty() ? "-" : format_evidence(ev, bn)) << '\n';
    out << "# evidence_prob\t" << num(post.evidence_prob) << '\n';
    if (post.collection) out << "# collection_messages\t" << *post.collection << '\n';
    if (post.distribution) out << "# distribution_messages\t" << *post.distribution << '\n';
    if (!post.pivots.empty()) {
        out << "# pivots";
        for (const auto& p : post.pivots) out << '\t' << p;
        out << '\n';
    }
    out << "variable\tvalue\tprior\tposterior\tlog_ratio\n";
    for (VarId q : qs) table_rows(out, bn, q, prior.posterior.at(q), &post.posterior.at(q));
    return 0;
}

int cmd_paths(const Options& o, std::ostream& out) {
    BayesianNetwork bn = load(o.network, o.seed);
    Tree tree = polytree_of(bn);
    HubIndex index;
    if (o.hubs.empty()) {
        index = build_hub_index(tree);
    } else {
        std::vector<NodeId> hubs;
        for (VarId v : var_list(bn, o.hubs)) hubs.push_back(v);
        index = build_hub_index(tree, hubs);
    }
    VarId x = bn.id_of(o.from), y = bn.id_of(o.to);
    auto hub = tree_path(tree, index, x, y);
    auto bfs = bfs_path(tree, x, y);
    auto text = [&](const std::vector<NodeId>& path) {
        std::string s;
        for (NodeId v : path) s += (s.empty() ? "" : ",") + bn.name(v);
        return s;
    };
    std::vector<std::string> hub_names;
    for (NodeId h : index.hubs) hub_names.push_back(bn.name(h));
    if (o.json) {
        json jh = json::array(), jb = json::array();
        for (NodeId v : hub) jh.push_back(bn.name(v));
        for (NodeId v : bfs) jb.push_back(bn.name(v));
        out << json{{"hubs", hub_names}, {"hub_path", jh}, {"bfs_path", jb}, {"agree", hub == bfs}}.dump(2) << '\n';
    } else {
        out << "hubs\t" << text(index.hubs) << '\n';
        out << "hub_path\t" << text(hub) << '\n';
        out << "bfs_path\t" << text(bfs) << '\n';
        out << "agree\t" << (hub == bfs ? "yes" : "no") << '\n';
    }
    return hub == bfs ? 0 : 1;
}

template <class Session, class Label>
int core_report(const Options& o, const Tree& tree, const Session& session, Label label, std::ostream& out) {
    json comps = json::array();
    for (const auto& [c, comp] : session.components()) {
        Schedule schedule = collection_schedule(tree, comp.core, comp.pivot);
        auto labels = [&](const std::vector<NodeId>& xs) {
            std::vector<std::string> s;
            for (NodeId x : xs) s.push_back(label(x));
            return s;
        };
        if (o.json) {
            json msgs = json::array();
            for (const Message& m : schedule)
                msgs.push_back({{"from", label(m.from)}, {"to", label(m.to)}, {"direction", m.downward ? "down" : "up"}});
            comps.push_back({{"component", c}, {"pivot", label(comp.pivot)}, {"core", labels(comp.core.nodes)},
                             {"roots", labels(comp.core.roots)}, {"leaves", labels(comp.core.leaves)},
                             {"schedule", msgs}});
            continue;
        }
        auto line = [&](const char* key, const std::vector<NodeId>& xs) {
            out << key;
            for (NodeId x : xs) out << '\t' << label(x);
            out << '\n';
        };
        out << "component\t" << c << '\n';
        out << "pivot\t" << label(comp.pivot) << '\n';
        line("core", comp.core.nodes);
        line("roots", comp.core.roots);
        line("leaves", comp.core.leaves);
        for (const Message& m : schedule)
            out << "message\t" << label(m.from) << '\t' << label(m.to) << '\t' << (m.downward ? "down" : "up") << '\n';
    }
    if (o.json) out << json{{"engine", o.engine}, {"components", comps}}.dump(2) << '\n';
    return 0;
}

int cmd_core(const Options& o, std::ostream& out) {
    BayesianNetwork bn = load(o.network, o.seed);
    EvidenceSet ev = read_evidence(bn, o);
    if (o.engine == "polytree") {
        PolytreeEngine eng(bn);
        std::vector<VarSet> vars;
        for (VarId v = 0; v < static_cast<VarId>(bn.size()); ++v) vars.push_back(VarSet::single(v));
        TreeSession<PolytreeKernel> session(eng.tree(), vars, eng.kernel());
        std::optional<NodeId> pivot;
        if (!o.pivot.empty()) pivot = bn.id_of(o.pivot);
        session.set_evidence(ev, pivot);
        return core_report(o, eng.tree(), session, [&](NodeId x) { return bn.name(x); }, out);
    }
    if (o.engine != "bp") throw UsageError("core supports the bp and polytree engines");
    BpEngine eng(bn);
    QuerySession session(eng);
    session.set_evidence(ev, parse_border(eng, o.pivot));
    return core_report(o, eng.tree(), session, [&](NodeId x) { return border_label(eng.bp(), x); }, out);
}

const char* kReplHelp =
    "commands:\n"
    "  load <network>          load a .bn file (or random:<n>, polytree:<n>)\n"
    "  evidence X=a|b[,Y=c]    add or replace evidence\n"
    "  retract X[,Y]           remove evidence\n"
    "  query Q[,R]             prior and posterior side by side\n"
    "  priors [X,...]          prior marginals\n"
    "  core                    evidential core and pivot\n"
    "  status                  evidence, probability and message counts\n"
    "  reset                   drop all evidence\n"
    "  quit\n";

class Repl {
public:
    Repl(std::ostream& out, std::ostream& err, std::uint64_t seed) : out_(out), err_(err), seed_(seed) {}

    void load(const std::string& source) {
        auto bn = std::make_unique<BayesianNetwork>(bpi::cli::load(source, seed_));
        auto engine = std::make_unique<BpEngine>(*bn);
        auto session = std::make_unique<QuerySession>(*engine);
        session_ = std::move(session);
        engine_ = std::move(engine);
        bn_ = std::move(bn);
        out_ << "loaded\t" << bn_->size() << " variables\t" << engine_->bp().borders.size() << " borders\n";
    }

    // Returns false on quit.
    bool execute(const std::string& line) {
        std::string text = trim(line);
        if (text.empty() || text.front() == '#') return true;
        auto space = text.find_first_of(" \t");
        std::string verb = text.substr(0, space);
        std::string rest = space == std::string::npos ? "" : trim(text.substr(space));
        try {
            if (verb == "quit" || verb == "exit") return false;
            if (verb == "help") {
                out_ << kReplHelp;
            } else if (verb == "load") {
                if (rest.empty()) throw UsageError("load needs a network");
                load(rest);
            } else if (!session_) {
                throw UsageError("no network loaded");
            } else if (verb == "evidence") {
                EvidenceSet ev = session_->evidence();
                EvidenceSet added = parse_evidence(rest, *bn_);
                for (const auto& [v, allowed] : added.entries()) ev.set(v, allowed, bn_->card(v));
                session_->set_evidence(ev);
                out_ << "evidence_prob\t" << num(session_->evidence_prob()) << '\n';
            } else if (verb == "retract") {
                EvidenceSet ev = session_->evidence();
                for (VarId v : var_list(*bn_, rest)) {
                    if (!ev.has(v)) throw UsageError(bn_->name(v) + " has no evidence");
                    ev.retract(v);
                }
                session_->set_evidence(ev);
                out_ << "evidence_prob\t" << num(session_->evidence_prob()) << '\n';
            } else if (verb == "query") {
                if (rest.empty()) throw UsageError("query needs a variable");
                out_ << "variable\tvalue\tprior\tposterior\tlog_ratio\n";
                for (VarId q : var_list(*bn_, rest)) {
                    Posterior p = session_->posterior(q);
                    table_rows(out_, *bn_, q, prior(q), &p.posterior);
                }
            } else if (verb == "priors") {
                out_ << "variable\tvalue\tprior\n";
                for (VarId q : var_list(*bn_, rest)) table_rows(out_, *bn_, q, prior(q), nullptr);
            } else if (verb == "core") {
                if (session_->components().empty()) out_ << "core\t-\n";
                for (const auto& [c, comp] : session_->components()) {
                    out_ << "pivot\t" << border_label(engine_->bp(), comp.pivot) << "\ncore";
                    for (NodeId b : comp.core.nodes) out_ << '\t' << border_label(engine_->bp(), b);
                    out_ << '\n';
                }
            } else if (verb == "status") {
                const EvidenceSet& ev = session_->evidence();
                SessionCounts c = session_->counts();
                out_ << "evidence\t" << (ev.empty() ? "-" : format_evidence(ev, *bn_)) << '\n'
                     << "evidence_prob\t" << num(session_->evidence_prob()) << '\n'
                     << "collection_messages\t" << c.collection << '\n'
                     << "distribution_messages\t" << c.distribution << '\n'
                     << "computed_messages\t" << c.computed << '\n'
                     << "cached_messages\t" << session_->cached_messages() << '\n';
            } else if (verb == "reset") {
                session_->reset();
                out_ << "evidence_prob\t1\n";
            } else {
                err_ << "error: unknown command '" << verb << "'\n" << kReplHelp;
            }
        } catch (const ImpossibleEvidence&) {
            err_ << "error: impossible evidence; session unchanged\n";
        } catch (const Error& e) {
            err_ << "error: " << e.what() << '\n';
        }
        return true;
    }

private:
    Factor prior(VarId q) const {
        return normalize(marginal(engine_->priors()[static_cast<std::size_t>(engine_->home(q))], VarSet::single(q))).first;
    }

    std::ostream& out_;
    std::ostream& err_;
    std::uint64_t seed_;
    std::unique_ptr<BayesianNetwork> bn_;
    std::unique_ptr<BpEngine> engine_;
    std::unique_ptr<QuerySession> session_;
};

int cmd_repl(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
    Repl repl(out, err, o.seed);
    if (!o.network.empty()) repl.load(o.network);
    std::string line;
    while (std::getline(in, line))
        if (!repl.execute(line)) break;
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Exact inference on Bayesian networks with border chains and border polytrees", "bpi"};
    app.require_subcommand(1);

    auto network = [&](CLI::App* sub, bool required = true) {
        auto* opt = sub->add_option("network", o.network, ".bn file, random:<n> or polytree:<n>");
        if (required) opt->required();
        sub->add_option("--seed", o.seed, "seed for generated networks");
    };
    auto json_flag = [&](CLI::App* sub) { sub->add_flag("--json", o.json, "JSON output"); };
    auto evidence = [&](CLI::App* sub) {
        sub->add_option("--evidence,-e", o.evidence, "evidence, e.g. H=h,K=k|nk");
        sub->add_option("--evidence-file", o.evidence_file, "evidence file, one entry per line");
    };
    auto engine = [&](CLI::App* sub) {
        sub->add_option("--engine", o.engine, "chain, polytree, bp or oracle")
            ->check(CLI::IsMember({"chain", "polytree", "bp", "oracle"}));
    };

    auto* validate_cmd = app.add_subcommand("validate", "check a network");
    network(validate_cmd);
    json_flag(validate_cmd);

    auto* chain_cmd = app.add_subcommand("chain", "dump the border chain");
    network(chain_cmd);
    json_flag(chain_cmd);
    chain_cmd->add_option("--order", o.order, "forced promotion order, e.g. \"-,A,B\" (- for fictitious)");

    auto* bp_cmd = app.add_subcommand("build-bp", "macro-node partition, border polytree and DOT");
    network(bp_cmd);
    json_flag(bp_cmd);

    auto* prior_cmd = app.add_subcommand("prior", "prior marginals");
    network(prior_cmd);
    json_flag(prior_cmd);
    engine(prior_cmd);
    prior_cmd->add_option("--q", o.queries, "variables (default all)");

    auto* query_cmd = app.add_subcommand("query", "posterior marginals");
    network(query_cmd);
    json_flag(query_cmd);
    engine(query_cmd);
    evidence(query_cmd);
    query_cmd->add_option("--q", o.queries, "variables (default all)");
    query_cmd->add_option("--pivot", o.pivot, "bp: border id or members; polytree: variable; chain: index");

    auto* repl_cmd = app.add_subcommand("repl", "interactive session on stdin");
    network(repl_cmd, false);

    auto* paths_cmd = app.add_subcommand("paths", "hub-method path between two nodes of a polytree");
    network(paths_cmd);
    json_flag(paths_cmd);
    paths_cmd->add_option("from", o.from, "first node")->required();
    paths_cmd->add_option("to", o.to, "second node")->required();
    paths_cmd->add_option("--hubs", o.hubs, "hub nodes (default: chosen by degree)");

    auto* core_cmd = app.add_subcommand("core", "evidential core and collection schedule");
    network(core_cmd);
    json_flag(core_cmd);
    evidence(core_cmd);
    core_cmd->add_option("--engine", o.engine, "bp or polytree")->check(CLI::IsMember({"bp", "polytree"}));
    core_cmd->add_option("--pivot", o.pivot, "bp: border id or members; polytree: variable");

    std::vector<std::string> argv_store{"bpi"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*validate_cmd) return cmd_validate(o, out);
        if (*chain_cmd) return cmd_chain(o, out, err);
        if (*bp_cmd) return cmd_build_bp(o, out);
        if (*prior_cmd) return cmd_prior(o, out);
        if (*query_cmd) return cmd_query(o, out);
        if (*repl_cmd) return cmd_repl(o, in, out, err);
        if (*paths_cmd) return cmd_paths(o, out);
        if (*core_cmd) return cmd_core(o, out);
    } catch (const ImpossibleEvidence& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace bpi::cli
