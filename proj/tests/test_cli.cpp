#include <json.hpp>

#include <sstream>

#include "bpi/oracle.hpp"
#include "cli.hpp"
#include "helpers.hpp"

using namespace bpi;
using namespace bpi::test;
using json = nlohmann::json;

namespace {

struct Run {
    int code = 0;
    std::string out, err;
};

Run run(std::vector<std::string> args, const std::string& input = "") {
    std::istringstream in(input);
    std::ostringstream out, err;
    Run r;
    r.code = cli::run(args, in, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string path(const char* name) { return std::string(BPI_FIXTURE_DIR) + "/" + name; }

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream s(text);
    for (std::string line; std::getline(s, line);) out.push_back(line);
    return out;
}

// Rows of the variable/value table, without metadata or header.
std::vector<std::string> table(const std::string& text) {
    std::vector<std::string> out;
    for (const auto& l : lines(text))
        if (!l.empty() && l[0] != '#' && l.rfind("variable\t", 0) != 0 && l.find('\t') != std::string::npos &&
            l.rfind("evidence_prob", 0) != 0 && l.rfind("loaded", 0) != 0)
            out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("validate") {
    CHECK(run({"validate", path("bn_a.bn")}).code == 0);
    Run asia = run({"validate", path("dyspnoea.bn")});
    CHECK(asia.code == 0);
    CHECK(run({"validate", path("missing.bn")}).code == 2);
    CHECK(run({"nonsense"}).code == 2);
}

TEST_CASE("chain dump of the reference order") {
    Run r = run({"chain", path("bn_a.bn"), "--order", "-,A,B,C,D,F,H,G,I"});
    REQUIRE(r.code == 0);
    auto ls = lines(r.out);
    REQUIRE(ls.size() == 10);
    CHECK(ls[0] == "j\tpromoted\tkept\tcohort\tborder\tphi\trule");
    const std::vector<std::string> borders{"A,B", "B,C,D,F", "C,D,F", "D,F,H", "F,H,I",
                                           "H,I", "G,I,J,K", "I,J,K", "J,K,L"};
    const std::vector<std::string> promoted{"-", "A", "B", "C", "D", "F", "H", "G", "I"};
    for (std::size_t j = 0; j < 9; ++j) {
        CAPTURE(ls[j + 1]);
        std::istringstream row(ls[j + 1]);
        std::vector<std::string> cells;
        for (std::string c; std::getline(row, c, '\t');) cells.push_back(c);
        REQUIRE(cells.size() == 7);
        CHECK(cells[0] == std::to_string(j));
        CHECK(cells[1] == promoted[j]);
        CHECK(cells[4] == borders[j]);
    }
    CHECK(ls[3].find("\t1\t1") != std::string::npos);  // B_2: no cohort, phi 1, rule 1
    CHECK(run({"chain", path("bn_a.bn"), "--order", "-,C"}).code == 2);
}

TEST_CASE("query JSON matches the oracle") {
    auto bn = fixture("bn_c.bn");
    auto ev = parse_evidence("B=b,O=o,Q=q", bn);
    JointOracle oracle(bn);
    const double pe = oracle.event_prob(ev);
    const auto truths = oracle.posteriors(ev);
    for (const char* engine : {"bp", "chain"}) {
        CAPTURE(engine);
        Run r = run({"query", path("bn_c.bn"), "--engine", engine, "-e", "B=b,O=o,Q=q", "--json"});
        REQUIRE(r.code == 0);
        json j = json::parse(r.out);
        CHECK(j["evidence_prob"].get<double>() == doctest::Approx(pe).epsilon(1e-9));
        REQUIRE(j["queries"].size() == bn.size());
        for (const auto& q : j["queries"]) {
            VarId v = bn.id_of(q["variable"].get<std::string>());
            const Factor& truth = truths[static_cast<std::size_t>(v)];
            for (std::size_t i = 0; i < q["rows"].size(); ++i)
                CHECK(std::abs(q["rows"][i]["posterior"].get<double>() - truth[i]) <= 1e-9);
        }
    }
    // The oracle engine itself, on a smaller network.
    auto a = fixture("bn_a.bn");
    Run orc = run({"query", path("bn_a.bn"), "--engine", "oracle", "-e", "H=h,K=k", "--q", "A", "--json"});
    REQUIRE(orc.code == 0);
    CHECK(json::parse(orc.out)["queries"][0]["rows"][0]["posterior"].get<double>() ==
          doctest::Approx(oracle_posterior(a, parse_evidence("H=h,K=k", a), var(a, "A"))[0]).epsilon(1e-12));
    Run pt = run({"query", path("polytree_b.bn"), "--engine", "polytree", "-e", "B=b", "--q", "D", "--json"});
    REQUIRE(pt.code == 0);
    auto b = fixture("polytree_b.bn");
    Factor truth = oracle_posterior(b, parse_evidence("B=b", b), var(b, "D"));
    CHECK(json::parse(pt.out)["queries"][0]["rows"][0]["posterior"].get<double>() == doctest::Approx(truth[0]));
}

TEST_CASE("no evidence: posterior equals prior") {
    Run r = run({"query", path("bn_a.bn"), "--json"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    for (const auto& q : j["queries"])
        for (const auto& row : q["rows"]) {
            CHECK(row["posterior"].get<double>() == doctest::Approx(row["prior"].get<double>()).epsilon(1e-12));
            CHECK(std::abs(row["log_ratio"].get<double>()) <= 1e-9);
        }
}

TEST_CASE("pivots and message counts") {
    Run r = run({"query", path("bn_c.bn"), "-e", "B=b,O=o,Q=q", "--q", "P", "--pivot", "{B,C,G,O,P}", "--json"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["collection_messages"].get<int>() == 3);
    Run s = run({"query", path("bn_c.bn"), "-e", "N=n", "--q", "N", "--pivot", "N,P,Q", "--json"});
    REQUIRE(s.code == 0);
    CHECK(json::parse(s.out)["collection_messages"].get<int>() == 0);
    CHECK(run({"query", path("bn_c.bn"), "-e", "N=n", "--pivot", "{A}"}).code == 2);
}

TEST_CASE("exit codes") {
    CHECK(run({"query", path("dyspnoea.bn"), "-e", "E=no,T=yes"}).code == 1);
    CHECK(run({"query", path("dyspnoea.bn"), "-e", "E=no,T=yes", "--engine", "oracle"}).code == 1);
    CHECK(run({"query", path("dyspnoea.bn"), "-e", "E=maybe"}).code == 2);
    CHECK(run({"query", path("dyspnoea.bn"), "--engine", "magic"}).code == 2);
    CHECK(run({"query", path("dyspnoea.bn"), "-e", "E=no"}).code == 0);
    CHECK(run({"query", path("bn_a.bn"), "--engine", "polytree"}).code == 2);
}

TEST_CASE("REPL answers match batch queries") {
    Run batch = run({"query", path("bn_c.bn"), "-e", "B=b,O=o,Q=q", "--q", "P,M"});
    REQUIRE(batch.code == 0);
    Run repl = run({"repl", path("bn_c.bn")}, "evidence B=b,O=o\nevidence Q=q\nquery P,M\nquit\n");
    REQUIRE(repl.code == 0);
    CHECK(repl.err.empty());
    CHECK(table(repl.out) == table(batch.out));

    // Evidence then retract restores the earlier answer; impossible evidence is refused.
    Run again = run({"repl"}, "load " + path("dyspnoea.bn") +
                                  "\nevidence E=no\nquery A\nevidence T=yes\nevidence L=yes\nretract L\nquery A\n");
    CHECK(again.err.find("impossible evidence") != std::string::npos);
    auto rows = table(again.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == rows[2]);
    CHECK(rows[1] == rows[3]);
}

TEST_CASE("dumps are byte-stable") {
    for (const std::vector<std::string>& args :
         {std::vector<std::string>{"build-bp", path("bn_c.bn")},
          std::vector<std::string>{"chain", path("bn_c.bn"), "--json"},
          std::vector<std::string>{"query", "random:9", "--seed", "4", "-e", "X0=s1"},
          std::vector<std::string>{"core", path("bn_c.bn"), "-e", "B=b,O=o,Q=q"},
          std::vector<std::string>{"paths", path("polytree_b.bn"), "P", "A", "--hubs", "J,H"}}) {
        CAPTURE(args[0]);
        Run a = run(args), b = run(args);
        CHECK(a.code == 0);
        CHECK(a.out == b.out);
        CHECK_FALSE(a.out.empty());
    }
    Run p = run({"paths", path("polytree_b.bn"), "P", "A", "--hubs", "J,H"});
    CHECK(p.out.find("P,I,M,D,A") != std::string::npos);
}
