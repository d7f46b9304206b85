// End-to-end tests for the command-line tool: every verdict must agree with
// the underlying library call (the CLI is a thin adapter), exit codes follow
// the documented contract, and JSON output round-trips.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "nmodal/json_io.hpp"
#include "nmodal/propositional.hpp"
#include "nmodal/semantics.hpp"
#include "nmodal/syntax.hpp"
#include "nmodal/system.hpp"

using namespace nmodal;
using nlohmann::json;
using Catch::Matchers::ContainsSubstring;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

std::string sh_quote(const std::string& s) { return "'" + s + "'"; }

RunResult run_cli(const std::string& args) {
  std::string cmd = std::string(NMODAL_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = std::string(NMODAL_BINARY_DIR) + "/" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("tables subcommand renders the system's multioperations") {
  SECTION("text form carries the necessity rows") {
    RunResult tm = run_cli("tables --system tm");
    CHECK(tm.exit_code == 0);
    CHECK_THAT(tm.out, ContainsSubstring("□ T+ → {T+,C+}"));
    CHECK_THAT(tm.out, ContainsSubstring("□ C+ → {C-,F-}"));
    CHECK_THAT(tm.out, ContainsSubstring("◇ F- → {C-,F-}"));
    RunResult t45m = run_cli("tables --system t45m");
    CHECK(t45m.exit_code == 0);
    CHECK_THAT(t45m.out, ContainsSubstring("□ C+ → {F-}"));
  }
  SECTION("json form matches the library tables entry by entry") {
    RunResult r = run_cli("tables --system km --format json");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.out);
    System km = make_system("km");
    CHECK(j["system"] == "km");
    REQUIRE(j["carrier"].size() == 8);
    std::size_t imp_entries = 0;
    for (const auto& [a_name, row] : j["imp"].items()) {
      for (const auto& [b_name, cell] : row.items()) {
        ++imp_entries;
        ValueSet expected = km.imp(*parse_value(a_name), *parse_value(b_name));
        ValueSet got;
        for (const auto& v : cell) got.insert(*parse_value(v.get<std::string>()));
        CHECK(got == expected);
      }
    }
    CHECK(imp_entries == 64);
    for (const auto& [v_name, cell] : j["box"].items()) {
      ValueSet got;
      for (const auto& v : cell) got.insert(*parse_value(v.get<std::string>()));
      CHECK(got == km.box(*parse_value(v_name)));
    }
    CHECK(j["forall"].size() == 255);  // nonempty subsets of the carrier
  }
  SECTION("json form is byte-stable") {
    RunResult a = run_cli("tables --system dm --quantifier nd --format json");
    RunResult b = run_cli("tables --system dm --quantifier nd --format json");
    CHECK(a.out == b.out);
  }
  SECTION("unknown system exits 2") {
    RunResult r = run_cli("tables --system s5");
    CHECK(r.exit_code == 2);
    CHECK_THAT(r.out, ContainsSubstring("unknown system"));
  }
}

TEST_CASE("truthtable subcommand mirrors is_tautology") {
  SECTION("a tautology exits 0") {
    RunResult r = run_cli("truthtable --system tm " + sh_quote("[]A -> A"));
    CHECK(r.exit_code == 0);
    CHECK_THAT(r.out, ContainsSubstring("tautology"));
  }
  SECTION("a refuted formula exits 1 and prints the library's witness") {
    RunResult r = run_cli("truthtable --system tm --format json " + sh_quote("A -> []A"));
    CHECK(r.exit_code == 1);
    json j = json::parse(r.out);
    CHECK(j["verdict"] == "refuted");
    System tm = make_system("tm");
    PropVerdict v = is_tautology(parse_formula("A -> []A"), tm);
    REQUIRE(v.witness.has_value());
    CHECK(j["valuations"] == v.valuations);
    REQUIRE(j["witness"].size() == v.witness->entries.size());
    for (std::size_t i = 0; i < v.witness->entries.size(); ++i) {
      CHECK(j["witness"][i]["formula"] == to_string(v.witness->entries[i].first));
      CHECK(j["witness"][i]["value"] == std::string(value_name(v.witness->entries[i].second)));
    }
  }
  SECTION("box of a classical tautology is still refutable") {
    RunResult r = run_cli("truthtable --system tm " + sh_quote("[](A | ~A)"));
    CHECK(r.exit_code == 1);
  }
  SECTION("the iteration axiom separates tm from t4m") {
    CHECK(run_cli("truthtable --system tm " + sh_quote("[]A -> [][]A")).exit_code == 1);
    CHECK(run_cli("truthtable --system t4m " + sh_quote("[]A -> [][]A")).exit_code == 0);
  }
  SECTION("a limit caps enumeration and reports non-exhaustive") {
    RunResult r = run_cli("truthtable --system tm --limit 3 --format json " + sh_quote("[]A -> A"));
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["exhaustive"] == false);
    CHECK(j["valuations"] == 3);
  }
  SECTION("--full lists exactly the legal valuations") {
    RunResult r = run_cli("truthtable --system tm --full --format json " + sh_quote("[]A"));
    json j = json::parse(r.out);
    System tm = make_system("tm");
    auto all = legal_valuations(parse_formula("[]A"), tm);
    REQUIRE(j["table"].size() == all.size());
    for (std::size_t i = 0; i < all.size(); ++i)
      for (std::size_t k = 0; k < all[i].entries.size(); ++k)
        CHECK(j["table"][i][k]["value"] == std::string(value_name(all[i].entries[k].second)));
  }
  SECTION("quantified input is a propositional error, exit 2") {
    RunResult r = run_cli("truthtable " + sh_quote("forall x. P(x)"));
    CHECK(r.exit_code == 2);
    CHECK_THAT(r.out, ContainsSubstring("error:"));
  }
}

TEST_CASE("eval subcommand reports attainable values per assignment") {
  std::string st = write_temp("cli_eval_structure.json", R"({
    "universe": 2,
    "predicates": {"P": {"arity": 1, "a": [[0], [1]], "c": [[0]]}},
    "constants": {"d": 1},
    "functions": {}
  })");
  SECTION("values match possible_values for every assignment") {
    RunResult r = run_cli("eval --structure " + sh_quote(st) + " --format json " +
                          sh_quote("[]P(x)"));
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.out);
    System tm = make_system("tm");
    Structure structure = structure_from_json(json::parse(R"({
      "universe": 2,
      "predicates": {"P": {"arity": 1, "a": [[0], [1]], "c": [[0]]}},
      "constants": {"d": 1},
      "functions": {}
    })"));
    ParseOptions popts;
    popts.undeclared_terms = UndeclaredTerms::Variable;
    FormulaPtr f = parse_formula("[]P(x)", structure.signature(), popts);
    REQUIRE(j["assignments"].size() == 2);
    for (const auto& row : j["assignments"]) {
      Assignment s = row["assignment"].get<Assignment>();
      ValueSet expected = possible_values(tm, structure, s, f);
      ValueSet got;
      for (const auto& v : row["values"]) got.insert(*parse_value(v.get<std::string>()));
      CHECK(got == expected);
    }
  }
  SECTION("necessary self-identity evaluates to T+ alone") {
    RunResult r = run_cli("eval --structure " + sh_quote(st) + " " +
                          sh_quote("forall x. (x = x)"));
    CHECK(r.exit_code == 0);
    CHECK_THAT(r.out, ContainsSubstring("(sentence): {T+}"));
    CHECK_THAT(r.out, ContainsSubstring("designated under every"));
  }
  SECTION("contingent self-identity evaluates to C+ alone") {
    RunResult r = run_cli("eval --system tm-c --structure " + sh_quote(st) + " " +
                          sh_quote("d =c d"));
    CHECK(r.exit_code == 0);
    CHECK_THAT(r.out, ContainsSubstring("(sentence): {C+}"));
  }
  SECTION("an undeclared predicate is a usage error, exit 2") {
    RunResult r = run_cli("eval --structure " + sh_quote(st) + " " + sh_quote("Q(x)"));
    CHECK(r.exit_code == 2);
  }
}

TEST_CASE("valid subcommand mirrors find_countermodel") {
  SECTION("Barcan formula holds under deterministic quantifiers, exit 0") {
    RunResult r = run_cli("valid --system tm --max-domain 2 --format json " +
                          sh_quote("(forall x. []P(x)) -> [](forall x. P(x))"));
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["verdict"] == "valid-up-to-bound");
    SearchResult lib = find_countermodel(
        parse_formula("(forall x. []P(x)) -> [](forall x. P(x))"), make_system("tm"), 2,
        10'000'000);
    CHECK(j["steps"] == lib.steps);
  }
  SECTION("the de-re-to-de-dicto direction fails under nd quantifiers, exit 1") {
    RunResult r = run_cli("valid --system tm --quantifier nd --max-domain 2 --format json " +
                          sh_quote("(forall x. <>P(x)) -> <>(forall x. P(x))"));
    CHECK(r.exit_code == 1);
    json j = json::parse(r.out);
    CHECK(j["verdict"] == "countermodel");
    // The countermodel structure round-trips through the documented schema.
    Structure structure = structure_from_json(j["structure"]);
    CHECK(structure.universe() == 2);
    System nd = make_system("tm", QuantifierMode::Nondeterministic);
    Valuation val = valuation_from_json(j["valuation"], nd);
    ParseOptions popts;
    popts.undeclared_terms = UndeclaredTerms::Variable;
    FormulaPtr f = parse_formula("(forall x. <>P(x)) -> <>(forall x. P(x))",
                                 structure.signature(), popts);
    CHECK_FALSE(check_true(structure, val, f));
  }
  SECTION("--jobs does not change the verdict, witness, or accounting") {
    std::string formula = sh_quote("(forall x. [][]P(x)) -> [][](forall x. P(x))");
    RunResult one = run_cli("valid --system tm --max-domain 1 --format json " + formula);
    RunResult four = run_cli("valid --system tm --max-domain 1 --jobs 4 --format json " + formula);
    CHECK(one.exit_code == 1);
    CHECK(one.out == four.out);
  }
  SECTION("a tiny budget exits 3") {
    RunResult r = run_cli("valid --budget 5 " + sh_quote("(forall x. []P(x)) -> [](forall x. P(x))"));
    CHECK(r.exit_code == 3);
    CHECK_THAT(r.out, ContainsSubstring("budget exhausted"));
  }
}

TEST_CASE("check-proof subcommand mirrors check_derivation") {
  std::string fixtures = NMODAL_FIXTURE_DIR;
  SECTION("the bundled necessity-entails-possibility proof is accepted, exit 0") {
    RunResult r = run_cli("check-proof " +
                          sh_quote(fixtures + "/derivation_deontic_from_reflexivity.json"));
    CHECK(r.exit_code == 0);
    CHECK_THAT(r.out, ContainsSubstring("accepted: []A -> <>A"));
  }
  SECTION("generalizing a premise variable is accepted with the metatheorem flag") {
    RunResult r = run_cli("check-proof " + sh_quote(fixtures + "/derivation_gen_blocks_dmt.json"));
    CHECK(r.exit_code == 0);
    CHECK_THAT(r.out, ContainsSubstring("generalized x"));
    CHECK_THAT(r.out, ContainsSubstring("deduction metatheorem blocked"));
  }
  SECTION("wrong modus ponens indices are rejected at the offending step, exit 1") {
    std::string path = write_temp("cli_bad_mp.json", R"({
      "system": "tm",
      "premises": ["A", "A -> B"],
      "steps": [
        {"formula": "A", "rule": "premise", "args": [0]},
        {"formula": "A -> B", "rule": "premise", "args": [1]},
        {"formula": "B", "rule": "mp", "args": [0, 0]}
      ]
    })");
    RunResult r = run_cli("check-proof " + sh_quote(path));
    CHECK(r.exit_code == 1);
    CHECK_THAT(r.out, ContainsSubstring("rejected at step 2"));
    CHECK_THAT(r.out, ContainsSubstring("modus ponens"));
  }
  SECTION("--system overrides the document's system") {
    std::string doc = fixtures + "/derivation_rigid_identity_rejected.json";
    CHECK(run_cli("check-proof " + sh_quote(doc)).exit_code == 1);           // tm-c rejects N=
    CHECK(run_cli("check-proof --system tm " + sh_quote(doc)).exit_code == 0);
  }
  SECTION("json report carries acceptance, steps, and premise ledger") {
    RunResult r = run_cli("check-proof --format json " +
                          sh_quote(fixtures + "/derivation_reflexivity_mp.json"));
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["accepted"] == true);
    CHECK(j["conclusion"] == "A");
    REQUIRE(j["steps"].size() == 3);
    CHECK(j["steps"][1]["rule"] == "axiom T");
    CHECK(j["premises"][0]["dmt_applicable"] == true);
  }
  SECTION("a malformed document exits 2") {
    std::string path = write_temp("cli_bad_doc.json", R"({"steps": [{"rule": "axiom"}]})");
    CHECK(run_cli("check-proof " + sh_quote(path)).exit_code == 2);
  }
}

TEST_CASE("parse subcommand reports symbols and sentence status") {
  SECTION("without a structure, undeclared identifiers in term position are constants") {
    RunResult r = run_cli("parse --format json " + sh_quote("(forall x. P(x, c)) -> Q(y)"));
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["predicates"]["P"] == 2);
    CHECK(j["predicates"]["Q"] == 1);
    CHECK(j["constants"] == json::array({"c", "y"}));
    CHECK(j["free_variables"].empty());
    CHECK(j["sentence"] == true);
  }
  SECTION("with a structure, undeclared identifiers are free variables") {
    std::string st = write_temp("cli_parse_structure.json", R"({
      "universe": 1,
      "predicates": {"P": {"arity": 2, "a": [], "c": []}, "Q": {"arity": 1, "a": [], "c": []}},
      "constants": {"c": 0},
      "functions": {}
    })");
    RunResult r = run_cli("parse --structure " + sh_quote(st) + " --format json " +
                          sh_quote("(forall x. P(x, c)) -> Q(y)"));
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["constants"] == json::array({"c"}));
    CHECK(j["free_variables"] == json::array({"y"}));
    CHECK(j["sentence"] == false);
  }
  SECTION("a syntax error exits 2") {
    RunResult bad = run_cli("parse " + sh_quote("P("));
    CHECK(bad.exit_code == 2);
    CHECK_THAT(bad.out, ContainsSubstring("error:"));
  }
}
