#include <nmodal/json_io.hpp>

#include <string>
#include <vector>

#include "support.hpp"

using namespace nmodal;
using nlohmann::json;

namespace {

json parse_json(const std::string& text) { return json::parse(text); }

}  // namespace

TEST_CASE("structures round-trip through JSON") {
  Structure s(3);
  s.add_predicate_pair("P", 1, {{0}, {1}}, {{1}, {2}});
  s.add_predicate_pair("Q", 2, {{0, 1}}, {});
  s.add_function("f", 1, {1, 2, 0});
  s.add_function("g", 2, {0, 1, 2, 1, 0, 2, 2, 1, 0});
  s.add_constant("c", 2);
  s.add_constant("d", 0);

  const json j = structure_to_json(s);
  CHECK(j.at("universe") == 3);
  CHECK(j.at("predicates").at("P").at("arity") == 1);
  CHECK(j.at("predicates").at("P").at("a") == json::parse("[[0],[1]]"));
  CHECK(j.at("predicates").at("P").at("c") == json::parse("[[1],[2]]"));
  CHECK_FALSE(j.at("predicates").at("P").contains("n"));
  CHECK(j.at("functions").at("f") == json::parse("[1,2,0]"));
  CHECK(j.at("constants").at("c") == 2);

  const Structure back = structure_from_json(j);
  CHECK(structure_to_json(back) == j);
  CHECK(back.universe() == 3);
  CHECK(back.constants().at("d") == 0);
  CHECK(back.functions().at("g").arity == 2);

  // Atom regions survive the round trip at every element.
  ParseOptions vars;
  vars.undeclared_terms = UndeclaredTerms::Variable;
  const FormulaPtr px = parse_formula("P(x)", {}, vars);
  for (int e = 0; e < 3; ++e) {
    Assignment g{{"x", e}};
    CHECK(eval_atom(back, g, px) == eval_atom(s, g, px));
  }
}

TEST_CASE("triple-form predicates keep their three regions") {
  Structure s(2);
  s.add_predicate_triple("R", 1, {{0}, {1}}, {{0}}, {{0}, {1}});
  const json j = structure_to_json(s);
  CHECK(j.at("predicates").at("R").contains("n"));
  CHECK(j.at("predicates").at("R").contains("p"));
  CHECK_FALSE(j.at("predicates").at("R").contains("c"));

  const Structure back = structure_from_json(j);
  CHECK(structure_to_json(back) == j);
  CHECK_FALSE(back.predicates().at("R").pair_form);
}

TEST_CASE("one-element universes disambiguate function arity explicitly") {
  Structure s(1);
  s.add_function("f", 2, {0});
  s.add_function("h", 1, {0});
  const json j = structure_to_json(s);
  CHECK(j.at("functions").at("f") == json::parse(R"({"arity":2,"table":[0]})"));
  CHECK(j.at("functions").at("h") == json::parse("[0]"));

  const Structure back = structure_from_json(j);
  CHECK(back.functions().at("f").arity == 2);
  CHECK(back.functions().at("h").arity == 1);
  CHECK(structure_to_json(back) == j);
}

TEST_CASE("nullary predicates carry an explicit arity") {
  Structure s(2);
  s.set_predicate_pair_masks("A", 0, 1, 1);
  const json j = structure_to_json(s);
  CHECK(j.at("predicates").at("A").at("arity") == 0);
  CHECK(j.at("predicates").at("A").at("a") == json::parse("[[]]"));

  const Structure back = structure_from_json(j);
  CHECK(structure_to_json(back) == j);
  Assignment empty;
  CHECK(eval_atom(back, empty, parse_formula("A")) == Value::Cp);
}

TEST_CASE("hand-written structure documents parse leniently") {
  // A bare universe is a structure with no symbols.
  const Structure bare = structure_from_json(parse_json(R"({"universe": 2})"));
  CHECK(bare.universe() == 2);
  CHECK(bare.predicates().empty());

  // Arity is inferred from the first tuple when absent.
  const Structure inferred = structure_from_json(parse_json(
      R"({"universe": 2, "predicates": {"P": {"a": [[0]], "c": []}}})"));
  CHECK(inferred.predicates().at("P").arity == 1);
  CHECK(inferred.predicates().at("P").pair_form);

  // The presence of "n" or "p" selects the triple reading; missing regions
  // default to empty.
  const Structure triple = structure_from_json(parse_json(
      R"({"universe": 2, "predicates": {"R": {"n": [[0]], "p": [[0], [1]]}}})"));
  CHECK_FALSE(triple.predicates().at("R").pair_form);
  CHECK(triple.predicates().at("R").a == std::vector<char>{0, 0});

  // Function arity falls out of the table length.
  const Structure fns = structure_from_json(parse_json(
      R"({"universe": 2, "functions": {"f": [0, 1], "g": [0, 1, 1, 0]}})"));
  CHECK(fns.functions().at("f").arity == 1);
  CHECK(fns.functions().at("g").arity == 2);
}

TEST_CASE("malformed structure documents are rejected") {
  auto reject = [](const std::string& text) {
    CHECK_THROWS_AS(structure_from_json(parse_json(text)), io_error);
  };

  reject(R"([])");                        // not an object
  reject(R"({})");                        // missing universe
  reject(R"({"universe": "two"})");       // universe not an integer
  reject(R"({"universe": 2, "predicates": []})");
  reject(R"({"universe": 2, "predicates": {"P": 3}})");
  reject(R"({"universe": 2, "predicates": {"P": {"a": []}}})");          // no arity source
  reject(R"({"universe": 2, "predicates": {"P": {"arity": -1, "a": []}}})");
  reject(R"({"universe": 2, "predicates": {"P": {"a": [0]}}})");         // tuple not an array
  reject(R"({"universe": 2, "predicates": {"P": {"a": [["x"]]}}})");     // non-integer entry
  reject(R"({"universe": 2, "functions": {"f": {"arity": 1}}})");        // object form sans table
  reject(R"({"universe": 2, "functions": {"f": [0, 1, 1]}})");           // not a power of 2
  reject(R"({"universe": 2, "functions": {"f": []}})");                  // empty table
  reject(R"({"universe": 1, "functions": {"f": [0, 0]}})");              // ambiguous over |U|=1
  reject(R"({"universe": 2, "functions": {"f": 3}})");                   // not a table at all
  reject(R"({"universe": 2, "constants": {"c": "x"}})");

  // Structure-level validation still applies after decoding.
  CHECK_THROWS_AS(structure_from_json(parse_json(R"({"universe": 0})")), structure_error);
  CHECK_THROWS_AS(structure_from_json(parse_json(
                      R"({"universe": 2, "predicates": {"P": {"arity": 1, "a": [[0, 1]]}}})")),
                  structure_error);
  CHECK_THROWS_AS(structure_from_json(parse_json(
                      R"({"universe": 2, "predicates": {"P": {"a": [[5]], "c": []}}})")),
                  structure_error);
  CHECK_THROWS_AS(structure_from_json(parse_json(R"({"universe": 2, "constants": {"c": 5}})")),
                  structure_error);
}

TEST_CASE("valuations round-trip with carrier checking") {
  const System tm = make_system("tm");
  Valuation v;
  v.system = &tm;
  v.values = {{"A", Value::Cp}, {"[]A", Value::Cn}, {"A -> []A", Value::Cn}};

  const json j = valuation_to_json(v);
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 3);
  // Map order is lexicographic by fingerprint.
  CHECK(j[0] == json::parse(R"({"fingerprint": "A", "value": "C+"})"));

  const Valuation back = valuation_from_json(j, tm);
  CHECK(back.values == v.values);
  CHECK(back.system == &tm);

  const System km = make_system("km");
  const Valuation wide = valuation_from_json(
      parse_json(R"([{"fingerprint": "A", "value": "I-"}])"), km);
  CHECK(wide.values.at("A") == Value::In);
}

TEST_CASE("malformed valuation witnesses are rejected") {
  const System tm = make_system("tm");
  auto reject = [&](const std::string& text) {
    CHECK_THROWS_AS(valuation_from_json(parse_json(text), tm), io_error);
  };

  reject(R"({})");                                        // not a list
  reject(R"([{"fingerprint": "A"}])");                    // missing value
  reject(R"([{"value": "T+"}])");                         // missing fingerprint
  reject(R"([{"fingerprint": "A", "value": "X+"}])");     // unknown value name
  reject(R"([{"fingerprint": "A", "value": "F+"}])");     // outside the V4 carrier
  reject(R"([{"fingerprint": "A", "value": "T+"},
             {"fingerprint": "A", "value": "C+"}])");     // duplicate fingerprint

  CHECK_THROWS_WITH(valuation_from_json(
                        parse_json(R"([{"fingerprint": "A", "value": "F+"}])"), tm),
                    Catch::Matchers::ContainsSubstring("carrier"));
}
