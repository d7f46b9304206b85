#include <nmodal/propositional.hpp>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "support.hpp"

using namespace nmodal;
using testutil::val;

namespace {

FormulaPtr pf(const std::string& text) { return parse_formula(text); }

// Independent oracle: enumerate every total map from the subformula closure
// into the carrier and count the ones where each composite's value lies in
// the table set of its children's values.
long long oracle_count(const FormulaPtr& f, const System& sys) {
  std::vector<FormulaPtr> closure = subformula_closure(f);
  std::vector<Value> carrier = sys.carrier_values().values();
  std::size_t n = closure.size();
  std::vector<std::size_t> digit(n, 0);

  auto value_at = [&](const FormulaPtr& g) {
    for (std::size_t i = 0; i < n; ++i)
      if (equal(closure[i], g)) return carrier[digit[i]];
    throw std::logic_error("oracle: closure is missing a subformula");
  };

  long long count = 0;
  while (true) {
    bool legal = true;
    for (std::size_t i = 0; i < n && legal; ++i) {
      Value v = carrier[digit[i]];
      const FormulaPtr& g = closure[i];
      switch (g->kind) {
        case FormulaKind::Atom:
          break;
        case FormulaKind::Neg:
          legal = v == sys.neg(value_at(g->lhs));
          break;
        case FormulaKind::Box:
          legal = sys.box(value_at(g->lhs)).contains(v);
          break;
        case FormulaKind::Imp:
          legal = sys.imp(value_at(g->lhs), value_at(g->rhs)).contains(v);
          break;
        default:
          legal = false;
          break;
      }
    }
    if (legal) ++count;
    std::size_t i = 0;
    while (i < n && ++digit[i] == carrier.size()) {
      digit[i] = 0;
      ++i;
    }
    if (i == n) break;
  }
  return count;
}

// A schema with metavariables; instances are built from concrete atoms.
struct Schema {
  std::string name;
  int arity;  // number of metavariables used
  FormulaPtr (*make)(FormulaPtr, FormulaPtr, FormulaPtr);
};

const std::vector<Schema>& core_schemas() {
  using F = Formula;
  static const std::vector<Schema> schemas = {
      {"alpha -> (beta -> alpha)", 2,
       [](FormulaPtr a, FormulaPtr b, FormulaPtr) { return F::imp(a, F::imp(b, a)); }},
      {"(alpha -> (beta -> gamma)) -> ((alpha -> beta) -> (alpha -> gamma))", 3,
       [](FormulaPtr a, FormulaPtr b, FormulaPtr c) {
         return F::imp(F::imp(a, F::imp(b, c)), F::imp(F::imp(a, b), F::imp(a, c)));
       }},
      {"(~beta -> ~alpha) -> ((~beta -> alpha) -> beta)", 2,
       [](FormulaPtr a, FormulaPtr b, FormulaPtr) {
         return F::imp(F::imp(F::neg(b), F::neg(a)), F::imp(F::imp(F::neg(b), a), b));
       }},
      {"[](alpha -> beta) -> ([]alpha -> []beta)", 2,
       [](FormulaPtr a, FormulaPtr b, FormulaPtr) {
         return F::imp(F::box(F::imp(a, b)), F::imp(F::box(a), F::box(b)));
       }},
      {"[](alpha -> beta) -> (<>alpha -> <>beta)", 2,
       [](FormulaPtr a, FormulaPtr b, FormulaPtr) {
         return F::imp(F::box(F::imp(a, b)), F::imp(F::diamond(a), F::diamond(b)));
       }},
      {"<>(alpha -> beta) -> ([]alpha -> <>beta)", 2,
       [](FormulaPtr a, FormulaPtr b, FormulaPtr) {
         return F::imp(F::diamond(F::imp(a, b)), F::imp(F::box(a), F::diamond(b)));
       }},
      {"[]~alpha -> [](alpha -> beta)", 2,
       [](FormulaPtr a, FormulaPtr b, FormulaPtr) {
         return F::imp(F::box(F::neg(a)), F::box(F::imp(a, b)));
       }},
      {"[]beta -> [](alpha -> beta)", 2,
       [](FormulaPtr a, FormulaPtr b, FormulaPtr) {
         return F::imp(F::box(b), F::box(F::imp(a, b)));
       }},
      {"<>beta -> <>(alpha -> beta)", 2,
       [](FormulaPtr a, FormulaPtr b, FormulaPtr) {
         return F::imp(F::diamond(b), F::diamond(F::imp(a, b)));
       }},
      {"<>~alpha -> <>(alpha -> beta)", 2,
       [](FormulaPtr a, FormulaPtr b, FormulaPtr) {
         return F::imp(F::diamond(F::neg(a)), F::diamond(F::imp(a, b)));
       }},
      {"[]alpha -> alpha", 1,
       [](FormulaPtr a, FormulaPtr, FormulaPtr) { return F::imp(F::box(a), a); }},
      {"[]alpha -> []~~alpha", 1,
       [](FormulaPtr a, FormulaPtr, FormulaPtr) {
         return F::imp(F::box(a), F::box(F::neg(F::neg(a))));
       }},
      {"[]~~alpha -> []alpha", 1,
       [](FormulaPtr a, FormulaPtr, FormulaPtr) {
         return F::imp(F::box(F::neg(F::neg(a))), F::box(a));
       }},
  };
  return schemas;
}

}  // namespace

TEST_CASE("the subformula closure is deduplicated and post-ordered") {
  const std::vector<FormulaPtr> c1 = subformula_closure(pf("A -> (B -> A)"));
  REQUIRE(c1.size() == 4);
  CHECK(equal(c1[0], pf("A")));
  CHECK(equal(c1[1], pf("B")));
  CHECK(equal(c1[2], pf("B -> A")));
  CHECK(equal(c1[3], pf("A -> (B -> A)")));

  // Sugar desugars before closure construction: A | ~A is ~A -> ~A, whose
  // two occurrences of ~A share one entry.
  const std::vector<FormulaPtr> c2 = subformula_closure(pf("A | ~A"));
  REQUIRE(c2.size() == 3);
  CHECK(equal(c2[1], pf("~A")));

  const std::vector<FormulaPtr> c3 = subformula_closure(pf("[]A -> []A"));
  CHECK(c3.size() == 3);

  // The joint closure of several formulas dedupes across them.
  const std::vector<FormulaPtr> c4 =
      subformula_closure(std::vector<FormulaPtr>{pf("[]A"), pf("A")});
  REQUIRE(c4.size() == 2);
  CHECK(equal(c4[0], pf("A")));
  CHECK(equal(c4[1], pf("[]A")));

  // Children always precede parents.
  for (const std::vector<FormulaPtr>& closure : {c1, c2, c3}) {
    for (std::size_t i = 0; i < closure.size(); ++i) {
      for (const FormulaPtr& child : {closure[i]->lhs, closure[i]->rhs}) {
        if (!child) continue;
        bool seen_before = false;
        for (std::size_t j = 0; j < i; ++j) seen_before = seen_before || equal(closure[j], child);
        CHECK(seen_before);
      }
    }
  }
}

TEST_CASE("quantified and term-bearing formulas are rejected") {
  const System tm = make_system("tm");
  CHECK_THROWS_AS(subformula_closure(pf("P(c)")), propositional_error);
  CHECK_THROWS_AS(subformula_closure(pf("forall x. A")), propositional_error);
  CHECK_THROWS_AS(subformula_closure(pf("c = d")), propositional_error);
  CHECK_THROWS_AS(legal_valuations(pf("P(c)"), tm), propositional_error);
  CHECK_THROWS_AS(is_tautology(pf("exists x. A"), tm), propositional_error);
  CHECK_THROWS_AS(is_consequence({pf("c = d")}, pf("A"), tm), propositional_error);
}

TEST_CASE("legal valuations follow the tables in the fixed order") {
  const System tm = make_system("tm");

  // A single atom ranges over the carrier in the fixed value order.
  const std::vector<PropValuation> atom = legal_valuations(pf("A"), tm);
  REQUIRE(atom.size() == 4);
  CHECK(atom[0].root_value() == Value::Tp);
  CHECK(atom[1].root_value() == Value::Cp);
  CHECK(atom[2].root_value() == Value::Cn);
  CHECK(atom[3].root_value() == Value::Fn);

  // []A has eight: four atom values, each with a two-element box set.
  const std::vector<PropValuation> boxed = legal_valuations(pf("[]A"), tm);
  REQUIRE(boxed.size() == 8);
  for (const PropValuation& v : boxed) {
    CHECK(tm.box(v.value_of(pf("A"))).contains(v.root_value()));
  }
  CHECK(boxed[0].value_of(pf("A")) == Value::Tp);
  CHECK(boxed[0].root_value() == Value::Tp);
  CHECK(boxed[1].value_of(pf("A")) == Value::Tp);
  CHECK(boxed[1].root_value() == Value::Cp);
  CHECK(boxed[2].value_of(pf("A")) == Value::Cp);
  CHECK(boxed[2].root_value() == Value::Cn);
  CHECK(boxed[3].value_of(pf("A")) == Value::Cp);
  CHECK(boxed[3].root_value() == Value::Fn);

  // On the diagonal of the implication the C+ branch admits exactly T+, C+.
  std::vector<Value> diag_roots;
  for (const PropValuation& v : legal_valuations(pf("A -> A"), tm))
    if (v.value_of(pf("A")) == Value::Cp) diag_roots.push_back(v.root_value());
  CHECK(diag_roots == std::vector<Value>{Value::Tp, Value::Cp});

  // The eight-valued carrier widens the atom range.
  CHECK(count_legal_valuations(pf("A"), make_system("km")) == 8);
}

TEST_CASE("valuation counts match the brute-force oracle") {
  const std::vector<std::string> small = {"A",      "~A",     "[]A",  "A -> B", "[]A -> A",
                                          "A | ~A", "[][]A",  "<>A",  "A & B"};
  for (const std::string& sys_name : {"tm", "t4m", "t45m", "dm", "km"}) {
    const System sys = make_system(sys_name);
    for (const std::string& text : small) {
      INFO(sys_name << ": " << text);
      CHECK(count_legal_valuations(pf(text), sys) == oracle_count(pf(text), sys));
    }
  }
  // Larger closures stay cheap on the four-valued carrier.
  const System tm = make_system("tm");
  for (const std::string& text :
       {"[](A | ~A)", "[]A -> [][]A", "[](A -> B) -> ([]A -> []B)", "<>[]A -> []A"}) {
    INFO(text);
    CHECK(count_legal_valuations(pf(text), tm) == oracle_count(pf(text), tm));
  }
}

TEST_CASE("tautology verdicts on the pinned formulas") {
  const System tm = make_system("tm");
  const System t4m = make_system("t4m");
  const System t45m = make_system("t45m");

  CHECK(is_tautology(pf("A | ~A"), tm).holds);
  CHECK(is_tautology(pf("[]A -> A"), tm).holds);

  SECTION("the excluded middle is not necessary") {
    const PropVerdict v = is_tautology(pf("[](A | ~A)"), tm);
    REQUIRE_FALSE(v.holds);
    REQUIRE(v.witness.has_value());
    CHECK_FALSE(designated(v.witness->root_value()));
    // First falsifying valuation: the necessarily-true branch A = T+ cannot
    // fail, so the search lands on A = C+.
    CHECK(v.witness->value_of(pf("A")) == Value::Cp);
  }

  SECTION("necessitation fails as an implication") {
    const PropVerdict v = is_tautology(pf("A -> []A"), tm);
    REQUIRE_FALSE(v.holds);
    REQUIRE(v.witness.has_value());
    CHECK(v.witness->value_of(pf("A")) == Value::Cp);
    CHECK(v.witness->value_of(pf("[]A")) == Value::Cn);
    CHECK(v.witness->root_value() == Value::Cn);
  }

  SECTION("box iteration separates the four-valued systems") {
    const FormulaPtr four = pf("[]A -> [][]A");
    CHECK_FALSE(is_tautology(four, tm).holds);
    CHECK(is_tautology(four, t4m).holds);
    CHECK(is_tautology(four, t45m).holds);

    const FormulaPtr five = pf("<>[]A -> []A");
    CHECK_FALSE(is_tautology(five, tm).holds);
    CHECK(is_tautology(five, t45m).holds);
  }
}

TEST_CASE("every schema instance over three atoms is designated") {
  const System tm = make_system("tm");
  const std::vector<FormulaPtr> atoms = {pf("A"), pf("B"), pf("C")};
  long long instances = 0;
  for (const Schema& schema : core_schemas()) {
    for (const FormulaPtr& a : atoms) {
      for (const FormulaPtr& b : schema.arity >= 2 ? atoms : std::vector<FormulaPtr>{atoms[0]}) {
        for (const FormulaPtr& c :
             schema.arity >= 3 ? atoms : std::vector<FormulaPtr>{atoms[0]}) {
          INFO(schema.name);
          CHECK(is_tautology(schema.make(a, b, c), tm).holds);
          ++instances;
        }
      }
    }
  }
  CHECK(instances == 117);

  // The deontic attenuation of reflexivity is designated on the six-valued
  // carrier, where reflexivity itself is not an axiom.
  const System dm = make_system("dm");
  CHECK(is_tautology(pf("[]A -> <>A"), dm).holds);
}

TEST_CASE("consequence checking separates premises from tautologies") {
  const System tm = make_system("tm");

  CHECK(is_consequence({pf("[]A")}, pf("A"), tm).holds);
  CHECK(is_consequence({pf("A"), pf("A -> B")}, pf("B"), tm).holds);
  CHECK_FALSE(is_consequence({pf("B")}, pf("A"), tm).holds);

  SECTION("the necessitation rule is not admissible as a consequence") {
    const PropVerdict v = is_consequence({pf("A")}, pf("[]A"), tm);
    REQUIRE_FALSE(v.holds);
    REQUIRE(v.witness.has_value());
    CHECK(v.witness->value_of(pf("A")) == Value::Cp);
    CHECK(v.witness->value_of(pf("[]A")) == Value::Cn);
  }

  SECTION("no premises means tautology checking") {
    for (const std::string& text : {"A | ~A", "A -> []A", "[]A -> A"}) {
      const PropVerdict direct = is_tautology(pf(text), tm);
      const PropVerdict derived = is_consequence({}, pf(text), tm);
      CHECK(direct.holds == derived.holds);
      CHECK(direct.valuations == derived.valuations);
      REQUIRE(direct.witness.has_value() == derived.witness.has_value());
      if (direct.witness.has_value())
        CHECK(direct.witness->root_value() == derived.witness->root_value());
    }
  }
}

TEST_CASE("enumeration limits mark the verdict non-exhaustive") {
  const System tm = make_system("tm");

  const PropVerdict capped = is_tautology(pf("A -> A"), tm, 1);
  CHECK(capped.holds);
  CHECK_FALSE(capped.exhaustive);
  CHECK(capped.valuations == 1);

  const long long total = count_legal_valuations(pf("A -> A"), tm);
  const PropVerdict roomy = is_tautology(pf("A -> A"), tm, total + 1);
  CHECK(roomy.holds);
  CHECK(roomy.exhaustive);
  CHECK(roomy.valuations == total);

  // A falsification found inside the cap is still a definitive verdict.
  const PropVerdict refuted = is_tautology(pf("A -> []A"), tm, 1000);
  CHECK_FALSE(refuted.holds);
  CHECK(refuted.exhaustive);
  REQUIRE(refuted.witness.has_value());

  const PropVerdict capped_conseq = is_consequence({pf("A")}, pf("A -> A"), tm, 1);
  CHECK(capped_conseq.holds);
  CHECK_FALSE(capped_conseq.exhaustive);
}

TEST_CASE("equivalent formulas cannot be replaced under the box") {
  const System tm = make_system("tm");
  const FormulaPtr alpha = pf("A | ~A");
  const FormulaPtr beta = pf("B | ~B");

  // Both implication directions hold, so alpha and beta are provably
  // equivalent...
  CHECK(is_tautology(Formula::imp(alpha, beta), tm).holds);
  CHECK(is_tautology(Formula::imp(beta, alpha), tm).holds);

  // ...yet boxing breaks the equivalence in both directions.
  const PropVerdict forward = is_tautology(Formula::imp(Formula::box(alpha), Formula::box(beta)), tm);
  REQUIRE_FALSE(forward.holds);
  REQUIRE(forward.witness.has_value());
  CHECK(designated(forward.witness->value_of(Formula::box(alpha))));
  CHECK_FALSE(designated(forward.witness->value_of(Formula::box(beta))));

  const PropVerdict backward = is_tautology(Formula::imp(Formula::box(beta), Formula::box(alpha)), tm);
  CHECK_FALSE(backward.holds);
}
