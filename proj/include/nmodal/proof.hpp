#pragma once

// Hilbert-style derivation checking: axiom schema matching with syntactic
// side conditions, modus ponens and generalization steps, premise tracking
// with the deduction-metatheorem condition reported per premise.
//
// Schema matching is structural on the desugared syntax tree, so spelled-out
// and abbreviated possibility operators match the same schemas.  Identity
// axioms are sensitive to the identity kind: the necessity pair N=/P=
// matches the rigid identity, the contingency pair C=1/C=2 the contingent
// one, and Ax7/Ax8 accept either (both readings are designated whenever the
// antecedent identity is).

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "syntax.hpp"
#include "system.hpp"

namespace nmodal {

// Malformed derivation documents (bad JSON shapes, unknown rules).  Logical
// failures inside a well-formed derivation are reported, not thrown.
struct proof_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// The axiom schema registry

enum class AxiomId : std::uint8_t {
  Ax1, Ax2, Ax3, Ax4, Ax5, Ax6, Ax7, Ax8,
  NecId, PosNotId, ContId1, ContId2,
  K, K1, K2, M1, M2, M3, M4, T, D, DN1, DN2, Four, Five,
  BF, CBF, NBF, PBF,
};

inline const std::vector<AxiomId>& all_axioms() {
  static const std::vector<AxiomId> ids = {
      AxiomId::Ax1, AxiomId::Ax2, AxiomId::Ax3, AxiomId::Ax4,  AxiomId::Ax5,
      AxiomId::Ax6, AxiomId::Ax7, AxiomId::Ax8, AxiomId::NecId, AxiomId::PosNotId,
      AxiomId::ContId1, AxiomId::ContId2, AxiomId::K, AxiomId::K1, AxiomId::K2,
      AxiomId::M1, AxiomId::M2, AxiomId::M3, AxiomId::M4, AxiomId::T, AxiomId::D,
      AxiomId::DN1, AxiomId::DN2, AxiomId::Four, AxiomId::Five, AxiomId::BF,
      AxiomId::CBF, AxiomId::NBF, AxiomId::PBF,
  };
  return ids;
}

inline std::string_view axiom_name(AxiomId id) {
  switch (id) {
    case AxiomId::Ax1: return "Ax1";
    case AxiomId::Ax2: return "Ax2";
    case AxiomId::Ax3: return "Ax3";
    case AxiomId::Ax4: return "Ax4";
    case AxiomId::Ax5: return "Ax5";
    case AxiomId::Ax6: return "Ax6";
    case AxiomId::Ax7: return "Ax7";
    case AxiomId::Ax8: return "Ax8";
    case AxiomId::NecId: return "N=";
    case AxiomId::PosNotId: return "P=";
    case AxiomId::ContId1: return "C=1";
    case AxiomId::ContId2: return "C=2";
    case AxiomId::K: return "K";
    case AxiomId::K1: return "K1";
    case AxiomId::K2: return "K2";
    case AxiomId::M1: return "M1";
    case AxiomId::M2: return "M2";
    case AxiomId::M3: return "M3";
    case AxiomId::M4: return "M4";
    case AxiomId::T: return "T";
    case AxiomId::D: return "D";
    case AxiomId::DN1: return "DN1";
    case AxiomId::DN2: return "DN2";
    case AxiomId::Four: return "4";
    case AxiomId::Five: return "5";
    case AxiomId::BF: return "BF";
    case AxiomId::CBF: return "CBF";
    case AxiomId::NBF: return "NBF";
    case AxiomId::PBF: return "PBF";
  }
  return "?";
}

inline std::optional<AxiomId> parse_axiom_name(std::string_view name) {
  for (AxiomId id : all_axioms())
    if (axiom_name(id) == name) return id;
  return std::nullopt;
}

// Which schemas a system's Hilbert calculus contains.  The propositional
// cores differ per carrier (the six-valued calculus attenuates reflexivity
// to the deontic schema, the eight-valued one keeps only the schemas its
// wider tables still designate); the iteration schemas follow the box
// variant; the identity pair follows the identity mode; and the converse
// and diamond Barcan schemas are absent exactly where their countermodels
// live (the eight-valued carrier and the nondeterministic quantifier).
inline bool axiom_in_system(AxiomId id, const System& sys) {
  switch (id) {
    case AxiomId::Ax1:
    case AxiomId::Ax2:
    case AxiomId::Ax3:
    case AxiomId::Ax4:
    case AxiomId::Ax5:
    case AxiomId::Ax6:
    case AxiomId::Ax7:
    case AxiomId::Ax8:
    case AxiomId::K2:
    case AxiomId::M1:
    case AxiomId::M2:
    case AxiomId::DN1:
    case AxiomId::DN2:
    case AxiomId::BF:
    case AxiomId::PBF:
      return true;
    case AxiomId::K:
    case AxiomId::K1:
    case AxiomId::M3:
    case AxiomId::M4:
      return sys.carrier != Carrier::V8;
    case AxiomId::T:
      return sys.carrier == Carrier::V4;
    case AxiomId::D:
      return sys.carrier == Carrier::V6;
    case AxiomId::Four:
      return sys.box_variant != BoxVariant::Base;
    case AxiomId::Five:
      return sys.box_variant == BoxVariant::Axiom45;
    case AxiomId::NecId:
    case AxiomId::PosNotId:
      return sys.identity_mode == IdentityMode::Necessary;
    case AxiomId::ContId1:
    case AxiomId::ContId2:
      return sys.identity_mode == IdentityMode::Contingent;
    case AxiomId::CBF:
      return sys.carrier != Carrier::V8;
    case AxiomId::NBF:
      return sys.carrier == Carrier::V4 &&
             sys.quantifier_mode == QuantifierMode::Deterministic;
  }
  return false;
}

inline std::vector<AxiomId> system_axioms(const System& sys) {
  std::vector<AxiomId> out;
  for (AxiomId id : all_axioms())
    if (axiom_in_system(id, sys)) out.push_back(id);
  return out;
}

// ---------------------------------------------------------------------------
// Schema matching

struct AxiomMatch {
  AxiomId axiom;
  // Metavariable bindings in schema order, printed.
  std::vector<std::pair<std::string, std::string>> binding;
};

namespace detail {

inline bool kind_is(const FormulaPtr& f, FormulaKind k) { return f && f->kind == k; }

// Peels the possibility shape ~[]~g; null when f is not of that form.
inline FormulaPtr diamond_body(const FormulaPtr& f) {
  if (!kind_is(f, FormulaKind::Neg)) return nullptr;
  if (!kind_is(f->lhs, FormulaKind::Box)) return nullptr;
  if (!kind_is(f->lhs->lhs, FormulaKind::Neg)) return nullptr;
  return f->lhs->lhs->lhs;
}

inline bool is_variable(const TermPtr& t) { return t->kind == TermKind::Variable; }

inline AxiomMatch binding_of(AxiomId id,
                             std::initializer_list<std::pair<const char*, std::string>> items) {
  AxiomMatch m;
  m.axiom = id;
  for (const auto& [k, v] : items) m.binding.emplace_back(k, v);
  return m;
}

// Recover the term substituted for the free occurrences of x when g was
// produced as f[x/tau]: walk both trees in lockstep, collecting the g-side
// subterm at every free occurrence of x in f; all collected terms must
// agree.  Returns false on any structural mismatch.
inline bool recover_term(const TermPtr& a, const TermPtr& b, const std::string& x,
                         const std::set<std::string>& bound, std::optional<TermPtr>& tau) {
  if (a->kind == TermKind::Variable && a->name == x && !bound.count(x)) {
    if (tau && !equal(*tau, b)) return false;
    tau = b;
    return true;
  }
  if (a->kind != b->kind || a->name != b->name || a->element_index != b->element_index ||
      a->args.size() != b->args.size())
    return false;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!recover_term(a->args[i], b->args[i], x, bound, tau)) return false;
  return true;
}

inline bool recover_rec(const FormulaPtr& f, const FormulaPtr& g, const std::string& x,
                        std::set<std::string>& bound, std::optional<TermPtr>& tau) {
  if (f->kind != g->kind) return false;
  switch (f->kind) {
    case FormulaKind::Atom: {
      if (f->predicate != g->predicate || f->terms.size() != g->terms.size()) return false;
      for (std::size_t i = 0; i < f->terms.size(); ++i)
        if (!recover_term(f->terms[i], g->terms[i], x, bound, tau)) return false;
      return true;
    }
    case FormulaKind::Identity:
      return f->id_kind == g->id_kind &&
             recover_term(f->terms[0], g->terms[0], x, bound, tau) &&
             recover_term(f->terms[1], g->terms[1], x, bound, tau);
    case FormulaKind::Neg:
    case FormulaKind::Box:
      return recover_rec(f->lhs, g->lhs, x, bound, tau);
    case FormulaKind::Imp:
      return recover_rec(f->lhs, g->lhs, x, bound, tau) &&
             recover_rec(f->rhs, g->rhs, x, bound, tau);
    case FormulaKind::Forall: {
      if (f->var != g->var) return false;
      bool inserted = bound.insert(f->var).second;
      bool ok = recover_rec(f->lhs, g->lhs, x, bound, tau);
      if (inserted) bound.erase(f->var);
      return ok;
    }
  }
  return false;
}

}  // namespace detail

// A metavariable binding making f an instance of the schema, with all side
// conditions verified; nothing when f does not fit.
inline std::optional<AxiomMatch> match_axiom(const FormulaPtr& f, AxiomId id) {
  using detail::binding_of;
  using detail::diamond_body;
  using detail::kind_is;
  using K = FormulaKind;
  const auto no = std::nullopt;

  switch (id) {
    case AxiomId::Ax1: {  // alpha -> (beta -> alpha)
      if (!kind_is(f, K::Imp) || !kind_is(f->rhs, K::Imp)) return no;
      if (!equal(f->lhs, f->rhs->rhs)) return no;
      return binding_of(id, {{"alpha", to_string(f->lhs)}, {"beta", to_string(f->rhs->lhs)}});
    }
    case AxiomId::Ax2: {  // (a -> (b -> g)) -> ((a -> b) -> (a -> g))
      if (!kind_is(f, K::Imp) || !kind_is(f->lhs, K::Imp) || !kind_is(f->lhs->rhs, K::Imp) ||
          !kind_is(f->rhs, K::Imp) || !kind_is(f->rhs->lhs, K::Imp) ||
          !kind_is(f->rhs->rhs, K::Imp))
        return no;
      const FormulaPtr &a = f->lhs->lhs, &b = f->lhs->rhs->lhs, &g = f->lhs->rhs->rhs;
      if (!equal(a, f->rhs->lhs->lhs) || !equal(b, f->rhs->lhs->rhs)) return no;
      if (!equal(a, f->rhs->rhs->lhs) || !equal(g, f->rhs->rhs->rhs)) return no;
      return binding_of(id, {{"alpha", to_string(a)},
                             {"beta", to_string(b)},
                             {"gamma", to_string(g)}});
    }
    case AxiomId::Ax3: {  // (~b -> ~a) -> ((~b -> a) -> b)
      if (!kind_is(f, K::Imp) || !kind_is(f->lhs, K::Imp) || !kind_is(f->lhs->lhs, K::Neg) ||
          !kind_is(f->lhs->rhs, K::Neg) || !kind_is(f->rhs, K::Imp) ||
          !kind_is(f->rhs->lhs, K::Imp) || !kind_is(f->rhs->lhs->lhs, K::Neg))
        return no;
      const FormulaPtr &b = f->lhs->lhs->lhs, &a = f->lhs->rhs->lhs;
      if (!equal(b, f->rhs->lhs->lhs->lhs) || !equal(a, f->rhs->lhs->rhs)) return no;
      if (!equal(b, f->rhs->rhs)) return no;
      return binding_of(id, {{"alpha", to_string(a)}, {"beta", to_string(b)}});
    }
    case AxiomId::Ax4: {  // forall x. alpha -> alpha[x/tau], tau free for x
      if (!kind_is(f, K::Imp) || !kind_is(f->lhs, K::Forall)) return no;
      const std::string& x = f->lhs->var;
      const FormulaPtr &alpha = f->lhs->lhs, &beta = f->rhs;
      if (!free_vars(alpha).count(x)) {
        if (!equal(alpha, beta)) return no;
        return binding_of(id, {{"x", x}, {"alpha", to_string(alpha)}, {"tau", "irrelevant"}});
      }
      std::set<std::string> bound;
      std::optional<TermPtr> tau;
      if (!detail::recover_rec(alpha, beta, x, bound, tau) || !tau) return no;
      if (!is_free_for(*tau, x, alpha)) return no;
      if (!equal(substitute(alpha, x, *tau), beta)) return no;
      return binding_of(id, {{"x", x}, {"alpha", to_string(alpha)}, {"tau", to_string(*tau)}});
    }
    case AxiomId::Ax5: {  // forall x.(a -> b) -> (a -> forall x. b), x not free in a
      if (!kind_is(f, K::Imp) || !kind_is(f->lhs, K::Forall) || !kind_is(f->lhs->lhs, K::Imp) ||
          !kind_is(f->rhs, K::Imp) || !kind_is(f->rhs->rhs, K::Forall))
        return no;
      const std::string& x = f->lhs->var;
      if (f->rhs->rhs->var != x) return no;
      const FormulaPtr &a = f->lhs->lhs->lhs, &b = f->lhs->lhs->rhs;
      if (!equal(a, f->rhs->lhs) || !equal(b, f->rhs->rhs->lhs)) return no;
      if (free_vars(a).count(x)) return no;
      return binding_of(id, {{"x", x}, {"alpha", to_string(a)}, {"beta", to_string(b)}});
    }
    case AxiomId::Ax6: {  // alpha -> beta, alpha a variant of beta
      if (!kind_is(f, K::Imp)) return no;
      if (!is_variant(f->lhs, f->rhs)) return no;
      return binding_of(id, {{"alpha", to_string(f->lhs)}, {"beta", to_string(f->rhs)}});
    }
    case AxiomId::Ax7: {  // forall x. (x = x), either identity kind
      if (!kind_is(f, K::Forall) || !kind_is(f->lhs, K::Identity)) return no;
      const FormulaPtr& body = f->lhs;
      if (!detail::is_variable(body->terms[0]) || !detail::is_variable(body->terms[1])) return no;
      if (body->terms[0]->name != f->var || body->terms[1]->name != f->var) return no;
      return binding_of(id, {{"x", f->var}});
    }
    case AxiomId::Ax8: {  // (x = y) -> (alpha -> alpha[x wr y]), y free for x
      if (!kind_is(f, K::Imp) || !kind_is(f->lhs, K::Identity) || !kind_is(f->rhs, K::Imp))
        return no;
      const FormulaPtr& id_atom = f->lhs;
      if (!detail::is_variable(id_atom->terms[0]) || !detail::is_variable(id_atom->terms[1]))
        return no;
      const std::string &x = id_atom->terms[0]->name, &y = id_atom->terms[1]->name;
      const FormulaPtr &alpha = f->rhs->lhs, &alpha_xy = f->rhs->rhs;
      if (!is_partial_replacement(alpha, alpha_xy, x, y)) return no;
      if (!is_free_for(Term::variable(y), x, alpha)) return no;
      return binding_of(id, {{"x", x}, {"y", y}, {"alpha", to_string(alpha)}});
    }
    case AxiomId::NecId: {  // (x = y) -> [](x = y), rigid identity
      if (!kind_is(f, K::Imp) || !kind_is(f->lhs, K::Identity) || !kind_is(f->rhs, K::Box) ||
          !kind_is(f->rhs->lhs, K::Identity))
        return no;
      const FormulaPtr &l = f->lhs, &r = f->rhs->lhs;
      if (l->id_kind != IdentityKind::Necessary || r->id_kind != IdentityKind::Necessary)
        return no;
      if (!detail::is_variable(l->terms[0]) || !detail::is_variable(l->terms[1])) return no;
      if (!equal(l->terms[0], r->terms[0]) || !equal(l->terms[1], r->terms[1])) return no;
      return binding_of(id, {{"x", l->terms[0]->name}, {"y", l->terms[1]->name}});
    }
    case AxiomId::PosNotId: {  // ~(x = y) -> []~(x = y), rigid identity
      if (!kind_is(f, K::Imp) || !kind_is(f->lhs, K::Neg) || !kind_is(f->lhs->lhs, K::Identity) ||
          !kind_is(f->rhs, K::Box) || !kind_is(f->rhs->lhs, K::Neg) ||
          !kind_is(f->rhs->lhs->lhs, K::Identity))
        return no;
      const FormulaPtr &l = f->lhs->lhs, &r = f->rhs->lhs->lhs;
      if (l->id_kind != IdentityKind::Necessary || r->id_kind != IdentityKind::Necessary)
        return no;
      if (!detail::is_variable(l->terms[0]) || !detail::is_variable(l->terms[1])) return no;
      if (!equal(l->terms[0], r->terms[0]) || !equal(l->terms[1], r->terms[1])) return no;
      return binding_of(id, {{"x", l->terms[0]->name}, {"y", l->terms[1]->name}});
    }
    case AxiomId::ContId1: {  // ~[](x =c y)
      if (!kind_is(f, K::Neg) || !kind_is(f->lhs, K::Box) || !kind_is(f->lhs->lhs, K::Identity))
        return no;
      const FormulaPtr& id_atom = f->lhs->lhs;
      if (id_atom->id_kind != IdentityKind::Contingent) return no;
      if (!detail::is_variable(id_atom->terms[0]) || !detail::is_variable(id_atom->terms[1]))
        return no;
      return binding_of(id, {{"x", id_atom->terms[0]->name}, {"y", id_atom->terms[1]->name}});
    }
    case AxiomId::ContId2: {  // ~[]~(x =c y)
      if (!kind_is(f, K::Neg) || !kind_is(f->lhs, K::Box) || !kind_is(f->lhs->lhs, K::Neg) ||
          !kind_is(f->lhs->lhs->lhs, K::Identity))
        return no;
      const FormulaPtr& id_atom = f->lhs->lhs->lhs;
      if (id_atom->id_kind != IdentityKind::Contingent) return no;
      if (!detail::is_variable(id_atom->terms[0]) || !detail::is_variable(id_atom->terms[1]))
        return no;
      return binding_of(id, {{"x", id_atom->terms[0]->name}, {"y", id_atom->terms[1]->name}});
    }
    case AxiomId::K: {  // [](a -> b) -> ([]a -> []b)
      if (!kind_is(f, K::Imp) || !kind_is(f->lhs, K::Box) || !kind_is(f->lhs->lhs, K::Imp) ||
          !kind_is(f->rhs, K::Imp) || !kind_is(f->rhs->lhs, K::Box) ||
          !kind_is(f->rhs->rhs, K::Box))
        return no;
      const FormulaPtr &a = f->lhs->lhs->lhs, &b = f->lhs->lhs->rhs;
      if (!equal(a, f->rhs->lhs->lhs) || !equal(b, f->rhs->rhs->lhs)) return no;
      return binding_of(id, {{"alpha", to_string(a)}, {"beta", to_string(b)}});
    }
    case AxiomId::K1: {  // [](a -> b) -> (<>a -> <>b)
      if (!kind_is(f, K::Imp) || !kind_is(f->lhs, K::Box) || !kind_is(f->lhs->lhs, K::Imp) ||
          !kind_is(f->rhs, K::Imp))
        return no;
      FormulaPtr da = diamond_body(f->rhs->lhs), db = diamond_body(f->rhs->rhs);
      if (!da || !db) return no;
      const FormulaPtr &a = f->lhs->lhs->lhs, &b = f->lhs->lhs->rhs;
      if (!equal(a, da) || !equal(b, db)) return no;
      return binding_of(id, {{"alpha", to_string(a)}, {"beta", to_string(b)}});
    }
    case AxiomId::K2: {  // <>(a -> b) -> ([]a -> <>b)
      if (!kind_is(f, K::Imp) || !kind_is(f->rhs, K::Imp) || !kind_is(f->rhs->lhs, K::Box))
        return no;
      FormulaPtr dab = diamond_body(f->lhs), db = diamond_body(f->rhs->rhs);
      if (!dab || !db || !kind_is(dab, K::Imp)) return no;
      if (!equal(dab->lhs, f->rhs->lhs->lhs) || !equal(dab->rhs, db)) return no;
      return binding_of(id,
                        {{"alpha", to_string(dab->lhs)}, {"beta", to_string(dab->rhs)}});
    }
    case AxiomId::M1: {  // []~a -> [](a -> b)
      if (!kind_is(f, K::Imp) || !kind_is(f->lhs, K::Box) || !kind_is(f->lhs->lhs, K::Neg) ||
          !kind_is(f->rhs, K::Box) || !kind_is(f->rhs->lhs, K::Imp))
        return no;
      const FormulaPtr& a = f->lhs->lhs->lhs;
      if (!equal(a, f->rhs->lhs->lhs)) return no;
      return binding_of(id, {{"alpha", to_string(a)}, {"beta", to_string(f->rhs->lhs->rhs)}});
    }
    case AxiomId::M2: {  // []b -> [](a -> b)
      if (!kind_is(f, K::Imp) || !kind_is(f->lhs, K::Box) || !kind_is(f->rhs, K::Box) ||
          !kind_is(f->rhs->lhs, K::Imp))
        return no;
      const FormulaPtr& b = f->lhs->lhs;
      if (!equal(b, f->rhs->lhs->rhs)) return no;
      return binding_of(id, {{"alpha", to_string(f->rhs->lhs->lhs)}, {"beta", to_string(b)}});
    }
    case AxiomId::M3: {  // <>b -> <>(a -> b)
      if (!kind_is(f, K::Imp)) return no;
      FormulaPtr b = diamond_body(f->lhs), ab = diamond_body(f->rhs);
      if (!b || !ab || !kind_is(ab, K::Imp)) return no;
      if (!equal(b, ab->rhs)) return no;
      return binding_of(id, {{"alpha", to_string(ab->lhs)}, {"beta", to_string(b)}});
    }
    case AxiomId::M4: {  // <>~a -> <>(a -> b)
      if (!kind_is(f, K::Imp)) return no;
      FormulaPtr na = diamond_body(f->lhs), ab = diamond_body(f->rhs);
      if (!na || !ab || !kind_is(na, K::Neg) || !kind_is(ab, K::Imp)) return no;
      if (!equal(na->lhs, ab->lhs)) return no;
      return binding_of(id, {{"alpha", to_string(ab->lhs)}, {"beta", to_string(ab->rhs)}});
    }
    case AxiomId::T: {  // []a -> a
      if (!kind_is(f, K::Imp) || !kind_is(f->lhs, K::Box)) return no;
      if (!equal(f->lhs->lhs, f->rhs)) return no;
      return binding_of(id, {{"alpha", to_string(f->rhs)}});
    }
    case AxiomId::D: {  // []a -> <>a
      if (!kind_is(f, K::Imp) || !kind_is(f->lhs, K::Box)) return no;
      FormulaPtr a = diamond_body(f->rhs);
      if (!a || !equal(f->lhs->lhs, a)) return no;
      return binding_of(id, {{"alpha", to_string(a)}});
    }
    case AxiomId::DN1: {  // []a -> []~~a
      if (!kind_is(f, K::Imp) || !kind_is(f->lhs, K::Box) || !kind_is(f->rhs, K::Box) ||
          !kind_is(f->rhs->lhs, K::Neg) || !kind_is(f->rhs->lhs->lhs, K::Neg))
        return no;
      if (!equal(f->lhs->lhs, f->rhs->lhs->lhs->lhs)) return no;
      return binding_of(id, {{"alpha", to_string(f->lhs->lhs)}});
    }
    case AxiomId::DN2: {  // []~~a -> []a
      if (!kind_is(f, K::Imp) || !kind_is(f->lhs, K::Box) || !kind_is(f->lhs->lhs, K::Neg) ||
          !kind_is(f->lhs->lhs->lhs, K::Neg) || !kind_is(f->rhs, K::Box))
        return no;
      if (!equal(f->lhs->lhs->lhs->lhs, f->rhs->lhs)) return no;
      return binding_of(id, {{"alpha", to_string(f->rhs->lhs)}});
    }
    case AxiomId::Four: {  // []a -> [][]a
      if (!kind_is(f, K::Imp) || !kind_is(f->lhs, K::Box) || !kind_is(f->rhs, K::Box) ||
          !kind_is(f->rhs->lhs, K::Box))
        return no;
      if (!equal(f->lhs->lhs, f->rhs->lhs->lhs)) return no;
      return binding_of(id, {{"alpha", to_string(f->lhs->lhs)}});
    }
    case AxiomId::Five: {  // <>[]a -> []a
      if (!kind_is(f, K::Imp) || !kind_is(f->rhs, K::Box)) return no;
      FormulaPtr ba = diamond_body(f->lhs);
      if (!ba || !kind_is(ba, K::Box)) return no;
      if (!equal(ba->lhs, f->rhs->lhs)) return no;
      return binding_of(id, {{"alpha", to_string(f->rhs->lhs)}});
    }
    case AxiomId::BF: {  // forall x. []a -> []forall x. a
      if (!kind_is(f, K::Imp) || !kind_is(f->lhs, K::Forall) || !kind_is(f->lhs->lhs, K::Box) ||
          !kind_is(f->rhs, K::Box) || !kind_is(f->rhs->lhs, K::Forall))
        return no;
      if (f->lhs->var != f->rhs->lhs->var) return no;
      if (!equal(f->lhs->lhs->lhs, f->rhs->lhs->lhs)) return no;
      return binding_of(id, {{"x", f->lhs->var}, {"alpha", to_string(f->lhs->lhs->lhs)}});
    }
    case AxiomId::CBF: {  // []forall x. a -> forall x. []a
      if (!kind_is(f, K::Imp) || !kind_is(f->lhs, K::Box) || !kind_is(f->lhs->lhs, K::Forall) ||
          !kind_is(f->rhs, K::Forall) || !kind_is(f->rhs->lhs, K::Box))
        return no;
      if (f->lhs->lhs->var != f->rhs->var) return no;
      if (!equal(f->lhs->lhs->lhs, f->rhs->lhs->lhs)) return no;
      return binding_of(id, {{"x", f->rhs->var}, {"alpha", to_string(f->rhs->lhs->lhs)}});
    }
    case AxiomId::NBF: {  // forall x. <>a -> <>forall x. a
      if (!kind_is(f, K::Imp) || !kind_is(f->lhs, K::Forall)) return no;
      FormulaPtr da = diamond_body(f->lhs->lhs), dfa = diamond_body(f->rhs);
      if (!da || !dfa || !kind_is(dfa, K::Forall)) return no;
      if (f->lhs->var != dfa->var) return no;
      if (!equal(da, dfa->lhs)) return no;
      return binding_of(id, {{"x", f->lhs->var}, {"alpha", to_string(da)}});
    }
    case AxiomId::PBF: {  // <>forall x. a -> forall x. <>a
      if (!kind_is(f, K::Imp) || !kind_is(f->rhs, K::Forall)) return no;
      FormulaPtr dfa = diamond_body(f->lhs), da = diamond_body(f->rhs->lhs);
      if (!dfa || !da || !kind_is(dfa, K::Forall)) return no;
      if (dfa->var != f->rhs->var) return no;
      if (!equal(dfa->lhs, da)) return no;
      return binding_of(id, {{"x", f->rhs->var}, {"alpha", to_string(da)}});
    }
  }
  return no;
}

// Convenience mode: try every schema of the system in registry order.
inline std::optional<AxiomMatch> match_any_axiom(const FormulaPtr& f, const System& sys) {
  for (AxiomId id : all_axioms()) {
    if (!axiom_in_system(id, sys)) continue;
    if (auto m = match_axiom(f, id)) return m;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Derivations

enum class StepRule : std::uint8_t { Axiom, Premise, MP, Gen };

struct Step {
  FormulaPtr formula;
  StepRule rule = StepRule::Axiom;
  std::optional<AxiomId> axiom;  // Axiom: absent means "try every schema"
  int premise_index = -1;        // Premise
  int from_i = -1;               // MP first citation; Gen source
  int from_j = -1;               // MP second citation
  std::string gen_var;           // Gen: empty means "read off the binder"
};

struct Derivation {
  std::string system_name = "tm";
  std::vector<FormulaPtr> premises;
  std::vector<Step> steps;
};

struct StepVerdict {
  bool ok = false;
  std::string description;  // rule rendering, e.g. "axiom T" or "mp 1, 0"
  std::string reason;       // failure reason
  std::optional<AxiomMatch> match;
};

struct PremiseLedger {
  std::string premise;                  // printed formula
  std::set<std::string> free_variables;
  std::set<std::string> generalized;    // quantified by Gen downstream of uses
  bool dmt_applicable = true;           // generalized does not meet the free variables
};

struct CheckReport {
  bool accepted = false;
  int failed_step = -1;   // index of the first failing step; -1 when accepted
  std::string reason;     // failure reason, empty when accepted
  std::vector<StepVerdict> steps;
  std::vector<PremiseLedger> premises;
  std::string conclusion;  // printed last formula when accepted
};

// Verify every step and assemble the deduction-metatheorem ledger: for each
// premise, the set of variables that some generalization step quantifies
// downstream of a use of that premise.  The ledger reports, never rejects —
// the derivation notion is the usual Hilbert one.
inline CheckReport check_derivation(const Derivation& d, const System& sys) {
  CheckReport report;
  report.premises.reserve(d.premises.size());
  for (const FormulaPtr& p : d.premises) {
    PremiseLedger ledger;
    ledger.premise = to_string(p);
    ledger.free_variables = free_vars(p);
    report.premises.push_back(std::move(ledger));
  }

  // Which premises each step transitively uses.
  std::vector<std::set<int>> uses(d.steps.size());

  auto fail = [&](std::size_t k, std::string reason) {
    report.steps.back().reason = reason;
    report.accepted = false;
    report.failed_step = static_cast<int>(k);
    report.reason = std::move(reason);
  };

  for (std::size_t k = 0; k < d.steps.size(); ++k) {
    const Step& step = d.steps[k];
    StepVerdict verdict;

    auto cites_earlier = [&](int i) { return i >= 0 && static_cast<std::size_t>(i) < k; };

    switch (step.rule) {
      case StepRule::Axiom: {
        if (step.axiom) {
          verdict.description = "axiom " + std::string(axiom_name(*step.axiom));
          report.steps.push_back(verdict);
          if (!axiom_in_system(*step.axiom, sys)) {
            fail(k, "schema " + std::string(axiom_name(*step.axiom)) +
                        " is not part of system " + sys.name);
            return report;
          }
          auto m = match_axiom(step.formula, *step.axiom);
          if (!m) {
            fail(k, "formula is not an instance of schema " +
                        std::string(axiom_name(*step.axiom)));
            return report;
          }
          report.steps.back().match = std::move(m);
        } else {
          verdict.description = "axiom";
          report.steps.push_back(verdict);
          auto m = match_any_axiom(step.formula, sys);
          if (!m) {
            fail(k, "formula matches no axiom schema of system " + sys.name);
            return report;
          }
          report.steps.back().description =
              "axiom " + std::string(axiom_name(m->axiom));
          report.steps.back().match = std::move(m);
        }
        break;
      }
      case StepRule::Premise: {
        verdict.description = "premise " + std::to_string(step.premise_index);
        report.steps.push_back(verdict);
        if (step.premise_index < 0 ||
            static_cast<std::size_t>(step.premise_index) >= d.premises.size()) {
          fail(k, "premise index " + std::to_string(step.premise_index) + " is out of range");
          return report;
        }
        if (!equal(step.formula, d.premises[step.premise_index])) {
          fail(k, "step formula differs from premise " + std::to_string(step.premise_index));
          return report;
        }
        uses[k].insert(step.premise_index);
        break;
      }
      case StepRule::MP: {
        verdict.description =
            "mp " + std::to_string(step.from_i) + ", " + std::to_string(step.from_j);
        report.steps.push_back(verdict);
        if (!cites_earlier(step.from_i) || !cites_earlier(step.from_j)) {
          fail(k, "modus ponens must cite two earlier steps");
          return report;
        }
        auto applies = [&](const FormulaPtr& minor, const FormulaPtr& major) {
          return major->kind == FormulaKind::Imp && equal(major->lhs, minor) &&
                 equal(major->rhs, step.formula);
        };
        const FormulaPtr &fi = d.steps[step.from_i].formula, &fj = d.steps[step.from_j].formula;
        if (!applies(fi, fj) && !applies(fj, fi)) {
          fail(k, "modus ponens over steps " + std::to_string(step.from_i) + " and " +
                      std::to_string(step.from_j) + " does not yield this formula");
          return report;
        }
        uses[k].insert(uses[step.from_i].begin(), uses[step.from_i].end());
        uses[k].insert(uses[step.from_j].begin(), uses[step.from_j].end());
        break;
      }
      case StepRule::Gen: {
        report.steps.push_back(verdict);
        if (!cites_earlier(step.from_i)) {
          report.steps.back().description = "gen " + std::to_string(step.from_i);
          fail(k, "generalization must cite an earlier step");
          return report;
        }
        if (step.formula->kind != FormulaKind::Forall) {
          report.steps.back().description = "gen " + std::to_string(step.from_i);
          fail(k, "generalization must derive a universally quantified formula");
          return report;
        }
        std::string x = step.gen_var.empty() ? step.formula->var : step.gen_var;
        report.steps.back().description = "gen " + std::to_string(step.from_i) + ", " + x;
        if (step.formula->var != x) {
          fail(k, "generalization quantifies " + step.formula->var + ", not " + x);
          return report;
        }
        if (!equal(step.formula->lhs, d.steps[step.from_i].formula)) {
          fail(k, "generalization body differs from step " + std::to_string(step.from_i));
          return report;
        }
        uses[k] = uses[step.from_i];
        for (int p : uses[k]) {
          report.premises[p].generalized.insert(x);
          if (report.premises[p].free_variables.count(x))
            report.premises[p].dmt_applicable = false;
        }
        break;
      }
    }
    report.steps.back().ok = true;
  }

  if (d.steps.empty()) {
    report.accepted = false;
    report.reason = "derivation has no steps";
    return report;
  }

  report.accepted = true;
  report.conclusion = to_string(d.steps.back().formula);
  return report;
}

// ---------------------------------------------------------------------------
// JSON reading and report rendering

// Formulas inside derivation documents read undeclared identifiers in term
// position as variables: free variables are the normal currency of Hilbert
// derivations (generalization binds them), and a schema such as N= only
// fits variable arguments.
inline Derivation derivation_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw proof_error("derivation document must be a JSON object");
  Derivation d;
  ParseOptions opts;
  opts.undeclared_terms = UndeclaredTerms::Variable;

  if (j.contains("system")) {
    if (!j.at("system").is_string()) throw proof_error("\"system\" must be a system name");
    d.system_name = j.at("system").get<std::string>();
  }
  auto parse = [&](const std::string& text, const std::string& where) {
    try {
      return parse_formula(text, {}, opts);
    } catch (const parse_error& e) {
      throw proof_error(where + ": " + e.what());
    }
  };
  if (j.contains("premises")) {
    if (!j.at("premises").is_array()) throw proof_error("\"premises\" must be a list");
    for (const nlohmann::json& p : j.at("premises")) {
      if (!p.is_string()) throw proof_error("premises must be formula strings");
      d.premises.push_back(
          parse(p.get<std::string>(), "premise " + std::to_string(d.premises.size())));
    }
  }
  if (!j.contains("steps") || !j.at("steps").is_array())
    throw proof_error("derivation document needs a \"steps\" list");

  for (const nlohmann::json& js : j.at("steps")) {
    const std::string where = "step " + std::to_string(d.steps.size());
    if (!js.is_object() || !js.contains("formula") || !js.contains("rule"))
      throw proof_error(where + ": each step needs \"formula\" and \"rule\"");
    if (!js.at("formula").is_string() || !js.at("rule").is_string())
      throw proof_error(where + ": \"formula\" and \"rule\" must be strings");

    Step step;
    step.formula = parse(js.at("formula").get<std::string>(), where);
    const std::string rule = js.at("rule").get<std::string>();
    nlohmann::json args = js.contains("args") ? js.at("args") : nlohmann::json::array();
    if (!args.is_array()) throw proof_error(where + ": \"args\" must be a list");

    auto int_arg = [&](std::size_t i) {
      if (i >= args.size() || !args[i].is_number_integer())
        throw proof_error(where + ": argument " + std::to_string(i) +
                          " must be a step or premise index");
      return args[i].get<int>();
    };

    if (rule == "axiom") {
      step.rule = StepRule::Axiom;
      if (!args.empty()) {
        if (!args[0].is_string()) throw proof_error(where + ": axiom name must be a string");
        auto id = parse_axiom_name(args[0].get<std::string>());
        if (!id) throw proof_error(where + ": unknown axiom schema '" +
                                   args[0].get<std::string>() + "'");
        step.axiom = *id;
      }
    } else if (rule == "premise") {
      step.rule = StepRule::Premise;
      step.premise_index = int_arg(0);
    } else if (rule == "mp") {
      step.rule = StepRule::MP;
      step.from_i = int_arg(0);
      step.from_j = int_arg(1);
    } else if (rule == "gen") {
      step.rule = StepRule::Gen;
      step.from_i = int_arg(0);
      if (args.size() > 1) {
        if (!args[1].is_string()) throw proof_error(where + ": the generalized variable must "
                                                            "be a string");
        step.gen_var = args[1].get<std::string>();
      }
    } else {
      throw proof_error(where + ": unknown rule '" + rule +
                        "' (expected axiom, premise, mp or gen)");
    }
    d.steps.push_back(std::move(step));
  }
  return d;
}

inline nlohmann::json report_to_json(const Derivation& d, const CheckReport& r) {
  nlohmann::json out;
  out["accepted"] = r.accepted;
  if (r.accepted) {
    out["conclusion"] = r.conclusion;
  } else {
    out["failed_step"] = r.failed_step;
    out["reason"] = r.reason;
  }
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t k = 0; k < r.steps.size(); ++k) {
    nlohmann::json js;
    js["formula"] = to_string(d.steps[k].formula);
    js["rule"] = r.steps[k].description;
    js["ok"] = r.steps[k].ok;
    if (!r.steps[k].ok) js["reason"] = r.steps[k].reason;
    if (r.steps[k].match && !r.steps[k].match->binding.empty()) {
      nlohmann::json binding;
      for (const auto& [name, value] : r.steps[k].match->binding) binding[name] = value;
      js["binding"] = std::move(binding);
    }
    steps.push_back(std::move(js));
  }
  out["steps"] = std::move(steps);
  nlohmann::json premises = nlohmann::json::array();
  for (const PremiseLedger& ledger : r.premises) {
    nlohmann::json jp;
    jp["premise"] = ledger.premise;
    jp["generalized"] = std::vector<std::string>(ledger.generalized.begin(),
                                                 ledger.generalized.end());
    jp["dmt_applicable"] = ledger.dmt_applicable;
    premises.push_back(std::move(jp));
  }
  out["premises"] = std::move(premises);
  return out;
}

inline std::string report_to_text(const Derivation& d, const CheckReport& r) {
  std::string out;
  for (std::size_t k = 0; k < r.steps.size(); ++k) {
    out += std::to_string(k) + ". " + to_string(d.steps[k].formula) + "   [" +
           r.steps[k].description + "]";
    if (!r.steps[k].ok) out += "   REJECTED: " + r.steps[k].reason;
    out += "\n";
  }
  if (r.accepted) {
    out += "accepted: " + r.conclusion + "\n";
  } else {
    out += "rejected";
    if (r.failed_step >= 0) out += " at step " + std::to_string(r.failed_step);
    out += ": " + r.reason + "\n";
  }
  for (const PremiseLedger& ledger : r.premises) {
    out += "premise " + ledger.premise + ": ";
    if (ledger.generalized.empty()) {
      out += "no variables generalized";
    } else {
      out += "generalized";
      for (const std::string& x : ledger.generalized) out += " " + x;
    }
    out += "; deduction metatheorem ";
    out += ledger.dmt_applicable ? "applicable" : "blocked";
    out += "\n";
  }
  return out;
}

}  // namespace nmodal
