// First-order modal language: signatures, terms, formulas, a parser and
// printer for the ASCII grammar, substitution with capture checking, variant
// equivalence (bound renaming + void quantifiers) and alpha-normalization.
//
// Grammar:  ~ negation, [] box, <> diamond, -> implication (right-assoc),
// & conjunction, | disjunction, forall x. / exists x. (scope extends
// maximally right), = necessary identity, =c contingent identity, =! the
// defined necessitated identity.  Precedence: unary > & > | > ->.

#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nmodal {

struct parse_error : std::runtime_error {
  parse_error(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at offset " + std::to_string(position)),
        position(position) {}
  std::size_t position;
};

struct substitution_error : std::logic_error {
  using std::logic_error::logic_error;
};

// ---------------------------------------------------------------------------
// Signature

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return s != "forall" && s != "exists";
}

// Declared non-logical symbols.  The identity predicates are built into the
// formula syntax (they are not declarable names).
class Signature {
public:
  void add_predicate(const std::string& name, int arity) {
    require_fresh(name);
    if (arity < 1) throw std::invalid_argument("predicate arity must be >= 1: " + name);
    predicates_[name] = arity;
  }
  void add_function(const std::string& name, int arity) {
    require_fresh(name);
    if (arity < 1) throw std::invalid_argument("function arity must be >= 1: " + name);
    functions_[name] = arity;
  }
  void add_constant(const std::string& name) {
    require_fresh(name);
    constants_.insert(name);
  }

  std::optional<int> predicate_arity(const std::string& name) const {
    auto it = predicates_.find(name);
    if (it == predicates_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<int> function_arity(const std::string& name) const {
    auto it = functions_.find(name);
    if (it == functions_.end()) return std::nullopt;
    return it->second;
  }
  bool is_constant(const std::string& name) const { return constants_.count(name) > 0; }
  bool declares(const std::string& name) const {
    return predicates_.count(name) || functions_.count(name) || constants_.count(name);
  }

  const std::map<std::string, int>& predicates() const { return predicates_; }
  const std::map<std::string, int>& functions() const { return functions_; }
  const std::set<std::string>& constants() const { return constants_; }

private:
  void require_fresh(const std::string& name) {
    if (!is_identifier(name))
      throw std::invalid_argument("not a valid symbol name: '" + name + "'");
    if (declares(name)) throw std::invalid_argument("symbol already declared: " + name);
  }

  std::map<std::string, int> predicates_;
  std::map<std::string, int> functions_;
  std::set<std::string> constants_;
};

// ---------------------------------------------------------------------------
// Terms

enum class TermKind : std::uint8_t { Variable, Constant, Function, Element };

class Term;
using TermPtr = std::shared_ptr<const Term>;

// Immutable term tree.  Element terms denote universe elements directly; they
// are produced internally when formulas are grounded over a structure and
// print as #k.
class Term {
public:
  TermKind kind;
  std::string name;           // variable / constant / function symbol
  std::vector<TermPtr> args;  // Function only
  int element_index = -1;     // Element only

  static TermPtr variable(std::string name) {
    return std::make_shared<Term>(Term{TermKind::Variable, std::move(name), {}, -1});
  }
  static TermPtr constant(std::string name) {
    return std::make_shared<Term>(Term{TermKind::Constant, std::move(name), {}, -1});
  }
  static TermPtr function(std::string name, std::vector<TermPtr> args) {
    return std::make_shared<Term>(Term{TermKind::Function, std::move(name), std::move(args), -1});
  }
  static TermPtr element(int index) {
    return std::make_shared<Term>(Term{TermKind::Element, {}, {}, index});
  }
};

inline bool equal(const TermPtr& a, const TermPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind || a->name != b->name || a->element_index != b->element_index ||
      a->args.size() != b->args.size())
    return false;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!equal(a->args[i], b->args[i])) return false;
  return true;
}

inline void collect_term_vars(const TermPtr& t, std::set<std::string>& out) {
  if (t->kind == TermKind::Variable) out.insert(t->name);
  for (const TermPtr& a : t->args) collect_term_vars(a, out);
}

inline std::set<std::string> term_vars(const TermPtr& t) {
  std::set<std::string> out;
  collect_term_vars(t, out);
  return out;
}

inline bool term_is_closed(const TermPtr& t) {
  if (t->kind == TermKind::Variable) return false;
  for (const TermPtr& a : t->args)
    if (!term_is_closed(a)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Formulas

enum class FormulaKind : std::uint8_t { Atom, Identity, Neg, Box, Imp, Forall };
enum class IdentityKind : std::uint8_t { Necessary, Contingent };

// Presentation-only tags recording which abbreviation produced a node; they
// drive the printer and are ignored by structural equality.
enum class Sugar : std::uint8_t { None, Diamond, Or, And, Exists, NecessaryIdentity };

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Immutable formula tree.  Derived connectives are stored expanded:
// <>a = ~[]~a,  a|b = ~a->b,  a&b = ~(a->~b),  exists x.a = ~forall x.~a,
// strict implication = [](a->b),  t =! u  =  [](t = u).
class Formula {
public:
  FormulaKind kind;
  Sugar sugar = Sugar::None;

  std::string predicate;        // Atom
  std::vector<TermPtr> terms;   // Atom arguments; Identity stores {lhs, rhs}
  IdentityKind id_kind = IdentityKind::Necessary;  // Identity

  FormulaPtr lhs;               // Neg/Box/Forall child; Imp antecedent
  FormulaPtr rhs;               // Imp consequent
  std::string var;              // Forall binder

  static FormulaPtr atom(std::string predicate, std::vector<TermPtr> args = {}) {
    auto f = std::make_shared<Formula>();
    f->kind = FormulaKind::Atom;
    f->predicate = std::move(predicate);
    f->terms = std::move(args);
    return f;
  }
  static FormulaPtr identity(IdentityKind k, TermPtr a, TermPtr b) {
    auto f = std::make_shared<Formula>();
    f->kind = FormulaKind::Identity;
    f->id_kind = k;
    f->terms = {std::move(a), std::move(b)};
    return f;
  }
  static FormulaPtr neg(FormulaPtr a, Sugar s = Sugar::None) {
    auto f = std::make_shared<Formula>();
    f->kind = FormulaKind::Neg;
    f->sugar = s;
    f->lhs = std::move(a);
    return f;
  }
  static FormulaPtr box(FormulaPtr a, Sugar s = Sugar::None) {
    auto f = std::make_shared<Formula>();
    f->kind = FormulaKind::Box;
    f->sugar = s;
    f->lhs = std::move(a);
    return f;
  }
  static FormulaPtr imp(FormulaPtr a, FormulaPtr b, Sugar s = Sugar::None) {
    auto f = std::make_shared<Formula>();
    f->kind = FormulaKind::Imp;
    f->sugar = s;
    f->lhs = std::move(a);
    f->rhs = std::move(b);
    return f;
  }
  static FormulaPtr forall(std::string var, FormulaPtr body) {
    auto f = std::make_shared<Formula>();
    f->kind = FormulaKind::Forall;
    f->var = std::move(var);
    f->lhs = std::move(body);
    return f;
  }

  // Abbreviations, stored expanded.
  static FormulaPtr diamond(FormulaPtr a) { return neg(box(neg(std::move(a))), Sugar::Diamond); }
  static FormulaPtr disj(FormulaPtr a, FormulaPtr b) {
    return imp(neg(std::move(a)), std::move(b), Sugar::Or);
  }
  static FormulaPtr conj(FormulaPtr a, FormulaPtr b) {
    return neg(imp(std::move(a), neg(std::move(b))), Sugar::And);
  }
  static FormulaPtr exists(std::string var, FormulaPtr a) {
    return neg(forall(std::move(var), neg(std::move(a))), Sugar::Exists);
  }
  static FormulaPtr strict_imp(FormulaPtr a, FormulaPtr b) {
    return box(imp(std::move(a), std::move(b)));
  }
  static FormulaPtr nec_identity(TermPtr a, TermPtr b) {
    return box(identity(IdentityKind::Necessary, std::move(a), std::move(b)),
               Sugar::NecessaryIdentity);
  }
};

inline bool equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case FormulaKind::Atom: {
      if (a->predicate != b->predicate || a->terms.size() != b->terms.size()) return false;
      for (std::size_t i = 0; i < a->terms.size(); ++i)
        if (!equal(a->terms[i], b->terms[i])) return false;
      return true;
    }
    case FormulaKind::Identity:
      return a->id_kind == b->id_kind && equal(a->terms[0], b->terms[0]) &&
             equal(a->terms[1], b->terms[1]);
    case FormulaKind::Neg:
    case FormulaKind::Box:
      return equal(a->lhs, b->lhs);
    case FormulaKind::Imp:
      return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
    case FormulaKind::Forall:
      return a->var == b->var && equal(a->lhs, b->lhs);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Free variables and occurrence checks

namespace detail {

inline void free_vars_rec(const FormulaPtr& f, std::set<std::string>& bound,
                          std::set<std::string>& out) {
  switch (f->kind) {
    case FormulaKind::Atom:
    case FormulaKind::Identity: {
      std::set<std::string> vars;
      for (const TermPtr& t : f->terms) collect_term_vars(t, vars);
      for (const std::string& v : vars)
        if (!bound.count(v)) out.insert(v);
      return;
    }
    case FormulaKind::Neg:
    case FormulaKind::Box:
      free_vars_rec(f->lhs, bound, out);
      return;
    case FormulaKind::Imp:
      free_vars_rec(f->lhs, bound, out);
      free_vars_rec(f->rhs, bound, out);
      return;
    case FormulaKind::Forall: {
      bool inserted = bound.insert(f->var).second;
      free_vars_rec(f->lhs, bound, out);
      if (inserted) bound.erase(f->var);
      return;
    }
  }
}

}  // namespace detail

inline std::set<std::string> free_vars(const FormulaPtr& f) {
  std::set<std::string> bound, out;
  detail::free_vars_rec(f, bound, out);
  return out;
}

inline bool occurs_free(const FormulaPtr& f, const std::string& x) {
  return free_vars(f).count(x) > 0;
}

inline bool is_sentence(const FormulaPtr& f) { return free_vars(f).empty(); }

// True iff substituting t for every free occurrence of x in f would not bind
// any variable of t.
inline bool is_free_for(const TermPtr& t, const std::string& x, const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::Atom:
    case FormulaKind::Identity:
      return true;
    case FormulaKind::Neg:
    case FormulaKind::Box:
      return is_free_for(t, x, f->lhs);
    case FormulaKind::Imp:
      return is_free_for(t, x, f->lhs) && is_free_for(t, x, f->rhs);
    case FormulaKind::Forall: {
      if (f->var == x) return true;           // no free x below
      if (!occurs_free(f->lhs, x)) return true;  // nothing to substitute
      if (term_vars(t).count(f->var)) return false;
      return is_free_for(t, x, f->lhs);
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Substitution

namespace detail {

inline TermPtr substitute_term(const TermPtr& u, const std::string& x, const TermPtr& t) {
  switch (u->kind) {
    case TermKind::Variable:
      return u->name == x ? t : u;
    case TermKind::Function: {
      std::vector<TermPtr> args;
      args.reserve(u->args.size());
      bool changed = false;
      for (const TermPtr& a : u->args) {
        TermPtr r = substitute_term(a, x, t);
        changed |= (r.get() != a.get());
        args.push_back(std::move(r));
      }
      return changed ? Term::function(u->name, std::move(args)) : u;
    }
    default:
      return u;
  }
}

inline FormulaPtr substitute_rec(const FormulaPtr& f, const std::string& x, const TermPtr& t) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      std::vector<TermPtr> args;
      args.reserve(f->terms.size());
      bool changed = false;
      for (const TermPtr& u : f->terms) {
        TermPtr r = substitute_term(u, x, t);
        changed |= (r.get() != u.get());
        args.push_back(std::move(r));
      }
      if (!changed) return f;
      return Formula::atom(f->predicate, std::move(args));
    }
    case FormulaKind::Identity: {
      TermPtr a = substitute_term(f->terms[0], x, t);
      TermPtr b = substitute_term(f->terms[1], x, t);
      if (a.get() == f->terms[0].get() && b.get() == f->terms[1].get()) return f;
      return Formula::identity(f->id_kind, std::move(a), std::move(b));
    }
    case FormulaKind::Neg: {
      FormulaPtr a = substitute_rec(f->lhs, x, t);
      return a.get() == f->lhs.get() ? f : Formula::neg(std::move(a), f->sugar);
    }
    case FormulaKind::Box: {
      FormulaPtr a = substitute_rec(f->lhs, x, t);
      return a.get() == f->lhs.get() ? f : Formula::box(std::move(a), f->sugar);
    }
    case FormulaKind::Imp: {
      FormulaPtr a = substitute_rec(f->lhs, x, t);
      FormulaPtr b = substitute_rec(f->rhs, x, t);
      if (a.get() == f->lhs.get() && b.get() == f->rhs.get()) return f;
      return Formula::imp(std::move(a), std::move(b), f->sugar);
    }
    case FormulaKind::Forall: {
      if (f->var == x) return f;  // x is bound below; nothing free to replace
      FormulaPtr a = substitute_rec(f->lhs, x, t);
      return a.get() == f->lhs.get() ? f : Formula::forall(f->var, std::move(a));
    }
  }
  return f;
}

}  // namespace detail

// f[x/t]: every free occurrence of x replaced by t.  Capture is an error,
// never a silent renaming.
inline FormulaPtr substitute(const FormulaPtr& f, const std::string& x, const TermPtr& t) {
  if (!is_free_for(t, x, f))
    throw substitution_error("term is not free for '" + x + "' in the formula");
  return detail::substitute_rec(f, x, t);
}

// ---------------------------------------------------------------------------
// Partial replacement: g obtainable from f by replacing some (possibly none,
// possibly all) free occurrences of x by y.

namespace detail {

inline bool partial_term(const TermPtr& a, const TermPtr& b, const std::string& x,
                         const std::string& y, const std::set<std::string>& shadowed) {
  if (a->kind == TermKind::Variable && a->name == x && !shadowed.count(x)) {
    return b->kind == TermKind::Variable && (b->name == x || b->name == y);
  }
  if (a->kind != b->kind || a->name != b->name || a->element_index != b->element_index ||
      a->args.size() != b->args.size())
    return false;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!partial_term(a->args[i], b->args[i], x, y, shadowed)) return false;
  return true;
}

inline bool partial_rec(const FormulaPtr& f, const FormulaPtr& g, const std::string& x,
                        const std::string& y, std::set<std::string>& shadowed) {
  if (f->kind != g->kind) return false;
  switch (f->kind) {
    case FormulaKind::Atom: {
      if (f->predicate != g->predicate || f->terms.size() != g->terms.size()) return false;
      for (std::size_t i = 0; i < f->terms.size(); ++i)
        if (!partial_term(f->terms[i], g->terms[i], x, y, shadowed)) return false;
      return true;
    }
    case FormulaKind::Identity:
      return f->id_kind == g->id_kind &&
             partial_term(f->terms[0], g->terms[0], x, y, shadowed) &&
             partial_term(f->terms[1], g->terms[1], x, y, shadowed);
    case FormulaKind::Neg:
    case FormulaKind::Box:
      return partial_rec(f->lhs, g->lhs, x, y, shadowed);
    case FormulaKind::Imp:
      return partial_rec(f->lhs, g->lhs, x, y, shadowed) &&
             partial_rec(f->rhs, g->rhs, x, y, shadowed);
    case FormulaKind::Forall: {
      if (f->var != g->var) return false;
      bool inserted = shadowed.insert(f->var).second;
      bool ok = partial_rec(f->lhs, g->lhs, x, y, shadowed);
      if (inserted) shadowed.erase(f->var);
      return ok;
    }
  }
  return false;
}

}  // namespace detail

inline bool is_partial_replacement(const FormulaPtr& f, const FormulaPtr& g,
                                   const std::string& x, const std::string& y) {
  std::set<std::string> shadowed;
  return detail::partial_rec(f, g, x, y, shadowed);
}

// ---------------------------------------------------------------------------
// Variants: equality up to renaming of bound variables and addition/removal
// of void quantifiers (binders whose variable is not free in their scope).

namespace detail {

inline FormulaPtr strip_void_binders(const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::Atom:
    case FormulaKind::Identity:
      return f;
    case FormulaKind::Neg: {
      FormulaPtr a = strip_void_binders(f->lhs);
      return a.get() == f->lhs.get() ? f : Formula::neg(std::move(a));
    }
    case FormulaKind::Box: {
      FormulaPtr a = strip_void_binders(f->lhs);
      return a.get() == f->lhs.get() ? f : Formula::box(std::move(a));
    }
    case FormulaKind::Imp: {
      FormulaPtr a = strip_void_binders(f->lhs);
      FormulaPtr b = strip_void_binders(f->rhs);
      if (a.get() == f->lhs.get() && b.get() == f->rhs.get()) return f;
      return Formula::imp(std::move(a), std::move(b));
    }
    case FormulaKind::Forall: {
      FormulaPtr body = strip_void_binders(f->lhs);
      if (!occurs_free(body, f->var)) return body;
      return body.get() == f->lhs.get() ? f : Formula::forall(f->var, std::move(body));
    }
  }
  return f;
}

struct BinderMaps {
  std::map<std::string, std::string> fg, gf;
};

inline bool variant_term(const TermPtr& a, const TermPtr& b, const BinderMaps& m) {
  if (a->kind != b->kind) return false;
  if (a->kind == TermKind::Variable) {
    auto it = m.fg.find(a->name);
    if (it != m.fg.end()) return b->name == it->second;
    // Free on the left: must be the identical free variable on the right.
    return b->name == a->name && !m.gf.count(b->name);
  }
  if (a->name != b->name || a->element_index != b->element_index || a->args.size() != b->args.size())
    return false;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!variant_term(a->args[i], b->args[i], m)) return false;
  return true;
}

inline bool variant_rec(const FormulaPtr& f, const FormulaPtr& g, BinderMaps& m) {
  if (f->kind != g->kind) return false;
  switch (f->kind) {
    case FormulaKind::Atom: {
      if (f->predicate != g->predicate || f->terms.size() != g->terms.size()) return false;
      for (std::size_t i = 0; i < f->terms.size(); ++i)
        if (!variant_term(f->terms[i], g->terms[i], m)) return false;
      return true;
    }
    case FormulaKind::Identity:
      return f->id_kind == g->id_kind && variant_term(f->terms[0], g->terms[0], m) &&
             variant_term(f->terms[1], g->terms[1], m);
    case FormulaKind::Neg:
    case FormulaKind::Box:
      return variant_rec(f->lhs, g->lhs, m);
    case FormulaKind::Imp:
      return variant_rec(f->lhs, g->lhs, m) && variant_rec(f->rhs, g->rhs, m);
    case FormulaKind::Forall: {
      auto old_fg = m.fg.find(f->var) != m.fg.end()
                        ? std::optional<std::string>(m.fg[f->var])
                        : std::nullopt;
      auto old_gf = m.gf.find(g->var) != m.gf.end()
                        ? std::optional<std::string>(m.gf[g->var])
                        : std::nullopt;
      m.fg[f->var] = g->var;
      m.gf[g->var] = f->var;
      bool ok = variant_rec(f->lhs, g->lhs, m);
      if (old_fg) m.fg[f->var] = *old_fg; else m.fg.erase(f->var);
      if (old_gf) m.gf[g->var] = *old_gf; else m.gf.erase(g->var);
      return ok;
    }
  }
  return false;
}

}  // namespace detail

inline bool is_variant(const FormulaPtr& f, const FormulaPtr& g) {
  FormulaPtr fs = detail::strip_void_binders(f);
  FormulaPtr gs = detail::strip_void_binders(g);
  detail::BinderMaps m;
  return detail::variant_rec(fs, gs, m);
}

// ---------------------------------------------------------------------------
// Alpha-normalization: canonical representative of the variant class.  Void
// binders are removed, remaining binders renamed v0, v1, ... in preorder
// (skipping names already used by free variables or other symbols), sugar
// tags cleared.

namespace detail {

struct Renamer {
  const std::set<std::string>* avoid;
  int next = 0;

  std::string fresh() {
    for (;;) {
      std::string name = "v" + std::to_string(next++);
      if (!avoid->count(name)) return name;
    }
  }
};

inline TermPtr rename_term(const TermPtr& t, const std::map<std::string, std::string>& env) {
  switch (t->kind) {
    case TermKind::Variable: {
      auto it = env.find(t->name);
      return it == env.end() ? t : Term::variable(it->second);
    }
    case TermKind::Function: {
      std::vector<TermPtr> args;
      args.reserve(t->args.size());
      for (const TermPtr& a : t->args) args.push_back(rename_term(a, env));
      return Term::function(t->name, std::move(args));
    }
    default:
      return t;
  }
}

inline FormulaPtr rename_rec(const FormulaPtr& f, std::map<std::string, std::string>& env,
                             Renamer& r) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      std::vector<TermPtr> args;
      args.reserve(f->terms.size());
      for (const TermPtr& t : f->terms) args.push_back(rename_term(t, env));
      return Formula::atom(f->predicate, std::move(args));
    }
    case FormulaKind::Identity:
      return Formula::identity(f->id_kind, rename_term(f->terms[0], env),
                               rename_term(f->terms[1], env));
    case FormulaKind::Neg:
      return Formula::neg(rename_rec(f->lhs, env, r));
    case FormulaKind::Box:
      return Formula::box(rename_rec(f->lhs, env, r));
    case FormulaKind::Imp: {
      FormulaPtr a = rename_rec(f->lhs, env, r);
      return Formula::imp(std::move(a), rename_rec(f->rhs, env, r));
    }
    case FormulaKind::Forall: {
      std::string fresh = r.fresh();
      auto it = env.find(f->var);
      std::optional<std::string> saved =
          it == env.end() ? std::nullopt : std::optional<std::string>(it->second);
      env[f->var] = fresh;
      FormulaPtr body = rename_rec(f->lhs, env, r);
      if (saved) env[f->var] = *saved; else env.erase(f->var);
      return Formula::forall(fresh, std::move(body));
    }
  }
  return f;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Printer

namespace detail {

inline void print_term_to(std::string& out, const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Variable:
    case TermKind::Constant:
      out += t->name;
      return;
    case TermKind::Element:
      out += "#" + std::to_string(t->element_index);
      return;
    case TermKind::Function: {
      out += t->name;
      out += "(";
      for (std::size_t i = 0; i < t->args.size(); ++i) {
        if (i) out += ", ";
        print_term_to(out, t->args[i]);
      }
      out += ")";
      return;
    }
  }
}

// Precedence levels: -> is 1, | is 2, & is 3, unary/quantifier/atom is 4.
// A quantified formula additionally requires parentheses whenever material to
// its right does not belong to it (its scope extends maximally right).
inline void print_formula_to(std::string& out, const FormulaPtr& f, int min_level,
                             bool rightmost);

inline void print_quantifier(std::string& out, const char* word, const std::string& var,
                             const FormulaPtr& body, bool rightmost) {
  if (!rightmost) out += "(";
  out += word;
  out += " ";
  out += var;
  out += ". ";
  print_formula_to(out, body, 1, true);
  if (!rightmost) out += ")";
}

inline void print_formula_to(std::string& out, const FormulaPtr& f, int min_level,
                             bool rightmost) {
  auto parenthesized = [&](auto&& body) {
    out += "(";
    body();
    out += ")";
  };

  switch (f->kind) {
    case FormulaKind::Atom: {
      out += f->predicate;
      if (!f->terms.empty()) {
        out += "(";
        for (std::size_t i = 0; i < f->terms.size(); ++i) {
          if (i) out += ", ";
          print_term_to(out, f->terms[i]);
        }
        out += ")";
      }
      return;
    }
    case FormulaKind::Identity: {
      print_term_to(out, f->terms[0]);
      out += f->id_kind == IdentityKind::Necessary ? " = " : " =c ";
      print_term_to(out, f->terms[1]);
      return;
    }
    case FormulaKind::Neg: {
      if (f->sugar == Sugar::Diamond && f->lhs->kind == FormulaKind::Box &&
          f->lhs->lhs->kind == FormulaKind::Neg) {
        out += "<>";
        print_formula_to(out, f->lhs->lhs->lhs, 4, rightmost);
        return;
      }
      if (f->sugar == Sugar::And && f->lhs->kind == FormulaKind::Imp &&
          f->lhs->rhs->kind == FormulaKind::Neg) {
        const FormulaPtr& a = f->lhs->lhs;
        const FormulaPtr& b = f->lhs->rhs->lhs;
        if (3 < min_level) {
          parenthesized([&] {
            print_formula_to(out, a, 3, false);
            out += " & ";
            print_formula_to(out, b, 4, true);
          });
        } else {
          print_formula_to(out, a, 3, false);
          out += " & ";
          print_formula_to(out, b, 4, rightmost);
        }
        return;
      }
      if (f->sugar == Sugar::Exists && f->lhs->kind == FormulaKind::Forall &&
          f->lhs->lhs->kind == FormulaKind::Neg) {
        print_quantifier(out, "exists", f->lhs->var, f->lhs->lhs->lhs, rightmost);
        return;
      }
      out += "~";
      print_formula_to(out, f->lhs, 4, rightmost);
      return;
    }
    case FormulaKind::Box: {
      if (f->sugar == Sugar::NecessaryIdentity && f->lhs->kind == FormulaKind::Identity &&
          f->lhs->id_kind == IdentityKind::Necessary) {
        print_term_to(out, f->lhs->terms[0]);
        out += " =! ";
        print_term_to(out, f->lhs->terms[1]);
        return;
      }
      out += "[]";
      print_formula_to(out, f->lhs, 4, rightmost);
      return;
    }
    case FormulaKind::Imp: {
      if (f->sugar == Sugar::Or && f->lhs->kind == FormulaKind::Neg) {
        const FormulaPtr& a = f->lhs->lhs;
        const FormulaPtr& b = f->rhs;
        if (2 < min_level) {
          parenthesized([&] {
            print_formula_to(out, a, 2, false);
            out += " | ";
            print_formula_to(out, b, 3, true);
          });
        } else {
          print_formula_to(out, a, 2, false);
          out += " | ";
          print_formula_to(out, b, 3, rightmost);
        }
        return;
      }
      if (1 < min_level) {
        parenthesized([&] {
          print_formula_to(out, f->lhs, 2, false);
          out += " -> ";
          print_formula_to(out, f->rhs, 1, true);
        });
      } else {
        print_formula_to(out, f->lhs, 2, false);
        out += " -> ";
        print_formula_to(out, f->rhs, 1, rightmost);
      }
      return;
    }
    case FormulaKind::Forall:
      print_quantifier(out, "forall", f->var, f->lhs, rightmost);
      return;
  }
}

}  // namespace detail

inline std::string to_string(const TermPtr& t) {
  std::string out;
  detail::print_term_to(out, t);
  return out;
}

inline std::string to_string(const FormulaPtr& f) {
  std::string out;
  detail::print_formula_to(out, f, 1, true);
  return out;
}

// ---------------------------------------------------------------------------
// Parser

// Resolution of identifiers that are not bound and not declared in the
// signature when they appear in term position.
enum class UndeclaredTerms : std::uint8_t { Error, Constant, Variable };

struct ParseOptions {
  UndeclaredTerms undeclared_terms = UndeclaredTerms::Constant;
  // Atoms whose predicate is not declared are accepted with their arity
  // inferred from use (consistently within one parse).
  bool allow_undeclared_predicates = true;
};

namespace detail {

enum class Tok : std::uint8_t {
  Ident, Forall, Exists, Tilde, Box, Diamond, Arrow, Amp, Pipe,
  LParen, RParen, Dot, Comma, Eq, EqC, EqBang, End
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto push = [&](Tok k, std::string text, std::size_t pos) {
    out.push_back(Token{k, std::move(text), pos});
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      std::string word(src.substr(i, j - i));
      i = j;
      if (word == "forall") push(Tok::Forall, word, start);
      else if (word == "exists") push(Tok::Exists, word, start);
      else push(Tok::Ident, word, start);
      continue;
    }
    switch (c) {
      case '~': push(Tok::Tilde, "~", start); ++i; break;
      case '&': push(Tok::Amp, "&", start); ++i; break;
      case '|': push(Tok::Pipe, "|", start); ++i; break;
      case '(': push(Tok::LParen, "(", start); ++i; break;
      case ')': push(Tok::RParen, ")", start); ++i; break;
      case '.': push(Tok::Dot, ".", start); ++i; break;
      case ',': push(Tok::Comma, ",", start); ++i; break;
      case '[':
        if (i + 1 < src.size() && src[i + 1] == ']') {
          push(Tok::Box, "[]", start);
          i += 2;
        } else {
          throw parse_error("expected '[]'", start);
        }
        break;
      case '<':
        if (i + 1 < src.size() && src[i + 1] == '>') {
          push(Tok::Diamond, "<>", start);
          i += 2;
        } else {
          throw parse_error("expected '<>'", start);
        }
        break;
      case '-':
        if (i + 1 < src.size() && src[i + 1] == '>') {
          push(Tok::Arrow, "->", start);
          i += 2;
        } else {
          throw parse_error("expected '->'", start);
        }
        break;
      case '=':
        if (i + 1 < src.size() && src[i + 1] == '!') {
          push(Tok::EqBang, "=!", start);
          i += 2;
        } else if (i + 1 < src.size() && src[i + 1] == 'c' &&
                   !(i + 2 < src.size() &&
                     (std::isalnum(static_cast<unsigned char>(src[i + 2])) ||
                      src[i + 2] == '_'))) {
          push(Tok::EqC, "=c", start);
          i += 2;
        } else {
          push(Tok::Eq, "=", start);
          ++i;
        }
        break;
      default:
        throw parse_error(std::string("unexpected character '") + c + "'", start);
    }
  }
  push(Tok::End, "", src.size());
  return out;
}

class Parser {
public:
  Parser(std::string_view src, const Signature& sig, const ParseOptions& options)
      : tokens_(lex(src)), sig_(sig), options_(options) {}

  FormulaPtr parse_formula_all() {
    FormulaPtr f = parse_imp();
    expect(Tok::End, "unexpected trailing input");
    return f;
  }

  TermPtr parse_term_all() {
    TermPtr t = parse_term();
    expect(Tok::End, "unexpected trailing input");
    return t;
  }

private:
  const Token& peek() const { return tokens_[pos_]; }
  Token take() { return tokens_[pos_++]; }
  bool at(Tok k) const { return peek().kind == k; }
  bool accept(Tok k) {
    if (!at(k)) return false;
    ++pos_;
    return true;
  }
  void expect(Tok k, const char* message) {
    if (!accept(k)) throw parse_error(message, peek().pos);
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw parse_error(message, peek().pos);
  }

  bool is_bound(const std::string& name) const {
    for (auto it = binders_.rbegin(); it != binders_.rend(); ++it)
      if (*it == name) return true;
    return false;
  }

  FormulaPtr parse_imp() {
    FormulaPtr lhs = parse_or();
    if (accept(Tok::Arrow)) return Formula::imp(std::move(lhs), parse_imp());
    return lhs;
  }

  FormulaPtr parse_or() {
    FormulaPtr f = parse_and();
    while (accept(Tok::Pipe)) f = Formula::disj(std::move(f), parse_and());
    return f;
  }

  FormulaPtr parse_and() {
    FormulaPtr f = parse_unary();
    while (accept(Tok::Amp)) f = Formula::conj(std::move(f), parse_unary());
    return f;
  }

  FormulaPtr parse_unary() {
    if (accept(Tok::Tilde)) return Formula::neg(parse_unary());
    if (accept(Tok::Box)) return Formula::box(parse_unary());
    if (accept(Tok::Diamond)) return Formula::diamond(parse_unary());
    if (at(Tok::Forall) || at(Tok::Exists)) return parse_quantifier();
    return parse_primary();
  }

  FormulaPtr parse_quantifier() {
    bool universal = take().kind == Tok::Forall;
    if (!at(Tok::Ident)) fail("expected a variable after the quantifier");
    Token var = take();
    if (sig_.predicate_arity(var.text))
      throw parse_error("binder '" + var.text + "' collides with a predicate name", var.pos);
    expect(Tok::Dot, "expected '.' after the quantified variable");
    binders_.push_back(var.text);
    FormulaPtr body = parse_imp();
    binders_.pop_back();
    return universal ? Formula::forall(var.text, std::move(body))
                     : Formula::exists(var.text, std::move(body));
  }

  FormulaPtr parse_primary() {
    if (accept(Tok::LParen)) {
      FormulaPtr f = parse_imp();
      expect(Tok::RParen, "expected ')'");
      return f;
    }
    if (!at(Tok::Ident)) fail("expected a formula");
    Token head = take();

    // The identifier may open a predicate atom, a bare propositional atom, or
    // the left-hand term of an identity.
    if (at(Tok::LParen)) {
      std::size_t open_pos = peek().pos;
      ++pos_;
      std::vector<TermPtr> args;
      args.push_back(parse_term());
      while (accept(Tok::Comma)) args.push_back(parse_term());
      expect(Tok::RParen, "expected ')' in the argument list");
      if (at(Tok::Eq) || at(Tok::EqC) || at(Tok::EqBang))
        return parse_identity_tail(make_function_term(head, std::move(args), open_pos));
      return make_atom(head, std::move(args));
    }
    if (at(Tok::Eq) || at(Tok::EqC) || at(Tok::EqBang))
      return parse_identity_tail(make_leaf_term(head));
    return make_atom(head, {});
  }

  FormulaPtr parse_identity_tail(TermPtr lhs) {
    Token op = take();
    TermPtr rhs = parse_term();
    switch (op.kind) {
      case Tok::Eq: return Formula::identity(IdentityKind::Necessary, std::move(lhs), std::move(rhs));
      case Tok::EqC: return Formula::identity(IdentityKind::Contingent, std::move(lhs), std::move(rhs));
      default: return Formula::nec_identity(std::move(lhs), std::move(rhs));
    }
  }

  TermPtr parse_term() {
    if (!at(Tok::Ident)) fail("expected a term");
    Token head = take();
    if (at(Tok::LParen)) {
      std::size_t open_pos = peek().pos;
      ++pos_;
      std::vector<TermPtr> args;
      args.push_back(parse_term());
      while (accept(Tok::Comma)) args.push_back(parse_term());
      expect(Tok::RParen, "expected ')' in the argument list");
      return make_function_term(head, std::move(args), open_pos);
    }
    return make_leaf_term(head);
  }

  TermPtr make_function_term(const Token& head, std::vector<TermPtr> args,
                             std::size_t open_pos) {
    auto arity = sig_.function_arity(head.text);
    if (!arity) {
      if (sig_.predicate_arity(head.text))
        throw parse_error("predicate '" + head.text + "' used in term position", head.pos);
      throw parse_error("unknown function '" + head.text + "'", head.pos);
    }
    if (static_cast<int>(args.size()) != *arity)
      throw parse_error("function '" + head.text + "' expects " + std::to_string(*arity) +
                            " arguments, got " + std::to_string(args.size()),
                        open_pos);
    return Term::function(head.text, std::move(args));
  }

  TermPtr make_leaf_term(const Token& head) {
    if (is_bound(head.text)) return Term::variable(head.text);
    if (sig_.is_constant(head.text)) return Term::constant(head.text);
    if (sig_.function_arity(head.text))
      throw parse_error("function '" + head.text + "' needs an argument list", head.pos);
    if (sig_.predicate_arity(head.text))
      throw parse_error("predicate '" + head.text + "' used in term position", head.pos);
    switch (options_.undeclared_terms) {
      case UndeclaredTerms::Constant: return Term::constant(head.text);
      case UndeclaredTerms::Variable: return Term::variable(head.text);
      case UndeclaredTerms::Error:
        throw parse_error("unknown symbol '" + head.text + "'", head.pos);
    }
    return nullptr;
  }

  FormulaPtr make_atom(const Token& head, std::vector<TermPtr> args) {
    if (is_bound(head.text))
      throw parse_error("variable '" + head.text + "' used in formula position", head.pos);
    if (sig_.is_constant(head.text) || sig_.function_arity(head.text))
      throw parse_error("term symbol '" + head.text + "' used in formula position", head.pos);
    auto arity = sig_.predicate_arity(head.text);
    if (arity) {
      if (static_cast<int>(args.size()) != *arity)
        throw parse_error("predicate '" + head.text + "' expects " + std::to_string(*arity) +
                              " arguments, got " + std::to_string(args.size()),
                          head.pos);
    } else {
      if (!options_.allow_undeclared_predicates)
        throw parse_error("unknown predicate '" + head.text + "'", head.pos);
      auto [it, inserted] = inferred_.emplace(head.text, args.size());
      if (!inserted && it->second != static_cast<int>(args.size()))
        throw parse_error("predicate '" + head.text + "' used with inconsistent arities",
                          head.pos);
    }
    return Formula::atom(head.text, std::move(args));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const Signature& sig_;
  ParseOptions options_;
  std::vector<std::string> binders_;
  std::map<std::string, int> inferred_;
};

}  // namespace detail

inline FormulaPtr parse_formula(std::string_view text, const Signature& sig = {},
                                const ParseOptions& options = {}) {
  return detail::Parser(text, sig, options).parse_formula_all();
}

inline TermPtr parse_term(std::string_view text, const Signature& sig = {},
                          const ParseOptions& options = {}) {
  return detail::Parser(text, sig, options).parse_term_all();
}

// ---------------------------------------------------------------------------
// Symbol usage: every predicate, function, constant (with arities) and free
// variable occurring in a formula.  Used to infer signatures and to validate
// formulas against structures.

struct SymbolUsage {
  std::map<std::string, int> predicates;
  std::map<std::string, int> functions;
  std::set<std::string> constants;
  std::set<std::string> free_variables;
  bool uses_necessary_identity = false;
  bool uses_contingent_identity = false;
};

namespace detail {

inline void collect_usage_term(const TermPtr& t, const std::set<std::string>& bound,
                               SymbolUsage& out) {
  switch (t->kind) {
    case TermKind::Variable:
      if (!bound.count(t->name)) out.free_variables.insert(t->name);
      return;
    case TermKind::Constant:
      out.constants.insert(t->name);
      return;
    case TermKind::Function:
      out.functions[t->name] = static_cast<int>(t->args.size());
      for (const TermPtr& a : t->args) collect_usage_term(a, bound, out);
      return;
    case TermKind::Element:
      return;
  }
}

inline void collect_usage_rec(const FormulaPtr& f, std::set<std::string>& bound,
                              SymbolUsage& out) {
  switch (f->kind) {
    case FormulaKind::Atom:
      out.predicates[f->predicate] = static_cast<int>(f->terms.size());
      for (const TermPtr& t : f->terms) collect_usage_term(t, bound, out);
      return;
    case FormulaKind::Identity:
      (f->id_kind == IdentityKind::Necessary ? out.uses_necessary_identity
                                             : out.uses_contingent_identity) = true;
      for (const TermPtr& t : f->terms) collect_usage_term(t, bound, out);
      return;
    case FormulaKind::Neg:
    case FormulaKind::Box:
      collect_usage_rec(f->lhs, bound, out);
      return;
    case FormulaKind::Imp:
      collect_usage_rec(f->lhs, bound, out);
      collect_usage_rec(f->rhs, bound, out);
      return;
    case FormulaKind::Forall: {
      bool inserted = bound.insert(f->var).second;
      collect_usage_rec(f->lhs, bound, out);
      if (inserted) bound.erase(f->var);
      return;
    }
  }
}

}  // namespace detail

inline SymbolUsage collect_usage(const FormulaPtr& f) {
  SymbolUsage out;
  std::set<std::string> bound;
  detail::collect_usage_rec(f, bound, out);
  return out;
}

inline FormulaPtr alpha_normalize(const FormulaPtr& f) {
  FormulaPtr stripped = detail::strip_void_binders(f);
  // Canonical binder names must avoid every name that is fixed across the
  // variant class: free variables, predicates, functions and constants.
  // Original binder names are renamed away, so they do not constrain the
  // choice (variants may disagree on them).
  SymbolUsage usage = collect_usage(stripped);
  std::set<std::string> avoid = usage.free_variables;
  for (const auto& [name, arity] : usage.predicates) avoid.insert(name);
  for (const auto& [name, arity] : usage.functions) avoid.insert(name);
  avoid.insert(usage.constants.begin(), usage.constants.end());
  detail::Renamer renamer{&avoid, 0};
  std::map<std::string, std::string> env;
  return detail::rename_rec(stripped, env, renamer);
}

}  // namespace nmodal
