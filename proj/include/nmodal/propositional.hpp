#pragma once

// Decision procedure for the propositional fragments: exhaustive enumeration
// of legal valuations over the subformula closure, tautology checking, and
// consequence checking, all with falsifying witnesses.
//
// A legal valuation maps every distinct subformula to one truth value such
// that each composite's value lies in the multioperation set of its
// children's values.  Atoms range over the whole carrier.  Enumeration is
// post-order with values tried in the fixed carrier order, so witnesses are
// reproducible.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "syntax.hpp"
#include "system.hpp"
#include "values.hpp"

namespace nmodal {

struct propositional_error : std::logic_error {
  using std::logic_error::logic_error;
};

// One legal valuation: the subformula closure in post-order with the value
// committed at each node.  Occurrences of structurally equal subformulas
// share one entry (a valuation is a function on formulas).
struct PropValuation {
  std::vector<std::pair<FormulaPtr, Value>> entries;

  Value value_of(const FormulaPtr& f) const {
    for (const auto& [node, v] : entries)
      if (equal(node, f)) return v;
    throw propositional_error("formula is not in the valuation's closure: " + to_string(f));
  }

  // The closure is built children-first, so the queried root comes last.
  Value root_value() const { return entries.back().second; }
};

namespace detail {

inline void require_propositional(const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::Atom:
      if (!f->terms.empty())
        throw propositional_error("predicate '" + f->predicate +
                                  "' takes terms; not a propositional formula");
      return;
    case FormulaKind::Identity:
    case FormulaKind::Forall:
      throw propositional_error("not a propositional formula: " + to_string(f));
    case FormulaKind::Neg:
    case FormulaKind::Box:
      require_propositional(f->lhs);
      return;
    case FormulaKind::Imp:
      require_propositional(f->lhs);
      require_propositional(f->rhs);
      return;
  }
}

inline int closure_insert(std::vector<FormulaPtr>& closure, const FormulaPtr& f) {
  int lhs = -1, rhs = -1;
  if (f->lhs) lhs = closure_insert(closure, f->lhs);
  if (f->rhs) rhs = closure_insert(closure, f->rhs);
  (void)lhs;
  (void)rhs;
  for (std::size_t i = 0; i < closure.size(); ++i)
    if (equal(closure[i], f)) return static_cast<int>(i);
  closure.push_back(f);
  return static_cast<int>(closure.size()) - 1;
}

}  // namespace detail

// Distinct subformulas in post-order: children always precede parents.
inline std::vector<FormulaPtr> subformula_closure(const FormulaPtr& f) {
  detail::require_propositional(f);
  std::vector<FormulaPtr> closure;
  detail::closure_insert(closure, f);
  return closure;
}

inline std::vector<FormulaPtr> subformula_closure(const std::vector<FormulaPtr>& formulas) {
  std::vector<FormulaPtr> closure;
  for (const FormulaPtr& f : formulas) {
    detail::require_propositional(f);
    detail::closure_insert(closure, f);
  }
  return closure;
}

// Visit every legal valuation of the closure in enumeration order.  The
// visitor may return false to stop early.  Returns the number visited.
inline long long enumerate_legal_valuations(
    const std::vector<FormulaPtr>& formulas, const System& sys,
    const std::function<bool(const PropValuation&)>& visit) {
  std::vector<FormulaPtr> closure = subformula_closure(formulas);
  std::size_t n = closure.size();

  // Locate each composite's children inside the closure.
  auto index_of = [&](const FormulaPtr& f) {
    for (std::size_t i = 0; i < n; ++i)
      if (equal(closure[i], f)) return static_cast<int>(i);
    throw propositional_error("closure is missing a subformula");
  };
  std::vector<int> lhs(n, -1), rhs(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (closure[i]->lhs) lhs[i] = index_of(closure[i]->lhs);
    if (closure[i]->rhs) rhs[i] = index_of(closure[i]->rhs);
  }

  PropValuation current;
  current.entries.reserve(n);
  for (const FormulaPtr& f : closure) current.entries.push_back({f, Value::Fn});

  long long visited = 0;
  bool stopped = false;

  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (stopped) return;
    if (i == n) {
      ++visited;
      if (!visit(current)) stopped = true;
      return;
    }
    ValueSet allowed;
    switch (closure[i]->kind) {
      case FormulaKind::Atom:
        allowed = sys.carrier_values();
        break;
      case FormulaKind::Neg:
        allowed = ValueSet{sys.neg(current.entries[lhs[i]].second)};
        break;
      case FormulaKind::Box:
        allowed = sys.box(current.entries[lhs[i]].second);
        break;
      case FormulaKind::Imp:
        allowed = sys.imp(current.entries[lhs[i]].second, current.entries[rhs[i]].second);
        break;
      default:
        throw propositional_error("not a propositional formula");
    }
    for (Value v : allowed.values()) {
      current.entries[i].second = v;
      rec(i + 1);
      if (stopped) return;
    }
  };
  rec(0);
  return visited;
}

inline long long enumerate_legal_valuations(
    const FormulaPtr& f, const System& sys,
    const std::function<bool(const PropValuation&)>& visit) {
  return enumerate_legal_valuations(std::vector<FormulaPtr>{f}, sys, visit);
}

// Materialize legal valuations; a negative limit means all of them.
inline std::vector<PropValuation> legal_valuations(const FormulaPtr& f, const System& sys,
                                                   long long limit = -1) {
  std::vector<PropValuation> out;
  enumerate_legal_valuations(f, sys, [&](const PropValuation& v) {
    out.push_back(v);
    return limit < 0 || static_cast<long long>(out.size()) < limit;
  });
  return out;
}

inline long long count_legal_valuations(const FormulaPtr& f, const System& sys) {
  return enumerate_legal_valuations(f, sys, [](const PropValuation&) { return true; });
}

struct PropVerdict {
  bool holds = false;
  long long valuations = 0;              // legal valuations examined
  bool exhaustive = true;                // false when a limit stopped enumeration
  std::optional<PropValuation> witness;  // first falsifying valuation
};

// Designated under every legal valuation.  A nonnegative limit caps the
// enumeration; when it triggers without a falsification, `exhaustive` turns
// false and `holds` covers only the examined prefix.
inline PropVerdict is_tautology(const FormulaPtr& f, const System& sys, long long limit = -1) {
  PropVerdict out;
  out.holds = true;
  long long seen = 0;
  out.valuations = enumerate_legal_valuations(f, sys, [&](const PropValuation& v) {
    ++seen;
    if (!designated(v.root_value())) {
      out.holds = false;
      out.witness = v;
      return false;
    }
    return limit < 0 || seen < limit;
  });
  if (limit >= 0 && out.holds && out.valuations >= limit) out.exhaustive = false;
  return out;
}

// Every legal valuation designating all premises designates the conclusion.
inline PropVerdict is_consequence(const std::vector<FormulaPtr>& premises, const FormulaPtr& f,
                                  const System& sys, long long limit = -1) {
  std::vector<FormulaPtr> all = premises;
  all.push_back(f);
  PropVerdict out;
  out.holds = true;
  long long seen = 0;
  out.valuations = enumerate_legal_valuations(all, sys, [&](const PropValuation& v) {
    ++seen;
    bool premises_hold = true;
    for (const FormulaPtr& p : premises)
      if (!designated(v.value_of(p))) {
        premises_hold = false;
        break;
      }
    if (premises_hold && !designated(v.value_of(f))) {
      out.holds = false;
      out.witness = v;
      return false;
    }
    return limit < 0 || seen < limit;
  });
  if (limit >= 0 && out.holds && out.valuations >= limit) out.exhaustive = false;
  return out;
}

}  // namespace nmodal
