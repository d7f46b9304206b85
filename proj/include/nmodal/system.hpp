// The modal Nmatrices: multioperation tables over the eight-valued carrier,
// their four- and six-valued restrictions, the iteration variants of box, and
// the quantifier multioperators (nondeterministic folds and their
// deterministic variants).

#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

#include "values.hpp"

namespace nmodal {

namespace tables {

using enum Value;

// Negation is deterministic: it flips the sign region T<->F, C<->C, I<->I.
inline constexpr std::array<Value, 8> kNeg = {Fn, Cn, Tn, In, Fp, Cp, Tp, Ip};

inline constexpr ValueSet kPlus = kDesignated;                       // {T+,C+,F+,I+}
inline constexpr ValueSet kMinus{Tn, Cn, Fn, In};                    // {T-,C-,F-,I-}

// Box is designated exactly on the "necessity" values, diamond on the
// "possibility" values; in both cases the output is only constrained in sign.
inline constexpr std::array<ValueSet, 8> kBox = {
    /*T+*/ kPlus, /*C+*/ kMinus, /*F+*/ kMinus, /*I+*/ kPlus,
    /*T-*/ kPlus, /*C-*/ kMinus, /*F-*/ kMinus, /*I-*/ kPlus};

inline constexpr std::array<ValueSet, 8> kDiamond = {
    /*T+*/ kPlus, /*C+*/ kPlus, /*F+*/ kMinus, /*I+*/ kMinus,
    /*T-*/ kPlus, /*C-*/ kPlus, /*F-*/ kMinus, /*I-*/ kMinus};

// Binary tables: rows are the first argument, columns the second, both in the
// fixed value order T+, C+, F+, I+, T-, C-, F-, I-.
inline constexpr ValueSet kImp[8][8] = {
    /*T+*/ {{Tp}, {Cp}, {Fp}, {Ip}, {Tn}, {Cn}, {Fn}, {In}},
    /*C+*/ {{Tp}, {Tp, Cp}, {Cp}, {Ip}, {Tn}, {Tn, Cn}, {Cn}, {In}},
    /*F+*/ {{Tp}, {Tp}, {Tp}, {Ip}, {Tn}, {Tn}, {Tn}, {In}},
    /*I+*/ {{Ip}, {Ip}, {Ip}, {Ip}, {In}, {In}, {In}, {In}},
    /*T-*/ {{Tp}, {Cp}, {Fp}, {Ip}, {Tp}, {Cp}, {Fp}, {Ip}},
    /*C-*/ {{Tp}, {Tp, Cp}, {Cp}, {Ip}, {Tp}, {Tp, Cp}, {Cp}, {Ip}},
    /*F-*/ {{Tp}, {Tp}, {Tp}, {Ip}, {Tp}, {Tp}, {Tp}, {Ip}},
    /*I-*/ {{Ip}, {Ip}, {Ip}, {Ip}, {Ip}, {Ip}, {Ip}, {Ip}}};

inline constexpr ValueSet kOr[8][8] = {
    /*T+*/ {{Tp}, {Tp}, {Tp}, {Ip}, {Tp}, {Tp}, {Tp}, {Ip}},
    /*C+*/ {{Tp}, {Tp, Cp}, {Cp}, {Ip}, {Tp}, {Tp, Cp}, {Cp}, {Ip}},
    /*F+*/ {{Tp}, {Cp}, {Fp}, {Ip}, {Tp}, {Cp}, {Fp}, {Ip}},
    /*I+*/ {{Ip}, {Ip}, {Ip}, {Ip}, {Ip}, {Ip}, {Ip}, {Ip}},
    /*T-*/ {{Tp}, {Tp}, {Tp}, {Ip}, {Tn}, {Tn}, {Tn}, {In}},
    /*C-*/ {{Tp}, {Tp, Cp}, {Cp}, {Ip}, {Tn}, {Tn, Cn}, {Cn}, {In}},
    /*F-*/ {{Tp}, {Cp}, {Fp}, {Ip}, {Tn}, {Cn}, {Fn}, {In}},
    /*I-*/ {{Ip}, {Ip}, {Ip}, {Ip}, {In}, {In}, {In}, {In}}};

inline constexpr ValueSet kAnd[8][8] = {
    /*T+*/ {{Tp}, {Cp}, {Fp}, {Ip}, {Tn}, {Cn}, {Fn}, {In}},
    /*C+*/ {{Cp}, {Fp, Cp}, {Fp}, {Ip}, {Cn}, {Fn, Cn}, {Fn}, {In}},
    /*F+*/ {{Fp}, {Fp}, {Fp}, {Ip}, {Fn}, {Fn}, {Fn}, {In}},
    /*I+*/ {{Ip}, {Ip}, {Ip}, {Ip}, {In}, {In}, {In}, {In}},
    /*T-*/ {{Tn}, {Cn}, {Fn}, {In}, {Tn}, {Cn}, {Fn}, {In}},
    /*C-*/ {{Cn}, {Fn, Cn}, {Fn}, {In}, {Cn}, {Fn, Cn}, {Fn}, {In}},
    /*F-*/ {{Fn}, {Fn}, {Fn}, {In}, {Fn}, {Fn}, {Fn}, {In}},
    /*I-*/ {{In}, {In}, {In}, {In}, {In}, {In}, {In}, {In}}};

// Box tables for the iteration variants.  They only exist on the four-valued
// carrier; entries outside V4 are never consulted.
inline constexpr std::array<ValueSet, 8> kBoxAxiom4 = {
    /*T+*/ ValueSet{Tp}, /*C+*/ ValueSet{Cn, Fn}, {}, {},
    {}, /*C-*/ ValueSet{Cn, Fn}, /*F-*/ ValueSet{Cn, Fn}, {}};

inline constexpr std::array<ValueSet, 8> kBoxAxiom45 = {
    /*T+*/ ValueSet{Tp}, /*C+*/ ValueSet{Fn}, {}, {},
    {}, /*C-*/ ValueSet{Fn}, /*F-*/ ValueSet{Fn}, {}};

}  // namespace tables

enum class BoxVariant : std::uint8_t { Base, Axiom4, Axiom45 };
enum class IdentityMode : std::uint8_t { Necessary, Contingent };
enum class QuantifierMode : std::uint8_t { Deterministic, Nondeterministic };

namespace detail {

// Quantifier multioperators.  The nondeterministic universal (existential)
// multioperator on a nonempty set X of values is the union, over every
// enumeration order of X, of the left-associated set-lifted conjunction
// (disjunction) of its members; singletons map to themselves.  Computed once
// per carrier by dynamic programming over subsets: a set folds to the union,
// over each choice of last element x, of table(fold(X - {x}), x).
struct FoldTables {
  std::array<ValueSet, 256> conj{};
  std::array<ValueSet, 256> disj{};
};

inline ValueSet apply_lifted(const ValueSet (&table)[8][8], ValueSet lhs, Value rhs,
                             ValueSet carrier) {
  ValueSet out;
  for (Value s : lhs.values()) out |= table[index_of(s)][index_of(rhs)] & carrier;
  return out;
}

inline FoldTables compute_fold_tables(Carrier c) {
  FoldTables t;
  const ValueSet carrier = carrier_set(c);
  for (unsigned m = 1; m < 256; ++m) {
    ValueSet x(static_cast<std::uint8_t>(m));
    if (!x.subset_of(carrier)) continue;
    if (x.size() == 1) {
      t.conj[m] = x;
      t.disj[m] = x;
      continue;
    }
    for (Value last : x.values()) {
      ValueSet rest = x;
      rest.remove(last);
      t.conj[m] |= apply_lifted(tables::kAnd, t.conj[rest.bits()], last, carrier);
      t.disj[m] |= apply_lifted(tables::kOr, t.disj[rest.bits()], last, carrier);
    }
  }
  return t;
}

inline const FoldTables& fold_tables(Carrier c) {
  static const FoldTables v4 = compute_fold_tables(Carrier::V4);
  static const FoldTables v6 = compute_fold_tables(Carrier::V6);
  static const FoldTables v8 = compute_fold_tables(Carrier::V8);
  switch (c) {
    case Carrier::V4: return v4;
    case Carrier::V6: return v6;
    case Carrier::V8: return v8;
  }
  return v8;
}

// The deterministic quantifier variants patch exactly two entries each: the
// mixed contingent sets where the four-valued nondeterministic fold is not a
// singleton.
inline constexpr std::uint8_t kMixedC = ValueSet{Value::Cp, Value::Cn}.bits();
inline constexpr std::uint8_t kMixedCT = ValueSet{Value::Cp, Value::Cn, Value::Tp}.bits();
inline constexpr std::uint8_t kMixedCF = ValueSet{Value::Cp, Value::Cn, Value::Fn}.bits();

}  // namespace detail

// A concrete system: a carrier with its tables, a box variant, the identity
// axiom flavour and the quantifier mode.  Tables for V4/V6 are the pointwise
// restriction of the eight-valued tables to the carrier.
struct System {
  std::string name;
  Carrier carrier = Carrier::V4;
  BoxVariant box_variant = BoxVariant::Base;
  IdentityMode identity_mode = IdentityMode::Necessary;
  QuantifierMode quantifier_mode = QuantifierMode::Deterministic;

  ValueSet carrier_values() const { return carrier_set(carrier); }
  ValueSet designated_values() const { return kDesignated & carrier_values(); }

  bool in_carrier(Value v) const { return carrier_values().contains(v); }

  Value neg(Value v) const { return tables::kNeg[index_of(v)]; }

  ValueSet neg_set(ValueSet s) const {
    ValueSet out;
    for (Value v : s.values()) out.insert(neg(v));
    return out;
  }

  ValueSet box(Value v) const {
    ValueSet out;
    switch (box_variant) {
      case BoxVariant::Base: out = tables::kBox[index_of(v)] & carrier_values(); break;
      case BoxVariant::Axiom4: out = tables::kBoxAxiom4[index_of(v)]; break;
      case BoxVariant::Axiom45: out = tables::kBoxAxiom45[index_of(v)]; break;
    }
    if (out.empty()) throw std::logic_error("box variant applied outside the V4 carrier");
    return out;
  }

  // Diamond is definitional (neg . box . neg), so its table is always the
  // composition of the other two, whatever the box variant.
  ValueSet diamond(Value v) const {
    ValueSet out;
    for (Value b : box(neg(v)).values()) out.insert(neg(b));
    return out;
  }

  ValueSet imp(Value a, Value b) const {
    return tables::kImp[index_of(a)][index_of(b)] & carrier_values();
  }
  ValueSet disj(Value a, Value b) const {
    return tables::kOr[index_of(a)][index_of(b)] & carrier_values();
  }
  ValueSet conj(Value a, Value b) const {
    return tables::kAnd[index_of(a)][index_of(b)] & carrier_values();
  }

  ValueSet forall_fold(ValueSet x) const {
    require_foldable(x);
    if (quantifier_mode == QuantifierMode::Deterministic &&
        (x.bits() == detail::kMixedC || x.bits() == detail::kMixedCT))
      return ValueSet::single(Value::Cn);
    return detail::fold_tables(carrier).conj[x.bits()];
  }

  ValueSet exists_fold(ValueSet x) const {
    require_foldable(x);
    if (quantifier_mode == QuantifierMode::Deterministic &&
        (x.bits() == detail::kMixedC || x.bits() == detail::kMixedCF))
      return ValueSet::single(Value::Cp);
    return detail::fold_tables(carrier).disj[x.bits()];
  }

private:
  void require_foldable(ValueSet x) const {
    if (x.empty()) throw std::invalid_argument("quantifier fold over empty value set");
    if (!x.subset_of(carrier_values()))
      throw std::invalid_argument("quantifier fold over values outside the carrier");
  }
};

// Named systems.  The base names select carrier and box variant; the "-c"
// suffix selects the contingent identity axiom pair.
inline std::optional<System> try_make_system(
    std::string name, QuantifierMode qm = QuantifierMode::Deterministic) {
  System sys;
  sys.quantifier_mode = qm;
  sys.name = name;
  std::string base = name;
  if (base.size() > 2 && base.substr(base.size() - 2) == "-c") {
    sys.identity_mode = IdentityMode::Contingent;
    base = base.substr(0, base.size() - 2);
  }
  if (base == "tm") {
    sys.carrier = Carrier::V4;
  } else if (base == "t4m") {
    sys.carrier = Carrier::V4;
    sys.box_variant = BoxVariant::Axiom4;
  } else if (base == "t45m") {
    sys.carrier = Carrier::V4;
    sys.box_variant = BoxVariant::Axiom45;
  } else if (base == "dm") {
    sys.carrier = Carrier::V6;
  } else if (base == "km") {
    sys.carrier = Carrier::V8;
  } else {
    return std::nullopt;
  }
  return sys;
}

inline System make_system(const std::string& name,
                          QuantifierMode qm = QuantifierMode::Deterministic) {
  auto sys = try_make_system(name, qm);
  if (!sys)
    throw std::invalid_argument("unknown system '" + name +
                                "' (expected tm, t4m, t45m, dm or km, optionally with -c)");
  return *sys;
}

inline const std::array<std::string, 10>& system_names() {
  static const std::array<std::string, 10> names = {
      "tm", "t4m", "t45m", "dm", "km", "tm-c", "t4m-c", "t45m-c", "dm-c", "km-c"};
  return names;
}

// Restriction of a system to a smaller carrier: same tables, intersected
// pointwise.  Only the base box table restricts (the iteration variants are
// four-valued already).
inline System restrict_system(const System& sys, Carrier target) {
  if (carrier_size(target) > carrier_size(sys.carrier))
    throw std::invalid_argument("restrict_system: target carrier is larger");
  if (sys.box_variant != BoxVariant::Base && target != sys.carrier)
    throw std::invalid_argument("restrict_system: box variant is V4-only");
  System out = sys;
  out.carrier = target;
  out.name = sys.name + "|" + carrier_name(target);
  return out;
}

}  // namespace nmodal
