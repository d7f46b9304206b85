#pragma once

// Finite first-order structures: a universe of elements, per-predicate
// extensions stored as actual/necessary/possible tuple sets, total function
// tables, and constant denotations.  Also the deterministic structure
// enumerator used by the bounded countermodel search.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "syntax.hpp"
#include "system.hpp"
#include "values.hpp"

namespace nmodal {

struct structure_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-predicate interpretation.  The three tuple sets are the actual,
// necessary and possible extensions; their Boolean regions decode to the
// eight truth values.  Four-valued structures are declared as a pair
// (actual, contingent), stored here as n = a minus c, p = a union c, with
// c recoverable as p minus n.
struct PredicateExtension {
  int arity = 0;
  bool pair_form = false;            // declared as (a, c) rather than (a, n, p)
  std::vector<char> a, n, p;         // indexed by row-major tuple index

  std::vector<char> contingent() const {  // c = p \ n (pair form only)
    std::vector<char> c(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) c[i] = p[i] && !n[i];
    return c;
  }
};

struct FunctionTable {
  int arity = 0;
  std::vector<int> table;            // row-major over argument tuples
};

// Total map from the query's variables to universe elements.
using Assignment = std::map<std::string, int>;

class Structure {
public:
  explicit Structure(int universe_size) : universe_(universe_size) {
    if (universe_size < 1) throw structure_error("universe must be nonempty");
  }

  int universe() const { return universe_; }

  // Number of argument tuples for a given arity.
  std::size_t tuple_count(int arity) const {
    std::size_t k = 1;
    for (int i = 0; i < arity; ++i) {
      if (k > (static_cast<std::size_t>(1) << 40) / universe_)
        throw structure_error("predicate arity too large for this universe");
      k *= static_cast<std::size_t>(universe_);
    }
    return k;
  }

  // Row-major index of an argument tuple (first coordinate most significant).
  std::size_t tuple_index(const std::vector<int>& tuple) const {
    std::size_t idx = 0;
    for (int t : tuple) {
      if (t < 0 || t >= universe_)
        throw structure_error("tuple element out of range: " + std::to_string(t));
      idx = idx * static_cast<std::size_t>(universe_) + static_cast<std::size_t>(t);
    }
    return idx;
  }

  void add_predicate_pair(const std::string& name, int arity,
                          const std::vector<std::vector<int>>& actual,
                          const std::vector<std::vector<int>>& contingent) {
    PredicateExtension ext;
    ext.arity = check_new_predicate(name, arity);
    ext.pair_form = true;
    std::size_t k = tuple_count(arity);
    std::vector<char> a = tuples_to_flags(actual, arity, k);
    std::vector<char> c = tuples_to_flags(contingent, arity, k);
    ext.a = a;
    ext.n.resize(k);
    ext.p.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      ext.n[i] = a[i] && !c[i];
      ext.p[i] = a[i] || c[i];
    }
    predicates_[name] = std::move(ext);
  }

  void add_predicate_triple(const std::string& name, int arity,
                            const std::vector<std::vector<int>>& actual,
                            const std::vector<std::vector<int>>& necessary,
                            const std::vector<std::vector<int>>& possible) {
    PredicateExtension ext;
    ext.arity = check_new_predicate(name, arity);
    ext.pair_form = false;
    std::size_t k = tuple_count(arity);
    ext.a = tuples_to_flags(actual, arity, k);
    ext.n = tuples_to_flags(necessary, arity, k);
    ext.p = tuples_to_flags(possible, arity, k);
    predicates_[name] = std::move(ext);
  }

  // Mask forms used by the enumerator: bit i covers the tuple with row-major
  // index i.
  void set_predicate_pair_masks(const std::string& name, int arity, std::uint64_t a,
                                std::uint64_t c) {
    PredicateExtension& ext = predicates_[name];
    ext.arity = arity;
    ext.pair_form = true;
    std::size_t k = tuple_count(arity);
    ext.a.assign(k, 0);
    ext.n.assign(k, 0);
    ext.p.assign(k, 0);
    for (std::size_t i = 0; i < k; ++i) {
      bool in_a = (a >> i) & 1, in_c = (c >> i) & 1;
      ext.a[i] = in_a;
      ext.n[i] = in_a && !in_c;
      ext.p[i] = in_a || in_c;
    }
  }

  void set_predicate_triple_masks(const std::string& name, int arity, std::uint64_t a,
                                  std::uint64_t n, std::uint64_t p) {
    PredicateExtension& ext = predicates_[name];
    ext.arity = arity;
    ext.pair_form = false;
    std::size_t k = tuple_count(arity);
    ext.a.assign(k, 0);
    ext.n.assign(k, 0);
    ext.p.assign(k, 0);
    for (std::size_t i = 0; i < k; ++i) {
      ext.a[i] = (a >> i) & 1;
      ext.n[i] = (n >> i) & 1;
      ext.p[i] = (p >> i) & 1;
    }
  }

  void add_function(const std::string& name, int arity, std::vector<int> table) {
    if (arity < 1) throw structure_error("function arity must be >= 1: " + name);
    if (declares(name)) throw structure_error("symbol already interpreted: " + name);
    std::size_t k = tuple_count(arity);
    if (table.size() != k)
      throw structure_error("function table for '" + name + "' must have " +
                            std::to_string(k) + " entries, got " +
                            std::to_string(table.size()));
    for (int v : table)
      if (v < 0 || v >= universe_)
        throw structure_error("function table value out of range in '" + name + "'");
    functions_[name] = FunctionTable{arity, std::move(table)};
  }

  void set_function(const std::string& name, int arity, std::vector<int> table) {
    functions_[name] = FunctionTable{arity, std::move(table)};
  }

  void add_constant(const std::string& name, int element) {
    if (declares(name)) throw structure_error("symbol already interpreted: " + name);
    if (element < 0 || element >= universe_)
      throw structure_error("constant '" + name + "' denotes no element");
    constants_[name] = element;
  }

  void set_constant(const std::string& name, int element) { constants_[name] = element; }

  const std::map<std::string, PredicateExtension>& predicates() const { return predicates_; }
  const std::map<std::string, FunctionTable>& functions() const { return functions_; }
  const std::map<std::string, int>& constants() const { return constants_; }

  bool declares(const std::string& name) const {
    return predicates_.count(name) || functions_.count(name) || constants_.count(name);
  }

  // Truth value of a predicate applied to an element tuple, decoded from the
  // membership regions of the three extensions.
  Value atom_value(const std::string& predicate, const std::vector<int>& tuple) const {
    auto it = predicates_.find(predicate);
    if (it == predicates_.end())
      throw structure_error("predicate '" + predicate + "' is not interpreted");
    const PredicateExtension& ext = it->second;
    if (static_cast<int>(tuple.size()) != ext.arity)
      throw structure_error("predicate '" + predicate + "' expects " +
                            std::to_string(ext.arity) + " arguments");
    std::size_t i = tuple_index(tuple);
    bool a = ext.a[i], n = ext.n[i], p = ext.p[i];
    if (a) {
      if (n && p) return Value::Tp;
      if (!n && p) return Value::Cp;
      if (n) return Value::Ip;  // a, n, not p
      return Value::Fp;         // a alone
    }
    if (n && p) return Value::Tn;
    if (!n && p) return Value::Cn;
    if (n) return Value::In;  // n alone
    return Value::Fn;         // outside all three
  }

  int apply_function(const std::string& name, const std::vector<int>& args) const {
    auto it = functions_.find(name);
    if (it == functions_.end())
      throw structure_error("function '" + name + "' is not interpreted");
    if (static_cast<int>(args.size()) != it->second.arity)
      throw structure_error("function '" + name + "' expects " +
                            std::to_string(it->second.arity) + " arguments");
    return it->second.table[tuple_index(args)];
  }

  int constant(const std::string& name) const {
    auto it = constants_.find(name);
    if (it == constants_.end())
      throw structure_error("constant '" + name + "' is not interpreted");
    return it->second;
  }

  // Carrier shape check: a four-valued structure may not realize the extra
  // regions of the larger carriers, and a six-valued one may not realize the
  // I regions (equivalently: necessary implies possible).
  void validate_for(const System& sys) const {
    for (const auto& [name, ext] : predicates_) {
      for (std::size_t i = 0; i < ext.a.size(); ++i) {
        Value v = region_value(ext.a[i], ext.n[i], ext.p[i]);
        if (!sys.in_carrier(v))
          throw structure_error("predicate '" + name +
                                "' realizes the value " + std::string(value_name(v)) +
                                " outside the " + std::string(carrier_name(sys.carrier)) +
                                " carrier");
      }
    }
  }

  // The declared symbols as a parsing signature (nullary predicates are
  // inferred by the parser rather than declared).
  Signature signature() const {
    Signature sig;
    for (const auto& [name, ext] : predicates_)
      if (ext.arity >= 1) sig.add_predicate(name, ext.arity);
    for (const auto& [name, fn] : functions_) sig.add_function(name, fn.arity);
    for (const auto& [name, e] : constants_) sig.add_constant(name);
    return sig;
  }

  // Every symbol a formula uses must be interpreted with a matching arity.
  void validate_usage(const SymbolUsage& usage) const {
    for (const auto& [name, arity] : usage.predicates) {
      auto it = predicates_.find(name);
      if (it == predicates_.end())
        throw structure_error("predicate '" + name + "' is not interpreted");
      if (it->second.arity != arity)
        throw structure_error("predicate '" + name + "' is interpreted with arity " +
                              std::to_string(it->second.arity) + ", used with " +
                              std::to_string(arity));
    }
    for (const auto& [name, arity] : usage.functions) {
      auto it = functions_.find(name);
      if (it == functions_.end())
        throw structure_error("function '" + name + "' is not interpreted");
      if (it->second.arity != arity)
        throw structure_error("function '" + name + "' is interpreted with arity " +
                              std::to_string(it->second.arity) + ", used with " +
                              std::to_string(arity));
    }
    for (const std::string& name : usage.constants)
      if (!constants_.count(name))
        throw structure_error("constant '" + name + "' is not interpreted");
  }

private:
  static Value region_value(bool a, bool n, bool p) {
    if (a) {
      if (n && p) return Value::Tp;
      if (!n && p) return Value::Cp;
      if (n) return Value::Ip;
      return Value::Fp;
    }
    if (n && p) return Value::Tn;
    if (!n && p) return Value::Cn;
    if (n) return Value::In;
    return Value::Fn;
  }

  int check_new_predicate(const std::string& name, int arity) {
    if (arity < 0) throw structure_error("negative predicate arity: " + name);
    if (declares(name)) throw structure_error("symbol already interpreted: " + name);
    return arity;
  }

  std::vector<char> tuples_to_flags(const std::vector<std::vector<int>>& tuples, int arity,
                                    std::size_t k) const {
    std::vector<char> flags(k, 0);
    for (const std::vector<int>& t : tuples) {
      if (static_cast<int>(t.size()) != arity)
        throw structure_error("extension tuple has wrong arity");
      flags[tuple_index(t)] = 1;
    }
    return flags;
  }

  int universe_;
  std::map<std::string, PredicateExtension> predicates_;
  std::map<std::string, FunctionTable> functions_;
  std::map<std::string, int> constants_;
};

// ---------------------------------------------------------------------------
// Deterministic enumeration of every structure over a fixed universe and
// symbol set.  Symbols advance like an odometer: predicates first, then
// functions, then constants, each group in name order, with the last symbol
// cycling fastest.  Within one predicate the component order is the actual
// extension (most significant), then the contingent one for four-valued
// carriers, or the necessary then possible ones for the larger carriers.
// Extension masks ascend as integers, so the empty set comes first.

class StructureEnumerator {
public:
  StructureEnumerator(int universe, const SymbolUsage& usage, Carrier carrier)
      : universe_(universe), carrier_(carrier) {
    if (universe < 1) throw structure_error("universe must be nonempty");
    for (const auto& [name, arity] : usage.predicates) {
      std::size_t k = probe_tuple_count(arity);
      if (k > 20) throw structure_error("universe too large to enumerate predicate '" + name + "'");
      predicates_.push_back(PredState{name, arity, k, 0, 0, 0});
    }
    for (const auto& [name, arity] : usage.functions) {
      std::size_t k = probe_tuple_count(arity);
      if (k > 20) throw structure_error("universe too large to enumerate function '" + name + "'");
      functions_.push_back(FnState{name, arity, std::vector<int>(k, 0)});
    }
    for (const std::string& name : usage.constants) constants_.push_back(ConstState{name, 0});
  }

  // Produce the current structure, or nothing once the odometer has wrapped.
  std::optional<Structure> next() {
    if (done_) return std::nullopt;
    Structure out(universe_);
    for (const PredState& ps : predicates_) {
      if (carrier_ == Carrier::V4)
        out.set_predicate_pair_masks(ps.name, ps.arity, ps.a, ps.c);
      else
        out.set_predicate_triple_masks(ps.name, ps.arity, ps.a, ps.n, ps.p);
    }
    for (const FnState& fs : functions_) out.set_function(fs.name, fs.arity, fs.table);
    for (const ConstState& cs : constants_) out.set_constant(cs.name, cs.element);
    advance();
    return out;
  }

private:
  struct PredState {
    std::string name;
    int arity;
    std::size_t tuples;
    std::uint64_t a, c;     // four-valued carrier
    std::uint64_t n = 0, p = 0;  // larger carriers
  };
  struct FnState {
    std::string name;
    int arity;
    std::vector<int> table;
  };
  struct ConstState {
    std::string name;
    int element;
  };

  std::size_t probe_tuple_count(int arity) const {
    std::size_t k = 1;
    for (int i = 0; i < arity; ++i) k *= static_cast<std::size_t>(universe_);
    return k;
  }

  // Advance one component; true while it has not wrapped around.
  bool advance_predicate(PredState& ps) {
    std::uint64_t limit = std::uint64_t{1} << ps.tuples;
    if (carrier_ == Carrier::V4) {
      if (++ps.c < limit) return true;
      ps.c = 0;
      if (++ps.a < limit) return true;
      ps.a = 0;
      return false;
    }
    // Triple order: a major, then n, then p fastest; six-valued carriers
    // additionally require n to be a subset of p, so invalid combinations
    // are skipped.  A full wrap lands on (0,0,0), which is always valid.
    for (;;) {
      bool wrapped = false;
      if (++ps.p >= limit) {
        ps.p = 0;
        if (++ps.n >= limit) {
          ps.n = 0;
          if (++ps.a >= limit) {
            ps.a = 0;
            wrapped = true;
          }
        }
      }
      if (wrapped) return false;
      if (valid_triple(ps)) return true;
    }
  }

  bool valid_triple(const PredState& ps) const {
    if (carrier_ == Carrier::V8) return true;
    return (ps.n & ~ps.p) == 0;  // necessary within possible (no I regions)
  }

  bool advance_function(FnState& fs) {
    for (std::size_t i = fs.table.size(); i-- > 0;) {
      if (++fs.table[i] < universe_) return true;
      fs.table[i] = 0;
    }
    return false;
  }

  void advance() {
    for (std::size_t i = constants_.size(); i-- > 0;) {
      if (++constants_[i].element < universe_) return;
      constants_[i].element = 0;
    }
    for (std::size_t i = functions_.size(); i-- > 0;)
      if (advance_function(functions_[i])) return;
    for (std::size_t i = predicates_.size(); i-- > 0;)
      if (advance_predicate(predicates_[i])) return;
    done_ = true;
  }

  int universe_;
  Carrier carrier_;
  std::vector<PredState> predicates_;
  std::vector<FnState> functions_;
  std::vector<ConstState> constants_;
  bool done_ = false;
};

}  // namespace nmodal
