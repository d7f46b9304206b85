#pragma once

// The valuation engine: term denotation, ground fingerprints, choice-
// consistent evaluation of formulas over finite structures, bounded
// countermodel search, and randomized soundness trials.
//
// A valuation assigns one truth value to every ground fingerprint (the
// printed alpha-normalized formula with all assignment-determined terms
// replaced by universe elements), constrained so each composite value lies in
// the multioperation set of its children's values.  Keying by fingerprint
// makes the substitution, variant, and equal-denotation coherence rules hold
// by construction: related formula/assignment pairs share a key.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "structure.hpp"
#include "syntax.hpp"
#include "system.hpp"
#include "values.hpp"

namespace nmodal {

struct budget_exhausted : std::runtime_error {
  explicit budget_exhausted(const std::string& what) : std::runtime_error(what) {}
};

struct evaluation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Term denotation and atomic evaluation

inline int denote_term(const Structure& structure, const Assignment& s, const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Variable: {
      auto it = s.find(t->name);
      if (it == s.end())
        throw evaluation_error("variable '" + t->name + "' has no assigned element");
      return it->second;
    }
    case TermKind::Constant:
      return structure.constant(t->name);
    case TermKind::Function: {
      std::vector<int> args;
      args.reserve(t->args.size());
      for (const TermPtr& a : t->args) args.push_back(denote_term(structure, s, a));
      return structure.apply_function(t->name, args);
    }
    case TermKind::Element:
      if (t->element_index < 0 || t->element_index >= structure.universe())
        throw evaluation_error("element term out of range: " + to_string(t));
      return t->element_index;
  }
  throw evaluation_error("malformed term");
}

// Value of an atomic formula (predicate application or identity).  Predicates
// decode the structure's extension regions; the necessary identity is T+ or
// F- and the contingent one C+ or C-, by denotation equality.
inline Value eval_atom(const Structure& structure, const Assignment& s, const FormulaPtr& f) {
  if (f->kind == FormulaKind::Atom) {
    std::vector<int> tuple;
    tuple.reserve(f->terms.size());
    for (const TermPtr& t : f->terms) tuple.push_back(denote_term(structure, s, t));
    return structure.atom_value(f->predicate, tuple);
  }
  if (f->kind == FormulaKind::Identity) {
    int a = denote_term(structure, s, f->terms[0]);
    int b = denote_term(structure, s, f->terms[1]);
    if (f->id_kind == IdentityKind::Necessary) return a == b ? Value::Tp : Value::Fn;
    return a == b ? Value::Cp : Value::Cn;
  }
  throw evaluation_error("eval_atom applied to a non-atomic formula");
}

// ---------------------------------------------------------------------------
// Grounding and fingerprints

namespace detail {

inline TermPtr ground_term(const Structure& structure, const Assignment& s, const TermPtr& t,
                           const std::set<std::string>& bound) {
  bool touches_bound = false;
  for (const std::string& v : term_vars(t))
    if (bound.count(v)) {
      touches_bound = true;
      break;
    }
  if (!touches_bound) return Term::element(denote_term(structure, s, t));
  if (t->kind == TermKind::Variable) return t;  // a bound variable
  std::vector<TermPtr> args;
  args.reserve(t->args.size());
  for (const TermPtr& a : t->args) args.push_back(ground_term(structure, s, a, bound));
  return Term::function(t->name, std::move(args));
}

inline FormulaPtr ground_rec(const Structure& structure, const Assignment& s,
                             const FormulaPtr& f, std::set<std::string>& bound) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      std::vector<TermPtr> args;
      args.reserve(f->terms.size());
      for (const TermPtr& t : f->terms) args.push_back(ground_term(structure, s, t, bound));
      return Formula::atom(f->predicate, std::move(args));
    }
    case FormulaKind::Identity:
      return Formula::identity(f->id_kind, ground_term(structure, s, f->terms[0], bound),
                               ground_term(structure, s, f->terms[1], bound));
    case FormulaKind::Neg:
      return Formula::neg(ground_rec(structure, s, f->lhs, bound));
    case FormulaKind::Box:
      return Formula::box(ground_rec(structure, s, f->lhs, bound));
    case FormulaKind::Imp: {
      FormulaPtr a = ground_rec(structure, s, f->lhs, bound);
      return Formula::imp(std::move(a), ground_rec(structure, s, f->rhs, bound));
    }
    case FormulaKind::Forall: {
      bool inserted = bound.insert(f->var).second;
      FormulaPtr body = ground_rec(structure, s, f->lhs, bound);
      if (inserted) bound.erase(f->var);
      return Formula::forall(f->var, std::move(body));
    }
  }
  throw evaluation_error("malformed formula");
}

}  // namespace detail

// The formula with every term outside the scope of its binders replaced by
// the universe element it denotes.
inline FormulaPtr ground_formula(const Structure& structure, const Assignment& s,
                                 const FormulaPtr& f) {
  std::set<std::string> bound;
  return detail::ground_rec(structure, s, f, bound);
}

// The valuation key: printed alpha-normal form of the grounded formula.
inline std::string fingerprint(const Structure& structure, const Assignment& s,
                               const FormulaPtr& f) {
  return to_string(alpha_normalize(ground_formula(structure, s, f)));
}

// ---------------------------------------------------------------------------
// Valuation: committed choices, exportable as a witness

struct Valuation {
  const System* system = nullptr;
  std::map<std::string, Value> values;  // fingerprint -> committed value
};

struct ChoiceRecord {
  std::string fingerprint;
  Value chosen;
  ValueSet allowed;
};

// ---------------------------------------------------------------------------
// The evaluator: a fingerprint-keyed DAG of choice nodes over one structure

class Evaluator {
public:
  Evaluator(const System& sys, const Structure& structure, long long budget)
      : sys_(&sys), structure_(&structure), budget_(budget) {
    structure.validate_for(sys);
  }

  const System& system() const { return *sys_; }
  const Structure& structure() const { return *structure_; }
  long long budget_remaining() const { return budget_; }
  std::size_t node_count() const { return nodes_.size(); }

  // Build (or find) the node for f under s; children are built first, so a
  // node's id is always greater than its children's.
  int build_root(const FormulaPtr& f, const Assignment& s) {
    Assignment scratch = s;
    return build(f, scratch);
  }

  void reset_values() {
    for (auto& v : value_) v.reset();
  }

  Value committed(int node) const {
    if (!value_[node])
      throw evaluation_error("no value committed for " + nodes_[node].key);
    return *value_[node];
  }

  const std::string& key_of(int node) const { return nodes_[node].key; }

  // The multioperation set of a node given its children's committed values.
  ValueSet allowed_set(int node) const {
    const Node& nd = nodes_[node];
    switch (nd.kind) {
      case NodeKind::Leaf:
        return ValueSet{nd.leaf_value};
      case NodeKind::Neg:
        return ValueSet{sys_->neg(committed(nd.lhs))};
      case NodeKind::Box:
        return sys_->box(committed(nd.lhs));
      case NodeKind::Imp:
        return sys_->imp(committed(nd.lhs), committed(nd.rhs));
      case NodeKind::Forall: {
        ValueSet seen;
        for (int child : nd.instances) seen.insert(committed(child));
        return sys_->forall_fold(seen);
      }
    }
    throw evaluation_error("malformed node");
  }

  // All root values attainable by some completion of the reachable nodes.
  ValueSet attainable(int root) {
    ValueSet out;
    std::vector<int> nodes = reachable(root);
    for (Value v : sys_->carrier_values().values()) {
      reset_values();
      if (dfs(nodes, 0, [&] { return *value_[root] == v; })) out.insert(v);
    }
    reset_values();
    return out;
  }

  // First completion (fixed value order) making the root undesignated.
  std::optional<Value> search_undesignated(int root) {
    std::vector<int> nodes = reachable(root);
    reset_values();
    if (dfs(nodes, 0, [&] { return !designated(*value_[root]); })) return *value_[root];
    reset_values();
    return std::nullopt;
  }

  bool search_value(int root, Value target) {
    std::vector<int> nodes = reachable(root);
    reset_values();
    return dfs(nodes, 0, [&] { return *value_[root] == target; });
  }

  // Commit a uniformly random legal value at every node reachable from root
  // (children first); returns the root's value.  Existing commitments stay.
  Value random_completion(int root, std::mt19937_64& rng) {
    for (int id : reachable(root)) {
      if (value_[id]) continue;
      step();
      std::vector<Value> options = allowed_set(id).values();
      value_[id] = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
    }
    return *value_[root];
  }

  // Commit a random legal value at every node of the graph.
  void complete_all_random(std::mt19937_64& rng) {
    for (int id : order_) {
      if (value_[id]) continue;
      step();
      std::vector<Value> options = allowed_set(id).values();
      value_[id] = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
    }
  }

  // Commit the first legal value (fixed order) at every uncommitted node.
  void complete_all() {
    for (int id : order_) {
      if (value_[id]) continue;
      step();
      value_[id] = allowed_set(id).values().front();
    }
  }

  // Install a stored valuation over every built node, verifying totality and
  // table membership.
  void adopt(const Valuation& v) {
    for (int id : order_) {
      const Node& nd = nodes_[id];
      auto it = v.values.find(nd.key);
      if (it == v.values.end())
        throw evaluation_error("incomplete valuation: no value for " + nd.key);
      value_[id] = it->second;
      if (!allowed_set(id).contains(it->second))
        throw evaluation_error("valuation violates the tables at " + nd.key);
    }
  }

  Valuation snapshot() const {
    Valuation v;
    v.system = sys_;
    for (int id : order_)
      if (value_[id]) v.values[nodes_[id].key] = *value_[id];
    return v;
  }

  // Committed choices in commit order, with the set each was drawn from.
  std::vector<ChoiceRecord> trace() const {
    std::vector<ChoiceRecord> out;
    for (int id : order_)
      if (value_[id]) out.push_back({nodes_[id].key, *value_[id], allowed_set(id)});
    return out;
  }

private:
  // Defined connectives with their own printed tables evaluate as single
  // choice nodes over those tables: a possibility ◇α draws directly from the
  // ◇ row of v(α) and an existential from the ∃ fold.  The sets coincide
  // with the ¬□¬ / ¬∀¬ compositions, but the direct node makes witness
  // valuations list the defined formula's own choice, in the fixed value
  // order of its table.
  enum class NodeKind : std::uint8_t { Leaf, Neg, Box, Imp, Forall };

  struct Node {
    std::string key;
    NodeKind kind = NodeKind::Leaf;
    Value leaf_value = Value::Fn;
    int lhs = -1, rhs = -1;
    std::vector<int> instances;
  };

  void step() {
    if (budget_ <= 0) throw budget_exhausted("evaluation budget exhausted");
    --budget_;
  }

  int build(const FormulaPtr& f, Assignment& s) {
    std::string key = fingerprint(*structure_, s, f);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    step();

    // Defined connectives (◇, ∨, ∧, ∃) evaluate through their expansions: a
    // valuation is a function on formulas, so v(◇α) is pinned to ¬v(□¬α)
    // even when □¬α also occurs on its own.
    Node nd;
    nd.key = key;
    switch (f->kind) {
      case FormulaKind::Atom:
      case FormulaKind::Identity:
        nd.kind = NodeKind::Leaf;
        nd.leaf_value = eval_atom(*structure_, s, f);
        if (!sys_->in_carrier(nd.leaf_value))
          throw evaluation_error("atom value " + std::string(value_name(nd.leaf_value)) +
                                 " lies outside the system carrier");
        break;
      case FormulaKind::Neg:
        nd.kind = NodeKind::Neg;
        nd.lhs = build(f->lhs, s);
        break;
      case FormulaKind::Box:
        nd.kind = NodeKind::Box;
        nd.lhs = build(f->lhs, s);
        break;
      case FormulaKind::Imp:
        nd.kind = NodeKind::Imp;
        nd.lhs = build(f->lhs, s);
        nd.rhs = build(f->rhs, s);
        break;
      case FormulaKind::Forall: {
        nd.kind = NodeKind::Forall;
        auto old = s.find(f->var) == s.end() ? std::optional<int>() : std::optional<int>(s[f->var]);
        for (int e = 0; e < structure_->universe(); ++e) {
          s[f->var] = e;
          nd.instances.push_back(build(f->lhs, s));
        }
        if (old) s[f->var] = *old; else s.erase(f->var);
        break;
      }
    }

    // A void binder grounds to its own body: the child build may have claimed
    // this key already, and the two must share one node.
    auto again = index_.find(key);
    if (again != index_.end()) return again->second;

    int id = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(nd));
    value_.emplace_back();
    index_.emplace(std::move(key), id);
    order_.push_back(id);
    return id;
  }

  // Nodes reachable from root, in ascending id order (children first, root
  // last: ids are assigned after children during the build).
  std::vector<int> reachable(int root) const {
    std::vector<char> mark(nodes_.size(), 0);
    std::vector<int> stack{root};
    mark[root] = 1;
    while (!stack.empty()) {
      int id = stack.back();
      stack.pop_back();
      const Node& nd = nodes_[id];
      auto visit = [&](int child) {
        if (child >= 0 && !mark[child]) {
          mark[child] = 1;
          stack.push_back(child);
        }
      };
      visit(nd.lhs);
      visit(nd.rhs);
      for (int child : nd.instances) visit(child);
    }
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (mark[i]) out.push_back(static_cast<int>(i));
    return out;
  }

  // Depth-first search over the given nodes (children precede parents),
  // trying values in the fixed carrier order.
  bool dfs(const std::vector<int>& nodes, std::size_t idx, const std::function<bool()>& goal) {
    if (idx == nodes.size()) return goal();
    int id = nodes[idx];
    if (value_[id]) return dfs(nodes, idx + 1, goal);
    for (Value v : allowed_set(id).values()) {
      step();
      value_[id] = v;
      if (dfs(nodes, idx + 1, goal)) return true;
    }
    value_[id].reset();
    return false;
  }

  const System* sys_;
  const Structure* structure_;
  long long budget_;
  std::vector<Node> nodes_;
  std::vector<std::optional<Value>> value_;
  std::map<std::string, int> index_;
  std::vector<int> order_;
};

// ---------------------------------------------------------------------------
// Assignments

inline std::vector<Assignment> all_assignments(const std::set<std::string>& vars, int universe) {
  std::vector<std::string> names(vars.begin(), vars.end());
  std::vector<Assignment> out;
  std::vector<int> digits(names.size(), 0);
  for (;;) {
    Assignment s;
    for (std::size_t i = 0; i < names.size(); ++i) s[names[i]] = digits[i];
    out.push_back(std::move(s));
    std::size_t i = names.size();
    while (i-- > 0) {
      if (++digits[i] < universe) break;
      digits[i] = 0;
      if (i == 0) return out;
    }
    if (names.empty()) return out;
  }
}

// ---------------------------------------------------------------------------
// Attainable values and truth

inline ValueSet possible_values(const System& sys, const Structure& structure,
                                const Assignment& s, const FormulaPtr& f,
                                long long budget = 1'000'000'000) {
  structure.validate_usage(collect_usage(f));
  Evaluator ev(sys, structure, budget);
  return ev.attainable(ev.build_root(f, s));
}

// True in (structure, valuation): designated under every assignment of the
// free variables.  The valuation must cover every fingerprint the formula
// needs and respect the tables.
inline bool check_true(const Structure& structure, const Valuation& valuation,
                       const FormulaPtr& f, long long budget = 1'000'000'000) {
  if (valuation.system == nullptr) throw evaluation_error("valuation has no system");
  structure.validate_usage(collect_usage(f));
  Evaluator ev(*valuation.system, structure, budget);
  std::vector<int> roots;
  for (const Assignment& s : all_assignments(free_vars(f), structure.universe()))
    roots.push_back(ev.build_root(f, s));
  ev.adopt(valuation);
  for (int root : roots)
    if (!designated(ev.committed(root))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Bounded countermodel search

enum class SearchVerdict : std::uint8_t { ValidUpToBound, CountermodelFound, BudgetExhausted };

struct Countermodel {
  Structure structure;
  Valuation valuation;    // total over every fingerprint any assignment needs
  Assignment assignment;  // the refuting assignment
  Value value;            // the undesignated value taken there
};

struct SearchResult {
  SearchVerdict verdict = SearchVerdict::ValidUpToBound;
  std::optional<Countermodel> countermodel;
  long long steps = 0;  // budget consumed
};

namespace detail {

// Try one structure: search assignment by assignment; on refutation, extend
// the valuation over all assignments so the witness replays under check_true.
inline std::optional<Countermodel> refute_in_structure(const System& sys,
                                                       const Structure& structure,
                                                       const FormulaPtr& f,
                                                       const std::set<std::string>& vars,
                                                       long long& budget) {
  Evaluator ev(sys, structure, budget);
  std::optional<Countermodel> out;
  std::vector<Assignment> assignments = all_assignments(vars, structure.universe());
  struct BudgetGuard {
    Evaluator& ev;
    long long& budget;
    ~BudgetGuard() { budget = ev.budget_remaining(); }
  } guard{ev, budget};
  for (const Assignment& s : assignments) {
    int root = ev.build_root(f, s);
    std::optional<Value> bad = ev.search_undesignated(root);
    if (!bad) continue;
    // Found: make the valuation total for replay.
    for (const Assignment& s2 : assignments) ev.build_root(f, s2);
    ev.complete_all();
    out = Countermodel{structure, ev.snapshot(), s, *bad};
    break;
  }
  return out;
}

struct AttemptOutcome {
  std::optional<Countermodel> found;
  long long used = 0;
  bool exhausted = false;
};

inline AttemptOutcome attempt_structure(const System& sys, const Structure& structure,
                                        const FormulaPtr& f, const std::set<std::string>& vars,
                                        long long allowance) {
  AttemptOutcome out;
  long long budget = allowance;
  try {
    out.found = refute_in_structure(sys, structure, f, vars, budget);
  } catch (const budget_exhausted&) {
    out.exhausted = true;
  }
  out.used = allowance - budget;
  return out;
}

}  // namespace detail

// Search universes 1..max_universe, all structures over the formula's symbols
// in enumeration order, all assignments, all valuation completions.  With
// jobs > 1, candidate structures run speculatively in parallel batches; the
// outcomes are folded back in enumeration order with sequential budget
// accounting, so verdict and witness never depend on the job count.
inline SearchResult find_countermodel(const FormulaPtr& f, const System& sys, int max_universe,
                                      long long budget, int jobs = 1) {
  SymbolUsage usage = collect_usage(f);
  std::set<std::string> vars = usage.free_variables;
  long long remaining = budget;
  std::size_t batch_size = static_cast<std::size_t>(jobs < 1 ? 1 : jobs);
  SearchResult result;
  for (int n = 1; n <= max_universe; ++n) {
    StructureEnumerator en(n, usage, sys.carrier);
    bool more = true;
    while (more) {
      std::vector<Structure> batch;
      while (batch.size() < batch_size) {
        std::optional<Structure> s = en.next();
        if (!s) {
          more = false;
          break;
        }
        batch.push_back(std::move(*s));
      }
      if (batch.empty()) break;
      std::vector<detail::AttemptOutcome> outcomes(batch.size());
      if (batch.size() == 1) {
        outcomes[0] = detail::attempt_structure(sys, batch[0], f, vars, remaining);
      } else {
        std::vector<std::thread> workers;
        workers.reserve(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i)
          workers.emplace_back([&, i] {
            outcomes[i] = detail::attempt_structure(sys, batch[i], f, vars, remaining);
          });
        for (std::thread& w : workers) w.join();
      }
      for (std::size_t i = 0; i < batch.size(); ++i) {
        detail::AttemptOutcome& o = outcomes[i];
        // A worker ran with the budget as of the batch start; charge the
        // structures in order so the outcome matches a sequential run.
        if (o.exhausted || o.used > remaining) {
          result.verdict = SearchVerdict::BudgetExhausted;
          result.steps = budget;
          return result;
        }
        remaining -= o.used;
        if (o.found) {
          result.verdict = SearchVerdict::CountermodelFound;
          result.countermodel = std::move(o.found);
          result.steps = budget - remaining;
          return result;
        }
      }
    }
  }
  result.verdict = SearchVerdict::ValidUpToBound;
  result.steps = budget - remaining;
  return result;
}

// ---------------------------------------------------------------------------
// Randomized soundness trials

inline Structure random_structure(std::mt19937_64& rng, int universe, const SymbolUsage& usage,
                                  Carrier carrier) {
  Structure out(universe);
  auto mask = [&](std::size_t tuples) {
    std::uint64_t limit = std::uint64_t{1} << tuples;
    return std::uniform_int_distribution<std::uint64_t>(0, limit - 1)(rng);
  };
  for (const auto& [name, arity] : usage.predicates) {
    std::size_t k = out.tuple_count(arity);
    if (k > 20) throw structure_error("universe too large for random structures");
    if (carrier == Carrier::V4) {
      out.set_predicate_pair_masks(name, arity, mask(k), mask(k));
    } else {
      std::uint64_t p = mask(k);
      std::uint64_t n = carrier == Carrier::V6 ? (mask(k) & p) : mask(k);
      out.set_predicate_triple_masks(name, arity, mask(k), n, p);
    }
  }
  for (const auto& [name, arity] : usage.functions) {
    std::size_t k = out.tuple_count(arity);
    std::vector<int> table(k);
    for (int& v : table) v = std::uniform_int_distribution<int>(0, universe - 1)(rng);
    out.set_function(name, arity, std::move(table));
  }
  for (const std::string& name : usage.constants)
    out.set_constant(name, std::uniform_int_distribution<int>(0, universe - 1)(rng));
  return out;
}

inline Assignment random_assignment(std::mt19937_64& rng, const std::set<std::string>& vars,
                                    int universe) {
  Assignment s;
  for (const std::string& v : vars)
    s[v] = std::uniform_int_distribution<int>(0, universe - 1)(rng);
  return s;
}

struct SoundnessFailure {
  std::string formula;
  int universe = 0;
  std::string assignment;
  std::string detail;  // committed choices, one per line
};

struct SoundnessReport {
  int trials = 0;
  int failures = 0;
  std::vector<SoundnessFailure> examples;  // capped at a few
  bool ok() const { return failures == 0; }
};

using InstanceGenerator = std::function<FormulaPtr(std::mt19937_64&)>;

// For `trials` random (instance, structure, assignment, valuation) draws,
// check that the instance evaluates designated.  Any failure is recorded
// with its full choice trace.
inline SoundnessReport check_axiom_soundness(const System& sys, const InstanceGenerator& gen,
                                             int trials, std::uint64_t seed,
                                             int max_universe = 3,
                                             long long budget_per_trial = 200'000) {
  std::mt19937_64 rng(seed);
  SoundnessReport report;
  for (int t = 0; t < trials; ++t) {
    FormulaPtr instance = gen(rng);
    SymbolUsage usage = collect_usage(instance);
    int universe = std::uniform_int_distribution<int>(1, max_universe)(rng);
    Structure structure = random_structure(rng, universe, usage, sys.carrier);
    Assignment s = random_assignment(rng, usage.free_variables, universe);
    Evaluator ev(sys, structure, budget_per_trial);
    int root = ev.build_root(instance, s);
    Value v = ev.random_completion(root, rng);
    ++report.trials;
    if (!designated(v)) {
      ++report.failures;
      if (report.examples.size() < 5) {
        SoundnessFailure fail;
        fail.formula = to_string(instance);
        fail.universe = universe;
        for (const auto& [var, e] : s)
          fail.assignment += var + "=" + std::to_string(e) + " ";
        for (const ChoiceRecord& rec : ev.trace())
          fail.detail += rec.fingerprint + " := " + std::string(value_name(rec.chosen)) +
                         " from " + rec.allowed.to_string() + "\n";
        report.examples.push_back(std::move(fail));
      }
    }
  }
  return report;
}

}  // namespace nmodal
