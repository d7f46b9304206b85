// Command-line interface: inspect formulas and system tables, decide
// propositional validity, evaluate formulas over finite structures, search
// for countermodels, and check Hilbert-style derivations.
//
// Exit codes are part of the contract:
//   truthtable   0 tautology, 1 refuted, 2 error
//   valid        0 valid up to the bound, 1 countermodel, 3 budget exhausted,
//                2 error
//   check-proof  0 accepted, 1 rejected, 2 error
//   parse/tables/eval  0 success, 2 error

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nmodal/json_io.hpp"
#include "nmodal/proof.hpp"
#include "nmodal/propositional.hpp"
#include "nmodal/semantics.hpp"
#include "nmodal/syntax.hpp"
#include "nmodal/system.hpp"

namespace {

using namespace nmodal;
using nlohmann::json;

struct GlobalOptions {
  std::string system = "tm";
  std::string quantifier = "det";
  std::string format = "text";
  unsigned seed = 0;  // reserved for randomized tooling; subcommands are deterministic
  int max_domain = 3;
  long long budget = 10'000'000;
  int jobs = 1;
};

void add_common_options(CLI::App* cmd, GlobalOptions& opts) {
  cmd->add_option("--system", opts.system,
                  "Logic system: tm, t4m, t45m, dm, km, each optionally with "
                  "suffix -c for contingent identity")
      ->default_val("tm");
  cmd->add_option("--quantifier", opts.quantifier,
                  "Quantifier mode: det (deterministic folds) or nd")
      ->check(CLI::IsMember({"det", "nd"}))
      ->default_val("det");
  cmd->add_option("--format", opts.format, "Output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->default_val("text");
  cmd->add_option("--seed", opts.seed,
                  "Random seed (reserved; current subcommands are deterministic)");
}

System resolve_system(const GlobalOptions& opts) {
  QuantifierMode qm = opts.quantifier == "nd" ? QuantifierMode::Nondeterministic
                                              : QuantifierMode::Deterministic;
  std::optional<System> sys = try_make_system(opts.system, qm);
  if (!sys) {
    std::string names;
    for (const std::string& n : system_names()) names += (names.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown system '" + opts.system + "' (one of: " + names + ")");
  }
  return *sys;
}

std::string set_text(ValueSet s) {
  std::string out = "{";
  bool first = true;
  for (Value v : s.values()) {
    if (!first) out += ",";
    out += std::string(value_name(v));
    first = false;
  }
  return out + "}";
}

json set_json(ValueSet s) {
  json out = json::array();
  for (Value v : s.values()) out.push_back(std::string(value_name(v)));
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw io_error("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw io_error(path + ": " + e.what());
  }
  return j;
}

void emit(const GlobalOptions& opts, const std::string& text, const json& j) {
  if (opts.format == "json")
    std::cout << j.dump(2) << "\n";
  else
    std::cout << text;
}

// Every nonempty subset of the carrier, in ascending bitmask order.
std::vector<ValueSet> carrier_subsets(const System& sys) {
  std::vector<ValueSet> out;
  std::uint8_t carrier = sys.carrier_values().bits();
  for (int bits = 1; bits < 256; ++bits) {
    auto b = static_cast<std::uint8_t>(bits);
    if ((b & carrier) == b) out.emplace_back(ValueSet(b));
  }
  return out;
}

// ---------------------------------------------------------------------------
// tables

int cmd_tables(const GlobalOptions& opts) {
  System sys = resolve_system(opts);
  std::vector<Value> carrier = sys.carrier_values().values();

  std::ostringstream text;
  text << "system " << sys.name << " (carrier " << carrier_name(sys.carrier) << ", designated "
       << set_text(sys.designated_values()) << ", quantifiers " << opts.quantifier << ")\n";
  text << "\nnegation\n";
  for (Value v : carrier)
    text << "  " << "¬ " << value_name(v) << " → " << value_name(sys.neg(v)) << "\n";
  text << "\nnecessity\n";
  for (Value v : carrier)
    text << "  " << "□ " << value_name(v) << " → " << set_text(sys.box(v)) << "\n";
  text << "\npossibility\n";
  for (Value v : carrier)
    text << "  " << "◇ " << value_name(v) << " → " << set_text(sys.diamond(v)) << "\n";
  auto binary = [&](const char* title, auto op) {
    text << "\n" << title << "\n";
    for (Value a : carrier)
      for (Value b : carrier)
        text << "  (" << value_name(a) << ", " << value_name(b) << ") → " << set_text(op(a, b))
             << "\n";
  };
  binary("implication", [&](Value a, Value b) { return sys.imp(a, b); });
  binary("disjunction", [&](Value a, Value b) { return sys.disj(a, b); });
  binary("conjunction", [&](Value a, Value b) { return sys.conj(a, b); });
  text << "\nuniversal fold\n";
  for (ValueSet x : carrier_subsets(sys))
    text << "  " << "∀ " << set_text(x) << " → " << set_text(sys.forall_fold(x)) << "\n";
  text << "\nexistential fold\n";
  for (ValueSet x : carrier_subsets(sys))
    text << "  " << "∃ " << set_text(x) << " → " << set_text(sys.exists_fold(x)) << "\n";

  json j;
  j["system"] = sys.name;
  j["carrier"] = set_json(sys.carrier_values());
  j["designated"] = set_json(sys.designated_values());
  j["quantifier"] = opts.quantifier;
  json neg, box, diamond;
  for (Value v : carrier) {
    neg[std::string(value_name(v))] = std::string(value_name(sys.neg(v)));
    box[std::string(value_name(v))] = set_json(sys.box(v));
    diamond[std::string(value_name(v))] = set_json(sys.diamond(v));
  }
  j["neg"] = std::move(neg);
  j["box"] = std::move(box);
  j["diamond"] = std::move(diamond);
  auto binary_json = [&](auto op) {
    json table;
    for (Value a : carrier) {
      json row;
      for (Value b : carrier) row[std::string(value_name(b))] = set_json(op(a, b));
      table[std::string(value_name(a))] = std::move(row);
    }
    return table;
  };
  j["imp"] = binary_json([&](Value a, Value b) { return sys.imp(a, b); });
  j["or"] = binary_json([&](Value a, Value b) { return sys.disj(a, b); });
  j["and"] = binary_json([&](Value a, Value b) { return sys.conj(a, b); });
  json forall, exists;
  for (ValueSet x : carrier_subsets(sys)) {
    forall[set_text(x)] = set_json(sys.forall_fold(x));
    exists[set_text(x)] = set_json(sys.exists_fold(x));
  }
  j["forall"] = std::move(forall);
  j["exists"] = std::move(exists);

  emit(opts, text.str(), j);
  return 0;
}

// ---------------------------------------------------------------------------
// parse

int cmd_parse(const GlobalOptions& opts, const std::string& formula_text,
              const std::string& structure_path) {
  FormulaPtr f;
  std::optional<Structure> structure;
  if (!structure_path.empty()) {
    structure = structure_from_json(read_json_file(structure_path));
    ParseOptions popts;
    popts.undeclared_terms = UndeclaredTerms::Variable;
    f = parse_formula(formula_text, structure->signature(), popts);
  } else {
    f = parse_formula(formula_text);
  }
  SymbolUsage usage = collect_usage(f);

  std::ostringstream text;
  text << "formula: " << to_string(f) << "\n";
  auto list_map = [&](const char* label, const std::map<std::string, int>& m) {
    if (m.empty()) return;
    text << label << ":";
    for (const auto& [name, arity] : m) text << " " << name << "/" << arity;
    text << "\n";
  };
  list_map("predicates", usage.predicates);
  list_map("functions", usage.functions);
  if (!usage.constants.empty()) {
    text << "constants:";
    for (const std::string& c : usage.constants) text << " " << c;
    text << "\n";
  }
  if (!usage.free_variables.empty()) {
    text << "free variables:";
    for (const std::string& v : usage.free_variables) text << " " << v;
    text << "\n";
  }
  text << "sentence: " << (is_sentence(f) ? "yes" : "no") << "\n";

  json j;
  j["formula"] = to_string(f);
  j["predicates"] = usage.predicates;
  j["functions"] = usage.functions;
  j["constants"] = usage.constants;
  j["free_variables"] = usage.free_variables;
  j["sentence"] = is_sentence(f);

  emit(opts, text.str(), j);
  return 0;
}

// ---------------------------------------------------------------------------
// truthtable

int cmd_truthtable(const GlobalOptions& opts, const std::string& formula_text, long long limit,
                   bool full) {
  System sys = resolve_system(opts);
  FormulaPtr f = parse_formula(formula_text);
  PropVerdict verdict = is_tautology(f, sys, limit);

  std::ostringstream text;
  json j;
  j["formula"] = to_string(f);
  j["system"] = sys.name;
  j["verdict"] = verdict.holds ? "tautology" : "refuted";
  j["valuations"] = verdict.valuations;
  j["exhaustive"] = verdict.exhaustive;
  text << (verdict.holds ? "tautology" : "refuted") << " in " << sys.name << " ("
       << verdict.valuations << " legal valuation" << (verdict.valuations == 1 ? "" : "s")
       << (verdict.exhaustive ? "" : ", enumeration capped: verdict not exhaustive") << ")\n";
  if (!verdict.holds && verdict.witness) {
    text << "witness valuation:\n";
    json rows = json::array();
    for (const auto& [sub, v] : verdict.witness->entries) {
      text << "  " << to_string(sub) << " = " << value_name(v) << "\n";
      rows.push_back({{"formula", to_string(sub)}, {"value", std::string(value_name(v))}});
    }
    j["witness"] = std::move(rows);
  }
  if (full) {
    std::vector<PropValuation> all = legal_valuations(f, sys, limit);
    text << "legal valuations:\n";
    json table = json::array();
    for (const PropValuation& val : all) {
      json rows = json::array();
      text << " ";
      for (const auto& [sub, v] : val.entries) {
        text << " " << to_string(sub) << "=" << value_name(v);
        rows.push_back({{"formula", to_string(sub)}, {"value", std::string(value_name(v))}});
      }
      text << "\n";
      table.push_back(std::move(rows));
    }
    j["table"] = std::move(table);
  }

  emit(opts, text.str(), j);
  return verdict.holds ? 0 : 1;
}

// ---------------------------------------------------------------------------
// eval

std::string assignment_text(const Assignment& s) {
  if (s.empty()) return "(sentence)";
  std::string out;
  for (const auto& [var, elem] : s) {
    if (!out.empty()) out += ", ";
    out += var + "=" + std::to_string(elem);
  }
  return out;
}

int cmd_eval(const GlobalOptions& opts, const std::string& formula_text,
             const std::string& structure_path) {
  System sys = resolve_system(opts);
  Structure structure = structure_from_json(read_json_file(structure_path));
  structure.validate_for(sys);
  ParseOptions popts;
  popts.undeclared_terms = UndeclaredTerms::Variable;
  FormulaPtr f = parse_formula(formula_text, structure.signature(), popts);

  std::ostringstream text;
  text << "formula: " << to_string(f) << "\n";
  json j;
  j["formula"] = to_string(f);
  j["system"] = sys.name;
  json rows = json::array();
  bool always_designated = true;
  for (const Assignment& s : all_assignments(free_vars(f), structure.universe())) {
    ValueSet values = possible_values(sys, structure, s, f, opts.budget);
    for (Value v : values.values())
      if (!designated(v)) always_designated = false;
    text << "  " << assignment_text(s) << ": " << set_text(values) << "\n";
    json row;
    row["assignment"] = s;
    row["values"] = set_json(values);
    rows.push_back(std::move(row));
  }
  j["assignments"] = std::move(rows);
  j["always_designated"] = always_designated;
  text << (always_designated
               ? "designated under every admissible valuation and assignment\n"
               : "an undesignated value is attainable\n");

  emit(opts, text.str(), j);
  return 0;
}

// ---------------------------------------------------------------------------
// valid

int cmd_valid(const GlobalOptions& opts, const std::string& formula_text) {
  System sys = resolve_system(opts);
  FormulaPtr f = parse_formula(formula_text);
  SearchResult r = find_countermodel(f, sys, opts.max_domain, opts.budget, opts.jobs);

  std::ostringstream text;
  json j;
  j["formula"] = to_string(f);
  j["system"] = sys.name;
  j["steps"] = r.steps;
  switch (r.verdict) {
    case SearchVerdict::ValidUpToBound:
      j["verdict"] = "valid-up-to-bound";
      j["max_domain"] = opts.max_domain;
      text << "valid up to domain size " << opts.max_domain << " in " << sys.name << " ("
           << r.steps << " search steps)\n";
      emit(opts, text.str(), j);
      return 0;
    case SearchVerdict::CountermodelFound: {
      const Countermodel& cm = *r.countermodel;
      j["verdict"] = "countermodel";
      j["structure"] = structure_to_json(cm.structure);
      j["assignment"] = cm.assignment;
      j["value"] = std::string(value_name(cm.value));
      j["valuation"] = valuation_to_json(cm.valuation);
      text << "countermodel found in " << sys.name << " (domain size "
           << cm.structure.universe() << ")\n";
      text << "structure:\n" << structure_to_json(cm.structure).dump(2) << "\n";
      text << "assignment: " << assignment_text(cm.assignment) << "\n";
      text << "formula value: " << value_name(cm.value) << "\n";
      text << "valuation witness:\n" << valuation_to_json(cm.valuation).dump(2) << "\n";
      emit(opts, text.str(), j);
      return 1;
    }
    case SearchVerdict::BudgetExhausted:
      j["verdict"] = "budget-exhausted";
      text << "budget exhausted after " << r.steps << " steps (no verdict)\n";
      emit(opts, text.str(), j);
      return 3;
  }
  return 2;
}

// ---------------------------------------------------------------------------
// check-proof

int cmd_check_proof(const GlobalOptions& opts, const std::string& derivation_path,
                    bool system_overridden) {
  Derivation d = derivation_from_json(read_json_file(derivation_path));
  GlobalOptions resolved = opts;
  if (!system_overridden) resolved.system = d.system_name;
  System sys = resolve_system(resolved);
  CheckReport report = check_derivation(d, sys);

  json j = report_to_json(d, report);
  j["system"] = sys.name;
  emit(opts, report_to_text(d, report), j);
  return report.accepted ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-deterministic matrix modal logic workbench"};
  app.require_subcommand(1);

  GlobalOptions opts;

  CLI::App* tables = app.add_subcommand("tables", "Print a system's truth tables");
  add_common_options(tables, opts);

  std::string parse_formula_text, parse_structure;
  CLI::App* parse = app.add_subcommand("parse", "Parse a formula and report its symbols");
  parse->add_option("formula", parse_formula_text, "Formula text")->required();
  parse->add_option("--structure", parse_structure,
                    "Structure file providing the signature (undeclared identifiers "
                    "then read as variables instead of constants)");
  add_common_options(parse, opts);

  std::string tt_formula;
  long long tt_limit = -1;
  bool tt_full = false;
  CLI::App* truthtable =
      app.add_subcommand("truthtable", "Decide a propositional formula by legal valuations");
  truthtable->add_option("formula", tt_formula, "Propositional formula")->required();
  truthtable->add_option("--limit", tt_limit, "Cap on enumerated valuations");
  truthtable->add_flag("--full", tt_full, "Print every legal valuation");
  add_common_options(truthtable, opts);

  std::string eval_formula, eval_structure;
  CLI::App* eval = app.add_subcommand("eval", "Attainable values of a formula in a structure");
  eval->add_option("formula", eval_formula, "Formula text")->required();
  eval->add_option("--structure", eval_structure, "Structure file (JSON)")->required();
  eval->add_option("--budget", opts.budget, "Evaluation step budget");
  add_common_options(eval, opts);

  std::string valid_formula;
  CLI::App* valid = app.add_subcommand("valid", "Bounded countermodel search");
  valid->add_option("formula", valid_formula, "Formula text")->required();
  valid->add_option("--max-domain", opts.max_domain, "Largest universe size to try")
      ->default_val(3);
  valid->add_option("--budget", opts.budget, "Search step budget")->default_val(10'000'000);
  valid->add_option("--jobs", opts.jobs, "Parallel structure candidates")->default_val(1);
  add_common_options(valid, opts);

  std::string proof_path;
  CLI::App* check_proof = app.add_subcommand("check-proof", "Check a derivation document");
  check_proof->add_option("derivation", proof_path, "Derivation file (JSON)")->required();
  add_common_options(check_proof, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (tables->parsed()) return cmd_tables(opts);
    if (parse->parsed()) return cmd_parse(opts, parse_formula_text, parse_structure);
    if (truthtable->parsed()) return cmd_truthtable(opts, tt_formula, tt_limit, tt_full);
    if (eval->parsed()) return cmd_eval(opts, eval_formula, eval_structure);
    if (valid->parsed()) return cmd_valid(opts, valid_formula);
    if (check_proof->parsed())
      return cmd_check_proof(opts, proof_path,
                             check_proof->get_option("--system")->count() > 0);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
