#pragma once

// JSON serialization of structures and valuation witnesses.
//
// Structure document: {"universe": N, "predicates": {name: {"a": [tuples],
// "c": [tuples]} or {"a","n","p"}}, "functions": {name: flat row-major
// table}, "constants": {name: element index}}.  Predicate objects may carry
// an explicit "arity"; otherwise it is inferred from the first tuple.
// Valuation witness: a list of {"fingerprint": string, "value": name}.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "semantics.hpp"
#include "structure.hpp"
#include "system.hpp"
#include "values.hpp"

namespace nmodal {

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<int> tuple_of_index(std::size_t idx, int arity, int universe) {
  std::vector<int> tuple(arity);
  for (int i = arity; i-- > 0;) {
    tuple[i] = static_cast<int>(idx % universe);
    idx /= universe;
  }
  return tuple;
}

inline nlohmann::json flags_to_tuples(const std::vector<char>& flags, int arity, int universe) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags[i]) out.push_back(tuple_of_index(i, arity, universe));
  return out;
}

inline std::vector<std::vector<int>> tuples_from_json(const nlohmann::json& j,
                                                      const std::string& where) {
  if (!j.is_array()) throw io_error(where + " must be an array of tuples");
  std::vector<std::vector<int>> out;
  for (const nlohmann::json& t : j) {
    if (!t.is_array()) throw io_error(where + " must contain arrays of element indices");
    std::vector<int> tuple;
    for (const nlohmann::json& e : t) {
      if (!e.is_number_integer()) throw io_error(where + " tuples must hold integers");
      tuple.push_back(e.get<int>());
    }
    out.push_back(std::move(tuple));
  }
  return out;
}

inline int infer_arity(const nlohmann::json& pred, const std::string& name,
                       std::initializer_list<const char*> keys) {
  if (pred.contains("arity")) {
    const nlohmann::json& a = pred.at("arity");
    if (!a.is_number_integer() || a.get<int>() < 0)
      throw io_error("predicate '" + name + "' has an invalid arity");
    return a.get<int>();
  }
  for (const char* k : keys) {
    if (!pred.contains(k)) continue;
    const nlohmann::json& t = pred.at(k);
    if (t.is_array() && !t.empty() && t[0].is_array()) return static_cast<int>(t[0].size());
  }
  throw io_error("predicate '" + name +
                 "' has no tuples to infer an arity from; add an \"arity\" field");
}

}  // namespace detail

inline nlohmann::json structure_to_json(const Structure& s) {
  nlohmann::json j;
  j["universe"] = s.universe();
  nlohmann::json preds = nlohmann::json::object();
  for (const auto& [name, ext] : s.predicates()) {
    nlohmann::json p;
    p["arity"] = ext.arity;
    if (ext.pair_form) {
      p["a"] = detail::flags_to_tuples(ext.a, ext.arity, s.universe());
      p["c"] = detail::flags_to_tuples(ext.contingent(), ext.arity, s.universe());
    } else {
      p["a"] = detail::flags_to_tuples(ext.a, ext.arity, s.universe());
      p["n"] = detail::flags_to_tuples(ext.n, ext.arity, s.universe());
      p["p"] = detail::flags_to_tuples(ext.p, ext.arity, s.universe());
    }
    preds[name] = std::move(p);
  }
  j["predicates"] = std::move(preds);
  nlohmann::json fns = nlohmann::json::object();
  for (const auto& [name, fn] : s.functions()) {
    if (s.universe() == 1 && fn.arity != 1)
      fns[name] = nlohmann::json{{"arity", fn.arity}, {"table", fn.table}};
    else
      fns[name] = fn.table;
  }
  j["functions"] = std::move(fns);
  nlohmann::json consts = nlohmann::json::object();
  for (const auto& [name, e] : s.constants()) consts[name] = e;
  j["constants"] = std::move(consts);
  return j;
}

inline Structure structure_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw io_error("structure document must be a JSON object");
  if (!j.contains("universe") || !j.at("universe").is_number_integer())
    throw io_error("structure document needs an integer \"universe\"");
  Structure out(j.at("universe").get<int>());

  if (j.contains("predicates")) {
    const nlohmann::json& preds = j.at("predicates");
    if (!preds.is_object()) throw io_error("\"predicates\" must map names to extensions");
    for (auto it = preds.begin(); it != preds.end(); ++it) {
      const std::string& name = it.key();
      const nlohmann::json& p = it.value();
      if (!p.is_object())
        throw io_error("predicate '" + name + "' must be an object of tuple lists");
      bool triple = p.contains("n") || p.contains("p");
      if (triple) {
        int arity = detail::infer_arity(p, name, {"a", "n", "p"});
        auto field = [&](const char* k) {
          return p.contains(k) ? detail::tuples_from_json(p.at(k), "predicate '" + name + "' " + k)
                               : std::vector<std::vector<int>>{};
        };
        out.add_predicate_triple(name, arity, field("a"), field("n"), field("p"));
      } else {
        int arity = detail::infer_arity(p, name, {"a", "c"});
        auto field = [&](const char* k) {
          return p.contains(k) ? detail::tuples_from_json(p.at(k), "predicate '" + name + "' " + k)
                               : std::vector<std::vector<int>>{};
        };
        out.add_predicate_pair(name, arity, field("a"), field("c"));
      }
    }
  }

  if (j.contains("functions")) {
    const nlohmann::json& fns = j.at("functions");
    if (!fns.is_object()) throw io_error("\"functions\" must map names to tables");
    for (auto it = fns.begin(); it != fns.end(); ++it) {
      const std::string& name = it.key();
      const nlohmann::json& f = it.value();
      std::vector<int> table;
      int arity = -1;
      if (f.is_object()) {
        if (!f.contains("arity") || !f.contains("table"))
          throw io_error("function '" + name + "' object form needs \"arity\" and \"table\"");
        arity = f.at("arity").get<int>();
        table = f.at("table").get<std::vector<int>>();
      } else if (f.is_array()) {
        table = f.get<std::vector<int>>();
        // Infer the arity from the table length.
        if (out.universe() == 1) {
          arity = 1;  // over one element every arity has a one-entry table
          if (table.size() != 1)
            throw io_error("function '" + name + "' must have exactly one entry over a "
                           "one-element universe");
        } else {
          std::size_t k = 1;
          arity = 0;
          while (k < table.size()) {
            k *= static_cast<std::size_t>(out.universe());
            ++arity;
          }
          if (k != table.size() || arity == 0)
            throw io_error("function '" + name + "' table length " +
                           std::to_string(table.size()) +
                           " is not a positive power of the universe size");
        }
      } else {
        throw io_error("function '" + name + "' must be a flat table array");
      }
      out.add_function(name, arity, std::move(table));
    }
  }

  if (j.contains("constants")) {
    const nlohmann::json& consts = j.at("constants");
    if (!consts.is_object()) throw io_error("\"constants\" must map names to element indices");
    for (auto it = consts.begin(); it != consts.end(); ++it) {
      if (!it.value().is_number_integer())
        throw io_error("constant '" + it.key() + "' must be an element index");
      out.add_constant(it.key(), it.value().get<int>());
    }
  }

  return out;
}

inline nlohmann::json valuation_to_json(const Valuation& v) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [fp, value] : v.values)
    out.push_back({{"fingerprint", fp}, {"value", value_name(value)}});
  return out;
}

inline Valuation valuation_from_json(const nlohmann::json& j, const System& sys) {
  if (!j.is_array()) throw io_error("valuation witness must be a list of fingerprint entries");
  Valuation v;
  v.system = &sys;
  for (const nlohmann::json& entry : j) {
    if (!entry.is_object() || !entry.contains("fingerprint") || !entry.contains("value"))
      throw io_error("each witness entry needs \"fingerprint\" and \"value\"");
    std::string fp = entry.at("fingerprint").get<std::string>();
    std::string name = entry.at("value").get<std::string>();
    std::optional<Value> value = parse_value(name);
    if (!value) throw io_error("unknown truth value '" + name + "'");
    if (!sys.in_carrier(*value))
      throw io_error("value " + name + " lies outside the " +
                     std::string(carrier_name(sys.carrier)) + " carrier");
    if (!v.values.emplace(std::move(fp), *value).second)
      throw io_error("duplicate fingerprint in witness: " +
                     entry.at("fingerprint").get<std::string>());
  }
  return v;
}

}  // namespace nmodal
