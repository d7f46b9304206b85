// Shared test helpers: Catch2 string makers for library types and small
// construction shortcuts used across the test files.

#pragma once

#include <catch2/catch_amalgamated.hpp>
#include <nmodal/values.hpp>

#include <string>

namespace Catch {

template <>
struct StringMaker<nmodal::Value> {
  static std::string convert(nmodal::Value v) { return std::string(nmodal::value_name(v)); }
};

template <>
struct StringMaker<nmodal::ValueSet> {
  static std::string convert(nmodal::ValueSet s) { return s.to_string(); }
};

}  // namespace Catch

namespace testutil {

// Parse a value name that is known to be valid; fails the test otherwise.
inline nmodal::Value val(std::string_view name) {
  auto v = nmodal::parse_value(name);
  REQUIRE(v.has_value());
  return *v;
}

// Build a value set from explicit members.
inline nmodal::ValueSet vset(std::initializer_list<nmodal::Value> values) {
  nmodal::ValueSet out;
  for (nmodal::Value v : values) out.insert(v);
  return out;
}

}  // namespace testutil
