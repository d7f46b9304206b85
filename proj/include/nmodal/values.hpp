// Truth values and value sets for the four-, six- and eight-valued modal Nmatrices.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nmodal {

// The eight truth values.  A value is "designated" iff it carries a + sign.
// T/F: necessarily true/false, C: contingent, I: impossible-world flavoured
// values that only exist in the eight-valued carrier.
enum class Value : std::uint8_t {
  Tp = 0,  // T+
  Cp = 1,  // C+
  Fp = 2,  // F+
  Ip = 3,  // I+
  Tn = 4,  // T-
  Cn = 5,  // C-
  Fn = 6,  // F-
  In = 7,  // I-
};

inline constexpr int kValueCount = 8;

constexpr std::uint8_t index_of(Value v) { return static_cast<std::uint8_t>(v); }

constexpr Value value_at(int i) { return static_cast<Value>(i); }

constexpr bool designated(Value v) { return index_of(v) < 4; }

constexpr std::string_view value_name(Value v) {
  constexpr std::string_view names[kValueCount] = {"T+", "C+", "F+", "I+",
                                                   "T-", "C-", "F-", "I-"};
  return names[index_of(v)];
}

inline std::optional<Value> parse_value(std::string_view s) {
  for (int i = 0; i < kValueCount; ++i)
    if (s == value_name(value_at(i))) return value_at(i);
  return std::nullopt;
}

// A set of truth values, represented as a bitmask.  The enumeration order of
// iteration is the fixed value order T+, C+, F+, I+, T-, C-, F-, I-.
class ValueSet {
public:
  constexpr ValueSet() = default;
  constexpr explicit ValueSet(std::uint8_t bits) : bits_(bits) {}
  constexpr ValueSet(std::initializer_list<Value> vs) {
    for (Value v : vs) bits_ |= mask(v);
  }

  static constexpr ValueSet single(Value v) { return ValueSet(mask(v)); }
  static constexpr ValueSet all() { return ValueSet(0xFF); }

  constexpr bool contains(Value v) const { return bits_ & mask(v); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const {
    int n = 0;
    for (int i = 0; i < kValueCount; ++i)
      if (bits_ & (1u << i)) ++n;
    return n;
  }

  constexpr void insert(Value v) { bits_ |= mask(v); }
  constexpr void remove(Value v) { bits_ &= ~mask(v); }

  constexpr ValueSet operator|(ValueSet o) const { return ValueSet(bits_ | o.bits_); }
  constexpr ValueSet operator&(ValueSet o) const { return ValueSet(bits_ & o.bits_); }
  constexpr ValueSet operator-(ValueSet o) const {
    return ValueSet(static_cast<std::uint8_t>(bits_ & ~o.bits_));
  }
  constexpr ValueSet& operator|=(ValueSet o) { bits_ |= o.bits_; return *this; }
  constexpr bool operator==(const ValueSet&) const = default;

  constexpr bool subset_of(ValueSet o) const { return (bits_ & ~o.bits_) == 0; }
  constexpr bool intersects(ValueSet o) const { return (bits_ & o.bits_) != 0; }

  constexpr std::uint8_t bits() const { return bits_; }

  // Values in the fixed enumeration order.
  std::vector<Value> values() const {
    std::vector<Value> out;
    for (int i = 0; i < kValueCount; ++i)
      if (bits_ & (1u << i)) out.push_back(value_at(i));
    return out;
  }

  std::string to_string() const {
    std::string out = "{";
    bool first = true;
    for (int i = 0; i < kValueCount; ++i) {
      if (!(bits_ & (1u << i))) continue;
      if (!first) out += ",";
      out += value_name(value_at(i));
      first = false;
    }
    out += "}";
    return out;
  }

private:
  static constexpr std::uint8_t mask(Value v) {
    return static_cast<std::uint8_t>(1u << index_of(v));
  }
  std::uint8_t bits_ = 0;
};

inline constexpr ValueSet kDesignated{Value::Tp, Value::Cp, Value::Fp, Value::Ip};

constexpr bool all_designated(ValueSet s) { return s.subset_of(kDesignated); }

// Carriers of the three Nmatrices.  V6 drops the I values, V4 additionally
// drops F+ and T-.
enum class Carrier : std::uint8_t { V4, V6, V8 };

constexpr ValueSet carrier_set(Carrier c) {
  switch (c) {
    case Carrier::V4: return ValueSet{Value::Tp, Value::Cp, Value::Cn, Value::Fn};
    case Carrier::V6:
      return ValueSet{Value::Tp, Value::Cp, Value::Fp,
                      Value::Tn, Value::Cn, Value::Fn};
    case Carrier::V8: return ValueSet::all();
  }
  return ValueSet();
}

constexpr int carrier_size(Carrier c) {
  return c == Carrier::V4 ? 4 : c == Carrier::V6 ? 6 : 8;
}

inline std::string carrier_name(Carrier c) {
  return c == Carrier::V4 ? "V4" : c == Carrier::V6 ? "V6" : "V8";
}

}  // namespace nmodal
