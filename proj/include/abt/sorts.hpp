#pragma once

#include <compare>
#include <string>
#include <vector>

namespace abt {

/// A syntactic category. Identity is name identity; names are case-sensitive
/// byte strings with no normalization.
struct Sort {
  std::string name;

  friend bool operator==(const Sort&, const Sort&) = default;
  friend auto operator<=>(const Sort&, const Sort&) = default;
};

/// The type {s...}[t...].t of an abstraction: which symbol sorts and variable
/// sorts it binds around a body of the target sort.
struct Valence {
  std::vector<Sort> symbol_sorts;
  std::vector<Sort> variable_sorts;
  Sort target;

  bool binds_nothing() const { return symbol_sorts.empty() && variable_sorts.empty(); }

  friend bool operator==(const Valence&, const Valence&) = default;
  friend auto operator<=>(const Valence&, const Valence&) = default;
};

/// The type (v...)t of an operator: argument valences and a result sort.
struct Arity {
  std::vector<Valence> valences;
  Sort target;

  friend bool operator==(const Arity&, const Arity&) = default;
  friend auto operator<=>(const Arity&, const Arity&) = default;
};

inline std::string to_string(const Sort& s) { return s.name; }

inline std::string to_string(const Valence& v) {
  std::string out;
  if (!v.symbol_sorts.empty()) {
    out += '{';
    for (std::size_t i = 0; i < v.symbol_sorts.size(); ++i) {
      if (i) out += ',';
      out += v.symbol_sorts[i].name;
    }
    out += '}';
  }
  if (!v.variable_sorts.empty()) {
    out += '[';
    for (std::size_t i = 0; i < v.variable_sorts.size(); ++i) {
      if (i) out += ',';
      out += v.variable_sorts[i].name;
    }
    out += ']';
  }
  out += '.';
  out += v.target.name;
  return out;
}

inline std::string to_string(const Arity& a) {
  std::string out = "(";
  for (std::size_t i = 0; i < a.valences.size(); ++i) {
    if (i) out += ',';
    out += to_string(a.valences[i]);
  }
  out += ") ";
  out += a.target.name;
  return out;
}

}  // namespace abt
