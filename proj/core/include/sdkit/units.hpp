#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace sdkit {

/// A product of base unit atoms raised to integer exponents, e.g. people/year.
/// The empty product is dimensionless.
class Unit {
 public:
  Unit() = default;

  static Unit dimensionless() { return Unit{}; }
  static Unit atom(std::string name);

  /// Parses `people/year`, `dimensionless*people/year`, `1/year`, `m^2/s`.
  /// Returns nullopt on malformed input.
  static std::optional<Unit> parse(std::string_view text);

  bool is_dimensionless() const { return exponents_.empty(); }
  const std::map<std::string, int>& exponents() const { return exponents_; }

  Unit pow(int exponent) const;
  Unit inverse() const { return pow(-1); }

  friend Unit operator*(const Unit& a, const Unit& b);
  friend Unit operator/(const Unit& a, const Unit& b);
  friend bool operator==(const Unit& a, const Unit& b) = default;

  /// Canonical text: positive exponents first, then `/` and negative ones,
  /// atoms in lexicographic order. Dimensionless prints as `dimensionless`.
  std::string to_string() const;

 private:
  void accumulate(const std::string& atom, int exponent);

  std::map<std::string, int> exponents_;
};

}  // namespace sdkit
