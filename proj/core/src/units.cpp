#include "sdkit/units.hpp"

#include <cctype>
#include <cstdlib>

namespace sdkit {

Unit Unit::atom(std::string name) {
  Unit u;
  if (name != "dimensionless" && name != "1") u.exponents_[std::move(name)] = 1;
  return u;
}

void Unit::accumulate(const std::string& atom, int exponent) {
  if (exponent == 0) return;
  auto [it, inserted] = exponents_.emplace(atom, exponent);
  if (!inserted) {
    it->second += exponent;
    if (it->second == 0) exponents_.erase(it);
  }
}

Unit Unit::pow(int exponent) const {
  Unit u;
  if (exponent == 0) return u;
  for (const auto& [name, e] : exponents_) u.exponents_[name] = e * exponent;
  return u;
}

Unit operator*(const Unit& a, const Unit& b) {
  Unit u = a;
  for (const auto& [name, e] : b.exponents_) u.accumulate(name, e);
  return u;
}

Unit operator/(const Unit& a, const Unit& b) { return a * b.inverse(); }

std::string Unit::to_string() const {
  if (exponents_.empty()) return "dimensionless";
  std::string num;
  std::string den;
  auto append = [](std::string& out, const std::string& name, int e) {
    if (!out.empty()) out += '*';
    out += name;
    if (e != 1) out += '^' + std::to_string(e);
  };
  for (const auto& [name, e] : exponents_) {
    if (e > 0) append(num, name, e);
    else append(den, name, -e);
  }
  if (num.empty()) num = "1";
  if (den.empty()) return num;
  // Several denominator atoms are wrapped so the text re-parses to the same unit.
  if (den.find('*') != std::string::npos) return num + "/(" + den + ")";
  return num + "/" + den;
}

namespace {

class UnitParser {
 public:
  explicit UnitParser(std::string_view text) : text_(text) {}

  std::optional<Unit> parse() {
    auto u = product();
    skip_space();
    if (!u || pos_ != text_.size()) return std::nullopt;
    return u;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::optional<Unit> product() {
    auto lhs = factor();
    if (!lhs) return std::nullopt;
    while (true) {
      if (consume('*')) {
        auto rhs = factor();
        if (!rhs) return std::nullopt;
        lhs = *lhs * *rhs;
      } else if (consume('/')) {
        auto rhs = factor();
        if (!rhs) return std::nullopt;
        lhs = *lhs / *rhs;
      } else {
        return lhs;
      }
    }
  }

  std::optional<Unit> factor() {
    auto base = primary();
    if (!base) return std::nullopt;
    if (consume('^')) {
      skip_space();
      std::size_t start = pos_;
      if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      std::string digits(text_.substr(start, pos_ - start));
      if (digits.empty() || digits == "-" || digits == "+") return std::nullopt;
      return base->pow(std::atoi(digits.c_str()));
    }
    return base;
  }

  std::optional<Unit> primary() {
    if (consume('(')) {
      auto inner = product();
      if (!inner || !consume(')')) return std::nullopt;
      return inner;
    }
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
            text_[pos_] == '$'))
      ++pos_;
    if (start == pos_) return std::nullopt;
    std::string name(text_.substr(start, pos_ - start));
    if (std::isdigit(static_cast<unsigned char>(name[0])) && name != "1") return std::nullopt;
    return Unit::atom(std::move(name));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::optional<Unit> Unit::parse(std::string_view text) { return UnitParser(text).parse(); }

}  // namespace sdkit
