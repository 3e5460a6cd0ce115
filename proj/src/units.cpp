#include "symreg/units.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace symreg {

Rational::Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

Rational Rational::operator+(const Rational& o) const {
  return Rational(num * o.den + o.num * den, den * o.den);
}

Rational Rational::operator-(const Rational& o) const {
  return Rational(num * o.den - o.num * den, den * o.den);
}

Rational Rational::operator-() const { return Rational(-num, den); }

Rational Rational::half() const { return Rational(num, den * 2); }

Rational Rational::twice() const { return Rational(num * 2, den); }

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

UnitVector UnitVector::dimensionless(std::size_t dims) {
  return UnitVector(std::vector<Rational>(dims));
}

bool UnitVector::is_dimensionless() const {
  for (const auto& r : e_) {
    if (!r.is_zero()) return false;
  }
  return true;
}

namespace {

void check_dims(const UnitVector& a, const UnitVector& b) {
  if (a.dims() != b.dims()) {
    throw std::invalid_argument("unit vectors with mismatched dimensions");
  }
}

}  // namespace

UnitVector UnitVector::plus(const UnitVector& o) const {
  check_dims(*this, o);
  UnitVector r = *this;
  for (std::size_t i = 0; i < dims(); ++i) r[i] = r[i] + o[i];
  return r;
}

UnitVector UnitVector::minus(const UnitVector& o) const {
  check_dims(*this, o);
  UnitVector r = *this;
  for (std::size_t i = 0; i < dims(); ++i) r[i] = r[i] - o[i];
  return r;
}

UnitVector UnitVector::negated() const {
  UnitVector r = *this;
  for (std::size_t i = 0; i < dims(); ++i) r[i] = -r[i];
  return r;
}

UnitVector UnitVector::halved() const {
  UnitVector r = *this;
  for (std::size_t i = 0; i < dims(); ++i) r[i] = r[i].half();
  return r;
}

UnitVector UnitVector::doubled() const {
  UnitVector r = *this;
  for (std::size_t i = 0; i < dims(); ++i) r[i] = r[i].twice();
  return r;
}

std::string UnitVector::str(const std::vector<std::string>& dim_names) const {
  std::ostringstream os;
  bool any = false;
  for (std::size_t i = 0; i < dims(); ++i) {
    if (e_[i].is_zero()) continue;
    if (any) os << "*";
    os << (i < dim_names.size() ? dim_names[i] : "d" + std::to_string(i));
    if (!(e_[i].num == 1 && e_[i].den == 1)) os << "^" << e_[i].str();
    any = true;
  }
  if (!any) return "1";
  return os.str();
}

std::optional<UnitVector> unit_rule_unary(Op op, const UnitVector& in) {
  switch (op) {
    case Op::Identity:
      return in;
    case Op::Sqrt:
      return in.halved();
    case Op::Square:
      return in.doubled();
    case Op::Inv:
      return in.negated();  // exempt from the dimensionless requirement
    case Op::Exp:
    case Op::Log:
    case Op::Sin:
    case Op::Cos:
      if (!in.is_dimensionless()) return std::nullopt;
      return in;
    default:
      throw std::invalid_argument("binary op in unit_rule_unary");
  }
}

std::optional<UnitVector> unit_rule_binary(Op op, const UnitVector& a,
                                           const UnitVector& b) {
  switch (op) {
    case Op::Add:
    case Op::Sub:
      if (!(a == b)) return std::nullopt;
      return a;
    case Op::Mul:
      return a.plus(b);
    case Op::Div:
      return a.minus(b);
    default:
      throw std::invalid_argument("unary op in unit_rule_binary");
  }
}

namespace {

std::optional<UnitVector> unit_rec(const Expression& e,
                                   const std::vector<UnitVector>& var_units,
                                   std::size_t dims) {
  switch (e.kind()) {
    case Expression::Kind::Variable: {
      const auto idx = static_cast<std::size_t>(e.variable_index());
      if (idx >= var_units.size()) {
        throw std::out_of_range("no unit declared for variable");
      }
      return var_units[idx];
    }
    case Expression::Kind::Constant:
      return UnitVector::dimensionless(dims);
    case Expression::Kind::Unary: {
      auto c = unit_rec(*e.left(), var_units, dims);
      if (!c) return std::nullopt;
      return unit_rule_unary(e.op(), *c);
    }
    case Expression::Kind::Binary: {
      auto a = unit_rec(*e.left(), var_units, dims);
      if (!a) return std::nullopt;
      auto b = unit_rec(*e.right(), var_units, dims);
      if (!b) return std::nullopt;
      return unit_rule_binary(e.op(), *a, *b);
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<UnitVector> unit_of(const Expression& expr,
                                  const std::vector<UnitVector>& var_units) {
  if (var_units.empty()) return UnitVector();  // unitless mode
  return unit_rec(expr, var_units, var_units.front().dims());
}

UnitVector parse_unit(const std::string& text,
                      const std::vector<std::string>& base_dims) {
  UnitVector out = UnitVector::dimensionless(base_dims.size());
  std::string t;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  }
  if (t.empty() || t == "1") return out;

  std::size_t pos = 0;
  int sign = 1;
  while (pos < t.size()) {
    if (t[pos] == '*') {
      sign = 1;
      ++pos;
    } else if (t[pos] == '/') {
      sign = -1;
      ++pos;
    } else if (pos > 0) {
      throw std::invalid_argument("malformed unit string: " + text);
    }
    std::size_t end = pos;
    while (end < t.size() && t[end] != '*' && t[end] != '/') ++end;
    std::string factor = t.substr(pos, end - pos);
    pos = end;

    std::int64_t exp = 1;
    if (auto caret = factor.find('^'); caret != std::string::npos) {
      try {
        exp = std::stoll(factor.substr(caret + 1));
      } catch (const std::exception&) {
        throw std::invalid_argument("bad exponent in unit string: " + text);
      }
      factor = factor.substr(0, caret);
    }
    if (factor == "1" && exp == 1) continue;

    auto it = std::find(base_dims.begin(), base_dims.end(), factor);
    if (it == base_dims.end()) {
      throw std::invalid_argument("unknown base dimension '" + factor +
                                  "' in unit string: " + text);
    }
    auto i = static_cast<std::size_t>(it - base_dims.begin());
    out[i] = out[i] + Rational(sign * exp);
  }
  return out;
}

}  // namespace symreg
