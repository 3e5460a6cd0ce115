#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "symreg/expression.hpp"

namespace symreg {

/// Exact rational exponent; sqrt introduces halves, everything else stays
/// integral. Always stored normalized with positive denominator.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1);

  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator-() const;
  Rational half() const;
  Rational twice() const;
  bool operator==(const Rational& o) const {
    return num == o.num && den == o.den;
  }
  bool is_zero() const { return num == 0; }
  std::string str() const;
};

/// Per-dimension exponents. An empty vector means "unitless mode": every
/// expression is dimensionless and all checks pass vacuously.
class UnitVector {
 public:
  UnitVector() = default;
  explicit UnitVector(std::vector<Rational> exponents)
      : e_(std::move(exponents)) {}
  static UnitVector dimensionless(std::size_t dims);

  std::size_t dims() const { return e_.size(); }
  const Rational& operator[](std::size_t i) const { return e_[i]; }
  Rational& operator[](std::size_t i) { return e_[i]; }

  bool is_dimensionless() const;
  bool operator==(const UnitVector& o) const { return e_ == o.e_; }

  UnitVector plus(const UnitVector& o) const;    // for multiplication
  UnitVector minus(const UnitVector& o) const;   // for division
  UnitVector negated() const;
  UnitVector halved() const;
  UnitVector doubled() const;

  std::string str(const std::vector<std::string>& dim_names) const;

 private:
  std::vector<Rational> e_;
};

/// Unit propagation for a single operator application. Empty optional means
/// the combination is incompatible and the feature must not be generated.
std::optional<UnitVector> unit_rule_unary(Op op, const UnitVector& in);
std::optional<UnitVector> unit_rule_binary(Op op, const UnitVector& a,
                                           const UnitVector& b);

/// Unit of a whole expression given per-variable units (all variables must
/// be covered). Constants are dimensionless. Empty `var_units` puts the
/// check into unitless mode where the result is always dimensionless.
std::optional<UnitVector> unit_of(const Expression& expr,
                                  const std::vector<UnitVector>& var_units);

/// Parses product-of-powers strings like "kg*m/s^2" against the declared
/// base dimensions. Throws std::invalid_argument on unknown names or
/// malformed input. "1" or "" denote dimensionless.
UnitVector parse_unit(const std::string& text,
                      const std::vector<std::string>& base_dims);

}  // namespace symreg
