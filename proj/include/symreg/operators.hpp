#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "symreg/expression.hpp"

namespace symreg {

struct BinaryOpSpec {
  Op op;
  bool self_pair;  // allow o[z_i, z_i]
};

/// Declarative operator set driving feature expansion. The default is the
/// ten-operator set: identity, +, -, *, /, exp, log, sqrt, inverse, square.
/// Square and multiplication both reach powers; the numeric dedup keeps one.
struct OperatorSet {
  std::vector<Op> unary;             // may include Op::Identity
  std::vector<BinaryOpSpec> binary;  // +,* enumerate unordered pairs

  static OperatorSet defaults();
  /// Builds a set from operator names ("add", "mul", "exp", ...). Throws
  /// std::invalid_argument on unknown names or duplicates.
  static OperatorSet from_names(const std::vector<std::string>& names);

  bool has_identity() const;
  /// Unary count as used by the growth law (identity included if present).
  std::size_t unary_count() const { return unary.size(); }
};

struct PredictedCount {
  std::uint64_t count = 0;
  bool saturated = false;  // overflow warning, count clamped
};

/// Pre-filter growth law for one expansion step: m_u*d plus, per binary op,
/// d*(d-1) ordered pairs (non-symmetric) or d*(d-1)/2 unordered pairs
/// (symmetric), plus d self-pairs where allowed. With identity in the set
/// the result counts carried-forward features too, i.e. it estimates the
/// next pool size rather than the increment.
PredictedCount predicted_count(std::uint64_t d_prev, const OperatorSet& ops);

}  // namespace symreg
