#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "symreg/expression.hpp"
#include "symreg/operators.hpp"
#include "symreg/units.hpp"

namespace symreg {

/// An expression paired with its evaluated training column, structural
/// complexity and unit vector. Columns are shared between pools.
struct Feature {
  ExprPtr expr;
  std::shared_ptr<const Column> column;
  double complexity_bits = 0.0;
  std::uint32_t symbol_uses = 0;       // K
  std::vector<SymbolId> symbols;       // sorted distinct basis symbols
  UnitVector units;                    // empty in unitless mode
  bool is_intercept = false;

  std::string canonical() const { return canonical_string(*expr); }
};

struct ExpandOptions {
  std::size_t max_pool_size = 200000;
  bool dedup = true;           // canonical + numeric duplicate removal
  double numeric_rtol = 1e-10; // element-wise relative tolerance for dedup
};

/// Feature pool at one expansion level. Level 0 holds the screened primary
/// features plus the constant all-ones intercept feature at index 0.
class FeaturePool {
 public:
  FeaturePool() = default;

  /// `screened` are dataset column indices in screening order; `var_units`
  /// must cover every dataset column or be empty (unitless mode).
  static FeaturePool level0(const DataMatrix& data,
                            const std::vector<int>& screened,
                            const std::vector<UnitVector>& var_units = {});

  int level() const { return level_; }
  std::size_t rows() const { return rows_; }
  std::size_t size() const { return features_.size(); }
  const Feature& operator[](std::size_t i) const { return features_[i]; }
  const std::vector<Feature>& features() const { return features_; }
  bool unit_checked() const { return unit_checked_; }

  /// Direct construction for tests and filtered views.
  static FeaturePool from_features(int level, std::size_t rows,
                                   std::vector<Feature> features,
                                   bool unit_checked = false);

 private:
  int level_ = 0;
  std::size_t rows_ = 0;
  bool unit_checked_ = false;
  std::vector<Feature> features_;
};

/// One expansion step: carries every previous feature forward and adds all
/// valid unary/binary applications over non-intercept operands, excluding
/// incompatible units, invalid evaluations, and duplicates. If the result
/// exceeds max_pool_size it is truncated to the lowest-complexity features
/// (ties by canonical string). Throws std::runtime_error when filtering
/// leaves nothing.
FeaturePool expand_level(const FeaturePool& pool, const OperatorSet& ops,
                         const ExpandOptions& opts = {});

/// Keeps exactly the features with complexity <= lambda bits; the intercept
/// is always kept. Columns are shared with the input pool.
FeaturePool complexity_filter(const FeaturePool& pool, double lambda_bits);

}  // namespace symreg
