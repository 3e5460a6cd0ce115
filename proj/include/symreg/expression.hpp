#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace symreg {

/// Operators understood by the engine. Identity is a bookkeeping entry
/// (carry-forward in feature expansion); it never appears as a tree node.
enum class Op : std::uint8_t {
  Identity,
  Add,
  Sub,
  Mul,
  Div,
  Exp,
  Log,
  Sqrt,
  Inv,
  Square,
  Sin,
  Cos,
};

inline constexpr int kOpCount = 12;

bool op_is_binary(Op op);
bool op_is_symmetric(Op op);
std::string_view op_name(Op op);
std::optional<Op> op_from_name(std::string_view name);

class Expression;
using ExprPtr = std::shared_ptr<const Expression>;

/// Immutable operator tree over primary features and numeric constants.
/// Nodes are shared; subtrees of pooled features are reused freely.
class Expression {
 public:
  enum class Kind : std::uint8_t { Variable, Constant, Unary, Binary };

  static ExprPtr variable(int index);
  static ExprPtr constant(double value);
  static ExprPtr unary(Op op, ExprPtr child);
  static ExprPtr binary(Op op, ExprPtr lhs, ExprPtr rhs);

  Kind kind() const { return kind_; }
  int variable_index() const { return var_index_; }
  double constant_value() const { return value_; }
  Op op() const { return op_; }
  const ExprPtr& left() const { return left_; }
  const ExprPtr& right() const { return right_; }

 private:
  Expression() = default;

  Kind kind_ = Kind::Constant;
  Op op_ = Op::Identity;
  int var_index_ = -1;
  double value_ = 0.0;
  ExprPtr left_;
  ExprPtr right_;
};

using Column = std::vector<double>;

/// Column-major numeric table; all engine data flows through this.
struct DataMatrix {
  std::size_t rows = 0;
  std::vector<Column> columns;

  std::size_t cols() const { return columns.size(); }
  static DataMatrix from_columns(std::vector<Column> cols);
};

/// Denominators below this magnitude on any training row invalidate a
/// division or inverse feature.
inline constexpr double kDivisionGuard = 1e-10;

/// Element-wise operator application with domain guards. Returns false when
/// a guard fires or a non-finite value is produced; `out` is scratch then.
bool apply_unary(Op op, const double* in, double* out, std::size_t n);
bool apply_binary(Op op, const double* a, const double* b, double* out,
                  std::size_t n);

/// Evaluates the tree over all rows. Empty optional means the expression is
/// invalid on this data (domain guard or non-finite result); callers discard
/// the feature, this is never an abort.
std::optional<Column> evaluate(const Expression& expr, const DataMatrix& data);

/// Structural complexity C = K * log2(B): B distinct basis symbols
/// (variables and operators; numeric constants excluded), K total uses.
struct ComplexityInfo {
  double bits = 0.0;
  std::uint32_t uses = 0;    // K
  std::uint32_t basis = 0;   // B
};

ComplexityInfo structural_complexity(const Expression& expr);

/// Symbol ids used for incremental complexity accounting: variables and
/// operators share one id space.
using SymbolId = std::uint32_t;

inline SymbolId variable_symbol(int index) {
  return static_cast<SymbolId>(index) * 2u;
}
inline SymbolId op_symbol(Op op) {
  return static_cast<SymbolId>(op) * 2u + 1u;
}

/// Appends the expression's symbols into `set` (kept sorted, distinct) and
/// adds its use count to `uses`.
void collect_symbols(const Expression& expr, std::vector<SymbolId>& set,
                     std::uint32_t& uses);

double complexity_bits(std::uint32_t uses, std::uint32_t basis);

/// Deterministic parenthesized infix form. Children of symmetric operators
/// are ordered lexicographically so structurally identical trees render
/// identically. Constants use 17 significant digits.
std::string canonical_string(const Expression& expr);

/// Same grammar with caller-supplied variable names (reports).
std::string render(const Expression& expr,
                   const std::vector<std::string>& names);

}  // namespace symreg
