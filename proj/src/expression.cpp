#include "symreg/expression.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace symreg {

bool op_is_binary(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
      return true;
    default:
      return false;
  }
}

bool op_is_symmetric(Op op) { return op == Op::Add || op == Op::Mul; }

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Identity: return "id";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Inv: return "inv";
    case Op::Square: return "sq";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
  }
  return "?";
}

std::optional<Op> op_from_name(std::string_view name) {
  for (int i = 0; i < kOpCount; ++i) {
    Op op = static_cast<Op>(i);
    if (op_name(op) == name) return op;
  }
  // common aliases
  if (name == "+") return Op::Add;
  if (name == "-") return Op::Sub;
  if (name == "*") return Op::Mul;
  if (name == "/") return Op::Div;
  if (name == "square" || name == "^2") return Op::Square;
  if (name == "identity") return Op::Identity;
  return std::nullopt;
}

ExprPtr Expression::variable(int index) {
  if (index < 0) throw std::invalid_argument("negative variable index");
  auto e = std::shared_ptr<Expression>(new Expression());
  e->kind_ = Kind::Variable;
  e->var_index_ = index;
  return e;
}

ExprPtr Expression::constant(double value) {
  auto e = std::shared_ptr<Expression>(new Expression());
  e->kind_ = Kind::Constant;
  e->value_ = value;
  return e;
}

ExprPtr Expression::unary(Op op, ExprPtr child) {
  if (op_is_binary(op)) throw std::invalid_argument("binary op in unary node");
  if (!child) throw std::invalid_argument("null child");
  if (op == Op::Identity) return child;
  auto e = std::shared_ptr<Expression>(new Expression());
  e->kind_ = Kind::Unary;
  e->op_ = op;
  e->left_ = std::move(child);
  return e;
}

ExprPtr Expression::binary(Op op, ExprPtr lhs, ExprPtr rhs) {
  if (!op_is_binary(op)) throw std::invalid_argument("unary op in binary node");
  if (!lhs || !rhs) throw std::invalid_argument("null child");
  auto e = std::shared_ptr<Expression>(new Expression());
  e->kind_ = Kind::Binary;
  e->op_ = op;
  e->left_ = std::move(lhs);
  e->right_ = std::move(rhs);
  return e;
}

DataMatrix DataMatrix::from_columns(std::vector<Column> cols) {
  DataMatrix m;
  m.rows = cols.empty() ? 0 : cols.front().size();
  for (const auto& c : cols) {
    if (c.size() != m.rows) throw std::invalid_argument("ragged columns");
  }
  m.columns = std::move(cols);
  return m;
}

namespace {

bool all_finite(const double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(v[i])) return false;
  }
  return true;
}

}  // namespace

bool apply_unary(Op op, const double* in, double* out, std::size_t n) {
  switch (op) {
    case Op::Identity:
      std::copy(in, in + n, out);
      return true;
    case Op::Exp:
      for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(in[i]);
      break;
    case Op::Log:
      for (std::size_t i = 0; i < n; ++i) {
        if (!(in[i] > 0.0)) return false;
        out[i] = std::log(in[i]);
      }
      break;
    case Op::Sqrt:
      for (std::size_t i = 0; i < n; ++i) {
        if (!(in[i] > 0.0)) return false;
        out[i] = std::sqrt(in[i]);
      }
      break;
    case Op::Inv:
      for (std::size_t i = 0; i < n; ++i) {
        if (!(std::abs(in[i]) >= kDivisionGuard)) return false;
        out[i] = 1.0 / in[i];
      }
      break;
    case Op::Square:
      for (std::size_t i = 0; i < n; ++i) out[i] = in[i] * in[i];
      break;
    case Op::Sin:
      for (std::size_t i = 0; i < n; ++i) out[i] = std::sin(in[i]);
      break;
    case Op::Cos:
      for (std::size_t i = 0; i < n; ++i) out[i] = std::cos(in[i]);
      break;
    default:
      throw std::invalid_argument("binary op passed to apply_unary");
  }
  return all_finite(out, n);
}

bool apply_binary(Op op, const double* a, const double* b, double* out,
                  std::size_t n) {
  switch (op) {
    case Op::Add:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
      break;
    case Op::Sub:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
      break;
    case Op::Mul:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
      break;
    case Op::Div:
      for (std::size_t i = 0; i < n; ++i) {
        if (!(std::abs(b[i]) >= kDivisionGuard)) return false;
        out[i] = a[i] / b[i];
      }
      break;
    default:
      throw std::invalid_argument("unary op passed to apply_binary");
  }
  return all_finite(out, n);
}

namespace {

bool eval_rec(const Expression& e, const DataMatrix& data, Column& out) {
  const std::size_t n = data.rows;
  switch (e.kind()) {
    case Expression::Kind::Variable: {
      const auto idx = static_cast<std::size_t>(e.variable_index());
      if (idx >= data.cols()) {
        throw std::out_of_range("variable index beyond feature count");
      }
      out = data.columns[idx];
      return true;
    }
    case Expression::Kind::Constant:
      out.assign(n, e.constant_value());
      return std::isfinite(e.constant_value());
    case Expression::Kind::Unary: {
      Column child;
      if (!eval_rec(*e.left(), data, child)) return false;
      out.resize(n);
      return apply_unary(e.op(), child.data(), out.data(), n);
    }
    case Expression::Kind::Binary: {
      Column lhs, rhs;
      if (!eval_rec(*e.left(), data, lhs)) return false;
      if (!eval_rec(*e.right(), data, rhs)) return false;
      out.resize(n);
      return apply_binary(e.op(), lhs.data(), rhs.data(), out.data(), n);
    }
  }
  return false;
}

}  // namespace

std::optional<Column> evaluate(const Expression& expr, const DataMatrix& data) {
  Column out;
  if (!eval_rec(expr, data, out)) return std::nullopt;
  return out;
}

void collect_symbols(const Expression& expr, std::vector<SymbolId>& set,
                     std::uint32_t& uses) {
  switch (expr.kind()) {
    case Expression::Kind::Constant:
      return;  // constants count neither in B nor in K
    case Expression::Kind::Variable: {
      ++uses;
      SymbolId id = variable_symbol(expr.variable_index());
      auto it = std::lower_bound(set.begin(), set.end(), id);
      if (it == set.end() || *it != id) set.insert(it, id);
      return;
    }
    case Expression::Kind::Unary:
    case Expression::Kind::Binary: {
      ++uses;
      SymbolId id = op_symbol(expr.op());
      auto it = std::lower_bound(set.begin(), set.end(), id);
      if (it == set.end() || *it != id) set.insert(it, id);
      collect_symbols(*expr.left(), set, uses);
      if (expr.kind() == Expression::Kind::Binary) {
        collect_symbols(*expr.right(), set, uses);
      }
      return;
    }
  }
}

double complexity_bits(std::uint32_t uses, std::uint32_t basis) {
  if (basis == 0) return 0.0;
  return static_cast<double>(uses) * std::log2(static_cast<double>(basis));
}

ComplexityInfo structural_complexity(const Expression& expr) {
  std::vector<SymbolId> set;
  std::uint32_t uses = 0;
  collect_symbols(expr, set, uses);
  ComplexityInfo info;
  info.uses = uses;
  info.basis = static_cast<std::uint32_t>(set.size());
  info.bits = complexity_bits(info.uses, info.basis);
  return info;
}

namespace {

std::string format_constant(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string render_rec(const Expression& e,
                       const std::vector<std::string>* names) {
  switch (e.kind()) {
    case Expression::Kind::Variable: {
      int idx = e.variable_index();
      if (names != nullptr && static_cast<std::size_t>(idx) < names->size()) {
        return (*names)[static_cast<std::size_t>(idx)];
      }
      return "x" + std::to_string(idx + 1);
    }
    case Expression::Kind::Constant:
      return format_constant(e.constant_value());
    case Expression::Kind::Unary: {
      std::string c = render_rec(*e.left(), names);
      if (e.op() == Op::Square) return "(" + c + " ^ 2)";
      return std::string(op_name(e.op())) + "(" + c + ")";
    }
    case Expression::Kind::Binary: {
      std::string a = render_rec(*e.left(), names);
      std::string b = render_rec(*e.right(), names);
      if (op_is_symmetric(e.op()) && b < a) std::swap(a, b);
      const char* sym = e.op() == Op::Add   ? " + "
                        : e.op() == Op::Sub ? " - "
                        : e.op() == Op::Mul ? " * "
                                            : " / ";
      return "(" + a + sym + b + ")";
    }
  }
  return {};
}

}  // namespace

std::string canonical_string(const Expression& expr) {
  return render_rec(expr, nullptr);
}

std::string render(const Expression& expr,
                   const std::vector<std::string>& names) {
  return render_rec(expr, &names);
}

}  // namespace symreg
