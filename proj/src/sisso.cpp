#include "symreg/sisso.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>

namespace symreg {

std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  std::uint64_t out = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    // out * (n - r + i) / i, exact at every step
    std::uint64_t num = n - r + i;
    if (__builtin_mul_overflow(out, num, &out)) return UINT64_MAX;
    out /= i;
  }
  return out;
}

ExprPtr assemble_model(const std::vector<ModelTerm>& terms, double intercept) {
  ExprPtr acc;
  for (const auto& t : terms) {
    ExprPtr scaled =
        Expression::binary(Op::Mul, Expression::constant(t.coefficient), t.expr);
    acc = acc ? Expression::binary(Op::Add, acc, scaled) : scaled;
  }
  ExprPtr c0 = Expression::constant(intercept);
  return acc ? Expression::binary(Op::Add, acc, c0) : c0;
}

namespace {

struct ColumnStats {
  double mean = 0.0;
  double sd = 0.0;  // population
  bool eligible = false;
};

ColumnStats column_stats(const Feature& f) {
  ColumnStats s;
  if (f.is_intercept) return s;
  const Column& c = *f.column;
  const auto n = static_cast<double>(c.size());
  s.mean = std::accumulate(c.begin(), c.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : c) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / n);
  s.eligible = s.sd > 0.0 && std::isfinite(s.sd);
  return s;
}

}  // namespace

std::vector<int> sis(const Column& target, const FeaturePool& pool, int k,
                     const std::vector<int>& exclude) {
  if (k < 1) throw std::invalid_argument("SIS width must be >= 1");
  if (target.size() != pool.rows()) {
    throw std::invalid_argument("target length mismatch");
  }
  std::vector<bool> excluded(pool.size(), false);
  for (int e : exclude) {
    if (e >= 0 && static_cast<std::size_t>(e) < pool.size()) {
      excluded[static_cast<std::size_t>(e)] = true;
    }
  }
  const double tsum = std::accumulate(target.begin(), target.end(), 0.0);

  std::vector<std::pair<double, int>> ranked;  // (-|omega|, index)
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (excluded[i]) continue;
    ColumnStats st = column_stats(pool[i]);
    if (!st.eligible) continue;
    const Column& c = *pool[i].column;
    double dot = 0.0;
    for (std::size_t r = 0; r < c.size(); ++r) dot += c[r] * target[r];
    double omega = (dot - st.mean * tsum) / st.sd;
    ranked.emplace_back(-std::abs(omega), static_cast<int>(i));
  }
  if (ranked.empty()) throw std::runtime_error("no eligible column for SIS");
  std::sort(ranked.begin(), ranked.end());
  if (ranked.size() > static_cast<std::size_t>(k)) {
    ranked.resize(static_cast<std::size_t>(k));
  }
  std::vector<int> out;
  out.reserve(ranked.size());
  for (const auto& [negw, idx] : ranked) out.push_back(idx);
  return out;
}

namespace {

/// Shared least-squares state for one subspace: a single QR of
/// [1 | subspace columns] reduces every combination fit to a small
/// triangular problem whose cost is independent of n.
class LstsqContext {
 public:
  LstsqContext(const Column& y, const FeaturePool& pool,
               const std::vector<int>& subspace)
      : n_(static_cast<Eigen::Index>(pool.rows())) {
    const auto m = static_cast<Eigen::Index>(subspace.size());
    Eigen::MatrixXd a(n_, m + 1);
    a.col(0).setOnes();
    for (Eigen::Index j = 0; j < m; ++j) {
      const Column& c = *pool[static_cast<std::size_t>(subspace[j])].column;
      for (Eigen::Index r = 0; r < n_; ++r) a(r, j + 1) = c[r];
    }
    Eigen::VectorXd y_vec = Eigen::Map<const Eigen::VectorXd>(y.data(), n_);
    colnorm_.resize(static_cast<std::size_t>(m + 1));
    for (Eigen::Index j = 0; j <= m; ++j) {
      colnorm_[static_cast<std::size_t>(j)] = a.col(j).norm();
    }

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::Index rr = std::min(n_, m + 1);
    r_ = qr.matrixQR().topRows(rr).triangularView<Eigen::Upper>();
    Eigen::VectorXd qt_y = qr.householderQ().transpose() * y_vec;
    qty_ = qt_y.head(rr);
    rho_ = qt_y.tail(n_ - rr).squaredNorm();
  }

  Eigen::Index rows() const { return n_; }

  /// Fits the combination given by ascending subspace positions with an
  /// implicit leading intercept column. Returns false when rank-deficient
  /// at tolerance 1e-10 * (largest selected column norm).
  bool solve(const int* positions, int t, double* coeffs, double* intercept,
             double* rss) const {
    const Eigen::Index cols = t + 1;
    const Eigen::Index rr = r_.rows();
    if (rr < cols) return false;
    Eigen::MatrixXd s(rr, cols);
    s.col(0) = r_.col(0);
    double maxnorm = colnorm_[0];
    for (int j = 0; j < t; ++j) {
      s.col(j + 1) = r_.col(positions[j] + 1);
      maxnorm = std::max(maxnorm,
                         colnorm_[static_cast<std::size_t>(positions[j]) + 1]);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(s);
    const double tol = 1e-10 * maxnorm;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (std::abs(qr.matrixQR()(j, j)) < tol) return false;
    }
    Eigen::VectorXd c = qr.solve(qty_);
    double rss_small = (qty_ - s * c).squaredNorm();
    *rss = rho_ + rss_small;
    *intercept = c(0);
    for (int j = 0; j < t; ++j) coeffs[j] = c(j + 1);
    return true;
  }

  double rmse_from_rss(double rss) const {
    return std::sqrt(std::max(rss, 0.0) / static_cast<double>(n_));
  }

 private:
  Eigen::Index n_;
  Eigen::MatrixXd r_;
  Eigen::VectorXd qty_;
  std::vector<double> colnorm_;
  double rho_ = 0.0;
};

struct TargetStats {
  double norm = 0.0;
  double tss = 0.0;
};

TargetStats target_stats(const Column& y) {
  TargetStats st;
  double mean = std::accumulate(y.begin(), y.end(), 0.0) /
                static_cast<double>(y.size());
  double nn = 0.0, tss = 0.0;
  for (double v : y) {
    nn += v * v;
    tss += (v - mean) * (v - mean);
  }
  st.norm = std::sqrt(nn);
  st.tss = tss;
  return st;
}

struct ComboRec {
  double rmse;
  double complexity;
  std::uint32_t offset;  // into the flat position buffer
  std::uint8_t t;
};

/// Assembled-model complexity without building the tree:
/// K = sum of term K plus one multiplication per term plus t additions
/// (t-1 joins and the intercept join); B adds {mul, add} to the union.
double combo_complexity(const FeaturePool& pool, const std::vector<int>& subspace,
                        const int* positions, int t,
                        std::vector<SymbolId>& scratch) {
  scratch.clear();
  std::uint32_t uses = 0;
  for (int j = 0; j < t; ++j) {
    const Feature& f = pool[static_cast<std::size_t>(subspace[positions[j]])];
    uses += f.symbol_uses;
    std::vector<SymbolId> merged;
    merged.reserve(scratch.size() + f.symbols.size());
    std::set_union(scratch.begin(), scratch.end(), f.symbols.begin(),
                   f.symbols.end(), std::back_inserter(merged));
    scratch = std::move(merged);
  }
  uses += 2u * static_cast<std::uint32_t>(t);
  for (SymbolId extra : {op_symbol(Op::Mul), op_symbol(Op::Add)}) {
    auto it = std::lower_bound(scratch.begin(), scratch.end(), extra);
    if (it == scratch.end() || *it != extra) scratch.insert(it, extra);
  }
  return complexity_bits(uses, static_cast<std::uint32_t>(scratch.size()));
}

bool lex_less(const std::uint32_t* flat, const ComboRec& a, const ComboRec& b) {
  return std::lexicographical_compare(flat + a.offset, flat + a.offset + a.t,
                                      flat + b.offset, flat + b.offset + b.t);
}

/// rmse-first; numerically-exact fits tie and resolve by lower complexity,
/// then lexicographic combination order.
bool rec_better(const std::uint32_t* flat, const ComboRec& a, const ComboRec& b,
                double exact_thresh) {
  const bool both_exact = a.rmse <= exact_thresh && b.rmse <= exact_thresh;
  if (!both_exact && a.rmse != b.rmse) return a.rmse < b.rmse;
  if (a.complexity != b.complexity) return a.complexity < b.complexity;
  return lex_less(flat, a, b);
}

/// Enumerates all C(|subspace|, t) combinations in lexicographic order in
/// fixed-size batches, recording every solvable fit. Returns the record
/// index of the best fit, or -1 when nothing was solvable.
std::ptrdiff_t enumerate_t(const FeaturePool& pool,
                           const std::vector<int>& subspace,
                           const LstsqContext& ctx, int t, double exact_thresh,
                           std::size_t batch_size,
                           std::vector<ComboRec>& records,
                           std::vector<std::uint32_t>& flat) {
  const int m = static_cast<int>(subspace.size());
  if (m < t) return -1;
  if (batch_size == 0) batch_size = 1;

  std::vector<int> batch;  // batch_size combinations of t positions
  batch.reserve(batch_size * static_cast<std::size_t>(t));
  std::vector<int> pos(static_cast<std::size_t>(t));
  std::iota(pos.begin(), pos.end(), 0);
  bool more = true;

  std::vector<double> coeffs(static_cast<std::size_t>(t));
  std::vector<SymbolId> scratch;
  std::ptrdiff_t best = -1;

  while (more) {
    batch.clear();
    while (more && batch.size() < batch_size * static_cast<std::size_t>(t)) {
      batch.insert(batch.end(), pos.begin(), pos.end());
      int j = t - 1;
      while (j >= 0 && pos[static_cast<std::size_t>(j)] == m - t + j) --j;
      if (j < 0) {
        more = false;
      } else {
        ++pos[static_cast<std::size_t>(j)];
        for (int q = j + 1; q < t; ++q) {
          pos[static_cast<std::size_t>(q)] = pos[static_cast<std::size_t>(q - 1)] + 1;
        }
      }
    }
    const std::size_t combos = batch.size() / static_cast<std::size_t>(t);
    for (std::size_t c = 0; c < combos; ++c) {
      const int* p = batch.data() + c * static_cast<std::size_t>(t);
      double intercept = 0.0, rss = 0.0;
      if (!ctx.solve(p, t, coeffs.data(), &intercept, &rss)) continue;
      ComboRec rec;
      rec.rmse = ctx.rmse_from_rss(rss);
      rec.complexity = combo_complexity(pool, subspace, p, t, scratch);
      rec.offset = static_cast<std::uint32_t>(flat.size());
      rec.t = static_cast<std::uint8_t>(t);
      for (int j = 0; j < t; ++j) flat.push_back(static_cast<std::uint32_t>(p[j]));
      records.push_back(rec);
      if (best < 0 ||
          rec_better(flat.data(), rec, records[static_cast<std::size_t>(best)],
                     exact_thresh)) {
        best = static_cast<std::ptrdiff_t>(records.size()) - 1;
      }
    }
  }
  return best;
}

ModelCandidate build_candidate(const FeaturePool& pool,
                               const std::vector<int>& subspace,
                               const LstsqContext& ctx, const TargetStats& ys,
                               const std::uint32_t* flat, const ComboRec& rec) {
  std::vector<int> positions(flat + rec.offset, flat + rec.offset + rec.t);
  std::vector<double> coeffs(rec.t);
  double intercept = 0.0, rss = 0.0;
  if (!ctx.solve(positions.data(), rec.t, coeffs.data(), &intercept, &rss)) {
    throw std::logic_error("recorded combination became unsolvable");
  }
  ModelCandidate mc;
  mc.terms.reserve(rec.t);
  for (int j = 0; j < rec.t; ++j) {
    mc.terms.push_back(
        {coeffs[static_cast<std::size_t>(j)],
         pool[static_cast<std::size_t>(subspace[positions[static_cast<std::size_t>(j)]])]
             .expr});
  }
  mc.intercept = intercept;
  mc.rmse = ctx.rmse_from_rss(rss);
  mc.r2 = ys.tss > 0.0 ? 1.0 - rss / ys.tss : (rss <= 1e-24 ? 1.0 : 0.0);
  mc.expression = assemble_model(mc.terms, mc.intercept);
  mc.complexity_bits = structural_complexity(*mc.expression).bits;
  mc.canonical = canonical_string(*mc.expression);
  return mc;
}

}  // namespace

ModelCandidate l0_best(const Column& y, const FeaturePool& pool,
                       const std::vector<int>& subspace, int t) {
  if (t < 1) throw std::invalid_argument("t must be >= 1");
  if (static_cast<std::size_t>(t) > subspace.size()) {
    throw std::invalid_argument("t exceeds subspace size");
  }
  std::vector<int> sorted = subspace;
  std::sort(sorted.begin(), sorted.end());
  LstsqContext ctx(y, pool, sorted);
  TargetStats ys = target_stats(y);
  std::vector<ComboRec> records;
  std::vector<std::uint32_t> flat;
  std::ptrdiff_t best = enumerate_t(pool, sorted, ctx, t, 1e-12 * ys.norm, 4096,
                                    records, flat);
  if (best < 0) throw std::runtime_error("no solvable t-term model");
  return build_candidate(pool, sorted, ctx, ys, flat.data(),
                         records[static_cast<std::size_t>(best)]);
}

SissoResult c2_sisso(const Column& y, const FeaturePool& pool,
                     double lambda_bits, const SissoOptions& opts) {
  if (opts.max_terms < 1) throw std::invalid_argument("T must be >= 1");
  FeaturePool filtered = complexity_filter(pool, lambda_bits);
  if (filtered.size() == 0) {
    throw std::runtime_error("complexity filter left an empty pool");
  }
  TargetStats ys = target_stats(y);
  const double exact_thresh = opts.exact_fit_rel * ys.norm;

  SissoResult result;
  std::vector<ComboRec> records;
  std::vector<std::uint32_t> flat;
  std::vector<std::ptrdiff_t> best_per_t;
  std::vector<std::vector<int>> subspaces;     // subspace used at t = i+1
  std::vector<std::unique_ptr<LstsqContext>> contexts;

  {
    std::vector<int> s0 = sis(y, filtered, opts.k);
    std::sort(s0.begin(), s0.end());
    contexts.push_back(std::make_unique<LstsqContext>(y, filtered, s0));
    subspaces.push_back(std::move(s0));
  }

  for (int t = 1; t <= opts.max_terms; ++t) {
    const std::vector<int>& subspace = subspaces.back();
    const LstsqContext& ctx = *contexts.back();
    if (static_cast<std::size_t>(t) > subspace.size()) break;

    result.models_enumerated +=
        binomial(subspace.size(), static_cast<std::uint64_t>(t));
    std::ptrdiff_t best = enumerate_t(filtered, subspace, ctx, t, exact_thresh,
                                      opts.batch_size, records, flat);
    if (best < 0) {
      if (t == 1) throw std::runtime_error("no solvable t-term model");
      break;
    }
    best_per_t.push_back(best);
    const ComboRec& bc = records[static_cast<std::size_t>(best)];
    if (bc.rmse <= exact_thresh) break;  // numerically exact fit
    if (t == opts.max_terms) break;

    // residual of the best t-term model guides the subspace enlargement
    std::vector<double> coeffs(static_cast<std::size_t>(t));
    double intercept = 0.0, rss = 0.0;
    const std::uint32_t* p = flat.data() + bc.offset;
    std::vector<int> positions(p, p + t);
    if (!ctx.solve(positions.data(), t, coeffs.data(), &intercept, &rss)) {
      throw std::logic_error("best combination became unsolvable");
    }
    Column residual(y.size());
    for (std::size_t r = 0; r < y.size(); ++r) residual[r] = y[r] - intercept;
    for (int j = 0; j < t; ++j) {
      const Column& c =
          *filtered[static_cast<std::size_t>(
                        subspace[static_cast<std::size_t>(positions[j])])]
               .column;
      const double w = coeffs[static_cast<std::size_t>(j)];
      for (std::size_t r = 0; r < y.size(); ++r) residual[r] -= w * c[r];
    }

    std::vector<int> addition;
    try {
      addition = sis(residual, filtered, opts.k, subspace);
    } catch (const std::runtime_error&) {
      break;  // subspace cannot grow
    }
    std::vector<int> grown = subspace;
    grown.insert(grown.end(), addition.begin(), addition.end());
    std::sort(grown.begin(), grown.end());
    contexts.push_back(std::make_unique<LstsqContext>(y, filtered, grown));
    subspaces.push_back(std::move(grown));
  }

  if (best_per_t.empty()) throw std::runtime_error("no model found");

  for (std::size_t i = 0; i < best_per_t.size(); ++i) {
    result.best_per_term.push_back(build_candidate(
        filtered, subspaces[i], *contexts[i], ys, flat.data(),
        records[static_cast<std::size_t>(best_per_t[i])]));
  }

  // batch-local non-dominated filter; only survivors get full model detail
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&records](std::size_t a, std::size_t b) {
                     if (records[a].complexity != records[b].complexity) {
                       return records[a].complexity < records[b].complexity;
                     }
                     return records[a].rmse < records[b].rmse;
                   });
  constexpr double kRmseTol = 1e-12;
  double best_rmse = std::numeric_limits<double>::infinity();
  for (std::size_t idx : order) {
    const ComboRec& rec = records[idx];
    if (rec.rmse < best_rmse - kRmseTol) {
      best_rmse = rec.rmse;
      const auto which = static_cast<std::size_t>(rec.t - 1);
      result.front_candidates.push_back(build_candidate(
          filtered, subspaces[which], *contexts[which], ys, flat.data(), rec));
    }
  }
  return result;
}

}  // namespace symreg
