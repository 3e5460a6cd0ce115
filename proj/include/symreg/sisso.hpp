#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "symreg/expansion.hpp"

namespace symreg {

struct ModelTerm {
  double coefficient = 0.0;
  ExprPtr expr;
};

/// A fitted sparse linear model: selected features with least-squares
/// coefficients, explicit intercept, and the assembled expression whose
/// structural complexity is reported.
struct ModelCandidate {
  std::vector<ModelTerm> terms;
  double intercept = 0.0;
  double rmse = 0.0;
  double r2 = 0.0;
  double complexity_bits = 0.0;
  ExprPtr expression;
  std::string canonical;
};

/// Builds ((c1*f1 + c2*f2) + ...) + c0 with the intercept joined by a
/// trailing addition.
ExprPtr assemble_model(const std::vector<ModelTerm>& terms, double intercept);

struct SissoOptions {
  int k = 20;                    // SIS width
  int max_terms = 3;             // T
  std::size_t batch_size = 4096; // combinations solved per batch
  double exact_fit_rel = 1e-12;  // stop when rmse <= this * ||y||_2
};

struct SissoResult {
  /// Non-dominated (rmse, complexity) candidates among everything
  /// enumerated by this call, with full model detail.
  std::vector<ModelCandidate> front_candidates;
  /// Best t-term model for each executed t, in t order.
  std::vector<ModelCandidate> best_per_term;
  /// Exactly sum over executed t of C(|S_t|, t).
  std::uint64_t models_enumerated = 0;
};

/// Sure independence screening: ranks eligible pool columns by |omega| where
/// omega = standardized-column . target, and returns up to k indices not in
/// `exclude`, best first, ties by ascending index. The intercept and
/// zero-variance columns are never eligible. Throws when nothing is eligible.
std::vector<int> sis(const Column& target, const FeaturePool& pool, int k,
                     const std::vector<int>& exclude = {});

/// Exhaustive best-subset search: fits every C(|subspace|, t) combination on
/// raw columns plus intercept and returns the minimum-residual model.
/// Rank-deficient combinations are skipped; ties break toward lower
/// assembled complexity, then lexicographic index order.
ModelCandidate l0_best(const Column& y, const FeaturePool& pool,
                       const std::vector<int>& subspace, int t);

/// Complexity filter + SIS + residual-guided subspace enlargement +
/// exhaustive l0 regression up to T terms.
SissoResult c2_sisso(const Column& y, const FeaturePool& pool,
                     double lambda_bits, const SissoOptions& opts = {});

/// C(n, r) saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t r);

}  // namespace symreg
