#pragma once

#include <vector>

#include "symreg/sisso.hpp"

namespace symreg {

/// Archive of non-dominated models in the (rmse, complexity) plane, kept in
/// ascending complexity / strictly descending rmse order.
struct ParetoFront {
  std::vector<ModelCandidate> entries;

  bool empty() const { return entries.empty(); }
  /// Lowest rmse on the front (the last entry); +inf when empty.
  double best_rmse() const;
};

/// rmse values closer than this are treated as equal when checking
/// domination, so float noise cannot pile up entries at one complexity.
inline constexpr double kParetoRmseTol = 1e-12;

/// Merges candidates into the front: removes dominated entries and
/// deduplicates identical canonical strings keeping the lower-rmse instance.
/// Idempotent and order-independent over candidate batches.
ParetoFront update_pareto(const ParetoFront& front,
                          const std::vector<ModelCandidate>& candidates);

/// Selects the front entry to report as the headline model. When the front
/// resolves a numerically exact fit (rmse within 1e-8 of zero relative to
/// the front's rmse span) the simplest such entry wins; otherwise the entry
/// nearest the origin after min-max normalization of both axes, ties toward
/// lower complexity. Two-entry fronts always degenerate to the tie rule.
std::size_t utopia_index(const ParetoFront& front);
const ModelCandidate& utopia_select(const ParetoFront& front);

}  // namespace symreg
