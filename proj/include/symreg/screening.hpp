#pragma once

#include <cstdint>
#include <vector>

#include "symreg/expression.hpp"

namespace symreg {

struct MIScore {
  int feature = 0;
  double mi = 0.0;  // nats, clamped at zero
};

enum class ScreenMode { AbsoluteThreshold, TopPercentile };

struct ScreenConfig {
  double gamma = 0.1;        // MI threshold in nats (absolute mode)
  int n_screen = 20;
  ScreenMode mode = ScreenMode::AbsoluteThreshold;
  double percentile = 50.0;  // keep features ranked in the top p% (percentile mode)
};

/// Resubstitution mutual-information estimate between two columns using
/// Gaussian-kernel densities on standardized variables (Silverman marginal
/// bandwidths, product kernel for the joint). Degenerate input returns 0.
/// Rows are subsampled to 2000 with the given seed when n exceeds that.
double estimate_mi(const Column& x, const Column& y, std::uint64_t seed = 0);

/// MI against the target for every feature, in feature order.
std::vector<MIScore> mi_scores(const DataMatrix& data, const Column& y,
                               std::uint64_t seed = 0);

/// Filter/sort stage of prescreen on precomputed scores: sort MI-descending
/// (ties by ascending feature index), apply the mode's drop rule, truncate
/// to n_screen. Throws std::runtime_error when nothing survives.
std::vector<int> select_screened(std::vector<MIScore> scores,
                                 const ScreenConfig& cfg);

std::vector<int> prescreen(const DataMatrix& data, const Column& y,
                           const ScreenConfig& cfg, std::uint64_t seed = 0);

/// Optional redundancy pass: for every pair with |pearson| >= threshold the
/// member with the larger index is dropped. Returns surviving indices.
std::vector<int> correlation_prefilter(const DataMatrix& data,
                                       double threshold);

}  // namespace symreg
