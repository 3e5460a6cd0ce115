#include "symreg/screening.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace symreg {

namespace {

constexpr std::size_t kSubsampleCap = 2000;

struct Standardized {
  Column values;
  bool degenerate = false;
};

Standardized standardize(const Column& x) {
  Standardized s;
  const std::size_t n = x.size();
  double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / static_cast<double>(n));
  if (!(sd > 0.0) || !std::isfinite(sd)) {
    s.degenerate = true;
    return s;
  }
  s.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.values[i] = (x[i] - mean) / sd;
  return s;
}

std::vector<std::size_t> subsample_rows(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (n <= kSubsampleCap) return idx;
  // partial Fisher-Yates, deterministic across platforms
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < kSubsampleCap; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(kSubsampleCap);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

double estimate_mi(const Column& x, const Column& y, std::uint64_t seed) {
  if (x.size() != y.size()) throw std::invalid_argument("length mismatch");
  Column xs = x;
  Column ys = y;
  if (x.size() > kSubsampleCap) {
    auto rows = subsample_rows(x.size(), seed);
    xs.clear();
    ys.clear();
    xs.reserve(rows.size());
    ys.reserve(rows.size());
    for (auto r : rows) {
      xs.push_back(x[r]);
      ys.push_back(y[r]);
    }
  }
  const std::size_t n = xs.size();
  if (n < 4) throw std::invalid_argument("need at least 4 rows for MI");

  Standardized sx = standardize(xs);
  Standardized sy = standardize(ys);
  if (sx.degenerate || sy.degenerate) return 0.0;

  // Silverman bandwidth per marginal; on standardized data the sample sd is 1.
  const double h = 1.06 * std::pow(static_cast<double>(n), -0.2);
  const double inv2h2 = 1.0 / (2.0 * h * h);

  // Product Gaussian kernels: the joint at (x_i, y_i) is the mean over j of
  // K(dx_ij) * K(dy_ij); normalization constants cancel in the ratio except
  // for one factor of n and the kernel height, handled below.
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double px = 0.0, py = 0.0, pxy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double dx = sx.values[i] - sx.values[j];
      double dy = sy.values[i] - sy.values[j];
      double kx = std::exp(-dx * dx * inv2h2);
      double ky = std::exp(-dy * dy * inv2h2);
      px += kx;
      py += ky;
      pxy += kx * ky;
    }
    // ratio p(x,y)/(p(x)p(y)) with common 1/(n h sqrt(2pi)) factors reduced:
    // (pxy/(n hx hy 2pi)) / (px/(n hx s2pi) * py/(n hy s2pi)) = n*pxy/(px*py)
    total += std::log(static_cast<double>(n) * pxy / (px * py));
  }
  double mi = total / static_cast<double>(n);
  return mi > 0.0 ? mi : 0.0;
}

std::vector<MIScore> mi_scores(const DataMatrix& data, const Column& y,
                               std::uint64_t seed) {
  std::vector<MIScore> out;
  out.reserve(data.cols());
  for (std::size_t i = 0; i < data.cols(); ++i) {
    out.push_back({static_cast<int>(i), estimate_mi(data.columns[i], y, seed)});
  }
  return out;
}

std::vector<int> select_screened(std::vector<MIScore> scores,
                                 const ScreenConfig& cfg) {
  if (scores.empty()) throw std::runtime_error("no features to screen");
  double max_mi = 0.0;
  for (const auto& s : scores) max_mi = std::max(max_mi, s.mi);

  std::stable_sort(scores.begin(), scores.end(),
                   [](const MIScore& a, const MIScore& b) {
                     if (a.mi != b.mi) return a.mi > b.mi;
                     return a.feature < b.feature;
                   });

  std::vector<int> kept;
  if (cfg.mode == ScreenMode::AbsoluteThreshold) {
    for (const auto& s : scores) {
      if (s.mi >= cfg.gamma) kept.push_back(s.feature);
    }
  } else {
    if (!(cfg.percentile > 0.0 && cfg.percentile <= 100.0)) {
      throw std::invalid_argument("percentile must be in (0, 100]");
    }
    auto top = static_cast<std::size_t>(std::ceil(
        cfg.percentile / 100.0 * static_cast<double>(scores.size())));
    for (std::size_t i = 0; i < scores.size() && i < top; ++i) {
      kept.push_back(scores[i].feature);
    }
  }
  if (cfg.n_screen > 0 &&
      kept.size() > static_cast<std::size_t>(cfg.n_screen)) {
    kept.resize(static_cast<std::size_t>(cfg.n_screen));
  }
  if (kept.empty()) {
    throw std::runtime_error("no feature passes MI screen (max MI " +
                             std::to_string(max_mi) + ")");
  }
  return kept;
}

std::vector<int> prescreen(const DataMatrix& data, const Column& y,
                           const ScreenConfig& cfg, std::uint64_t seed) {
  return select_screened(mi_scores(data, y, seed), cfg);
}

std::vector<int> correlation_prefilter(const DataMatrix& data,
                                       double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("correlation threshold must be in (0, 1]");
  }
  const std::size_t d = data.cols();
  std::vector<Standardized> std_cols(d);
  for (std::size_t i = 0; i < d; ++i) std_cols[i] = standardize(data.columns[i]);

  std::vector<bool> dropped(d, false);
  const double n = static_cast<double>(data.rows);
  for (std::size_t i = 0; i < d; ++i) {
    if (dropped[i] || std_cols[i].degenerate) continue;
    for (std::size_t j = i + 1; j < d; ++j) {
      if (dropped[j] || std_cols[j].degenerate) continue;
      double dot = 0.0;
      for (std::size_t r = 0; r < data.rows; ++r) {
        dot += std_cols[i].values[r] * std_cols[j].values[r];
      }
      if (std::abs(dot / n) >= threshold) dropped[j] = true;
    }
  }
  std::vector<int> kept;
  for (std::size_t i = 0; i < d; ++i) {
    if (!dropped[i]) kept.push_back(static_cast<int>(i));
  }
  return kept;
}

}  // namespace symreg
