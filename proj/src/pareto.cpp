#include "symreg/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace symreg {

double ParetoFront::best_rmse() const {
  if (entries.empty()) return std::numeric_limits<double>::infinity();
  return entries.back().rmse;
}

ParetoFront update_pareto(const ParetoFront& front,
                          const std::vector<ModelCandidate>& candidates) {
  std::vector<ModelCandidate> all = front.entries;
  all.insert(all.end(), candidates.begin(), candidates.end());

  // canonical-string dedup, keep the lower-rmse instance
  std::unordered_map<std::string, std::size_t> seen;
  std::vector<ModelCandidate> unique;
  unique.reserve(all.size());
  for (auto& mc : all) {
    if (!std::isfinite(mc.rmse) || !std::isfinite(mc.complexity_bits)) {
      throw std::invalid_argument("non-finite candidate metrics");
    }
    auto [it, inserted] = seen.emplace(mc.canonical, unique.size());
    if (inserted) {
      unique.push_back(std::move(mc));
    } else if (mc.rmse < unique[it->second].rmse) {
      unique[it->second] = std::move(mc);
    }
  }

  std::sort(unique.begin(), unique.end(),
            [](const ModelCandidate& a, const ModelCandidate& b) {
              if (a.complexity_bits != b.complexity_bits) {
                return a.complexity_bits < b.complexity_bits;
              }
              if (a.rmse != b.rmse) return a.rmse < b.rmse;
              return a.canonical < b.canonical;
            });

  ParetoFront out;
  double best = std::numeric_limits<double>::infinity();
  for (auto& mc : unique) {
    if (mc.rmse < best - kParetoRmseTol) {
      best = mc.rmse;
      out.entries.push_back(std::move(mc));
    }
  }
  return out;
}

std::size_t utopia_index(const ParetoFront& front) {
  const auto& e = front.entries;
  if (e.empty()) throw std::runtime_error("utopia of an empty front");
  if (e.size() == 1) return 0;

  double rmin = e.back().rmse, rmax = e.front().rmse;
  double cmin = e.front().complexity_bits, cmax = e.back().complexity_bits;

  if (e.size() >= 3) {
    // a resolved exact fit beats the distance geometry: the max-complexity
    // endpoint can never win the normalized-distance race
    const double solved = 1e-8 * rmax;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i].rmse <= solved) return i;  // first hit is the simplest
    }
  }

  const double rspan = rmax - rmin;
  const double cspan = cmax - cmin;
  double best_d = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    double rn = rspan > 0.0 ? (e[i].rmse - rmin) / rspan : 0.0;
    double cn = cspan > 0.0 ? (e[i].complexity_bits - cmin) / cspan : 0.0;
    double d = std::sqrt(rn * rn + cn * cn);
    if (d < best_d - 1e-12) {
      best_d = d;
      best_i = i;
    }
    // ties keep the earlier (lower-complexity) entry
  }
  return best_i;
}

const ModelCandidate& utopia_select(const ParetoFront& front) {
  return front.entries[utopia_index(front)];
}

}  // namespace symreg
