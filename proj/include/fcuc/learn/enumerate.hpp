#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "fcuc/errors.hpp"
#include "fcuc/system_model.hpp"

namespace fcuc::learn {

/// Dispatch levels of one unit on a grid of `step_mw` starting at p_min;
/// p_max is always included.
inline std::vector<double> dispatch_levels(const GeneratorSpec& g, double step_mw) {
  std::vector<double> levels;
  for (int k = 0;; ++k) {
    double p = g.p_min + k * step_mw;
    if (p > g.p_max + 1e-9) break;
    levels.push_back(p);
  }
  if (levels.back() < g.p_max - 1e-9) levels.push_back(g.p_max);
  return levels;
}

/// Hourly cost of an operating point (no-load plus curve cost of every
/// committed unit).
inline double dispatch_cost(const SystemSpec& spec, const OperatingPoint& op) {
  double cost = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (op.committed[i]) cost += spec.generators[i].hourly_cost(op.dispatch[i]);
  }
  return cost;
}

struct Enumeration {
  std::vector<OperatingPoint> points;  // cheapest first
  std::size_t feasible_count = 0;      // before cost filtering
  std::string diagnostic;
};

/// Every commitment and grid dispatch whose total lies within step_mw/2 of
/// `demand_mw`, keeping the cheapest `cost_quantile` fraction (at least one).
/// Ties in cost are broken by the dispatch vector so the output order is
/// fully determined by the inputs.
inline Enumeration enumerate_operating_points(const SystemSpec& spec, double demand_mw, double step_mw,
                                              double cost_quantile) {
  if (!(step_mw > 0.0)) throw InvalidArgument("step_mw must be positive");
  if (!(cost_quantile > 0.0 && cost_quantile <= 1.0)) {
    throw InvalidArgument("cost_quantile must lie in (0, 1]");
  }
  const std::size_t n = spec.size();
  std::vector<std::vector<double>> levels(n);
  std::vector<std::vector<double>> level_cost(n);
  for (std::size_t i = 0; i < n; ++i) {
    levels[i] = dispatch_levels(spec.generators[i], step_mw);
    for (double p : levels[i]) level_cost[i].push_back(spec.generators[i].hourly_cost(p));
  }
  // max_rest[i]: largest output of units i..n-1
  std::vector<double> max_rest(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) max_rest[i] = max_rest[i + 1] + spec.generators[i].p_max;

  const double lo = demand_mw - 0.5 * step_mw;
  const double hi = demand_mw + 0.5 * step_mw;

  struct Candidate {
    double cost;
    std::vector<std::uint8_t> choice;  // 0 = off, k = levels[i][k-1]
  };
  std::vector<Candidate> found;
  std::vector<std::uint8_t> choice(n, 0);

  auto recurse = [&](auto&& self, std::size_t i, double total, double cost) -> void {
    if (total > hi + 1e-9) return;
    if (total + max_rest[i] < lo - 1e-9) return;
    if (i == n) {
      if (total >= lo - 1e-9 && total > 0.0) found.push_back({cost, choice});
      return;
    }
    choice[i] = 0;
    self(self, i + 1, total, cost);
    for (std::size_t k = 0; k < levels[i].size(); ++k) {
      choice[i] = static_cast<std::uint8_t>(k + 1);
      self(self, i + 1, total + levels[i][k], cost + level_cost[i][k]);
    }
    choice[i] = 0;
  };
  recurse(recurse, 0, 0.0, 0.0);

  Enumeration out;
  out.feasible_count = found.size();
  if (found.empty()) {
    out.diagnostic = "no commitment can supply " + std::to_string(demand_mw) + " MW within +/-" +
                     std::to_string(0.5 * step_mw) + " MW";
    return out;
  }
  std::sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.choice < b.choice;
  });
  auto keep = static_cast<std::size_t>(std::ceil(cost_quantile * static_cast<double>(found.size()) - 1e-9));
  keep = std::clamp<std::size_t>(keep, 1, found.size());
  out.points.reserve(keep);
  for (std::size_t c = 0; c < keep; ++c) {
    std::vector<double> dispatch(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (found[c].choice[i]) dispatch[i] = levels[i][found[c].choice[i] - 1];
    }
    out.points.push_back(make_operating_point(spec, std::move(dispatch)));
  }
  return out;
}

/// Runs the enumeration at every demand level and concatenates the results.
inline Enumeration enumerate_demand_grid(const SystemSpec& spec, const std::vector<double>& demands,
                                         double step_mw, double cost_quantile) {
  Enumeration all;
  for (double d : demands) {
    auto part = enumerate_operating_points(spec, d, step_mw, cost_quantile);
    all.feasible_count += part.feasible_count;
    if (!part.diagnostic.empty()) {
      all.diagnostic += (all.diagnostic.empty() ? "" : "; ") + part.diagnostic;
    }
    std::move(part.points.begin(), part.points.end(), std::back_inserter(all.points));
  }
  return all;
}

/// `levels` evenly spaced values between `lo` and `hi` inclusive.
inline std::vector<double> linear_grid(double lo, double hi, int levels) {
  if (levels < 1) throw InvalidArgument("grid needs at least one level");
  if (levels == 1) return {0.5 * (lo + hi)};
  std::vector<double> out;
  for (int k = 0; k < levels; ++k) out.push_back(lo + (hi - lo) * k / (levels - 1));
  return out;
}

}  // namespace fcuc::learn
