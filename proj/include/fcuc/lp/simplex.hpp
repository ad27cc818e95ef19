#pragma once

// Dense bounded-variable primal simplex (two phases) and a depth-first
// branch-and-bound on top of it. Meant for the small instances used in tests
// and desk studies; production-size models go to an external solver.

#include <algorithm>
#include <cmath>
#include <vector>

#include "fcuc/lp/model.hpp"

namespace fcuc::lp {

struct LpResult {
  Status status = Status::NoSolution;
  double objective = kInf;
  std::vector<double> values;
  long iterations = 0;
};

namespace detail {

class Tableau {
 public:
  static constexpr double kPivotTol = 1e-9;
  static constexpr double kCostTol = 1e-9;
  static constexpr double kFeasTol = 1e-9;
  static constexpr double kBlandPivotShare = 1e-3;

  // columns: structural, then one slack per inequality row, then artificials
  std::vector<std::vector<double>> t;  // m x ncols
  std::vector<double> ub;              // column upper bounds (lower is 0)
  std::vector<double> cost;
  std::vector<double> d;  // reduced costs
  std::vector<double> xb;
  std::vector<int> basis;
  std::vector<char> at_upper;
  std::vector<char> blocked;  // never enters (fixed or retired artificial)
  long iterations = 0;
  long max_iterations = 200000;

  int rows() const { return static_cast<int>(t.size()); }
  int cols() const { return static_cast<int>(ub.size()); }

  void reset_reduced_costs() {
    d = cost;
    for (int i = 0; i < rows(); ++i) {
      double cb = cost[basis[i]];
      if (cb == 0.0) continue;
      for (int j = 0; j < cols(); ++j) d[j] -= cb * t[i][j];
    }
  }

  void pivot(int r, int q) {
    const int n = cols();
    double inv = 1.0 / t[r][q];
    for (int j = 0; j < n; ++j) t[r][j] *= inv;
    t[r][q] = 1.0;
    for (int i = 0; i < rows(); ++i) {
      if (i == r) continue;
      double f = t[i][q];
      if (f == 0.0) continue;
      auto& row = t[i];
      const auto& pr = t[r];
      for (int j = 0; j < n; ++j) row[j] -= f * pr[j];
      row[q] = 0.0;
    }
    double f = d[q];
    if (f != 0.0) {
      for (int j = 0; j < n; ++j) d[j] -= f * t[r][j];
      d[q] = 0.0;
    }
    basis[r] = q;
  }

  // Returns Optimal or Unbounded.
  Status optimise() {
    std::vector<char> is_basic(cols(), 0);
    for (int b : basis) is_basic[b] = 1;
    long degenerate = 0;
    bool bland = false;
    while (true) {
      if (++iterations > max_iterations) throw SolverError("simplex iteration limit reached");
      int q = -1;
      double best = 0.0;
      for (int j = 0; j < cols(); ++j) {
        if (is_basic[j] || blocked[j] || ub[j] <= 0.0) continue;
        double score = at_upper[j] ? d[j] : -d[j];
        if (score > kCostTol && (q < 0 || (!bland && score > best))) {
          q = j;
          best = score;
          if (bland) break;
        }
      }
      if (q < 0) return Status::Optimal;
      const double dir = at_upper[q] ? -1.0 : 1.0;

      // Harris two-pass ratio test: bound the step with a small feasibility
      // allowance, then take the largest pivot among the rows that block
      // within it. Tiny pivots on big-M rows otherwise wreck the tableau.
      auto limit = [&](int i, double alpha, bool relaxed) {
        double room = alpha > 0.0 ? xb[i] : ub[basis[i]] - xb[i];
        if (relaxed) room += kFeasTol;
        return std::max(0.0, room) / std::abs(alpha);
      };
      auto blocks = [&](int i, double alpha) {
        return alpha > kPivotTol || (alpha < -kPivotTol && std::isfinite(ub[basis[i]]));
      };
      double bound = ub[q];
      double biggest = 0.0;
      for (int i = 0; i < rows(); ++i) {
        double alpha = t[i][q] * dir;
        if (!blocks(i, alpha)) continue;
        bound = std::min(bound, limit(i, alpha, true));
        biggest = std::max(biggest, std::abs(alpha));
      }
      double theta = ub[q];
      int leave = -1;
      bool leave_to_upper = false;
      double leave_alpha = 0.0;
      for (int i = 0; i < rows(); ++i) {
        double alpha = t[i][q] * dir;
        if (!blocks(i, alpha)) continue;
        double lim = limit(i, alpha, false);
        if (lim > bound) continue;
        bool take = leave < 0;
        if (!take) {
          if (bland) {
            // smallest index among pivots that are not negligible
            bool usable = std::abs(alpha) >= kBlandPivotShare * biggest;
            bool cur_usable = std::abs(leave_alpha) >= kBlandPivotShare * biggest;
            take = usable && (!cur_usable || basis[i] < basis[leave]);
          } else {
            take = std::abs(alpha) > std::abs(leave_alpha);
          }
        }
        if (take) {
          theta = lim;
          leave = i;
          leave_to_upper = alpha < 0.0;
          leave_alpha = alpha;
        }
      }
      if (leave >= 0 && ub[q] < theta) {
        // the entering variable reaches its own bound first
        theta = ub[q];
        leave = -1;
      }
      if (!std::isfinite(theta)) return Status::Unbounded;

      if (theta <= 1e-12) {
        if (++degenerate > 50) bland = true;
      } else {
        degenerate = 0;
      }
      for (int i = 0; i < rows(); ++i) xb[i] -= t[i][q] * dir * theta;
      double entering_value = at_upper[q] ? ub[q] - theta : theta;

      if (leave < 0) {
        at_upper[q] = !at_upper[q];
        continue;
      }
      int out = basis[leave];
      is_basic[out] = 0;
      at_upper[out] = leave_to_upper;
      is_basic[q] = 1;
      at_upper[q] = 0;
      pivot(leave, q);
      xb[leave] = entering_value;
    }
  }
};

}  // namespace detail

/// Solves the LP relaxation of `model` with variable bounds replaced by
/// `lb`/`ub`. Integrality is ignored.
inline LpResult solve_lp(const Model& model, const std::vector<double>& lb, const std::vector<double>& ub) {
  const int n = model.num_vars();
  const int m = model.num_rows();

  // Map each model variable to tableau columns: x = offset + sign * col
  // (plus a second, negated column for free variables).
  struct Map {
    int col;
    int neg_col = -1;
    double offset;
    double sign;
  };
  std::vector<Map> map(n);
  detail::Tableau tb;
  auto add_col = [&](double upper, double c) {
    tb.ub.push_back(upper);
    tb.cost.push_back(c);
    return static_cast<int>(tb.ub.size()) - 1;
  };
  for (int j = 0; j < n; ++j) {
    double c = model.var(j).obj;
    if (lb[j] > ub[j] + 1e-12) {
      LpResult r;
      r.status = Status::Infeasible;
      return r;
    }
    if (std::isfinite(lb[j])) {
      map[j] = {add_col(std::max(0.0, ub[j] - lb[j]), c), -1, lb[j], 1.0};
    } else if (std::isfinite(ub[j])) {
      map[j] = {add_col(kInf, -c), -1, ub[j], -1.0};
    } else {
      int pos = add_col(kInf, c);
      int neg = add_col(kInf, -c);
      map[j] = {pos, neg, 0.0, 1.0};
    }
  }

  std::vector<double> rhs(m);
  std::vector<int> slack(m, -1);
  for (int r = 0; r < m; ++r) {
    const auto& row = model.rows()[r];
    rhs[r] = row.rhs;
    for (const auto& term : row.terms) rhs[r] -= term.coef * map[term.var].offset;
    if (row.sense != Sense::Eq) slack[r] = add_col(kInf, 0.0);
  }
  const int before_artificial = static_cast<int>(tb.ub.size());

  tb.t.assign(m, std::vector<double>(before_artificial, 0.0));
  tb.xb.assign(m, 0.0);
  tb.basis.assign(m, -1);
  std::vector<int> artificial_rows;
  for (int r = 0; r < m; ++r) {
    const auto& row = model.rows()[r];
    auto& tr = tb.t[r];
    for (const auto& term : row.terms) {
      const auto& mp = map[term.var];
      tr[mp.col] += term.coef * mp.sign;
      if (mp.neg_col >= 0) tr[mp.neg_col] -= term.coef;
    }
    if (slack[r] >= 0) tr[slack[r]] = row.sense == Sense::Le ? 1.0 : -1.0;
    if (rhs[r] < 0.0) {
      for (auto& v : tr) v = -v;
      rhs[r] = -rhs[r];
    }
    tb.xb[r] = rhs[r];
    if (slack[r] >= 0 && tr[slack[r]] > 0.0) {
      tb.basis[r] = slack[r];
    } else {
      artificial_rows.push_back(r);
    }
  }
  for (int r : artificial_rows) {
    int col = add_col(kInf, 0.0);
    for (auto& row : tb.t) row.push_back(0.0);
    tb.t[r][col] = 1.0;
    tb.basis[r] = col;
  }
  const int ncols = static_cast<int>(tb.ub.size());
  tb.at_upper.assign(ncols, 0);
  tb.blocked.assign(ncols, 0);

  LpResult res;
  // phase 1
  if (!artificial_rows.empty()) {
    std::vector<double> phase2_cost = tb.cost;
    std::fill(tb.cost.begin(), tb.cost.end(), 0.0);
    for (int j = before_artificial; j < ncols; ++j) tb.cost[j] = 1.0;
    tb.reset_reduced_costs();
    tb.optimise();
    double infeas = 0.0;
    for (int i = 0; i < m; ++i) {
      if (tb.basis[i] >= before_artificial) infeas += tb.xb[i];
    }
    if (infeas > 1e-7) {
      res.status = Status::Infeasible;
      res.iterations = tb.iterations;
      return res;
    }
    // drive zero-valued artificials out of the basis where possible
    for (int i = 0; i < m; ++i) {
      if (tb.basis[i] < before_artificial) continue;
      int q = -1;
      for (int j = 0; j < before_artificial; ++j) {
        bool basic = std::find(tb.basis.begin(), tb.basis.end(), j) != tb.basis.end();
        if (!basic && std::abs(tb.t[i][j]) > 1e-7) {
          q = j;
          break;
        }
      }
      if (q < 0) continue;  // redundant row; artificial stays basic at zero
      double value = tb.at_upper[q] ? tb.ub[q] : 0.0;
      tb.pivot(i, q);
      tb.xb[i] = value;
      tb.at_upper[q] = 0;
    }
    for (int j = before_artificial; j < ncols; ++j) {
      tb.blocked[j] = 1;
      tb.ub[j] = 0.0;
    }
    tb.cost = std::move(phase2_cost);
    tb.cost.resize(ncols, 0.0);
  }
  tb.reset_reduced_costs();
  Status st = tb.optimise();
  res.iterations = tb.iterations;
  if (st == Status::Unbounded) {
    res.status = Status::Unbounded;
    return res;
  }

  std::vector<double> col_value(ncols, 0.0);
  for (int j = 0; j < ncols; ++j) col_value[j] = tb.at_upper[j] ? tb.ub[j] : 0.0;
  for (int i = 0; i < m; ++i) col_value[tb.basis[i]] = tb.xb[i];
  res.values.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const auto& mp = map[j];
    double v = mp.offset + mp.sign * col_value[mp.col];
    if (mp.neg_col >= 0) v -= col_value[mp.neg_col];
    // clamp rounding noise onto the bounds
    if (v < lb[j] && v > lb[j] - 1e-7) v = lb[j];
    if (v > ub[j] && v < ub[j] + 1e-7) v = ub[j];
    res.values[j] = v;
  }
  res.status = Status::Optimal;
  res.objective = model.objective_value(res.values);
  return res;
}

inline LpResult solve_lp(const Model& model) {
  std::vector<double> lb(model.num_vars()), ub(model.num_vars());
  for (int j = 0; j < model.num_vars(); ++j) {
    lb[j] = model.var(j).lb;
    ub[j] = model.var(j).ub;
  }
  return solve_lp(model, lb, ub);
}

/// Depth-first branch-and-bound over binary variables, branching on the most
/// fractional one and diving toward its nearer integer first.
class BuiltinBackend : public Backend {
 public:
  std::string name() const override { return "builtin"; }

  Result solve(const Model& model, const SolveOptions& opt) const override {
    Stopwatch clock;
    const int n = model.num_vars();
    struct Node {
      std::vector<double> lb, ub;
      double parent_bound;
    };
    Node root{std::vector<double>(n), std::vector<double>(n), -kInf};
    for (int j = 0; j < n; ++j) {
      root.lb[j] = model.var(j).lb;
      root.ub[j] = model.var(j).ub;
    }
    std::vector<Node> stack;
    stack.push_back(std::move(root));

    Result res;
    double pruned_bound = kInf;  // smallest LP bound discarded by the gap rule
    bool unbounded = false;
    auto prune_tol = [&](double incumbent) { return std::max(1e-9, opt.mip_gap * std::abs(incumbent)); };

    while (!stack.empty()) {
      if (clock.seconds() > opt.time_limit_s || res.nodes >= opt.node_limit) break;
      Node node = std::move(stack.back());
      stack.pop_back();
      if (node.parent_bound >= res.objective - prune_tol(res.objective)) {
        pruned_bound = std::min(pruned_bound, node.parent_bound);
        continue;
      }
      ++res.nodes;
      auto lp = solve_lp(model, node.lb, node.ub);
      if (lp.status == Status::Infeasible) continue;
      if (lp.status == Status::Unbounded) {
        unbounded = true;
        break;
      }
      if (lp.objective >= res.objective - prune_tol(res.objective)) {
        pruned_bound = std::min(pruned_bound, lp.objective);
        continue;
      }
      int branch = -1;
      double most = 1e-6;
      for (int j = 0; j < n; ++j) {
        if (model.var(j).type != VarType::Binary) continue;
        double frac = std::abs(lp.values[j] - std::round(lp.values[j]));
        if (frac > most) {
          most = frac;
          branch = j;
        }
      }
      if (branch < 0) {
        for (int j = 0; j < n; ++j) {
          if (model.var(j).type == VarType::Binary) lp.values[j] = std::round(lp.values[j]);
        }
        res.objective = model.objective_value(lp.values);
        res.values = std::move(lp.values);
        continue;
      }
      Node down = node, up = std::move(node);
      down.ub[branch] = 0.0;
      up.lb[branch] = 1.0;
      down.parent_bound = up.parent_bound = lp.objective;
      if (lp.values[branch] >= 0.5) {
        stack.push_back(std::move(down));
        stack.push_back(std::move(up));
      } else {
        stack.push_back(std::move(up));
        stack.push_back(std::move(down));
      }
    }

    if (unbounded) {
      res.status = Status::Unbounded;
      return res;
    }
    double bound = std::min(res.objective, pruned_bound);
    for (const auto& node : stack) bound = std::min(bound, node.parent_bound);
    if (res.values.empty()) {
      res.status = stack.empty() ? Status::Infeasible : Status::NoSolution;
      return res;
    }
    res.bound = bound;
    res.gap = relative_gap(res.objective, bound);
    res.status = stack.empty() || res.gap <= opt.mip_gap ? Status::Optimal : Status::FeasibleGap;
    return res;
  }
};

}  // namespace fcuc::lp
