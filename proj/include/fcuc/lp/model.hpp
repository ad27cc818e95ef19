#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fcuc/errors.hpp"

namespace fcuc::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarType { Continuous, Binary };
enum class Sense { Le, Ge, Eq };

struct Variable {
  std::string name;
  double lb = 0.0;
  double ub = kInf;
  double obj = 0.0;
  VarType type = VarType::Continuous;
};

struct Term {
  int var;
  double coef;
};

struct Row {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::Le;
  double rhs = 0.0;
};

/// A mixed-integer linear program: minimise obj·x + constant subject to rows
/// and bounds. Variables and rows keep insertion order, which is the order
/// used by every backend and by the LP-file writer.
class Model {
 public:
  int add_var(std::string name, double lb, double ub, double obj = 0.0, VarType type = VarType::Continuous) {
    if (type == VarType::Binary) {
      lb = std::max(lb, 0.0);
      ub = std::min(ub, 1.0);
    }
    if (std::isnan(lb) || std::isnan(ub) || lb > ub) {
      throw InvalidArgument("variable " + name + " has empty bounds");
    }
    vars_.push_back({std::move(name), lb, ub, obj, type});
    return static_cast<int>(vars_.size()) - 1;
  }
  int add_binary(std::string name, double obj = 0.0) {
    return add_var(std::move(name), 0.0, 1.0, obj, VarType::Binary);
  }

  int add_row(std::string name, std::vector<Term> terms, Sense sense, double rhs) {
    for (const auto& t : terms) {
      if (t.var < 0 || t.var >= num_vars()) throw InvalidArgument("row " + name + " references unknown variable");
    }
    rows_.push_back({std::move(name), std::move(terms), sense, rhs});
    return static_cast<int>(rows_.size()) - 1;
  }

  void set_obj(int var, double coef) { vars_.at(var).obj = coef; }
  void add_obj(int var, double coef) { vars_.at(var).obj += coef; }
  void set_bounds(int var, double lb, double ub) {
    vars_.at(var).lb = lb;
    vars_.at(var).ub = ub;
  }
  double objective_constant = 0.0;

  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  int num_binaries() const {
    int n = 0;
    for (const auto& v : vars_) n += v.type == VarType::Binary;
    return n;
  }
  const std::vector<Variable>& vars() const { return vars_; }
  const std::vector<Row>& rows() const { return rows_; }
  const Variable& var(int j) const { return vars_.at(j); }

  double objective_value(const std::vector<double>& x) const {
    double s = objective_constant;
    for (int j = 0; j < num_vars(); ++j) s += vars_[j].obj * x[j];
    return s;
  }

  double row_activity(int r, const std::vector<double>& x) const {
    double s = 0.0;
    for (const auto& t : rows_[r].terms) s += t.coef * x[t.var];
    return s;
  }

  /// Largest violation of any bound, row or integrality requirement.
  double max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (int j = 0; j < num_vars(); ++j) {
      worst = std::max({worst, vars_[j].lb - x[j], x[j] - vars_[j].ub});
      if (vars_[j].type == VarType::Binary) worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
    }
    for (int r = 0; r < num_rows(); ++r) {
      double a = row_activity(r, x);
      switch (rows_[r].sense) {
        case Sense::Le: worst = std::max(worst, a - rows_[r].rhs); break;
        case Sense::Ge: worst = std::max(worst, rows_[r].rhs - a); break;
        case Sense::Eq: worst = std::max(worst, std::abs(a - rows_[r].rhs)); break;
      }
    }
    return worst;
  }

 private:
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
};

enum class Status { Optimal, FeasibleGap, Infeasible, Unbounded, NoSolution };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::FeasibleGap: return "feasible-gap";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::NoSolution: return "no-solution";
  }
  return "unknown";
}

struct SolveOptions {
  double mip_gap = 1e-4;       // relative
  double time_limit_s = 60.0;
  long node_limit = 1'000'000;
};

struct Result {
  Status status = Status::NoSolution;
  double objective = kInf;  // includes the model's constant
  double bound = -kInf;
  double gap = kInf;
  std::vector<double> values;
  long nodes = 0;
};

inline double relative_gap(double objective, double bound) {
  if (!std::isfinite(objective) || !std::isfinite(bound)) return kInf;
  return std::max(0.0, objective - bound) / std::max(1e-9, std::abs(objective));
}

/// What every solver binding implements.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual Result solve(const Model& model, const SolveOptions& opt) const = 0;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace fcuc::lp
