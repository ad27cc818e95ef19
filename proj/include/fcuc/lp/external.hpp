#pragma once

// Bindings to external MILP executables through LP files.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unistd.h>

#include "fcuc/io.hpp"
#include "fcuc/lp/lp_format.hpp"
#include "fcuc/lp/model.hpp"

namespace fcuc::lp {

inline constexpr const char* kSolverEnv = "FCUC_MILP_SOLVER";

/// Path of the external solver from the environment, or empty.
inline std::string external_solver_path() {
  const char* p = std::getenv(kSolverEnv);
  return p ? std::string(p) : std::string();
}

class CbcBackend : public Backend {
 public:
  explicit CbcBackend(std::string executable) : exe_(std::move(executable)) {
    if (exe_.empty()) throw SolverError(std::string("no external solver configured; set ") + kSolverEnv);
    if (!std::filesystem::exists(exe_)) throw SolverError("external solver not found at " + exe_);
  }

  std::string name() const override { return "cbc"; }

  Result solve(const Model& model, const SolveOptions& opt) const override {
    auto res = run(model, opt, "");
    // CBC occasionally reports a postsolved point that misses the original
    // rows; solving without presolve avoids that path
    if (!usable(model, res)) res = run(model, opt, " preprocess off");
    if (usable(model, res)) return res;
    if (res.status == Status::Optimal && res.gap == 0.0) {
      throw SolverError("external solver returned a point violating the model by " +
                        io::fmt(model.max_violation(res.values)));
    }
    // stopped before finding anything it could postsolve
    Result none;
    none.status = Status::NoSolution;
    return none;
  }

  static constexpr double kFeasibilityTol = 1e-5;

  static bool usable(const Model& model, const Result& res) {
    if (res.status != Status::Optimal && res.status != Status::FeasibleGap) return true;
    return model.max_violation(res.values) <= kFeasibilityTol;
  }

  Result run(const Model& model, const SolveOptions& opt, const std::string& extra) const {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / ("fcuc_cbc_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter_++));
    fs::create_directories(dir);
    struct Cleanup {
      fs::path p;
      ~Cleanup() {
        std::error_code ec;
        fs::remove_all(p, ec);
      }
    } cleanup{dir};

    io::write_file(dir / "model.lp", to_lp_string(model));
    std::string cmd = "\"" + exe_ + "\" \"" + (dir / "model.lp").string() + "\" ratio " + io::fmt(opt.mip_gap) +
                      " sec " + io::fmt(opt.time_limit_s) + " threads 1 randomSeed 1 randomCbcSeed 1" + extra + " solve solu \"" +
                      (dir / "out.sol").string() + "\" > \"" + (dir / "log.txt").string() + "\" 2>&1";
    int rc = std::system(cmd.c_str());
    if (rc != 0 || !fs::exists(dir / "out.sol")) {
      std::string log = fs::exists(dir / "log.txt") ? io::read_file(dir / "log.txt") : std::string();
      throw SolverError("external solver failed (exit " + std::to_string(rc) + "): " + last_line(log));
    }
    return parse(model, io::read_file(dir / "out.sol"), io::read_file(dir / "log.txt"), opt);
  }

  static Result parse(const Model& model, const std::string& sol, const std::string& log,
                      const SolveOptions& opt) {
    Result res;
    auto first_end = sol.find('\n');
    std::string head = sol.substr(0, first_end);
    auto starts = [&](const char* p) { return head.rfind(p, 0) == 0; };
    if (starts("Infeasible") || starts("Integer infeasible")) {
      res.status = Status::Infeasible;
      return res;
    }
    if (starts("Unbounded")) {
      res.status = Status::Unbounded;
      return res;
    }
    if (head.find("no integer solution") != std::string::npos) {
      res.status = Status::NoSolution;
      return res;
    }
    std::map<std::string, int> index;
    for (int j = 0; j < model.num_vars(); ++j) index[model.var(j).name] = j;
    res.values.assign(model.num_vars(), 0.0);
    std::size_t pos = first_end == std::string::npos ? sol.size() : first_end + 1;
    while (pos < sol.size()) {
      auto end = sol.find('\n', pos);
      if (end == std::string::npos) end = sol.size();
      std::string line(io::trim(std::string_view(sol).substr(pos, end - pos)));
      pos = end + 1;
      if (line.rfind("**", 0) == 0) line = std::string(io::trim(std::string_view(line).substr(2)));
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::size_t p = 0;
      while (p < line.size()) {
        while (p < line.size() && line[p] == ' ') ++p;
        std::size_t q = p;
        while (q < line.size() && line[q] != ' ') ++q;
        if (q > p) cells.push_back(line.substr(p, q - p));
        p = q;
      }
      if (cells.size() < 3) continue;
      auto it = index.find(cells[1]);
      if (it == index.end()) continue;
      double v = io::parse_double(cells[2], "solution value");
      if (model.var(it->second).type == VarType::Binary) v = std::round(v);
      res.values[it->second] = v;
    }
    res.objective = model.objective_value(res.values);
    bool proven = head.rfind("Optimal", 0) == 0;
    res.bound = proven ? res.objective : -kInf;
    if (auto lb = find_number(log, "Lower bound:")) res.bound = *lb + model.objective_constant;
    if (proven) res.bound = std::min(res.bound, res.objective);
    res.gap = relative_gap(res.objective, res.bound);
    res.status = proven || res.gap <= opt.mip_gap ? Status::Optimal : Status::FeasibleGap;
    return res;
  }

 private:
  static std::optional<double> find_number(const std::string& text, const std::string& key) {
    auto p = text.rfind(key);
    if (p == std::string::npos) return std::nullopt;
    p += key.size();
    auto e = text.find('\n', p);
    auto s = io::trim(std::string_view(text).substr(p, e == std::string::npos ? std::string::npos : e - p));
    try {
      return io::parse_double(s, key);
    } catch (const ParseError&) {
      return std::nullopt;
    }
  }
  static std::string last_line(const std::string& log) {
    auto t = std::string(io::trim(log));
    auto p = t.rfind('\n');
    return p == std::string::npos ? t : t.substr(p + 1);
  }

  std::string exe_;
  inline static int counter_ = 0;
};

/// Runs anything with the command line of the HiGHS executable:
///   <exe> --options_file opts --solution_file out.sol model.lp
/// and reads its raw solution file plus the summary printed to stdout.
class HighsBackend : public Backend {
 public:
  explicit HighsBackend(std::string executable) : exe_(std::move(executable)) {
    if (exe_.empty()) throw SolverError(std::string("no external solver configured; set ") + kSolverEnv);
    if (!std::filesystem::exists(exe_)) throw SolverError("external solver not found at " + exe_);
  }

  std::string name() const override { return "highs"; }

  Result solve(const Model& model, const SolveOptions& opt) const override {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / ("fcuc_highs_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter_++));
    fs::create_directories(dir);
    struct Cleanup {
      fs::path p;
      ~Cleanup() {
        std::error_code ec;
        fs::remove_all(p, ec);
      }
    } cleanup{dir};

    io::write_file(dir / "model.lp", to_lp_string(model));
    io::write_file(dir / "options.txt", "mip_rel_gap = " + io::fmt(opt.mip_gap) + "\ntime_limit = " +
                                            io::fmt(opt.time_limit_s) + "\nthreads = 1\nrandom_seed = 0\n");
    auto q = [](const fs::path& p) { return "\"" + p.string() + "\""; };
    std::string cmd = q(exe_) + " --options_file " + q(dir / "options.txt") + " --solution_file " +
                      q(dir / "out.sol") + " " + q(dir / "model.lp") + " > " + q(dir / "log.txt") + " 2>&1";
    int rc = std::system(cmd.c_str());
    std::string log = fs::exists(dir / "log.txt") ? io::read_file(dir / "log.txt") : std::string();
    if (rc != 0 || !fs::exists(dir / "out.sol")) {
      throw SolverError("external solver failed (exit " + std::to_string(rc) + "): " + last_line(log));
    }
    auto res = parse(model, io::read_file(dir / "out.sol"), log, opt);
    if ((res.status == Status::Optimal || res.status == Status::FeasibleGap) &&
        model.max_violation(res.values) > CbcBackend::kFeasibilityTol) {
      throw SolverError("external solver returned a point violating the model by " +
                        io::fmt(model.max_violation(res.values)));
    }
    return res;
  }

  static Result parse(const Model& model, const std::string& sol, const std::string& log,
                      const SolveOptions& opt) {
    Result res;
    auto lines = io::split(sol, '\n');
    std::string status = lines.size() > 1 ? std::string(io::trim(lines[1])) : std::string();
    if (status == "Infeasible") {
      res.status = Status::Infeasible;
      return res;
    }
    if (status == "Unbounded" || status == "Primal infeasible or unbounded") {
      res.status = Status::Unbounded;
      return res;
    }
    std::size_t k = 0;
    while (k < lines.size() && io::trim(lines[k]) != "# Primal solution values") ++k;
    if (k + 1 >= lines.size() || io::trim(lines[k + 1]) != "Feasible") {
      if (status == "Optimal") throw SolverError("solver reported optimal without a primal solution");
      res.status = Status::NoSolution;
      return res;
    }
    std::map<std::string, int> index;
    for (int j = 0; j < model.num_vars(); ++j) index[model.var(j).name] = j;
    res.values.assign(model.num_vars(), 0.0);
    for (k += 2; k < lines.size(); ++k) {
      auto line = io::trim(lines[k]);
      if (line.rfind("# Rows", 0) == 0 || line.rfind("# Dual", 0) == 0) break;
      if (line.empty() || line[0] == '#' || line.rfind("Objective", 0) == 0) continue;
      auto sp = line.find(' ');
      if (sp == std::string_view::npos) continue;
      auto it = index.find(std::string(line.substr(0, sp)));
      if (it == index.end()) continue;
      double v = io::parse_double(io::trim(line.substr(sp + 1)), "solution value");
      if (model.var(it->second).type == VarType::Binary) v = std::round(v);
      res.values[it->second] = v;
    }
    res.objective = model.objective_value(res.values);
    bool proven = status == "Optimal";
    res.bound = proven ? res.objective : -kInf;
    if (auto b = summary_number(log, "Dual bound")) res.bound = std::min(*b + model.objective_constant, res.objective);
    res.gap = relative_gap(res.objective, res.bound);
    res.status = proven || res.gap <= opt.mip_gap ? Status::Optimal : Status::FeasibleGap;
    return res;
  }

 private:
  static std::optional<double> summary_number(const std::string& log, const std::string& key) {
    for (auto line : io::split(log, '\n')) {
      auto t = io::trim(line);
      if (t.rfind(key, 0) != 0) continue;
      try {
        return io::parse_double(io::trim(t.substr(key.size())), key);
      } catch (const ParseError&) {
        return std::nullopt;
      }
    }
    return std::nullopt;
  }
  static std::string last_line(const std::string& log) {
    auto t = std::string(io::trim(log));
    auto p = t.rfind('\n');
    return p == std::string::npos ? t : t.substr(p + 1);
  }

  std::string exe_;
  inline static int counter_ = 0;
};

/// Picks the binding from the executable's name: anything called cbc speaks
/// the CBC command language, everything else the HiGHS one.
inline std::unique_ptr<Backend> make_external_backend(const std::string& path) {
  auto stem = std::filesystem::path(path).filename().string();
  if (stem.find("cbc") != std::string::npos) return std::make_unique<CbcBackend>(path);
  return std::make_unique<HighsBackend>(path);
}

}  // namespace fcuc::lp
