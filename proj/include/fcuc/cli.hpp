#pragma once

// Pipeline driver behind the fcuc executable. Every stage reads its inputs
// from files, writes its artifacts into one output directory and stamps them
// with a hash of everything that went in.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fcuc/errors.hpp"
#include "fcuc/io.hpp"
#include "fcuc/learn.hpp"
#include "fcuc/lp/external.hpp"
#include "fcuc/lp/simplex.hpp"
#include "fcuc/milp.hpp"
#include "fcuc/sfr.hpp"
#include "fcuc/system_model.hpp"
#include "fcuc/verify.hpp"

namespace fcuc::cli {

namespace fs = std::filesystem;

enum class Subcommand { Dataset, Fit, Solve, Verify, Sweep, Study };

inline const char* to_string(Subcommand s) {
  switch (s) {
    case Subcommand::Dataset: return "dataset";
    case Subcommand::Fit: return "fit";
    case Subcommand::Solve: return "solve";
    case Subcommand::Verify: return "verify";
    case Subcommand::Sweep: return "sweep";
    case Subcommand::Study: return "study";
  }
  return "?";
}

enum class SolverChoice { Auto, Builtin, External };

struct DatasetConfig {
  std::optional<double> demand_min_mw;  // default: lowest net demand of the scenario
  std::optional<double> demand_max_mw;  // default: highest net demand of the scenario
  int demand_levels = 10;
  double step_mw = 1.0;
  double cost_quantile = 0.25;
  std::size_t sample_cap = 20000;
  std::size_t k_max = 400;
  std::size_t clusters = 0;  // 0: choose by the error-improvement rule
  double k_improvement_tol = 0.001;
  int select_restarts = 3;
  int restarts = 20;
};

struct RunConfig {
  Subcommand subcommand = Subcommand::Solve;
  fs::path system = "data/system.json";
  fs::path scenario = "data/scenario.csv";
  std::optional<fs::path> initial;  // default: initial_status.csv next to the scenario, if present
  fs::path dataset;                 // fit input; default <out>/dataset.csv
  fs::path tobit;                   // default <out>/tobit.json
  fs::path schedule;                // verify input; default <out>/schedule.json
  std::optional<fs::path> scheme;   // relay plan JSON for verify
  fs::path out = "out";

  std::uint64_t seed = 42;
  milp::Case formulation = milp::Case::I;
  std::optional<double> c_o_eur_per_mw;
  double mip_gap = 1e-4;
  double time_limit_s = 600.0;
  SolverChoice solver = SolverChoice::Auto;
  bool write_lp = false;
  bool coarse = false;
  double co_step_eur_per_mw = 1e4;
  double co_max_eur_per_mw = 1e6;
  int days = 28;
  unsigned threads = 0;
  std::size_t trace_stride = 10;

  DatasetConfig dataset_opts{};
};

/// Exit codes; each error class maps to its own.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kMissingInput = 3,
  kParse = 4,
  kValidation = 5,
  kSolver = 6,
  kNoSchedule = 7,
  kCheckFailed = 8,
};

/// Failure of a stage that completed but whose result is unusable.
class StageError : public Error {
 public:
  StageError(int code, const std::string& what) : Error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

/// One line, `error <kind> <exit>: <message>`, with newlines flattened.
inline std::string error_line(const std::string& kind, int code, std::string message) {
  for (auto& c : message) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return "error " + kind + " " + std::to_string(code) + ": " + message;
}

struct Outcome {
  int code = kOk;
  std::string error;  // empty on success
  std::vector<fs::path> artifacts;
};

namespace detail {

inline fs::path or_default(const fs::path& p, const fs::path& out, const char* name) {
  return p.empty() ? out / name : p;
}

inline std::optional<fs::path> initial_path(const RunConfig& c) {
  if (c.initial) return c.initial;
  auto sibling = c.scenario.parent_path() / "initial_status.csv";
  if (fs::exists(sibling)) return sibling;
  return std::nullopt;
}

inline std::string read_input(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw MissingInputError(std::string(what) + " not found: " + p.string());
  return io::read_file(p);
}

/// Hash of the stage, its option string and the bytes of every input.
class Stamp {
 public:
  Stamp(const RunConfig& c) {
    h_.add("fcuc/1").add(to_string(c.subcommand));
    h_.add("seed").add(std::to_string(c.seed));
  }
  Stamp& file(const fs::path& p, const char* what) {
    h_.add(what).add(read_input(p, what));
    return *this;
  }
  Stamp& opt(const std::string& key, const std::string& value) {
    h_.add(key).add(value);
    return *this;
  }
  Stamp& opt(const std::string& key, double value) { return opt(key, io::fmt(value)); }
  learn::Provenance provenance(std::uint64_t seed) const { return {h_.hex(), seed}; }

 private:
  io::Fnv1a h_;
};

struct Inputs {
  SystemSpec spec;
  ScenarioSpec scenario;
};

inline Inputs load_inputs(const RunConfig& c, Stamp& stamp) {
  Inputs in;
  stamp.file(c.system, "system");
  in.spec = parse_system(read_input(c.system, "system"));
  stamp.file(c.scenario, "scenario");
  in.scenario = parse_scenario(read_input(c.scenario, "scenario"), in.spec);
  if (auto init = initial_path(c)) {
    stamp.file(*init, "initial status");
    apply_initial_status(in.scenario, in.spec, read_input(*init, "initial status"));
  }
  return in;
}

inline std::unique_ptr<lp::Backend> backend(const RunConfig& c) {
  auto ext = lp::external_solver_path();
  bool external = c.solver == SolverChoice::External || (c.solver == SolverChoice::Auto && !ext.empty());
  if (!external) return std::make_unique<lp::BuiltinBackend>();
  if (ext.empty()) {
    throw SolverError(std::string("--solver external needs the solver path in ") + lp::kSolverEnv);
  }
  return lp::make_external_backend(ext);
}

inline void stamp_solver(const RunConfig& c, Stamp& s) {
  s.opt("mip_gap", c.mip_gap).opt("time_limit_s", c.time_limit_s);
  // the binding, not the path: moving the binary does not change results
  s.opt("solver", backend(c)->name());
}

inline milp::ModelConfig model_config(const RunConfig& c, milp::Case k) {
  milp::ModelConfig m;
  m.formulation = k;
  m.ufls_cost_eur_per_mw = c.c_o_eur_per_mw;
  m.mip_gap_target = c.mip_gap;
  m.time_limit_s = c.time_limit_s;
  return m;
}

inline std::string header(const learn::Provenance& p) {
  return "# config_hash=" + p.config_hash + " seed=" + std::to_string(p.seed) + "\n";
}

inline std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

inline void emit(Outcome& o, const fs::path& p, std::string_view content) {
  io::write_file(p, content);
  o.artifacts.push_back(p);
}

// ---------------------------------------------------------------------------
// gnuplot scripts, one per plot; each reads CSVs from its own directory

inline std::string gp_head(const std::string& png, const std::string& title) {
  return "set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n"
         "set terminal pngcairo size 900,600\nset output '" + png + "'\nset title '" + title + "'\nset grid\n";
}

inline std::string gp_clustering() {
  return gp_head("cluster_errors.png", "Clustering error vs. number of clusters") +
         "set xlabel 'clusters'\nset ylabel 'sum of squared distances'\n"
         "plot 'cluster_errors.csv' using 1:2 with linespoints\n";
}

inline std::string gp_tobit(const learn::TobitModel& m) {
  return gp_head("tobit.png", "Labelled dataset and Tobit estimate") +
         "set xlabel 'RoCoF (Hz/s)'\nset ylabel 'optimal UFLS (MW)'\n"
         "a = " + io::fmt(m.threshold_a) + "\nb = " + io::fmt(m.slope_b) + "\n"
         "f(x) = x > a ? b * (x - a) : 0\n"
         "plot 'dataset.csv' using 3:4 with points pt 7 ps 0.5 title 'labelled points', f(x) title 'estimate'\n";
}

inline std::string gp_commitment() {
  return gp_head("commitment.png", "Commitment by unit and step") +
         "set xlabel 'step'\nset ylabel 'unit'\nset palette maxcolors 2\nunset key\n"
         "plot 'commitment.csv' using 1:2:3 with image\n";
}

inline std::string gp_outage_step(int step) {
  return gp_head("outage_step.png", "Reserve and estimated UFLS per outage, step " + std::to_string(step)) +
         "set style data histograms\nset style histogram rowstacked\nset style fill solid 0.8\n"
         "set xlabel 'outaged unit'\nset ylabel 'MW'\n"
         "plot 'outage_step.csv' using 3:xtic(1) title 'reserve', '' using 4 title 'estimated UFLS', "
         "'' using 2 with points pt 7 title 'lost generation'\n";
}

inline std::string gp_study() {
  return gp_head("study.png", "Operation cost per day") +
         "set xlabel 'day'\nset ylabel 'operation cost (EUR)'\n"
         "plot 'study_wide.csv' using 1:2 with linespoints title 'I', '' using 1:3 with linespoints title 'II', "
         "'' using 1:4 with linespoints title 'III'\n";
}

inline std::string gp_sweep() {
  return gp_head("sweep.png", "Operation cost and estimated UFLS vs. UFLS cost") +
         "set xlabel 'estimated UFLS (MW)'\nset ylabel 'operation cost (EUR)'\n"
         "plot 'sweep_distinct.csv' using 4:2 with linespoints pt 7 title 'distinct schedules'\n";
}

inline std::string gp_traces(const std::vector<std::string>& files) {
  std::string s = gp_head("freq_traces.png", "Post-outage frequency") +
                  "set xlabel 'time (s)'\nset ylabel 'frequency (Hz)'\nunset key\n"
                  "set arrow from graph 0, first 48 to graph 1, first 48 nohead dt 2\n"
                  "set arrow from graph 0, first 47 to graph 1, first 47 nohead dt 3\n";
  if (files.empty()) return s + "plot 50\n";
  s += "plot ";
  for (std::size_t k = 0; k < files.size(); ++k) {
    s += (k ? ", '" : "'") + files[k] + "' using 1:2 with lines";
  }
  return s + "\n";
}

// ---------------------------------------------------------------------------
// stages

inline void run_dataset(const RunConfig& c, Outcome& o) {
  Stamp stamp(c);
  auto in = load_inputs(c, stamp);
  const auto& d = c.dataset_opts;
  double lo = d.demand_min_mw.value_or(0.0), hi = d.demand_max_mw.value_or(0.0);
  if (!d.demand_min_mw || !d.demand_max_mw) {
    double nlo = in.scenario.net_demand(0), nhi = nlo;
    for (int t = 1; t < in.scenario.horizon; ++t) {
      nlo = std::min(nlo, in.scenario.net_demand(t));
      nhi = std::max(nhi, in.scenario.net_demand(t));
    }
    if (!d.demand_min_mw) lo = std::floor(nlo);
    if (!d.demand_max_mw) hi = std::ceil(nhi);
  }
  if (!(lo > 0.0) || !(hi >= lo)) throw ValidationError("demand range", "needs 0 < min <= max");
  if (d.sample_cap < 1) throw ValidationError("sample-cap", "must be >= 1");
  stamp.opt("demand", io::fmt(lo) + ".." + io::fmt(hi) + "/" + std::to_string(d.demand_levels))
      .opt("step_mw", d.step_mw)
      .opt("cost_quantile", d.cost_quantile)
      .opt("sample_cap", static_cast<double>(d.sample_cap))
      .opt("k_max", static_cast<double>(d.k_max))
      .opt("clusters", static_cast<double>(d.clusters))
      .opt("k_tol", d.k_improvement_tol)
      .opt("restarts", std::to_string(d.select_restarts) + "/" + std::to_string(d.restarts));
  auto prov = stamp.provenance(c.seed);

  auto grid = learn::linear_grid(lo, hi, d.demand_levels);
  auto en = learn::enumerate_demand_grid(in.spec, grid, d.step_mw, d.cost_quantile);
  if (en.points.empty()) throw ValidationError("demand range", en.diagnostic);
  // deterministic strided subsample keeps clustering tractable
  std::vector<OperatingPoint> sample;
  std::size_t stride = (en.points.size() + d.sample_cap - 1) / d.sample_cap;
  for (std::size_t i = 0; i < en.points.size(); i += stride) sample.push_back(en.points[i]);

  std::size_t k = d.clusters;
  std::string errors_csv = header(prov) + "clusters,error\n";
  if (k == 0) {
    learn::KMeansOptions sel_opt;
    sel_opt.restarts = d.select_restarts;
    auto sel = learn::select_k(in.spec, sample, std::max<std::size_t>(2, d.k_max), d.k_improvement_tol, c.seed, sel_opt);
    k = sel.k;
    for (std::size_t j = 0; j < sel.errors.size(); ++j) {
      errors_csv += std::to_string(j + 1) + "," + io::fmt(sel.errors[j]) + "\n";
    }
  }
  learn::KMeansOptions km;
  km.restarts = d.restarts;
  auto clusters = learn::kmeans_reduce(in.spec, sample, std::min(k, sample.size()), c.seed, km);
  auto labelled = learn::label_dataset(clusters.centroids, in.spec);

  std::string csv = learn::dataset_to_csv(labelled.points, in.spec, prov);
  emit(o, c.out / "dataset.csv", csv);
  emit(o, c.out / "cluster_errors.csv", errors_csv);
  emit(o, c.out / "cluster_errors.gp", gp_clustering());
  nlohmann::ordered_json summary;
  summary["config_hash"] = prov.config_hash;
  summary["seed"] = prov.seed;
  summary["demand_levels_mw"] = grid;
  summary["feasible_points"] = en.feasible_count;
  summary["kept_points"] = en.points.size();
  summary["clustered_sample"] = sample.size();
  summary["clusters"] = clusters.centroids.size();
  summary["clustering_error"] = clusters.error;
  summary["labelled_points"] = labelled.points.size();
  summary["collapsed_outages"] = labelled.collapsed;
  summary["isolated_outages"] = labelled.isolated;
  summary["max_label_mw"] = learn::max_label(labelled.points);
  emit(o, c.out / "dataset_summary.json", dump(summary));
}

inline void run_fit(const RunConfig& c, Outcome& o) {
  Stamp stamp(c);
  stamp.file(c.system, "system");
  auto spec = parse_system(read_input(c.system, "system"));
  auto ds_path = or_default(c.dataset, c.out, "dataset.csv");
  auto data = learn::parse_dataset(read_input(ds_path, "dataset"), spec);
  stamp.file(ds_path, "dataset");
  learn::TobitArtifact a;
  a.model = learn::fit_tobit(data);
  a.max_label_mw = learn::max_label(data);
  a.provenance = stamp.provenance(c.seed);
  emit(o, or_default(c.tobit, c.out, "tobit.json"), dump(learn::to_json(a)));
  // the plot reads the dataset from the output directory
  if (fs::weakly_canonical(ds_path) != fs::weakly_canonical(c.out / "dataset.csv")) {
    emit(o, c.out / "dataset.csv", io::read_file(ds_path));
  }
  emit(o, c.out / "tobit.gp", gp_tobit(a.model));
}

inline learn::TobitArtifact load_tobit_stamped(const RunConfig& c, Stamp& stamp) {
  auto p = or_default(c.tobit, c.out, "tobit.json");
  stamp.file(p, "tobit");
  return learn::parse_tobit(read_input(p, "tobit"));
}

/// Step with the largest demand; the per-outage bar chart shows it.
inline int peak_step(const ScenarioSpec& sc) {
  int best = 0;
  for (int t = 1; t < sc.horizon; ++t) {
    if (sc.net_demand(t) > sc.net_demand(best)) best = t;
  }
  return best;
}

inline void run_solve(const RunConfig& c, Outcome& o) {
  Stamp stamp(c);
  auto in = load_inputs(c, stamp);
  learn::TobitArtifact tobit;
  bool corrective = c.formulation != milp::Case::I;
  // Case I needs no estimator; it is read when present to report estimates
  auto tobit_path = or_default(c.tobit, c.out, "tobit.json");
  if (corrective || fs::exists(tobit_path)) tobit = load_tobit_stamped(c, stamp);
  stamp.opt("case", milp::to_string(c.formulation));
  if (c.c_o_eur_per_mw) stamp.opt("c_o", *c.c_o_eur_per_mw);
  stamp_solver(c, stamp);
  auto prov = stamp.provenance(c.seed);

  auto be = backend(c);
  auto handle = milp::build(in.spec, in.scenario, tobit.model, tobit.max_label_mw, model_config(c, c.formulation));
  if (c.write_lp) emit(o, c.out / "model.lp", lp::to_lp_string(handle.model));
  auto sol = milp::solve(handle, *be);
  emit(o, c.out / "schedule.json", dump(milp::to_json(sol, in.spec, prov)));
  if (!sol.has_payload()) {
    throw StageError(kNoSchedule, std::string("no schedule: solver status ") + lp::to_string(sol.status));
  }

  std::string commit = header(prov) + "step,unit,u\n";
  for (int t = 0; t < in.scenario.horizon; ++t) {
    for (std::size_t i = 0; i < in.spec.size(); ++i) {
      commit += std::to_string(t + 1) + "," + std::to_string(i + 1) + "," + std::to_string(sol.u[i][t]) + "\n";
    }
  }
  emit(o, c.out / "commitment.csv", commit);
  emit(o, c.out / "commitment.gp", gp_commitment());

  int t = peak_step(in.scenario);
  std::string bars = header(prov) + "unit,lost_mw,reserve_mw,ufls_est_mw\n";
  for (std::size_t l = 0; l < in.spec.size(); ++l) {
    if (!sol.u[l][t]) continue;
    double reserve = 0.0;
    for (std::size_t i = 0; i < in.spec.size(); ++i) {
      if (i != l) reserve += sol.r[i][t];
    }
    double est = corrective ? sol.ufls[l][t] : learn::predict_ufls(tobit.model, sol.rocof[l][t]);
    bars += in.spec.generators[l].id + "," + io::fmt(sol.p[l][t]) + "," + io::fmt(reserve) + "," + io::fmt(est) + "\n";
  }
  emit(o, c.out / "outage_step.csv", bars);
  emit(o, c.out / "outage_step.gp", gp_outage_step(t + 1));
}

inline std::vector<sfr::UflsSchemeStep> parse_scheme(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scheme: ") + e.what());
  }
  std::vector<sfr::UflsSchemeStep> out;
  try {
    for (const auto& s : j.at("steps")) {
      sfr::UflsSchemeStep st;
      st.threshold_hz = s.at("threshold_hz").get<double>();
      st.delay_s = s.at("delay_s").get<double>();
      if (s.contains("block_fraction")) {
        st.block = s.at("block_fraction").get<double>();
        st.fraction_of_demand = true;
      } else {
        st.block = s.at("block_mw").get<double>();
        st.fraction_of_demand = false;
      }
      out.push_back(st);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scheme: ") + e.what());
  }
  sfr::validate_scheme(out);
  return out;
}

inline std::string trace_name(const SystemSpec& spec, const verify::PairResult& p) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "t%02d_", p.step + 1);
  return buf + milp::detail::safe_name(spec.generators[p.outage].id) + ".csv";
}

inline void run_verify(const RunConfig& c, Outcome& o) {
  Stamp stamp(c);
  auto in = load_inputs(c, stamp);
  auto sched_path = or_default(c.schedule, c.out, "schedule.json");
  if (!fs::exists(sched_path)) throw MissingInputError("schedule not found: " + sched_path.string() + " (run solve first)");
  stamp.file(sched_path, "schedule");
  auto art = milp::parse_schedule(io::read_file(sched_path), in.spec);
  auto tobit = load_tobit_stamped(c, stamp);
  auto scheme = sfr::default_conventional_scheme();
  if (c.scheme) {
    stamp.file(*c.scheme, "scheme");
    scheme = parse_scheme(read_input(*c.scheme, "scheme"));
  }
  stamp.opt("trace_stride", static_cast<double>(c.trace_stride));
  auto prov = stamp.provenance(c.seed);
  if (!art.solution.has_payload()) {
    throw StageError(kNoSchedule, std::string("schedule has no solution (status ") +
                                      lp::to_string(art.solution.status) + ")");
  }

  verify::VerifyOptions vo;
  vo.threads = c.threads;
  vo.keep_traces = true;
  auto opt = verify::verify_schedule_traces(art.solution, in.spec, in.scenario, tobit.model, vo);
  auto conv = verify::simulate_conventional_scheme_traces(art.solution, in.spec, in.scenario, tobit.model, scheme, vo);

  emit(o, c.out / "verify.csv", verify::report_to_csv(opt.report, in.spec, prov));
  emit(o, c.out / "verify_conventional.csv", verify::report_to_csv(conv.report, in.spec, prov));
  fs::remove_all(c.out / "freq_traces");
  std::vector<std::string> names;
  for (std::size_t k = 0; k < conv.report.pairs.size(); ++k) {
    if (conv.traces[k].samples.empty()) continue;
    auto name = trace_name(in.spec, conv.report.pairs[k]);
    emit(o, c.out / "freq_traces" / name, header(prov) + sfr::trace_to_csv(conv.traces[k], c.trace_stride));
    names.push_back(name);
  }
  emit(o, c.out / "freq_traces" / "freq_traces.gp", gp_traces(names));

  nlohmann::ordered_json j;
  j["config_hash"] = prov.config_hash;
  j["seed"] = prov.seed;
  j["case"] = milp::to_string(art.solution.formulation);
  j["optimal_shedding"] = verify::summary_json(opt.report);
  j["conventional_scheme"] = verify::summary_json(conv.report);
  emit(o, c.out / "verify_summary.json", dump(j));
}

inline std::vector<double> sweep_costs(const RunConfig& c) {
  if (c.coarse) return verify::default_cost_grid(true);
  return verify::cost_grid(c.co_max_eur_per_mw, c.co_step_eur_per_mw);
}

inline void run_sweep(const RunConfig& c, Outcome& o) {
  Stamp stamp(c);
  auto in = load_inputs(c, stamp);
  auto tobit = load_tobit_stamped(c, stamp);
  auto costs = sweep_costs(c);
  std::string grid;
  for (double x : costs) grid += io::fmt(x) + ";";
  stamp.opt("costs", grid);
  stamp_solver(c, stamp);
  auto prov = stamp.provenance(c.seed);

  auto be = backend(c);
  auto res = verify::sweep_ufls_cost(in.spec, in.scenario, tobit.model, tobit.max_label_mw, costs, *be,
                                     model_config(c, milp::Case::III));
  emit(o, c.out / "sweep.csv", verify::sweep_to_csv(res, prov));
  verify::SweepResult distinct{verify::distinct_points(res)};
  emit(o, c.out / "sweep_distinct.csv", verify::sweep_to_csv(distinct, prov));
  emit(o, c.out / "sweep.gp", gp_sweep());
}

inline void run_study(const RunConfig& c, Outcome& o) {
  Stamp stamp(c);
  auto in = load_inputs(c, stamp);
  auto tobit = load_tobit_stamped(c, stamp);
  stamp.opt("days", static_cast<double>(c.days));
  if (c.c_o_eur_per_mw) stamp.opt("c_o", *c.c_o_eur_per_mw);
  stamp_solver(c, stamp);
  auto prov = stamp.provenance(c.seed);

  auto days = verify::synthetic_days(in.scenario, in.spec, c.days, c.seed);
  std::vector<milp::ModelConfig> configs{model_config(c, milp::Case::I), model_config(c, milp::Case::II),
                                         model_config(c, milp::Case::III)};
  auto be = backend(c);
  auto res = verify::multiday_study(in.spec, days, configs, tobit.model, tobit.max_label_mw, *be);
  emit(o, c.out / "study.csv", verify::study_to_csv(res, prov));
  std::string wide = header(prov) + "day,case_i_eur,case_ii_eur,case_iii_eur\n";
  for (int d = 0; d < c.days; ++d) {
    wide += std::to_string(d + 1);
    for (int k = 0; k < 3; ++k) {
      const auto& row = res.rows[static_cast<std::size_t>(d) * 3 + k];
      wide += "," + (row.solved() ? io::fmt(row.operation_cost_eur) : std::string("NaN"));
    }
    wide += "\n";
  }
  emit(o, c.out / "study_wide.csv", wide);
  emit(o, c.out / "study.gp", gp_study());
  if (!res.ordering_violations.empty()) {
    std::string days_list;
    for (int d : res.ordering_violations) days_list += (days_list.empty() ? "" : ",") + std::to_string(d + 1);
    throw StageError(kCheckFailed, "cost ordering II <= III <= I fails on day(s) " + days_list);
  }
}

}  // namespace detail

/// Runs one stage. Never throws; failures come back as an exit code and a
/// single-line message.
inline Outcome run(const RunConfig& c) {
  Outcome o;
  auto fail = [&](const char* kind, int code, const std::string& msg) {
    o.code = code;
    o.error = error_line(kind, code, msg);
  };
  try {
    switch (c.subcommand) {
      case Subcommand::Dataset: detail::run_dataset(c, o); break;
      case Subcommand::Fit: detail::run_fit(c, o); break;
      case Subcommand::Solve: detail::run_solve(c, o); break;
      case Subcommand::Verify: detail::run_verify(c, o); break;
      case Subcommand::Sweep: detail::run_sweep(c, o); break;
      case Subcommand::Study: detail::run_study(c, o); break;
    }
  } catch (const StageError& e) {
    fail(e.code() == kNoSchedule ? "no_schedule" : "check_failed", e.code(), e.what());
  } catch (const MissingInputError& e) {
    fail("missing_input", kMissingInput, e.what());
  } catch (const ParseError& e) {
    fail("parse", kParse, e.what());
  } catch (const ValidationError& e) {
    fail("validation", kValidation, e.what());
  } catch (const InvalidArgument& e) {
    fail("validation", kValidation, e.what());
  } catch (const SolverError& e) {
    fail("solver", kSolver, e.what());
  } catch (const std::exception& e) {
    fail("internal", kInternal, e.what());
  }
  return o;
}

}  // namespace fcuc::cli
