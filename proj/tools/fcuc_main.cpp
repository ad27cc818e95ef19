// fcuc: dataset -> fit -> solve -> verify, plus the sweep and study drivers.

#include <CLI11.hpp>

#include <iostream>

#include "fcuc/cli.hpp"

using fcuc::cli::RunConfig;
using fcuc::cli::Subcommand;

namespace {

void add_inputs(CLI::App* app, RunConfig& c) {
  app->add_option("--system", c.system, "system description (JSON)")->capture_default_str();
  app->add_option("--scenario", c.scenario, "demand and renewables per step (CSV, MW)")->capture_default_str();
  app->add_option("--initial", c.initial,
                  "initial unit status (CSV); default: initial_status.csv next to the scenario when present");
}

void add_out(CLI::App* app, RunConfig& c) {
  app->add_option("--out", c.out, "output directory")->capture_default_str();
  app->add_option("--seed", c.seed, "random seed (integer)")->capture_default_str();
}

void add_tobit(CLI::App* app, RunConfig& c) {
  app->add_option("--tobit", c.tobit, "fitted estimator (JSON); default <out>/tobit.json");
}

void add_solver(CLI::App* app, RunConfig& c) {
  app->add_option("--mip-gap", c.mip_gap, "relative MIP gap target (fraction)")->capture_default_str();
  app->add_option("--time-limit-s", c.time_limit_s, "solver time limit per model (s)")->capture_default_str();
  std::map<std::string, fcuc::cli::SolverChoice> names{{"auto", fcuc::cli::SolverChoice::Auto},
                                                       {"builtin", fcuc::cli::SolverChoice::Builtin},
                                                       {"external", fcuc::cli::SolverChoice::External}};
  app->add_option("--solver", c.solver,
                  std::string("MILP backend {builtin,external,auto}; external reads the executable path from ") +
                      fcuc::lp::kSolverEnv + ", auto uses it when set")
      ->transform(CLI::CheckedTransformer(names, CLI::ignore_case))
      ->default_str("auto");
}

void add_cost(CLI::App* app, RunConfig& c) {
  app->add_option("--co-eur-per-mw", c.c_o_eur_per_mw,
                  "cost of estimated post-outage UFLS (EUR/MW); default: the system file's value");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-constrained unit commitment with learned UFLS estimates"};
  app.require_subcommand(1);
  RunConfig c;
  auto& d = c.dataset_opts;

  auto* ds = app.add_subcommand("dataset", "enumerate, cluster and label operating points -> dataset.csv");
  add_inputs(ds, c);
  add_out(ds, c);
  ds->add_option("--demand-min-mw", d.demand_min_mw, "lowest demand level (MW); default: scenario minimum");
  ds->add_option("--demand-max-mw", d.demand_max_mw, "highest demand level (MW); default: scenario maximum");
  ds->add_option("--demand-levels", d.demand_levels, "number of demand levels")->capture_default_str();
  ds->add_option("--step-mw", d.step_mw, "dispatch grid step (MW)")->capture_default_str();
  ds->add_option("--cost-quantile", d.cost_quantile, "cheapest fraction of points kept per level (0..1]")
      ->capture_default_str();
  ds->add_option("--sample-cap", d.sample_cap, "points passed to clustering (count)")->capture_default_str();
  ds->add_option("--k-max", d.k_max, "largest cluster count tried (count)")->capture_default_str();
  ds->add_option("--clusters", d.clusters, "fixed cluster count; 0 selects it by --k-tol")->capture_default_str();
  ds->add_option("--k-tol", d.k_improvement_tol,
                 "stop adding clusters when the error improves by less than this fraction of the one-cluster error")
      ->capture_default_str();
  ds->add_option("--select-restarts", d.select_restarts, "k-means restarts per k while selecting k (count)")
      ->capture_default_str();
  ds->add_option("--restarts", d.restarts, "k-means restarts for the final clustering (count)")->capture_default_str();

  auto* fit = app.add_subcommand("fit", "fit the Tobit UFLS estimator -> tobit.json");
  fit->add_option("--system", c.system, "system description (JSON)")->capture_default_str();
  fit->add_option("--dataset", c.dataset, "labelled dataset (CSV); default <out>/dataset.csv");
  add_tobit(fit, c);
  add_out(fit, c);

  auto* solve = app.add_subcommand("solve", "solve one day-ahead commitment -> schedule.json");
  add_inputs(solve, c);
  add_tobit(solve, c);
  add_out(solve, c);
  std::map<std::string, fcuc::milp::Case> cases{{"I", fcuc::milp::Case::I},
                                                {"II", fcuc::milp::Case::II},
                                                {"III", fcuc::milp::Case::III}};
  solve->add_option("--case", c.formulation, "I standard UC, II corrective without shed cost, III with shed cost")
      ->transform(CLI::CheckedTransformer(cases, CLI::ignore_case))
      ->default_str("I");
  add_cost(solve, c);
  add_solver(solve, c);
  solve->add_flag("--write-lp", c.write_lp, "also write model.lp");

  auto* ver = app.add_subcommand("verify", "simulate every outage of a schedule -> verify.csv, freq_traces/");
  add_inputs(ver, c);
  add_tobit(ver, c);
  add_out(ver, c);
  ver->add_option("--schedule", c.schedule, "schedule to check (JSON); default <out>/schedule.json");
  ver->add_option("--scheme", c.scheme,
                  "relay plan (JSON: steps of threshold_hz [Hz], delay_s [s], block_fraction or block_mw [MW]); "
                  "default: six 10% steps from 49.0 to 48.0 Hz, 0.1 s delay");
  ver->add_option("--threads", c.threads, "simulation threads; 0 = all cores")->capture_default_str();
  ver->add_option("--trace-stride", c.trace_stride, "write every n-th trace sample (count)")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "solve Case III over a range of UFLS costs -> sweep.csv");
  add_inputs(sweep, c);
  add_tobit(sweep, c);
  add_out(sweep, c);
  add_solver(sweep, c);
  sweep->add_flag("--coarse", c.coarse, "21 costs from 0 to 1e6 EUR/MW instead of the step grid");
  sweep->add_option("--co-step-eur-per-mw", c.co_step_eur_per_mw, "cost grid step (EUR/MW)")->capture_default_str();
  sweep->add_option("--co-max-eur-per-mw", c.co_max_eur_per_mw, "largest cost (EUR/MW)")->capture_default_str();

  auto* study = app.add_subcommand("study", "solve all three cases on synthetic days -> study.csv");
  add_inputs(study, c);
  add_tobit(study, c);
  add_out(study, c);
  add_cost(study, c);
  add_solver(study, c);
  study->add_option("--days", c.days, "number of synthetic days (count)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << fcuc::cli::error_line("usage", fcuc::cli::kUsage, e.what()) << "\n";
    return fcuc::cli::kUsage;
  }

  const std::pair<CLI::App*, Subcommand> subs[] = {{ds, Subcommand::Dataset}, {fit, Subcommand::Fit},
                                                   {solve, Subcommand::Solve}, {ver, Subcommand::Verify},
                                                   {sweep, Subcommand::Sweep}, {study, Subcommand::Study}};
  for (const auto& [sub, kind] : subs) {
    if (sub->parsed()) c.subcommand = kind;
  }

  auto outcome = fcuc::cli::run(c);
  for (const auto& p : outcome.artifacts) std::cout << p.string() << "\n";
  if (outcome.code != 0) std::cerr << outcome.error << "\n";
  return outcome.code;
}
