#include "fcuc/milp.hpp"
#include "support/pair_oracle.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <random>

namespace fcuc::milp {
namespace {

using namespace oracle;

void expect_invariants(const ModelHandle& h, const ScheduleSolution& s) {
  const auto& spec = h.spec;
  const int n = static_cast<int>(spec.size());
  for (int t = 0; t < h.scenario.horizon; ++t) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += s.p[i][t];
    EXPECT_NEAR(sum, h.scenario.net_demand(t), 1e-6) << "balance at " << t;
    if (n < 2) continue;
    for (int l = 0; l < n; ++l) {
      double res = 0.0, hm = 0.0;
      for (int i = 0; i < n; ++i) {
        if (i == l) continue;
        res += s.r[i][t];
        if (s.u[i][t]) hm += spec.generators[i].inertia_mws();
      }
      EXPECT_GE(res - s.p[l][t] + s.ufls[l][t], -1e-6) << "reserve " << l << "," << t;
      if (s.u[l][t] && s.p[l][t] > 1e-9) {
        ASSERT_GT(hm, 0.0);
        EXPECT_LE(s.p[l][t] * spec.nominal_freq_f0 / (2.0 * hm), spec.rocof_crit + 1e-6);
      }
      if (!h.corrective) continue;
      const double a = h.tobit.threshold_a, b = h.tobit.slope_b;
      const double model_rocof = s.rocof[l][t];
      if (s.z[l][t] == 0) {
        EXPECT_NEAR(s.ufls[l][t], 0.0, 1e-6);
        EXPECT_LE(model_rocof, a + 1e-6);
      } else {
        EXPECT_NEAR(s.ufls[l][t], b * (model_rocof - a), 1e-6);
      }
    }
  }
}

// ---------------------------------------------------------------------------

TEST(ProbOutage, ConvertsAnnualRate) {
  SystemSpec spec = pair_system();
  auto sc = scenario(spec, {5.0});
  auto g = spec.generators[0];
  g.outage_rate = 2.0;
  EXPECT_NEAR(prob_outage(g, sc), 2.2831e-4, 1e-8);
  EXPECT_DOUBLE_EQ(prob_outage(g, sc), 2.0 / 8760.0);
  g.outage_rate = 0.0;
  EXPECT_EQ(prob_outage(g, sc), 0.0);
  g.outage_rate = 8760.0;
  EXPECT_DOUBLE_EQ(prob_outage(g, sc), 1.0);
  g.outage_rate = -1.0;
  EXPECT_THROW(prob_outage(g, sc), InvalidArgument);
}

TEST(StandardUc, SingleUnitIsCommittedThroughout) {
  SystemSpec spec;
  spec.generators = {unit("G", 2.0, 10.0, 40.0, {{5.0, 10.0}, {10.0, 12.0}})};
  auto sc = scenario(spec, {6.0, 6.0, 7.0, 6.0}, true);
  auto h = build_standard_uc(spec, sc);
  auto s = solve_builtin(h);
  ASSERT_EQ(s.status, lp::Status::Optimal);
  double expect = 0.0;
  for (int t = 0; t < sc.horizon; ++t) {
    EXPECT_EQ(s.u[0][t], 1);
    EXPECT_NEAR(s.p[0][t], sc.demand[t], 1e-9);
    expect += spec.generators[0].hourly_cost(sc.demand[t]);
  }
  EXPECT_NEAR(s.objective_eur, expect, 1e-7);
  EXPECT_NEAR(s.operation_cost_eur, expect, 1e-7);
}

TEST(StandardUc, HandComputedDispatch) {
  // both units must run; the cheap one takes everything above the other's minimum
  SystemSpec spec;
  spec.generators = {unit("A", 1.0, 10.0, 400.0, {{10.0, 10.0}}), unit("B", 1.0, 10.0, 400.0, {{10.0, 20.0}})};
  auto sc = scenario(spec, {6.0}, true);
  auto s = solve_builtin(build_standard_uc(spec, sc));
  ASSERT_EQ(s.status, lp::Status::Optimal);
  EXPECT_NEAR(s.p[0][0], 5.0, 1e-9);
  EXPECT_NEAR(s.p[1][0], 1.0, 1e-9);
  EXPECT_NEAR(s.objective_eur, 10.0 + 10.0 * 5.0 + 20.0 * 1.0, 1e-9);
}

TEST(StandardUc, TwoUnitsMatchExhaustiveCommitments) {
  auto spec = pair_system();
  for (auto demand : std::vector<std::vector<double>>{{6.0, 7.5, 3.0}, {4.0, 5.0, 6.0, 7.0}, {2.5, 8.0, 2.5}}) {
    auto sc = scenario(spec, demand);
    auto oracle = pair_brute_force(spec, sc, {});
    auto s = solve_builtin(build_standard_uc(spec, sc, config(Case::I)));
    ASSERT_TRUE(oracle.has_value());
    ASSERT_EQ(s.status, lp::Status::Optimal);
    EXPECT_NEAR(s.objective_eur, *oracle, 1e-6 * *oracle);
    for (int t = 0; t < sc.horizon; ++t) {
      EXPECT_EQ(s.u[0][t] + s.u[1][t], 2) << "both units are needed for reserve";
    }
  }
}

TEST(StandardUc, ReserveShortfallIsInfeasible) {
  SystemSpec spec;
  spec.generators = {unit("A", 1.0, 10.0, 400.0, {{10.0, 10.0}}), unit("B", 1.0, 3.0, 400.0, {{3.0, 20.0}})};
  // A alone can cover 8 MW but nothing covers its loss
  auto sc = scenario(spec, {8.0});
  auto h = build_standard_uc(spec, sc);
  auto s = solve_builtin(h);
  EXPECT_EQ(s.status, lp::Status::Infeasible);
  EXPECT_FALSE(s.has_payload());
  EXPECT_TRUE(s.p.empty());
}

TEST(StandardUc, DemandAboveCapacityRejectedBeforeSolve) {
  auto spec = pair_system();
  auto sc = scenario(spec, {5.0, 18.5});
  EXPECT_THROW(build_standard_uc(spec, sc), ValidationError);
  EXPECT_THROW(build_corrective_fcuc(spec, sc, toy_tobit(), 5.0, config(Case::II)), ValidationError);
}

TEST(StandardUc, InitialStateHoldsUntilMinimumTimeServed) {
  SystemSpec spec;
  spec.generators = {unit("A", 1.0, 10.0, 400.0, {{10.0, 10.0}}), unit("B", 1.0, 10.0, 400.0, {{10.0, 20.0}}),
                     unit("C", 1.0, 10.0, 400.0, {{10.0, 50.0}})};
  spec.generators[2].min_up_time = 3;
  auto sc = scenario(spec, {5.0, 5.0, 5.0, 5.0}, true);
  sc.initial[2].hours_in_state = 1.0;  // C has run one of its three steps
  auto s = solve_builtin(build_standard_uc(spec, sc));
  ASSERT_EQ(s.status, lp::Status::Optimal);
  EXPECT_EQ(s.u[2], (std::vector<int>{1, 1, 0, 0}));
}

TEST(Corrective, LinearizationMatchesNonlinearEnumeration) {
  auto spec = pair_system();
  auto tobit = toy_tobit();
  for (double c_o : {0.0, 1e4, 1e5, 1e6}) {
    for (auto demand : std::vector<std::vector<double>>{{7.0, 9.0}, {9.5, 10.5}, {3.0, 8.0}}) {
      auto sc = scenario(spec, demand);
      auto h = build_corrective_fcuc(spec, sc, tobit, 10.0, config(Case::III, c_o));
      ASSERT_LE(h.model.num_binaries(), 12);
      auto s = solve_builtin(h);
      auto oracle = pair_brute_force(spec, sc, {c_o, true, tobit});
      ASSERT_TRUE(oracle.has_value());
      ASSERT_EQ(s.status, lp::Status::Optimal);
      EXPECT_NEAR(s.objective_eur, *oracle, 1e-6 * *oracle) << "c_o " << c_o;
      EXPECT_NEAR(s.objective_eur, s.operation_cost_eur + s.ufls_cost_eur, 1e-6 * s.objective_eur);
      expect_invariants(h, s);
    }
  }
}

TEST(Corrective, ShedsWhereStaticReserveCannotCover) {
  auto spec = pair_system();
  // static reserve caps the total at 8 MW; the RoCoF limit and shed estimate allow 11
  auto sc = scenario(spec, {10.0});
  EXPECT_EQ(solve_builtin(build_standard_uc(spec, sc)).status, lp::Status::Infeasible);
  auto s = solve_builtin(build_corrective_fcuc(spec, sc, toy_tobit(), 10.0, config(Case::II)));
  ASSERT_EQ(s.status, lp::Status::Optimal);
  EXPECT_GT(s.estimated_ufls_total_mw, 0.0);
  EXPECT_EQ(s.ufls_cost_eur, 0.0);
}

TEST(Corrective, FixedCommitmentGivesEstimatorValue) {
  auto spec = pair_system();
  spec.generators.push_back(unit("C", 1.0, 6.0, 80.0, {{6.0, 16.0}}));
  auto tobit = toy_tobit(0.8, 3.0);
  auto sc = scenario(spec, {9.0, 12.0, 14.0});
  auto base = solve_builtin(build_standard_uc(spec, sc));
  ASSERT_EQ(base.status, lp::Status::Optimal);
  auto h = build_corrective_fcuc(spec, sc, tobit, 20.0, config(Case::III));
  for (std::size_t i = 0; i < spec.size(); ++i) {
    for (int t = 0; t < sc.horizon; ++t) h.model.set_bounds(h.u[i][t], base.u[i][t], base.u[i][t]);
  }
  auto s = solve_builtin(h);
  ASSERT_EQ(s.status, lp::Status::Optimal);
  EXPECT_EQ(s.u, base.u);
  auto rocof = schedule_rocof(spec, s.u, s.p);
  for (std::size_t l = 0; l < spec.size(); ++l) {
    for (int t = 0; t < sc.horizon; ++t) {
      EXPECT_NEAR(s.ufls[l][t], std::max(0.0, tobit.slope_b * (rocof[l][t] - tobit.threshold_a)), 1e-6);
    }
  }
}

TEST(Corrective, HugeSheddingCostReproducesStandardUc) {
  // inertia large enough that the standard schedule never crosses the threshold
  SystemSpec spec;
  spec.generators = {unit("A", 1.0, 10.0, 300.0, {{4.0, 10.0}, {10.0, 14.0}}),
                     unit("B", 1.0, 8.0, 200.0, {{3.0, 18.0}, {8.0, 25.0}}),
                     unit("C", 1.0, 6.0, 150.0, {{6.0, 16.0}})};
  auto sc = scenario(spec, {7.0, 9.0, 11.0});
  auto tobit = toy_tobit(1.0, 2.0);
  auto std_uc = solve_builtin(build_standard_uc(spec, sc));
  ASSERT_EQ(std_uc.status, lp::Status::Optimal);
  for (const auto& row : std_uc.rocof) {
    for (double r : row) ASSERT_LE(r, tobit.threshold_a);
  }
  auto corr = solve_builtin(build_corrective_fcuc(spec, sc, tobit, 10.0, config(Case::III, 1e9)));
  ASSERT_EQ(corr.status, lp::Status::Optimal);
  EXPECT_NEAR(corr.objective_eur, std_uc.objective_eur, 1e-6 * std_uc.objective_eur);
  EXPECT_NEAR(corr.estimated_ufls_total_mw, 0.0, 1e-9);
}

TEST(Corrective, CaseRelations) {
  SystemSpec spec = pair_system();
  spec.generators.push_back(unit("C", 1.0, 6.0, 80.0, {{6.0, 16.0}}));
  auto tobit = toy_tobit(0.8, 3.0);
  const double c_o = 1e5;
  auto sc = scenario(spec, {9.0, 12.0, 14.0});
  auto one = solve_builtin(build_standard_uc(spec, sc));
  auto two = solve_builtin(build_corrective_fcuc(spec, sc, tobit, 20.0, config(Case::II)));
  auto three = solve_builtin(build_corrective_fcuc(spec, sc, tobit, 20.0, config(Case::III, c_o)));
  ASSERT_EQ(one.status, lp::Status::Optimal);
  ASSERT_EQ(two.status, lp::Status::Optimal);
  ASSERT_EQ(three.status, lp::Status::Optimal);
  // Case II relaxes both others
  EXPECT_LE(two.operation_cost_eur, three.operation_cost_eur + 1e-6);
  EXPECT_LT(two.operation_cost_eur, one.operation_cost_eur);
  EXPECT_EQ(two.ufls_cost_eur, 0.0);
  // the standard schedule is feasible for Case III at the shed cost its RoCoFs imply
  double implied = 0.0;
  for (std::size_t l = 0; l < spec.size(); ++l) {
    for (int t = 0; t < sc.horizon; ++t) {
      implied += weight(spec, sc, c_o, static_cast<int>(l)) *
                 std::max(0.0, tobit.slope_b * (one.rocof[l][t] - tobit.threshold_a));
    }
  }
  EXPECT_LE(three.objective_eur, one.operation_cost_eur + implied + 1e-6);
  EXPECT_NEAR(three.objective_eur, three.operation_cost_eur + three.ufls_cost_eur, 1e-6);
}

TEST(Corrective, RejectsBadConfiguration) {
  auto spec = pair_system();
  auto sc = scenario(spec, {7.0});
  auto bad = toy_tobit();
  bad.slope_b = 0.0;
  EXPECT_THROW(build_corrective_fcuc(spec, sc, bad, 10.0, config(Case::II)), ValidationError);
  EXPECT_THROW(build_corrective_fcuc(spec, sc, toy_tobit(), 10.0, config(Case::I)), InvalidArgument);
  auto cfg = config(Case::III);
  cfg.big_m2 = 5.0;
  EXPECT_THROW(build_corrective_fcuc(spec, sc, toy_tobit(), 10.0, cfg), ValidationError);
  cfg.big_m2 = -1.0;
  EXPECT_THROW(build_corrective_fcuc(spec, sc, toy_tobit(), 0.0, cfg), ValidationError);
  EXPECT_THROW(parse_case("IV"), InvalidArgument);
  EXPECT_EQ(parse_case("II"), Case::II);
}

TEST(Corrective, DefaultBigMCoversLabelsAndRocofRange) {
  auto spec = pair_system();
  auto sc = scenario(spec, {7.0});
  auto h = build_corrective_fcuc(spec, sc, toy_tobit(1.0, 2.0), 10.0, config(Case::II));
  EXPECT_DOUBLE_EQ(h.big_m1, spec.rocof_crit);
  EXPECT_DOUBLE_EQ(h.big_m2, 12.0);
  auto h2 = build_corrective_fcuc(spec, sc, toy_tobit(0.5, 20.0), 1.0, config(Case::II));
  EXPECT_DOUBLE_EQ(h2.big_m2, 20.0 * (spec.rocof_crit - 0.5));
}

TEST(Properties, RandomInstancesSatisfyInvariants) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int solved = 0;
  for (int trial = 0; trial < 12; ++trial) {
    SystemSpec spec;
    for (int i = 0; i < 3; ++i) {
      double pmax = 4.0 + 6.0 * U(rng);
      double price = 10.0 + 20.0 * U(rng);
      spec.generators.push_back(unit("G" + std::to_string(i), 0.2 * pmax, pmax, 100.0 + 200.0 * U(rng),
                                     {{0.5 * pmax, price}, {pmax, price + 5.0 * U(rng)}}));
    }
    double cap = 0.0;
    for (const auto& g : spec.generators) cap += g.p_max;
    std::vector<double> demand;
    for (int t = 0; t < 3; ++t) demand.push_back(cap * (0.25 + 0.3 * U(rng)));
    auto sc = scenario(spec, demand);
    auto tobit = toy_tobit(0.5 + U(rng), 1.0 + 3.0 * U(rng));
    for (Case c : {Case::I, Case::II, Case::III}) {
      auto h = build(spec, sc, tobit, 10.0, config(c, 1e5));
      auto s = solve_builtin(h);
      if (s.status == lp::Status::Infeasible) continue;
      ASSERT_EQ(s.status, lp::Status::Optimal);
      ++solved;
      expect_invariants(h, s);
      EXPECT_GE(s.operation_cost_eur, 0.0);
      EXPECT_GE(s.ufls_cost_eur, 0.0);
    }
  }
  EXPECT_GE(solved, 20);
}

TEST(Solve, DeterministicResolve) {
  auto spec = pair_system();
  auto sc = scenario(spec, {7.0, 9.0});
  auto h = build_corrective_fcuc(spec, sc, toy_tobit(), 10.0, config(Case::III));
  auto a = solve_builtin(h), b = solve_builtin(h);
  EXPECT_NEAR(a.objective_eur, b.objective_eur, 1e-9);
  EXPECT_EQ(a.p, b.p);
  EXPECT_EQ(lp::to_lp_string(h.model),
            lp::to_lp_string(build_corrective_fcuc(spec, sc, toy_tobit(), 10.0, config(Case::III)).model));
}

TEST(Solve, ModelSizeOfSmallCorrectiveInstance) {
  auto spec = pair_system();
  auto sc = scenario(spec, {7.0, 9.0});
  auto h = build_corrective_fcuc(spec, sc, toy_tobit(), 10.0, config(Case::II));
  EXPECT_EQ(h.model.num_binaries(), 8);  // u and z for 2 units x 2 steps
  auto lp_text = lp::to_lp_string(h.model);
  EXPECT_NE(lp_text.find("tobitd_A_2:"), std::string::npos);
  EXPECT_NE(lp_text.find("yc_B_A_1:"), std::string::npos);
}

TEST(Schedule, JsonRoundTrip) {
  auto spec = pair_system();
  auto sc = scenario(spec, {7.0, 9.0});
  auto s = solve_builtin(build_corrective_fcuc(spec, sc, toy_tobit(), 10.0, config(Case::III)));
  learn::Provenance prov{"00ff", 42};
  auto text = to_json(s, spec, prov).dump(2);
  auto back = parse_schedule(text, spec);
  EXPECT_EQ(back.provenance.config_hash, "00ff");
  EXPECT_EQ(back.provenance.seed, 42u);
  EXPECT_EQ(back.solution.u, s.u);
  EXPECT_EQ(back.solution.p, s.p);
  EXPECT_EQ(back.solution.ufls, s.ufls);
  EXPECT_EQ(back.solution.formulation, Case::III);
  EXPECT_EQ(to_json(back.solution, spec, prov).dump(2), text);
  EXPECT_THROW(parse_schedule("{", spec), ParseError);
  EXPECT_THROW(load_schedule("/nonexistent/schedule.json", spec), MissingInputError);
}

TEST(Schedule, OperatingPointKeepsCommittedUnits) {
  auto spec = pair_system();
  auto sc = scenario(spec, {7.0});
  auto s = solve_builtin(build_standard_uc(spec, sc));
  auto op = operating_point(s, spec, 0);
  EXPECT_EQ(op.committed, (std::vector<bool>{true, true}));
  EXPECT_NEAR(op.load_mw, 7.0, 1e-9);
}

// The big-M rows of the full system once drove the simplex onto 1e-9 pivots
// and a feasible relaxation came back infeasible.
TEST(Solve, ShippedStepRelaxationIsSolved) {
  const std::string data = FCUC_DATA_DIR;
  auto spec = load_system(data + "/system.json");
  auto sc = load_scenario(data + "/scenario.csv", spec, std::filesystem::path(data + "/initial_status.csv"));
  sc.horizon = 1;
  sc.demand.resize(1);
  sc.wind.resize(1);
  sc.solar.resize(1);
  auto tobit = learn::load_tobit(data + "/tobit.json");
  for (Case k : {Case::I, Case::II, Case::III}) {
    auto h = build(spec, sc, tobit.model, tobit.max_label_mw, config(k));
    auto relax = lp::solve_lp(h.model);
    ASSERT_EQ(relax.status, lp::Status::Optimal) << to_string(k);
    double worst = 0.0;  // rows and bounds only; binaries may be fractional
    for (int j = 0; j < h.model.num_vars(); ++j) {
      worst = std::max({worst, h.model.var(j).lb - relax.values[j], relax.values[j] - h.model.var(j).ub});
    }
    for (int r = 0; r < h.model.num_rows(); ++r) {
      const auto& row = h.model.rows()[r];
      double gap = h.model.row_activity(r, relax.values) - row.rhs;
      worst = std::max(worst, row.sense == lp::Sense::Le ? gap : row.sense == lp::Sense::Ge ? -gap : std::abs(gap));
    }
    EXPECT_LT(worst, 1e-6) << to_string(k);
  }
}

TEST(Solve, ExternalSolverAgreesWhenAvailable) {
  auto path = lp::external_solver_path();
  if (path.empty()) GTEST_SKIP() << "no external solver configured";
  SystemSpec spec = pair_system();
  spec.generators.push_back(unit("C", 1.0, 6.0, 80.0, {{6.0, 16.0}}));
  auto sc = scenario(spec, {9.0, 12.0, 14.0});
  auto h = build_corrective_fcuc(spec, sc, toy_tobit(0.8, 3.0), 20.0, config(Case::III));
  auto own = solve_builtin(h);
  auto ext = solve(h, *lp::make_external_backend(path));
  ASSERT_EQ(ext.status, lp::Status::Optimal);
  EXPECT_NEAR(ext.objective_eur, own.objective_eur, 1e-6 * own.objective_eur);
  expect_invariants(h, ext);
}

}  // namespace
}  // namespace fcuc::milp
