#include "fcuc/cli.hpp"

#include <gtest/gtest.h>

#include <random>

namespace fcuc::cli {
namespace {

GeneratorSpec unit(std::string id, double p_min, double p_max, double hm, std::vector<CostSegment> curve) {
  GeneratorSpec g;
  g.id = std::move(id);
  g.p_min = p_min;
  g.p_max = p_max;
  g.m_base = 10.0;
  g.inertia_h = hm / 10.0;
  g.ramp_up = g.ramp_down = p_max;
  g.no_load_cost = 5.0;
  g.cost_curve = std::move(curve);
  g.startup_cost = 30.0;
  g.outage_rate = 2.0;
  return g;
}

// Working directory with a two-unit system where B's limited reserve makes
// Case I hold back the cheap unit, plus a small synthetic dataset.
class Workdir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("fcuc_cli_" + std::to_string(::getpid()) + "_" +
                                       ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
    fs::create_directories(dir / "in");
    spec.generators = {unit("A", 1.0, 10.0, 100.0, {{4.0, 10.0}, {10.0, 14.0}}),
                       unit("B", 1.0, 8.0, 50.0, {{3.0, 18.0}, {8.0, 25.0}})};
    spec.generators[1].reserve_cap = 4.0;
    io::write_file(dir / "in/system.json", to_json(spec).dump(2));
    ScenarioSpec sc;
    sc.horizon = 3;
    sc.demand = {6.0, 8.0, 7.0};
    sc.wind.assign(3, 0.0);
    sc.solar.assign(3, 0.0);
    sc.initial.assign(2, InitialStatus{false, 100.0, 0.0});
    io::write_file(dir / "in/scenario.csv", scenario_to_csv(sc));
    io::write_file(dir / "in/initial_status.csv", initial_status_to_csv(sc, spec));

    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::vector<learn::DatasetPoint> pts;
    for (std::size_t k = 0; k < 60; ++k) {
      double x = 0.05 * static_cast<double>(k);
      pts.push_back({k, k % 2, x, std::max(0.0, 2.0 * (x - 1.0) + noise(rng))});
    }
    io::write_file(dir / "in/dataset.csv", learn::dataset_to_csv(pts, spec, {"synthetic", 0}));
  }
  void TearDown() override { fs::remove_all(dir); }

  RunConfig config(Subcommand s) const {
    RunConfig c;
    c.subcommand = s;
    c.system = dir / "in/system.json";
    c.scenario = dir / "in/scenario.csv";
    c.dataset = dir / "in/dataset.csv";
    c.out = dir / "out";
    c.solver = SolverChoice::Builtin;
    c.mip_gap = 1e-9;
    return c;
  }

  Outcome fit() const { return run(config(Subcommand::Fit)); }

  fs::path dir;
  SystemSpec spec;
};

std::string slurp(const fs::path& p) { return io::read_file(p); }

TEST_F(Workdir, FitIsByteIdenticalOnRerun) {
  auto a = fit();
  ASSERT_EQ(a.code, kOk) << a.error;
  auto first = slurp(dir / "out/tobit.json");
  auto b = fit();
  ASSERT_EQ(b.code, kOk) << b.error;
  EXPECT_EQ(slurp(dir / "out/tobit.json"), first);
  auto t = learn::parse_tobit(first);
  EXPECT_EQ(t.provenance.seed, 42u);
  EXPECT_EQ(t.provenance.config_hash.size(), 16u);
  EXPECT_NEAR(t.model.slope_b, 2.0, 0.3);
  EXPECT_TRUE(fs::exists(dir / "out/tobit.gp"));
  EXPECT_TRUE(fs::exists(dir / "out/dataset.csv"));

  // a different seed is a different configuration
  auto c = config(Subcommand::Fit);
  c.seed = 7;
  ASSERT_EQ(run(c).code, kOk);
  EXPECT_NE(learn::parse_tobit(slurp(dir / "out/tobit.json")).provenance.config_hash, t.provenance.config_hash);
}

TEST_F(Workdir, CaseTwoIsCheaperThanCaseOne) {
  ASSERT_EQ(fit().code, kOk);
  auto one = config(Subcommand::Solve);
  one.out = dir / "one";
  one.tobit = dir / "out/tobit.json";
  auto r1 = run(one);
  ASSERT_EQ(r1.code, kOk) << r1.error;
  auto two = one;
  two.out = dir / "two";
  two.formulation = milp::Case::II;
  two.write_lp = true;
  auto r2 = run(two);
  ASSERT_EQ(r2.code, kOk) << r2.error;
  auto s1 = milp::load_schedule(dir / "one/schedule.json", spec).solution;
  auto s2 = milp::load_schedule(dir / "two/schedule.json", spec).solution;
  EXPECT_LT(s2.operation_cost_eur, s1.operation_cost_eur - 1.0);
  EXPECT_TRUE(fs::exists(dir / "two/model.lp"));
  EXPECT_FALSE(fs::exists(dir / "one/model.lp"));
  EXPECT_TRUE(fs::exists(dir / "one/commitment.csv"));
  EXPECT_TRUE(fs::exists(dir / "one/outage_step.gp"));
}

TEST_F(Workdir, PipelineRerunsAreByteIdentical) {
  ASSERT_EQ(fit().code, kOk);
  auto solve = config(Subcommand::Solve);
  solve.formulation = milp::Case::III;
  solve.c_o_eur_per_mw = 1e5;
  auto ver = config(Subcommand::Verify);
  std::map<std::string, std::string> first;
  for (int round = 0; round < 2; ++round) {
    auto a = run(solve);
    ASSERT_EQ(a.code, kOk) << a.error;
    auto b = run(ver);
    ASSERT_EQ(b.code, kOk) << b.error;
    for (const auto& e : fs::recursive_directory_iterator(dir / "out")) {
      if (!e.is_regular_file()) continue;
      auto key = fs::relative(e.path(), dir / "out").string();
      if (round == 0) {
        first[key] = slurp(e.path());
      } else {
        ASSERT_TRUE(first.count(key)) << key;
        EXPECT_EQ(slurp(e.path()), first[key]) << key;
      }
    }
  }
  auto rep = verify::parse_report(first.at("verify.csv"), spec);
  EXPECT_FALSE(rep.pairs.empty());
  EXPECT_TRUE(first.count("verify_conventional.csv"));
  EXPECT_TRUE(first.count("freq_traces/freq_traces.gp"));
  EXPECT_EQ(first.at("verify.csv").rfind("# config_hash=", 0), 0u);
}

TEST_F(Workdir, VerifyWithoutScheduleIsMissingInput) {
  ASSERT_EQ(fit().code, kOk);
  auto r = run(config(Subcommand::Verify));
  EXPECT_EQ(r.code, kMissingInput);
  EXPECT_EQ(r.error.find('\n'), std::string::npos);
  EXPECT_EQ(r.error.rfind("error missing_input 3: ", 0), 0u) << r.error;
}

TEST_F(Workdir, DistinctExitCodesPerFailure) {
  auto c = config(Subcommand::Solve);
  c.system = dir / "nope.json";
  EXPECT_EQ(run(c).code, kMissingInput);

  io::write_file(dir / "in/bad.json", "{ not json");
  c.system = dir / "in/bad.json";
  EXPECT_EQ(run(c).code, kParse);

  auto broken = spec;
  broken.generators[0].p_min = 20.0;
  io::write_file(dir / "in/broken.json", to_json(broken).dump());
  c.system = dir / "in/broken.json";
  EXPECT_EQ(run(c).code, kValidation);

  c = config(Subcommand::Solve);
  c.solver = SolverChoice::External;
  ::unsetenv(lp::kSolverEnv);
  EXPECT_EQ(run(c).code, kSolver);

  // Case II needs an estimator
  c = config(Subcommand::Solve);
  c.formulation = milp::Case::II;
  EXPECT_EQ(run(c).code, kMissingInput);

  // reserve cannot cover the larger unit at 9 MW under Case I
  io::write_file(dir / "in/high.csv", "step,demand_mw,wind_mw,solar_mw\n1,9,0,0\n");
  c = config(Subcommand::Solve);
  c.scenario = dir / "in/high.csv";
  c.initial = dir / "in/initial_status.csv";
  auto r = run(c);
  EXPECT_EQ(r.code, kNoSchedule) << r.error;
  EXPECT_TRUE(fs::exists(dir / "out/schedule.json"));
  EXPECT_EQ(run(config(Subcommand::Verify)).code, kMissingInput);  // no tobit yet
  ASSERT_EQ(fit().code, kOk);
  EXPECT_EQ(run(config(Subcommand::Verify)).code, kNoSchedule);
}

TEST_F(Workdir, SweepAndStudyOnTheSmallSystem) {
  ASSERT_EQ(fit().code, kOk);
  auto sw = config(Subcommand::Sweep);
  sw.coarse = true;
  auto r = run(sw);
  ASSERT_EQ(r.code, kOk) << r.error;
  auto table = io::parse_csv(slurp(dir / "out/sweep.csv"));
  EXPECT_EQ(table.rows.size(), 21u);
  auto distinct = io::parse_csv(slurp(dir / "out/sweep_distinct.csv"));
  EXPECT_LE(distinct.rows.size(), table.rows.size());
  EXPECT_GE(distinct.rows.size(), 1u);

  auto st = config(Subcommand::Study);
  st.days = 3;
  r = run(st);
  // III <= I is not guaranteed; any failure here must be the ordering check
  EXPECT_TRUE(r.code == kOk || r.code == kCheckFailed) << r.error;
  auto rows = io::parse_csv(slurp(dir / "out/study.csv"));
  EXPECT_EQ(rows.rows.size(), 9u);
  EXPECT_TRUE(fs::exists(dir / "out/study_wide.csv"));
}

TEST_F(Workdir, DatasetStageIsDeterministic) {
  auto c = config(Subcommand::Dataset);
  c.dataset_opts.cost_quantile = 1.0;
  c.dataset_opts.k_max = 6;
  c.dataset_opts.restarts = 3;
  auto r = run(c);
  ASSERT_EQ(r.code, kOk) << r.error;
  auto first = slurp(dir / "out/dataset.csv");
  auto pts = learn::parse_dataset(first, spec);
  EXPECT_FALSE(pts.empty());
  ASSERT_EQ(run(c).code, kOk);
  EXPECT_EQ(slurp(dir / "out/dataset.csv"), first);
  EXPECT_EQ(slurp(dir / "out/dataset_summary.json").find("\"seed\": 42") != std::string::npos, true);

  c.dataset_opts.demand_min_mw = -1.0;
  EXPECT_EQ(run(c).code, kValidation);
}

TEST(Scheme, ParsesFractionsAndAbsoluteBlocks) {
  auto s = detail::parse_scheme(R"({"steps": [{"threshold_hz": 49.2, "delay_s": 0.2, "block_fraction": 0.15},
                                              {"threshold_hz": 48.7, "delay_s": 0.1, "block_mw": 3}]})");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_TRUE(s[0].fraction_of_demand);
  EXPECT_DOUBLE_EQ(s[0].block_mw(20.0), 3.0);
  EXPECT_FALSE(s[1].fraction_of_demand);
  EXPECT_DOUBLE_EQ(s[1].block_mw(20.0), 3.0);
  EXPECT_THROW(detail::parse_scheme("{}"), ParseError);
  EXPECT_THROW(detail::parse_scheme(R"({"steps": [{"threshold_hz": 48, "delay_s": 0, "block_mw": 1},
                                                  {"threshold_hz": 49, "delay_s": 0, "block_mw": 1}]})"),
               ValidationError);
}

TEST(ErrorLine, IsOneLine) {
  EXPECT_EQ(error_line("parse", 4, "bad\nthing"), "error parse 4: bad thing");
}

}  // namespace
}  // namespace fcuc::cli
