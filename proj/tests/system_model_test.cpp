#include "fcuc/system_model.hpp"

#include <gtest/gtest.h>

#include <random>

namespace fcuc {
namespace {

const std::string kDataDir = FCUC_DATA_DIR;

SystemSpec shipped() { return load_system(kDataDir + "/system.json"); }

OperatingPoint units_online(const SystemSpec& spec, std::initializer_list<std::size_t> idx) {
  std::vector<double> dispatch(spec.size(), 0.0);
  for (auto i : idx) dispatch[i] = spec.generators[i].p_min;
  return make_operating_point(spec, dispatch);
}

TEST(LoadSystem, TranscribesCaseStudyTable) {
  auto spec = shipped();
  ASSERT_EQ(spec.size(), 11u);
  const auto& g11 = spec.generators[10];
  EXPECT_EQ(g11.id, "G11");
  EXPECT_DOUBLE_EQ(g11.p_max, 21.0);
  EXPECT_DOUBLE_EQ(g11.inertia_h, 6.5);
  EXPECT_DOUBLE_EQ(g11.m_base, 26.82);
  EXPECT_DOUBLE_EQ(g11.governor_gain_k, 21.25);
  EXPECT_DOUBLE_EQ(spec.generators[6].m_base, 15.75);
  EXPECT_DOUBLE_EQ(spec.nominal_freq_f0, 50.0);
}

TEST(LoadSystem, RejectsPminAbovePmax) {
  auto j = to_json(shipped());
  j["generators"][2]["p_min_mw"] = 5.0;
  try {
    system_from_json(j);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "generators[G3].p_min_mw");
  }
}

TEST(LoadSystem, RejectsEmptyGeneratorList) {
  auto j = to_json(shipped());
  j["generators"] = nlohmann::json::array();
  EXPECT_THROW(system_from_json(j), ValidationError);
}

TEST(LoadSystem, RejectsNonConvexCostCurve) {
  auto j = to_json(shipped());
  j["generators"][0]["cost_curve"][1]["eur_per_mwh"] = 1.0;
  EXPECT_THROW(system_from_json(j), ValidationError);
}

TEST(LoadSystem, RejectsMalformedText) {
  EXPECT_THROW(parse_system("{\"generators\": [}"), ParseError);
  EXPECT_THROW(parse_system("{\"f0_hz\": 50}"), ParseError);
  EXPECT_THROW(load_system(kDataDir + "/does_not_exist.json"), MissingInputError);
}

TEST(LoadSystem, RejectsInvertedFloors) {
  auto j = to_json(shipped());
  j["freq_floor_hard_hz"] = 48.5;
  EXPECT_THROW(system_from_json(j), ValidationError);
}

TEST(LoadSystem, RoundTripsThroughJson) {
  auto spec = shipped();
  spec.generators[3].reserve_cap = 1.25;
  auto text = to_json(spec).dump();
  EXPECT_EQ(parse_system(text), spec);
}

TEST(Scenario, LoadsShippedDay) {
  auto spec = shipped();
  auto sc = load_scenario(kDataDir + "/scenario.csv", spec, kDataDir + "/initial_status.csv");
  EXPECT_EQ(sc.horizon, 24);
  double peak = *std::max_element(sc.demand.begin(), sc.demand.end());
  double valley = *std::min_element(sc.demand.begin(), sc.demand.end());
  EXPECT_DOUBLE_EQ(peak, 40.0);
  EXPECT_DOUBLE_EQ(valley, 20.0);
  double energy = 0, res = 0;
  for (int t = 0; t < sc.horizon; ++t) {
    energy += sc.demand[t];
    res += sc.wind[t] + sc.solar[t];
  }
  EXPECT_NEAR(res / energy, 0.10, 0.005);
  for (const auto& st : sc.initial) EXPECT_FALSE(st.online);
}

TEST(Scenario, RejectsNegativeWindAndBadSteps) {
  auto spec = shipped();
  EXPECT_THROW(parse_scenario("step,demand_mw,wind_mw,solar_mw\n1,20,-1,0\n", spec), ValidationError);
  EXPECT_THROW(parse_scenario("step,demand_mw,wind_mw,solar_mw\n2,20,1,0\n", spec), ParseError);
  EXPECT_THROW(parse_scenario("step,demand_mw,solar_mw\n1,20,0\n", spec), ParseError);
  auto sc = parse_scenario("step,demand_mw,wind_mw,solar_mw\n1,20,1,0\n", spec);
  EXPECT_THROW(apply_initial_status(sc, spec, "unit,online,hours_in_state,p0_mw\nG99,1,2,3\n"),
               ValidationError);
  EXPECT_THROW(apply_initial_status(sc, spec, "unit,online,hours_in_state,p0_mw\nG1,1,2,30\n"),
               ValidationError);
}

TEST(Scenario, CsvRoundTrip) {
  auto spec = shipped();
  auto sc = load_scenario(kDataDir + "/scenario.csv", spec, kDataDir + "/initial_status.csv");
  auto again = parse_scenario(scenario_to_csv(sc), spec);
  apply_initial_status(again, spec, initial_status_to_csv(sc, spec));
  EXPECT_EQ(again, sc);
}

TEST(SystemInertia, HandSums) {
  auto spec = shipped();
  auto op = units_online(spec, {6, 7});
  EXPECT_NEAR(system_inertia(op, spec), 63.525, 1e-12);
  EXPECT_NEAR(op.system_inertia_mws, 63.525, 1e-12);
  EXPECT_NEAR(system_inertia(op, spec, std::size_t{6}), 30.45, 1e-12);
  EXPECT_NEAR(system_inertia(op, spec, "G7"), 30.45, 1e-12);
  EXPECT_DOUBLE_EQ(system_inertia(units_online(spec, {}), spec), 0.0);
  EXPECT_THROW(system_inertia(op, spec, std::size_t{11}), InvalidArgument);
  EXPECT_THROW(system_inertia(op, spec, "G42"), InvalidArgument);
}

TEST(SystemInertia, AdditiveOverUnits) {
  auto spec = shipped();
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> dispatch(spec.size(), 0.0);
    double expected = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
      if (rng() % 2) {
        dispatch[i] = spec.generators[i].p_max;
        expected += spec.generators[i].inertia_h * spec.generators[i].m_base;
      }
    }
    auto op = make_operating_point(spec, dispatch);
    double total = system_inertia(op, spec);
    EXPECT_NEAR(total, expected, 1e-9);
    EXPECT_GE(total, 0.0);
    for (std::size_t i = 0; i < spec.size(); ++i) {
      double without = system_inertia(op, spec, i);
      double share = op.committed[i] ? spec.generators[i].inertia_mws() : 0.0;
      EXPECT_NEAR(without + share, total, 1e-9);
    }
  }
}

TEST(InitialRocof, Examples) {
  EXPECT_NEAR(initial_rocof(10.0, 63.525, 50.0), 10.0 * 50.0 / (2.0 * 63.525), 1e-12);
  EXPECT_NEAR(initial_rocof(10.0, 63.525, 50.0), 3.936, 1e-3);  // 3.93546 rounded
  EXPECT_EQ(initial_rocof(0.0, 63.525, 50.0), 0.0);
  EXPECT_THROW(initial_rocof(10.0, 0.0, 50.0), InvalidArgument);
  EXPECT_THROW(initial_rocof(-1.0, 10.0, 50.0), InvalidArgument);
}

TEST(InitialRocof, LinearInLossInverseInInertia) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> loss(0.1, 30.0), inertia(5.0, 500.0);
  for (int i = 0; i < 500; ++i) {
    double p = loss(rng), h = inertia(rng);
    double base = initial_rocof(p, h, 50.0);
    EXPECT_NEAR(initial_rocof(2 * p, h, 50.0) / base, 2.0, 1e-12);
    EXPECT_NEAR(initial_rocof(p, 2 * h, 50.0) / base, 0.5, 1e-12);
  }
}

TEST(OperatingPointTest, RejectsDispatchOutsideLimits) {
  auto spec = shipped();
  std::vector<double> dispatch(spec.size(), 0.0);
  dispatch[0] = 1.0;  // below p_min of 2.35
  EXPECT_THROW(make_operating_point(spec, dispatch), InvalidArgument);
}

TEST(CostCurve, PiecewiseLinearWithNoLoad) {
  GeneratorSpec g;
  g.no_load_cost = 10;
  g.cost_curve = {{2.0, 5.0}, {4.0, 7.0}};
  EXPECT_DOUBLE_EQ(g.hourly_cost(0.0), 10.0);
  EXPECT_DOUBLE_EQ(g.hourly_cost(1.0), 15.0);
  EXPECT_DOUBLE_EQ(g.hourly_cost(3.0), 10.0 + 10.0 + 7.0);
  EXPECT_DOUBLE_EQ(g.hourly_cost(4.0), 10.0 + 10.0 + 14.0);
}

}  // namespace
}  // namespace fcuc
