#pragma once

// Domain types for an isolated power system and the readers/writers for its
// input files. Public quantities are in MW, MVA, Hz and seconds; aggregate
// inertia is carried as MW*s (H times machine base).

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fcuc/errors.hpp"
#include "fcuc/io.hpp"

namespace fcuc {

/// One convex piece of a generation cost curve: marginal cost `eur_per_mwh`
/// applies to output between the previous breakpoint and `up_to_mw`.
struct CostSegment {
  double up_to_mw = 0.0;
  double eur_per_mwh = 0.0;

  bool operator==(const CostSegment&) const = default;
};

struct GeneratorSpec {
  std::string id;
  double p_max = 0.0;            // MW
  double p_min = 0.0;            // MW
  double m_base = 0.0;           // MVA
  double inertia_h = 0.0;        // s, on m_base
  double governor_gain_k = 20.0; // pu, on m_base
  double governor_time_t = 5.0;  // s
  double ramp_up = 0.0;          // MW per step
  double ramp_down = 0.0;        // MW per step
  int min_up_time = 1;           // steps
  int min_down_time = 1;         // steps
  double no_load_cost = 0.0;     // EUR per hour online
  std::vector<CostSegment> cost_curve;
  double startup_cost = 0.0;     // EUR per start
  double outage_rate = 0.0;      // occurrences per year
  std::optional<double> reserve_cap;  // MW deliverable within the reserve window

  /// H * M_base, MW*s.
  double inertia_mws() const { return inertia_h * m_base; }

  /// Hourly generation cost at output `p` (no-load cost included).
  double hourly_cost(double p) const {
    double cost = no_load_cost;
    double prev = 0.0;
    for (const auto& seg : cost_curve) {
      double hi = std::min(p, seg.up_to_mw);
      if (hi > prev) cost += seg.eur_per_mwh * (hi - prev);
      prev = seg.up_to_mw;
      if (prev >= p) break;
    }
    return cost;
  }

  bool operator==(const GeneratorSpec&) const = default;
};

struct SystemSpec {
  std::vector<GeneratorSpec> generators;
  double nominal_freq_f0 = 50.0;
  double s_base = 100.0;
  double load_damping_d = 1.0;
  double rocof_crit = 2.5;
  double freq_floor_hard = 47.0;
  double freq_floor_soft = 48.0;
  double soft_floor_max_duration = 2.0;
  double ufls_post_outage_cost = 100000.0;

  std::size_t size() const { return generators.size(); }

  std::size_t index_of(std::string_view id) const {
    for (std::size_t i = 0; i < generators.size(); ++i) {
      if (generators[i].id == id) return i;
    }
    throw InvalidArgument("unknown unit id '" + std::string(id) + "'");
  }

  bool operator==(const SystemSpec&) const = default;
};

struct InitialStatus {
  bool online = false;
  double hours_in_state = 1.0e6;
  double p0_mw = 0.0;

  bool operator==(const InitialStatus&) const = default;
};

struct ScenarioSpec {
  int horizon = 0;
  double step_hours = 1.0;
  std::vector<double> demand;
  std::vector<double> wind;
  std::vector<double> solar;
  std::vector<InitialStatus> initial;  // one per generator, same order as SystemSpec

  double net_demand(int t) const { return demand[t] - wind[t] - solar[t]; }

  bool operator==(const ScenarioSpec&) const = default;
};

/// Commitment and dispatch of every unit at one instant.
struct OperatingPoint {
  std::vector<bool> committed;
  std::vector<double> dispatch;  // MW
  double load_mw = 0.0;          // total demand served, used for load damping
  double system_inertia_mws = 0.0;

  bool operator==(const OperatingPoint&) const = default;
};

// ---------------------------------------------------------------------------
// Validation

inline void validate(const GeneratorSpec& g) {
  auto fail = [&](const std::string& field, const std::string& what) {
    throw ValidationError("generators[" + g.id + "]." + field, what);
  };
  if (g.id.empty()) throw ValidationError("generators[].id", "must not be empty");
  if (!(g.p_min > 0.0)) fail("p_min_mw", "must be positive");
  if (!(g.p_min <= g.p_max)) fail("p_min_mw", "exceeds p_max_mw");
  if (!(g.m_base > 0.0)) fail("m_base_mva", "must be positive");
  if (!(g.inertia_h > 0.0)) fail("h_s", "must be positive");
  if (!(g.governor_time_t > 0.0)) fail("t_gov_s", "must be positive");
  if (!(g.governor_gain_k >= 0.0)) fail("k_pu", "must be non-negative");
  if (!(g.ramp_up >= 0.0)) fail("ramp_up_mw", "must be non-negative");
  if (!(g.ramp_down >= 0.0)) fail("ramp_down_mw", "must be non-negative");
  if (g.min_up_time < 1) fail("min_up_steps", "must be at least 1");
  if (g.min_down_time < 1) fail("min_down_steps", "must be at least 1");
  if (!(g.no_load_cost >= 0.0)) fail("no_load_cost_eur_per_h", "must be non-negative");
  if (!(g.startup_cost >= 0.0)) fail("startup_cost_eur", "must be non-negative");
  if (!(g.outage_rate >= 0.0)) fail("outage_rate_per_year", "must be non-negative");
  if (g.reserve_cap && !(*g.reserve_cap >= 0.0)) fail("reserve_cap_mw", "must be non-negative");
  if (g.cost_curve.empty()) fail("cost_curve", "must have at least one segment");
  double prev_bp = 0.0;
  double prev_slope = -1.0e300;
  for (const auto& seg : g.cost_curve) {
    if (!(seg.up_to_mw > prev_bp)) fail("cost_curve", "breakpoints must be strictly increasing");
    if (seg.eur_per_mwh < prev_slope) fail("cost_curve", "slopes must be non-decreasing (convex)");
    prev_bp = seg.up_to_mw;
    prev_slope = seg.eur_per_mwh;
  }
  if (prev_bp + 1e-9 < g.p_max) fail("cost_curve", "last breakpoint must reach p_max_mw");
}

inline void validate(const SystemSpec& s) {
  if (s.generators.empty()) throw ValidationError("generators", "must not be empty");
  for (std::size_t i = 0; i < s.generators.size(); ++i) {
    validate(s.generators[i]);
    for (std::size_t j = 0; j < i; ++j) {
      if (s.generators[j].id == s.generators[i].id) {
        throw ValidationError("generators[" + s.generators[i].id + "].id", "duplicate id");
      }
    }
  }
  if (!(s.nominal_freq_f0 > 0.0)) throw ValidationError("f0_hz", "must be positive");
  if (!(s.s_base > 0.0)) throw ValidationError("s_base_mva", "must be positive");
  if (!(s.load_damping_d >= 0.0)) throw ValidationError("d_pu", "must be non-negative");
  if (!(s.rocof_crit > 0.0)) throw ValidationError("rocof_crit_hzps", "must be positive");
  if (!(s.freq_floor_hard < s.freq_floor_soft)) {
    throw ValidationError("freq_floor_hard_hz", "must be below freq_floor_soft_hz");
  }
  if (!(s.freq_floor_soft < s.nominal_freq_f0)) {
    throw ValidationError("freq_floor_soft_hz", "must be below f0_hz");
  }
  if (!(s.soft_floor_max_duration >= 0.0)) {
    throw ValidationError("soft_floor_max_s", "must be non-negative");
  }
  if (!(s.ufls_post_outage_cost >= 0.0)) {
    throw ValidationError("ufls_post_outage_cost_eur_per_mw", "must be non-negative");
  }
}

inline void validate(const ScenarioSpec& sc, const SystemSpec& sys) {
  if (sc.horizon < 1) throw ValidationError("horizon", "must be at least one step");
  if (!(sc.step_hours > 0.0)) throw ValidationError("step_hours", "must be positive");
  auto check_len = [&](const std::vector<double>& v, const char* name) {
    if (static_cast<int>(v.size()) != sc.horizon) {
      throw ValidationError(name, "length " + std::to_string(v.size()) + " != horizon " +
                                      std::to_string(sc.horizon));
    }
  };
  check_len(sc.demand, "demand_mw");
  check_len(sc.wind, "wind_mw");
  check_len(sc.solar, "solar_mw");
  for (int t = 0; t < sc.horizon; ++t) {
    if (!(sc.demand[t] > 0.0)) throw ValidationError("demand_mw", "must be positive at step " + std::to_string(t + 1));
    if (!(sc.wind[t] >= 0.0)) throw ValidationError("wind_mw", "must be non-negative at step " + std::to_string(t + 1));
    if (!(sc.solar[t] >= 0.0)) throw ValidationError("solar_mw", "must be non-negative at step " + std::to_string(t + 1));
  }
  if (sc.initial.size() != sys.size()) {
    throw ValidationError("initial_status", "expected one entry per generator");
  }
  for (std::size_t i = 0; i < sc.initial.size(); ++i) {
    const auto& st = sc.initial[i];
    const auto& g = sys.generators[i];
    if (!(st.hours_in_state >= 0.0)) {
      throw ValidationError("initial_status[" + g.id + "].hours_in_state", "must be non-negative");
    }
    if (st.online && (st.p0_mw < g.p_min - 1e-9 || st.p0_mw > g.p_max + 1e-9)) {
      throw ValidationError("initial_status[" + g.id + "].p0_mw", "outside [p_min, p_max]");
    }
    if (!st.online && st.p0_mw != 0.0) {
      throw ValidationError("initial_status[" + g.id + "].p0_mw", "must be 0 for an offline unit");
    }
  }
}

/// Builds an OperatingPoint, checking unit limits. `load_mw` defaults to the
/// total dispatch when not positive.
inline OperatingPoint make_operating_point(const SystemSpec& spec, std::vector<double> dispatch,
                                           double load_mw = 0.0) {
  if (dispatch.size() != spec.size()) {
    throw InvalidArgument("dispatch vector size does not match the number of units");
  }
  OperatingPoint op;
  op.committed.resize(spec.size());
  double total = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto& g = spec.generators[i];
    double p = dispatch[i];
    if (p != 0.0 && (p < g.p_min - 1e-9 || p > g.p_max + 1e-9)) {
      throw InvalidArgument("dispatch of unit " + g.id + " outside [p_min, p_max]");
    }
    op.committed[i] = p != 0.0;
    if (op.committed[i]) op.system_inertia_mws += g.inertia_mws();
    total += p;
  }
  op.dispatch = std::move(dispatch);
  op.load_mw = load_mw > 0.0 ? load_mw : total;
  return op;
}

// ---------------------------------------------------------------------------
// Inertia and RoCoF

/// Sum of H*M over online units, optionally leaving out the unit at `excluded`.
inline double system_inertia(const OperatingPoint& op, const SystemSpec& spec,
                             std::optional<std::size_t> excluded = std::nullopt) {
  if (excluded && *excluded >= spec.size()) {
    throw InvalidArgument("excluded unit index " + std::to_string(*excluded) + " out of range");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (excluded && *excluded == i) continue;
    if (op.committed[i]) total += spec.generators[i].inertia_mws();
  }
  return total;
}

inline double system_inertia(const OperatingPoint& op, const SystemSpec& spec,
                             std::string_view excluded_id) {
  return system_inertia(op, spec, spec.index_of(excluded_id));
}

/// Magnitude of the initial rate of change of frequency, Hz/s, for a sudden
/// loss of `disturbance_mw` against `remaining_inertia_mws` of rotating mass.
inline double initial_rocof(double disturbance_mw, double remaining_inertia_mws, double f0) {
  if (!(disturbance_mw >= 0.0)) throw InvalidArgument("disturbance must be non-negative");
  if (!(remaining_inertia_mws > 0.0)) {
    throw InvalidArgument("no remaining inertia: the outage islands a dead system");
  }
  return disturbance_mw * f0 / (2.0 * remaining_inertia_mws);
}

// ---------------------------------------------------------------------------
// JSON / CSV ingestion

namespace detail {

template <typename T>
T required(const nlohmann::json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + ": missing key '" + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
T optional_or(const nlohmann::json& j, const char* key, T fallback, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + "." + key + ": " + e.what());
  }
}

}  // namespace detail

inline GeneratorSpec generator_from_json(const nlohmann::json& j) {
  using detail::optional_or;
  using detail::required;
  GeneratorSpec g;
  g.id = required<std::string>(j, "id", "generator");
  const std::string where = "generators[" + g.id + "]";
  g.p_max = required<double>(j, "p_max_mw", where);
  g.p_min = required<double>(j, "p_min_mw", where);
  g.m_base = required<double>(j, "m_base_mva", where);
  g.inertia_h = required<double>(j, "h_s", where);
  g.governor_gain_k = required<double>(j, "k_pu", where);
  g.governor_time_t = optional_or<double>(j, "t_gov_s", 5.0, where);
  g.ramp_up = optional_or<double>(j, "ramp_up_mw", g.p_max, where);
  g.ramp_down = optional_or<double>(j, "ramp_down_mw", g.p_max, where);
  g.min_up_time = optional_or<int>(j, "min_up_steps", 1, where);
  g.min_down_time = optional_or<int>(j, "min_down_steps", 1, where);
  g.no_load_cost = optional_or<double>(j, "no_load_cost_eur_per_h", 0.0, where);
  g.startup_cost = optional_or<double>(j, "startup_cost_eur", 0.0, where);
  g.outage_rate = optional_or<double>(j, "outage_rate_per_year", 0.0, where);
  if (auto it = j.find("reserve_cap_mw"); it != j.end() && !it->is_null()) {
    g.reserve_cap = it->get<double>();
  }
  auto curve = required<nlohmann::json>(j, "cost_curve", where);
  if (!curve.is_array()) throw ParseError(where + ".cost_curve: expected an array");
  for (const auto& seg : curve) {
    g.cost_curve.push_back({required<double>(seg, "up_to_mw", where + ".cost_curve"),
                            required<double>(seg, "eur_per_mwh", where + ".cost_curve")});
  }
  return g;
}

inline nlohmann::json to_json(const GeneratorSpec& g) {
  nlohmann::json j;
  j["id"] = g.id;
  j["p_max_mw"] = g.p_max;
  j["p_min_mw"] = g.p_min;
  j["m_base_mva"] = g.m_base;
  j["h_s"] = g.inertia_h;
  j["k_pu"] = g.governor_gain_k;
  j["t_gov_s"] = g.governor_time_t;
  j["ramp_up_mw"] = g.ramp_up;
  j["ramp_down_mw"] = g.ramp_down;
  j["min_up_steps"] = g.min_up_time;
  j["min_down_steps"] = g.min_down_time;
  j["no_load_cost_eur_per_h"] = g.no_load_cost;
  j["startup_cost_eur"] = g.startup_cost;
  j["outage_rate_per_year"] = g.outage_rate;
  if (g.reserve_cap) j["reserve_cap_mw"] = *g.reserve_cap;
  auto& curve = j["cost_curve"] = nlohmann::json::array();
  for (const auto& seg : g.cost_curve) {
    curve.push_back({{"up_to_mw", seg.up_to_mw}, {"eur_per_mwh", seg.eur_per_mwh}});
  }
  return j;
}

inline SystemSpec system_from_json(const nlohmann::json& j) {
  using detail::optional_or;
  if (!j.is_object()) throw ParseError("system: expected a JSON object");
  SystemSpec s;
  s.nominal_freq_f0 = optional_or<double>(j, "f0_hz", 50.0, "system");
  s.s_base = optional_or<double>(j, "s_base_mva", 100.0, "system");
  s.load_damping_d = optional_or<double>(j, "d_pu", 1.0, "system");
  s.rocof_crit = optional_or<double>(j, "rocof_crit_hzps", 2.5, "system");
  s.freq_floor_hard = optional_or<double>(j, "freq_floor_hard_hz", 47.0, "system");
  s.freq_floor_soft = optional_or<double>(j, "freq_floor_soft_hz", 48.0, "system");
  s.soft_floor_max_duration = optional_or<double>(j, "soft_floor_max_s", 2.0, "system");
  s.ufls_post_outage_cost =
      optional_or<double>(j, "ufls_post_outage_cost_eur_per_mw", 100000.0, "system");
  auto gens = detail::required<nlohmann::json>(j, "generators", "system");
  if (!gens.is_array()) throw ParseError("system.generators: expected an array");
  for (const auto& g : gens) s.generators.push_back(generator_from_json(g));
  validate(s);
  return s;
}

inline nlohmann::json to_json(const SystemSpec& s) {
  nlohmann::json j;
  j["f0_hz"] = s.nominal_freq_f0;
  j["s_base_mva"] = s.s_base;
  j["d_pu"] = s.load_damping_d;
  j["rocof_crit_hzps"] = s.rocof_crit;
  j["freq_floor_hard_hz"] = s.freq_floor_hard;
  j["freq_floor_soft_hz"] = s.freq_floor_soft;
  j["soft_floor_max_s"] = s.soft_floor_max_duration;
  j["ufls_post_outage_cost_eur_per_mw"] = s.ufls_post_outage_cost;
  auto& gens = j["generators"] = nlohmann::json::array();
  for (const auto& g : s.generators) gens.push_back(to_json(g));
  return j;
}

inline SystemSpec parse_system(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("system: ") + e.what());
  }
  return system_from_json(j);
}

inline SystemSpec load_system(const std::filesystem::path& path) {
  return parse_system(io::read_file(path));
}

inline void save_system(const SystemSpec& s, const std::filesystem::path& path) {
  io::write_file(path, to_json(s).dump(2) + "\n");
}

/// Scenario series from `step,demand_mw,wind_mw,solar_mw` CSV text. Initial
/// status defaults to every unit offline for longer than its down time.
inline ScenarioSpec parse_scenario(std::string_view csv_text, const SystemSpec& sys,
                                   double step_hours = 1.0) {
  auto table = io::parse_csv(csv_text);
  auto c_step = table.column("step");
  auto c_d = table.column("demand_mw");
  auto c_w = table.column("wind_mw");
  auto c_s = table.column("solar_mw");
  ScenarioSpec sc;
  sc.step_hours = step_hours;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    long step = io::parse_int(row[c_step], "step");
    if (step != static_cast<long>(r + 1)) {
      throw ParseError("scenario: steps must be numbered 1..N in order (row " +
                       std::to_string(r + 1) + ")");
    }
    sc.demand.push_back(io::parse_double(row[c_d], "demand_mw"));
    sc.wind.push_back(io::parse_double(row[c_w], "wind_mw"));
    sc.solar.push_back(io::parse_double(row[c_s], "solar_mw"));
  }
  sc.horizon = static_cast<int>(sc.demand.size());
  sc.initial.assign(sys.size(), InitialStatus{});
  validate(sc, sys);
  return sc;
}

/// Applies `unit,online,hours_in_state,p0_mw` rows on top of `sc.initial`.
inline void apply_initial_status(ScenarioSpec& sc, const SystemSpec& sys, std::string_view csv_text) {
  auto table = io::parse_csv(csv_text);
  auto c_unit = table.column("unit");
  auto c_on = table.column("online");
  auto c_h = table.column("hours_in_state");
  auto c_p = table.column("p0_mw");
  for (const auto& row : table.rows) {
    std::size_t i = 0;
    try {
      i = sys.index_of(row[c_unit]);
    } catch (const InvalidArgument& e) {
      throw ValidationError("initial_status.unit", e.what());
    }
    InitialStatus st;
    st.online = io::parse_int(row[c_on], "online") != 0;
    st.hours_in_state = io::parse_double(row[c_h], "hours_in_state");
    st.p0_mw = io::parse_double(row[c_p], "p0_mw");
    sc.initial[i] = st;
  }
  validate(sc, sys);
}

inline ScenarioSpec load_scenario(const std::filesystem::path& scenario_csv, const SystemSpec& sys,
                                  const std::optional<std::filesystem::path>& initial_csv = std::nullopt,
                                  double step_hours = 1.0) {
  auto sc = parse_scenario(io::read_file(scenario_csv), sys, step_hours);
  if (initial_csv) apply_initial_status(sc, sys, io::read_file(*initial_csv));
  return sc;
}

inline std::string scenario_to_csv(const ScenarioSpec& sc) {
  std::string out = "step,demand_mw,wind_mw,solar_mw\n";
  for (int t = 0; t < sc.horizon; ++t) {
    out += std::to_string(t + 1) + "," + io::fmt(sc.demand[t]) + "," + io::fmt(sc.wind[t]) + "," +
           io::fmt(sc.solar[t]) + "\n";
  }
  return out;
}

inline std::string initial_status_to_csv(const ScenarioSpec& sc, const SystemSpec& sys) {
  std::string out = "unit,online,hours_in_state,p0_mw\n";
  for (std::size_t i = 0; i < sys.size(); ++i) {
    const auto& st = sc.initial[i];
    out += sys.generators[i].id + "," + (st.online ? "1" : "0") + "," + io::fmt(st.hours_in_state) +
           "," + io::fmt(st.p0_mw) + "\n";
  }
  return out;
}

}  // namespace fcuc
