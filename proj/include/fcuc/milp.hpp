#pragma once

// Standard unit commitment and the corrective frequency-constrained variant
// as mixed-integer linear programs over the lp::Backend abstraction.
//
// Time steps are 0-based internally and 1-based in variable names. RoCoF is in
// Hz/s, power in MW, inertia in MW*s, so the RoCoF of outage l at step t is
// p[l,t] * f0 / (2 * sum_{i != l} u[i,t] H_i M_i).

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fcuc/errors.hpp"
#include "fcuc/io.hpp"
#include "fcuc/learn/dataset.hpp"
#include "fcuc/learn/tobit.hpp"
#include "fcuc/lp.hpp"
#include "fcuc/system_model.hpp"

namespace fcuc::milp {

enum class Case { I, II, III };

inline const char* to_string(Case c) {
  switch (c) {
    case Case::I: return "I";
    case Case::II: return "II";
    case Case::III: return "III";
  }
  return "?";
}

inline Case parse_case(std::string_view s) {
  if (s == "I" || s == "1") return Case::I;
  if (s == "II" || s == "2") return Case::II;
  if (s == "III" || s == "3") return Case::III;
  throw InvalidArgument("case must be I, II or III, got '" + std::string(s) + "'");
}

struct ModelConfig {
  Case formulation = Case::I;
  // Case III only; unset means the system's ufls_post_outage_cost.
  std::optional<double> ufls_cost_eur_per_mw;
  std::optional<double> big_m1;  // Hz/s, default rocof_crit
  std::optional<double> big_m2;  // MW, default from the training labels
  double mip_gap_target = 1e-4;
  double time_limit_s = 600.0;
};

/// Per-step outage probability from an annual rate.
inline double prob_outage(const GeneratorSpec& g, const ScenarioSpec& sc) {
  if (!(g.outage_rate >= 0.0)) throw InvalidArgument("outage_rate must be >= 0");
  return g.outage_rate * sc.step_hours / 8760.0;
}

/// M2 must cover every label the estimator was trained on and every value
/// b*(rocof - a) can take below the RoCoF limit.
inline double default_big_m2(const learn::TobitModel& tobit, double max_label_mw, double rocof_crit) {
  return std::max({1.2 * max_label_mw, tobit.slope_b * (rocof_crit - tobit.threshold_a), 1e-3});
}

/// Variable indices; -1 marks an absent variable.
struct ModelHandle {
  lp::Model model;
  SystemSpec spec;
  ScenarioSpec scenario;
  ModelConfig config;
  bool corrective = false;
  learn::TobitModel tobit;
  double c_o = 0.0;
  double big_m1 = 0.0;
  double big_m2 = 0.0;

  // [i][t]
  std::vector<std::vector<int>> u, v, w, p, r;
  std::vector<std::vector<std::vector<int>>> seg;  // [i][t][k]
  // [l][t]
  std::vector<std::vector<int>> rocof, z, ufls;
  std::vector<std::vector<std::vector<int>>> y;  // [l][t][i]

  bool has_contingencies() const { return spec.size() >= 2; }
};

namespace detail {

inline std::string safe_name(std::string_view id) {
  std::string out;
  for (char c : id) out += std::isalnum(static_cast<unsigned char>(c)) || c == '_' ? c : '_';
  return out;
}

inline std::string vn(const char* base, const std::string& unit, int t) {
  return std::string(base) + "_" + unit + "_" + std::to_string(t + 1);
}

inline int steps_in_state(const InitialStatus& s, double step_hours) {
  double k = std::floor(s.hours_in_state / step_hours + 1e-9);
  return k > 1e6 ? 1000000 : static_cast<int>(k);
}

inline void check_structure(const SystemSpec& spec, const ScenarioSpec& sc) {
  double cap = 0.0;
  for (const auto& g : spec.generators) cap += g.p_max;
  for (int t = 0; t < sc.horizon; ++t) {
    double nd = sc.net_demand(t);
    if (nd > cap + 1e-9) {
      throw ValidationError("scenario.demand_mw", "net demand " + io::fmt(nd) + " MW at step " +
                                                      std::to_string(t + 1) + " exceeds total capacity " +
                                                      io::fmt(cap) + " MW");
    }
    if (nd < -1e-9) {
      throw ValidationError("scenario.demand_mw", "net demand is negative at step " + std::to_string(t + 1));
    }
  }
}

inline ModelHandle build_base(const SystemSpec& spec, const ScenarioSpec& sc, const ModelConfig& config) {
  validate(spec);
  validate(sc, spec);
  check_structure(spec, sc);
  if (config.big_m1 && !(*config.big_m1 > 0.0)) throw ValidationError("big_m1", "must be > 0");
  if (config.big_m2 && !(*config.big_m2 > 0.0)) throw ValidationError("big_m2", "must be > 0");

  ModelHandle h;
  h.spec = spec;
  h.scenario = sc;
  h.config = config;
  auto& m = h.model;
  const int n = static_cast<int>(spec.size());
  const int T = sc.horizon;
  const double dt = sc.step_hours;
  h.u.assign(n, std::vector<int>(T, -1));
  h.v = h.w = h.p = h.r = h.u;
  h.seg.assign(n, std::vector<std::vector<int>>(T));

  std::vector<std::string> names;
  for (const auto& g : spec.generators) names.push_back(safe_name(g.id));

  for (int i = 0; i < n; ++i) {
    const auto& g = spec.generators[i];
    for (int t = 0; t < T; ++t) {
      h.u[i][t] = m.add_binary(vn("u", names[i], t), g.no_load_cost * dt);
      h.v[i][t] = m.add_var(vn("v", names[i], t), 0.0, 1.0, g.startup_cost);
      h.w[i][t] = m.add_var(vn("w", names[i], t), 0.0, 1.0);
      h.p[i][t] = m.add_var(vn("p", names[i], t), 0.0, g.p_max);
      h.r[i][t] = m.add_var(vn("r", names[i], t), 0.0, g.reserve_cap ? std::min(*g.reserve_cap, g.p_max) : g.p_max);
      double prev = 0.0;
      for (std::size_t k = 0; k < g.cost_curve.size(); ++k) {
        double hi = std::min(g.cost_curve[k].up_to_mw, g.p_max);
        if (hi <= prev) break;
        h.seg[i][t].push_back(m.add_var(vn(("s" + std::to_string(k + 1)).c_str(), names[i], t), 0.0, hi - prev,
                                        g.cost_curve[k].eur_per_mwh * dt));
        prev = hi;
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    const auto& g = spec.generators[i];
    const auto& init = sc.initial[i];
    const double u0 = init.online ? 1.0 : 0.0;
    const double p0 = init.online ? init.p0_mw : 0.0;
    const int held = steps_in_state(init, dt);
    for (int t = 0; t < T; ++t) {
      const std::string sfx = names[i] + "_" + std::to_string(t + 1);
      // u_t - u_{t-1} = v_t - w_t
      std::vector<lp::Term> logic{{h.u[i][t], 1.0}, {h.v[i][t], -1.0}, {h.w[i][t], 1.0}};
      double rhs = 0.0;
      if (t == 0) rhs = u0;
      else logic.push_back({h.u[i][t - 1], -1.0});
      m.add_row("logic_" + sfx, logic, lp::Sense::Eq, rhs);
      m.add_row("onoff_" + sfx, {{h.v[i][t], 1.0}, {h.w[i][t], 1.0}}, lp::Sense::Le, 1.0);

      if (g.min_up_time >= 2) {
        std::vector<lp::Term> row{{h.u[i][t], -1.0}};
        for (int s = std::max(0, t - g.min_up_time + 1); s <= t; ++s) row.push_back({h.v[i][s], 1.0});
        m.add_row("minup_" + sfx, row, lp::Sense::Le, 0.0);
      }
      if (g.min_down_time >= 2) {
        std::vector<lp::Term> row{{h.u[i][t], 1.0}};
        for (int s = std::max(0, t - g.min_down_time + 1); s <= t; ++s) row.push_back({h.w[i][s], 1.0});
        m.add_row("mindown_" + sfx, row, lp::Sense::Le, 1.0);
      }

      m.add_row("pmin_" + sfx, {{h.p[i][t], 1.0}, {h.u[i][t], -g.p_min}}, lp::Sense::Ge, 0.0);
      m.add_row("pmax_" + sfx, {{h.p[i][t], 1.0}, {h.r[i][t], 1.0}, {h.u[i][t], -g.p_max}}, lp::Sense::Le, 0.0);

      std::vector<lp::Term> cost{{h.p[i][t], 1.0}};
      for (int s : h.seg[i][t]) cost.push_back({s, -1.0});
      m.add_row("seg_" + sfx, cost, lp::Sense::Eq, 0.0);

      if (t == 0) {
        m.add_row("rampup_" + sfx, {{h.p[i][t], 1.0}}, lp::Sense::Le, p0 + g.ramp_up);
        m.add_row("rampdn_" + sfx, {{h.p[i][t], -1.0}}, lp::Sense::Le, g.ramp_down - p0);
      } else {
        m.add_row("rampup_" + sfx, {{h.p[i][t], 1.0}, {h.p[i][t - 1], -1.0}}, lp::Sense::Le, g.ramp_up);
        m.add_row("rampdn_" + sfx, {{h.p[i][t - 1], 1.0}, {h.p[i][t], -1.0}}, lp::Sense::Le, g.ramp_down);
      }
    }
    // units that have not yet served their minimum time keep their state
    int forced = init.online ? g.min_up_time - held : g.min_down_time - held;
    for (int t = 0; t < std::min(forced, T); ++t) m.set_bounds(h.u[i][t], u0, u0);
  }

  for (int t = 0; t < T; ++t) {
    std::vector<lp::Term> bal;
    for (int i = 0; i < n; ++i) bal.push_back({h.p[i][t], 1.0});
    m.add_row("balance_" + std::to_string(t + 1), bal, lp::Sense::Eq, sc.net_demand(t));
  }

  if (!h.has_contingencies()) return h;
  const double f0 = spec.nominal_freq_f0;
  for (int l = 0; l < n; ++l) {
    for (int t = 0; t < T; ++t) {
      std::vector<lp::Term> row{{h.p[l][t], -f0 / (2.0 * spec.rocof_crit)}};
      for (int i = 0; i < n; ++i) {
        if (i != l) row.push_back({h.u[i][t], spec.generators[i].inertia_mws()});
      }
      m.add_row("rocof_" + names[l] + "_" + std::to_string(t + 1), row, lp::Sense::Ge, 0.0);
    }
  }
  return h;
}

inline std::vector<lp::Term> reserve_terms(const ModelHandle& h, int l, int t) {
  std::vector<lp::Term> row;
  for (int i = 0; i < static_cast<int>(h.spec.size()); ++i) {
    if (i != l) row.push_back({h.r[i][t], 1.0});
  }
  row.push_back({h.p[l][t], -1.0});
  return row;
}

}  // namespace detail

/// Case I: static reserve covers the loss of any online unit.
inline ModelHandle build_standard_uc(const SystemSpec& spec, const ScenarioSpec& sc, ModelConfig config = {}) {
  config.formulation = Case::I;
  auto h = detail::build_base(spec, sc, config);
  if (!h.has_contingencies()) return h;
  for (int l = 0; l < static_cast<int>(spec.size()); ++l) {
    for (int t = 0; t < sc.horizon; ++t) {
      h.model.add_row("reserve_" + detail::safe_name(spec.generators[l].id) + "_" + std::to_string(t + 1),
                      detail::reserve_terms(h, l, t), lp::Sense::Ge, 0.0);
    }
  }
  return h;
}

/// Cases II and III: reserve may fall short of the outage by the shed the
/// estimator predicts from the post-outage RoCoF.
inline ModelHandle build_corrective_fcuc(const SystemSpec& spec, const ScenarioSpec& sc,
                                         const learn::TobitModel& tobit, double max_label_mw, ModelConfig config) {
  if (config.formulation == Case::I) throw InvalidArgument("corrective model needs case II or III");
  if (!(tobit.slope_b > 0.0)) throw ValidationError("tobit.b_mw_per_hzps", "must be > 0");
  auto h = detail::build_base(spec, sc, config);
  h.corrective = true;
  h.tobit = tobit;
  h.c_o = config.formulation == Case::II ? 0.0 : config.ufls_cost_eur_per_mw.value_or(spec.ufls_post_outage_cost);
  if (!(h.c_o >= 0.0)) throw ValidationError("ufls_post_outage_cost", "must be >= 0");
  h.big_m1 = config.big_m1.value_or(spec.rocof_crit);
  h.big_m2 = config.big_m2.value_or(default_big_m2(tobit, max_label_mw, spec.rocof_crit));
  if (h.big_m1 < spec.rocof_crit) throw ValidationError("big_m1", "must be at least rocof_crit");
  if (h.big_m2 < max_label_mw) throw ValidationError("big_m2", "must be at least the largest training label");
  if (!h.has_contingencies()) return h;

  auto& m = h.model;
  const int n = static_cast<int>(spec.size());
  const int T = sc.horizon;
  const double a = tobit.threshold_a, b = tobit.slope_b, f0 = spec.nominal_freq_f0;
  const double M1 = h.big_m1, M2 = h.big_m2;
  // Smallest constants that leave each row inactive on its off branch, given
  // 0 <= rocof <= M1; M2 itself bounds the estimate.
  const double mr = std::max(0.0, M1 - a);
  const double mu = b * mr;
  const double ml = b * std::max(0.0, a);
  h.rocof.assign(n, std::vector<int>(T, -1));
  h.z = h.ufls = h.rocof;
  h.y.assign(n, std::vector<std::vector<int>>(T, std::vector<int>(n, -1)));

  for (int l = 0; l < n; ++l) {
    const std::string name = detail::safe_name(spec.generators[l].id);
    const double weight = h.c_o * prob_outage(spec.generators[l], sc);
    for (int t = 0; t < T; ++t) {
      const std::string sfx = name + "_" + std::to_string(t + 1);
      int rc = h.rocof[l][t] = m.add_var("rocof_" + sfx, 0.0, M1);
      int z = h.z[l][t] = m.add_binary("z_" + sfx);
      int us = h.ufls[l][t] = m.add_var("ufls_" + sfx, 0.0, M2, weight);

      auto res = detail::reserve_terms(h, l, t);
      res.push_back({us, 1.0});
      m.add_row("reserve_" + sfx, res, lp::Sense::Ge, 0.0);

      // rocof * sum_{i != l} u_i H_i M_i = p_l f0 / 2 with y = u * rocof
      std::vector<lp::Term> def{{h.p[l][t], -1.0}};
      for (int i = 0; i < n; ++i) {
        if (i == l) continue;
        const std::string ysfx = detail::safe_name(spec.generators[i].id) + "_" + sfx;
        int y = h.y[l][t][i] = m.add_var("y_" + ysfx, 0.0, M1);
        def.push_back({y, 2.0 * spec.generators[i].inertia_mws() / f0});
        m.add_row("ya_" + ysfx, {{y, 1.0}, {h.u[i][t], -M1}}, lp::Sense::Le, 0.0);
        m.add_row("yb_" + ysfx, {{y, 1.0}, {rc, -1.0}}, lp::Sense::Le, 0.0);
        m.add_row("yc_" + ysfx, {{y, 1.0}, {rc, -1.0}, {h.u[i][t], -M1}}, lp::Sense::Ge, -M1);
      }
      m.add_row("rocofdef_" + sfx, def, lp::Sense::Eq, 0.0);

      // ufls = max(0, b (rocof - a)) with z selecting the branch
      m.add_row("tobita_" + sfx, {{rc, 1.0}, {z, -mr}}, lp::Sense::Le, a);
      m.add_row("tobitb_" + sfx, {{us, 1.0}, {z, -mu}}, lp::Sense::Le, 0.0);
      m.add_row("tobitc_" + sfx, {{us, 1.0}, {rc, -b}, {z, ml}}, lp::Sense::Le, ml - b * a);
      m.add_row("tobitd_" + sfx, {{us, 1.0}, {rc, -b}, {z, -mu}}, lp::Sense::Ge, -mu - b * a);
    }
  }
  return h;
}

inline ModelHandle build(const SystemSpec& spec, const ScenarioSpec& sc, const learn::TobitModel& tobit,
                         double max_label_mw, const ModelConfig& config) {
  if (config.formulation == Case::I) return build_standard_uc(spec, sc, config);
  return build_corrective_fcuc(spec, sc, tobit, max_label_mw, config);
}

// ---------------------------------------------------------------------------
// Solutions

struct ScheduleSolution {
  Case formulation = Case::I;
  lp::Status status = lp::Status::NoSolution;
  double mip_gap = 0.0;
  double objective_eur = 0.0;
  double operation_cost_eur = 0.0;
  double ufls_cost_eur = 0.0;
  double estimated_ufls_total_mw = 0.0;
  double c_o = 0.0;
  std::string solver;

  // [i][t]
  std::vector<std::vector<int>> u;
  std::vector<std::vector<double>> v, w, p, r;
  // [l][t]; rocof is recomputed from the schedule for every case, ufls and
  // z are model values (zero in Case I)
  std::vector<std::vector<double>> rocof, ufls;
  std::vector<std::vector<int>> z;

  bool has_payload() const { return status == lp::Status::Optimal || status == lp::Status::FeasibleGap; }
};

/// Post-outage RoCoF of every (outage, step) pair; 0 when the unit is off or
/// nothing else is online.
inline std::vector<std::vector<double>> schedule_rocof(const SystemSpec& spec,
                                                        const std::vector<std::vector<int>>& u,
                                                        const std::vector<std::vector<double>>& p) {
  const std::size_t n = spec.size();
  const std::size_t T = n ? u[0].size() : 0;
  std::vector<std::vector<double>> out(n, std::vector<double>(T, 0.0));
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t t = 0; t < T; ++t) {
      if (!u[l][t]) continue;
      double hm = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i != l && u[i][t]) hm += spec.generators[i].inertia_mws();
      }
      if (hm > 0.0) out[l][t] = p[l][t] * spec.nominal_freq_f0 / (2.0 * hm);
    }
  }
  return out;
}

/// Operating cost of a commitment and dispatch, independent of any model.
inline double operation_cost(const SystemSpec& spec, const ScenarioSpec& sc, const std::vector<std::vector<int>>& u,
                             const std::vector<std::vector<double>>& p) {
  double cost = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto& g = spec.generators[i];
    int prev = sc.initial[i].online ? 1 : 0;
    for (int t = 0; t < sc.horizon; ++t) {
      if (u[i][t]) cost += g.hourly_cost(p[i][t]) * sc.step_hours;
      if (u[i][t] && !prev) cost += g.startup_cost;
      prev = u[i][t];
    }
  }
  return cost;
}

inline lp::SolveOptions solve_options(const ModelConfig& c) {
  lp::SolveOptions o;
  o.mip_gap = c.mip_gap_target;
  o.time_limit_s = c.time_limit_s;
  return o;
}

inline ScheduleSolution solve(const ModelHandle& h, const lp::Backend& backend) {
  auto res = backend.solve(h.model, solve_options(h.config));
  ScheduleSolution sol;
  sol.formulation = h.config.formulation;
  sol.status = res.status;
  sol.solver = backend.name();
  sol.c_o = h.c_o;
  if (res.status == lp::Status::NoSolution) {
    throw SolverError("no feasible schedule found within the time limit");
  }
  if (res.status == lp::Status::Unbounded) throw SolverError("model is unbounded");
  if (!sol.has_payload()) return sol;

  const auto& x = res.values;
  const int n = static_cast<int>(h.spec.size());
  const int T = h.scenario.horizon;
  sol.mip_gap = std::isfinite(res.gap) ? res.gap : 0.0;
  sol.objective_eur = res.objective;
  auto grab = [&](const std::vector<std::vector<int>>& idx) {
    std::vector<std::vector<double>> out(idx.size(), std::vector<double>(T, 0.0));
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (int t = 0; t < T; ++t) {
        if (idx[a][t] >= 0) out[a][t] = std::max(0.0, x[idx[a][t]]);
      }
    }
    return out;
  };
  sol.u.assign(n, std::vector<int>(T, 0));
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < T; ++t) sol.u[i][t] = x[h.u[i][t]] > 0.5;
  }
  sol.v = grab(h.v);
  sol.w = grab(h.w);
  sol.p = grab(h.p);
  sol.r = grab(h.r);
  sol.rocof = schedule_rocof(h.spec, sol.u, sol.p);
  sol.ufls.assign(n, std::vector<double>(T, 0.0));
  sol.z.assign(n, std::vector<int>(T, 0));
  if (h.corrective && h.has_contingencies()) {
    sol.ufls = grab(h.ufls);
    for (int l = 0; l < n; ++l) {
      for (int t = 0; t < T; ++t) {
        sol.z[l][t] = x[h.z[l][t]] > 0.5;
        sol.estimated_ufls_total_mw += sol.ufls[l][t];
        sol.ufls_cost_eur += h.c_o * prob_outage(h.spec.generators[l], h.scenario) * sol.ufls[l][t];
      }
    }
  }
  sol.operation_cost_eur = operation_cost(h.spec, h.scenario, sol.u, sol.p);
  return sol;
}

// ---------------------------------------------------------------------------
// schedule.json

inline nlohmann::ordered_json to_json(const ScheduleSolution& s, const SystemSpec& spec,
                                      const learn::Provenance& prov) {
  nlohmann::ordered_json j;
  j["config_hash"] = prov.config_hash;
  j["seed"] = prov.seed;
  j["case"] = to_string(s.formulation);
  j["status"] = lp::to_string(s.status);
  j["solver"] = s.solver;
  j["mip_gap"] = s.mip_gap;
  j["c_o_eur_per_mw"] = s.c_o;
  j["objective_eur"] = s.objective_eur;
  j["operation_cost_eur"] = s.operation_cost_eur;
  j["ufls_cost_eur"] = s.ufls_cost_eur;
  j["estimated_ufls_total_mw"] = s.estimated_ufls_total_mw;
  auto& units = j["units"] = nlohmann::ordered_json::array();
  if (!s.has_payload()) return j;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    nlohmann::ordered_json uj;
    uj["id"] = spec.generators[i].id;
    uj["u"] = s.u[i];
    uj["v"] = s.v[i];
    uj["w"] = s.w[i];
    uj["p_mw"] = s.p[i];
    uj["r_mw"] = s.r[i];
    uj["rocof_hzps"] = s.rocof[i];
    uj["z"] = s.z[i];
    uj["ufls_mw"] = s.ufls[i];
    units.push_back(std::move(uj));
  }
  return j;
}

struct ScheduleArtifact {
  ScheduleSolution solution;
  learn::Provenance provenance;
};

inline ScheduleArtifact parse_schedule(std::string_view text, const SystemSpec& spec) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("schedule: ") + e.what());
  }
  ScheduleArtifact a;
  auto& s = a.solution;
  try {
    a.provenance.config_hash = j.at("config_hash").get<std::string>();
    a.provenance.seed = j.at("seed").get<std::uint64_t>();
    s.formulation = parse_case(j.at("case").get<std::string>());
    std::string status = j.at("status").get<std::string>();
    bool known = false;
    for (auto st : {lp::Status::Optimal, lp::Status::FeasibleGap, lp::Status::Infeasible, lp::Status::Unbounded,
                    lp::Status::NoSolution}) {
      if (status == lp::to_string(st)) {
        s.status = st;
        known = true;
      }
    }
    if (!known) throw ParseError("schedule: unknown status '" + status + "'");
    s.solver = j.at("solver").get<std::string>();
    s.mip_gap = j.at("mip_gap").get<double>();
    s.c_o = j.at("c_o_eur_per_mw").get<double>();
    s.objective_eur = j.at("objective_eur").get<double>();
    s.operation_cost_eur = j.at("operation_cost_eur").get<double>();
    s.ufls_cost_eur = j.at("ufls_cost_eur").get<double>();
    s.estimated_ufls_total_mw = j.at("estimated_ufls_total_mw").get<double>();
    const auto& units = j.at("units");
    if (!s.has_payload()) return a;
    if (units.size() != spec.size()) throw ParseError("schedule: unit count does not match the system");
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const auto& uj = units[i];
      if (uj.at("id").get<std::string>() != spec.generators[i].id) {
        throw ParseError("schedule: unit " + std::to_string(i) + " is not " + spec.generators[i].id);
      }
      s.u.push_back(uj.at("u").get<std::vector<int>>());
      s.v.push_back(uj.at("v").get<std::vector<double>>());
      s.w.push_back(uj.at("w").get<std::vector<double>>());
      s.p.push_back(uj.at("p_mw").get<std::vector<double>>());
      s.r.push_back(uj.at("r_mw").get<std::vector<double>>());
      s.rocof.push_back(uj.at("rocof_hzps").get<std::vector<double>>());
      s.z.push_back(uj.at("z").get<std::vector<int>>());
      s.ufls.push_back(uj.at("ufls_mw").get<std::vector<double>>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("schedule: ") + e.what());
  }
  return a;
}

inline ScheduleArtifact load_schedule(const std::filesystem::path& path, const SystemSpec& spec) {
  if (!std::filesystem::exists(path)) throw MissingInputError("schedule file not found: " + path.string());
  return parse_schedule(io::read_file(path), spec);
}

/// Operating point of step t as seen by the frequency models.
inline OperatingPoint operating_point(const ScheduleSolution& s, const SystemSpec& spec, int t) {
  std::vector<double> dispatch(spec.size(), 0.0);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (s.u[i][t]) dispatch[i] = std::clamp(s.p[i][t], spec.generators[i].p_min, spec.generators[i].p_max);
  }
  auto op = make_operating_point(spec, dispatch);
  // a unit committed at zero output still contributes inertia
  op.system_inertia_mws = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    op.committed[i] = s.u[i][t] != 0;
    if (op.committed[i]) op.system_inertia_mws += spec.generators[i].inertia_mws();
  }
  return op;
}

}  // namespace fcuc::milp
