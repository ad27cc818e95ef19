#pragma once

// System frequency response (SFR) after a generator trip.
//
// Two routes are provided. The closed form aggregates all remaining machines
// into one swing equation with a first-order governor lag and evaluates the
// analytic step response. The multi-machine route integrates the centre of
// inertia swing equation with one limited governor lag per remaining unit
// (fixed-step RK4) and supports load-shedding controllers.
//
// Units: the equivalent model is in per unit on the system base, with the
// frequency deviation in per unit of f0. Traces are reported in Hz.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fcuc/errors.hpp"
#include "fcuc/io.hpp"
#include "fcuc/system_model.hpp"

namespace fcuc::sfr {

struct TraceSample {
  double time_s = 0.0;
  double deviation_hz = 0.0;
};

struct FrequencyTrace {
  double f0 = 50.0;
  double dt = 0.0;
  std::vector<TraceSample> samples;
  double nadir_hz = 0.0;
  double nadir_time_s = 0.0;
  double initial_rocof_hzps = 0.0;

  double min_hz() const { return nadir_hz; }

  double freq_hz(std::size_t k) const { return f0 + samples[k].deviation_hz; }

  /// Cumulative time spent strictly below `threshold_hz`, linear interpolation
  /// between samples.
  double time_below(double threshold_hz) const {
    double total = 0.0;
    for (std::size_t k = 1; k < samples.size(); ++k) {
      double f_a = freq_hz(k - 1) - threshold_hz;
      double f_b = freq_hz(k) - threshold_hz;
      double span = samples[k].time_s - samples[k - 1].time_s;
      if (f_a < 0.0 && f_b < 0.0) {
        total += span;
      } else if (f_a < 0.0 || f_b < 0.0) {
        // one endpoint below: the fraction of the interval under the threshold
        double below = f_a < 0.0 ? f_a : f_b;
        double above = f_a < 0.0 ? f_b : f_a;
        total += span * (-below) / (above - below);
      }
    }
    return total;
  }

  /// Time of the first sample strictly below `threshold_hz`, if any.
  std::optional<std::size_t> first_below(double threshold_hz) const {
    for (std::size_t k = 0; k < samples.size(); ++k) {
      if (freq_hz(k) < threshold_hz) return k;
    }
    return std::nullopt;
  }
};

inline void finalize(FrequencyTrace& tr) {
  tr.nadir_hz = tr.f0;
  tr.nadir_time_s = 0.0;
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& s : tr.samples) {
    if (s.deviation_hz < lowest) {
      lowest = s.deviation_hz;
      tr.nadir_time_s = s.time_s;
    }
  }
  if (!tr.samples.empty()) tr.nadir_hz = tr.f0 + lowest;
}

/// Frequency criteria a post-contingency trace must satisfy.
struct FrequencyCriteria {
  double hard_floor_hz = 47.0;
  double soft_floor_hz = 48.0;
  double soft_max_duration_s = 2.0;

  static FrequencyCriteria from(const SystemSpec& spec) {
    return {spec.freq_floor_hard, spec.freq_floor_soft, spec.soft_floor_max_duration};
  }

  bool met_by(const FrequencyTrace& tr) const {
    return tr.min_hz() >= hard_floor_hz && tr.time_below(soft_floor_hz) <= soft_max_duration_s;
  }
};

inline std::string trace_to_csv(const FrequencyTrace& tr, std::size_t stride = 1) {
  std::string out = "time_s,freq_hz\n";
  stride = std::max<std::size_t>(stride, 1);
  for (std::size_t k = 0; k < tr.samples.size(); k += stride) {
    out += io::fmt(tr.samples[k].time_s) + "," + io::fmt(tr.freq_hz(k)) + "\n";
  }
  return out;
}

inline nlohmann::json trace_summary(const FrequencyTrace& tr, double soft_floor_hz = 48.0) {
  return {{"nadir_hz", tr.nadir_hz},
          {"nadir_time_s", tr.nadir_time_s},
          {"initial_rocof_hzps", tr.initial_rocof_hzps},
          {"time_below_48_s", tr.time_below(soft_floor_hz)},
          {"min_hz", tr.min_hz()}};
}

// ---------------------------------------------------------------------------
// Equivalent single-machine model

struct EquivalentModel {
  double h_eq = 0.0;           // s, system base
  double k_eq = 0.0;           // pu, capacity-weighted over the governed machines
  double t_eq = 0.0;           // s
  double d = 0.0;              // pu, system base
  double gain_base_mva = 0.0;  // base of k_eq
  double s_base = 100.0;
  double f0 = 50.0;

  // Second-order response parameters.
  double a = 0.0;
  double omega_n = 0.0;
  double omega_r = 0.0;
  double zeta = 0.0;
  double phi = 0.0;

  /// Governor gain expressed on the system base.
  double k_sys() const { return k_eq * gain_base_mva / s_base; }

  bool oscillatory() const { return zeta > 0.0 && zeta < 1.0; }

  /// Fills a, omega_n, omega_r, zeta, phi from h_eq, k_eq, t_eq, d.
  ///
  /// Characteristic polynomial of 2h s + d + k/(1 + sT):
  ///   2hT s^2 + (2h + dT) s + (d + k).
  /// The step response 1 + e^{-zeta wn t}(A cos wr t + B sin wr t) has A = -1
  /// (zero at t = 0) and an initial slope wn^2 T, hence B = (wn^2 T - zeta wn)/wr.
  void derive() {
    const double k = k_sys();
    const double two_h_t = 2.0 * h_eq * t_eq;
    omega_n = std::sqrt((d + k) / two_h_t);
    zeta = (2.0 * h_eq + d * t_eq) / (2.0 * two_h_t * omega_n);
    if (zeta < 1.0) {
      omega_r = omega_n * std::sqrt(1.0 - zeta * zeta);
      double b = (omega_n * omega_n * t_eq - zeta * omega_n) / omega_r;
      a = std::sqrt(1.0 + b * b);
      phi = std::atan2(-1.0, b);
    } else {
      omega_r = std::numeric_limits<double>::quiet_NaN();
      a = std::numeric_limits<double>::quiet_NaN();
      phi = std::numeric_limits<double>::quiet_NaN();
    }
  }

  /// Model with every quantity already on the system base.
  static EquivalentModel from_parameters(double h, double k, double t, double d,
                                         double s_base = 100.0, double f0 = 50.0) {
    EquivalentModel m;
    m.h_eq = h;
    m.k_eq = k;
    m.t_eq = t;
    m.d = d;
    m.s_base = s_base;
    m.gain_base_mva = s_base;
    m.f0 = f0;
    m.derive();
    return m;
  }
};

/// Aggregates the units still online after `excluded` trips. Gains are
/// averaged with machine-base weights; governor time constants with gain*base
/// weights. Load damping acts on `op.load_mw`.
inline EquivalentModel build_equivalent(const OperatingPoint& op, const SystemSpec& spec,
                                        std::size_t excluded) {
  if (excluded >= spec.size()) throw InvalidArgument("excluded unit index out of range");
  double hm = 0.0, m = 0.0, km = 0.0, kmt = 0.0, mt = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (i == excluded || !op.committed[i]) continue;
    const auto& g = spec.generators[i];
    hm += g.inertia_mws();
    m += g.m_base;
    km += g.governor_gain_k * g.m_base;
    kmt += g.governor_gain_k * g.m_base * g.governor_time_t;
    mt += g.m_base * g.governor_time_t;
    ++count;
  }
  if (count == 0) throw InvalidArgument("no unit remains online after the outage");
  EquivalentModel eq;
  eq.s_base = spec.s_base;
  eq.f0 = spec.nominal_freq_f0;
  eq.h_eq = hm / spec.s_base;
  eq.gain_base_mva = m;
  eq.k_eq = km / m;
  eq.t_eq = km > 0.0 ? kmt / km : mt / m;
  eq.d = spec.load_damping_d * op.load_mw / spec.s_base;
  eq.derive();
  return eq;
}

/// Time of the frequency nadir of the equivalent model, first positive
/// stationary point of the step response.
inline double nadir_time(const EquivalentModel& model) {
  if (!model.oscillatory()) {
    throw InvalidArgument("nadir time formula needs an oscillatory response (zeta < 1)");
  }
  // tan(wr t) = wr T / (zeta wn T - 1); atan2 keeps the angle in (0, pi) and
  // passes through pi/2 when zeta wn T = 1.
  double angle = std::atan2(model.omega_r * model.t_eq, model.zeta * model.omega_n * model.t_eq - 1.0);
  return angle / model.omega_r;
}

/// Deviation in pu of f0 at time t for a loss of `p_loss_pu` on the system base.
inline double closed_form_deviation_pu(const EquivalentModel& model, double p_loss_pu, double t) {
  double steady = -p_loss_pu / (model.d + model.k_sys());
  return steady * (1.0 + model.a * std::exp(-model.zeta * model.omega_n * t) *
                             std::sin(model.omega_r * t + model.phi));
}

inline FrequencyTrace simulate_closed_form(const EquivalentModel& model, double p_loss_pu,
                                           double duration_s, double dt) {
  if (!(duration_s > 0.0) || !(dt > 0.0)) throw InvalidArgument("duration and dt must be positive");
  if (!model.oscillatory()) {
    throw InvalidArgument("closed form needs an oscillatory response (zeta < 1); integrate numerically");
  }
  FrequencyTrace tr;
  tr.f0 = model.f0;
  tr.dt = dt;
  auto steps = static_cast<std::size_t>(std::llround(duration_s / dt));
  tr.samples.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    double t = static_cast<double>(k) * dt;
    double dev = k == 0 ? 0.0 : closed_form_deviation_pu(model, p_loss_pu, t) * model.f0;
    tr.samples.push_back({t, dev});
  }
  tr.initial_rocof_hzps = p_loss_pu * model.f0 / (2.0 * model.h_eq);
  finalize(tr);
  return tr;
}

// ---------------------------------------------------------------------------
// Multi-machine simulation

struct SimulationOptions {
  double duration_s = 60.0;
  double dt = 0.01;
  /// Limit each governor to [0, p_max - dispatch].
  bool clip_headroom = true;
};

/// Returns the cumulative load shed (MW) in force during the step starting at
/// `time_s`, given the frequency `freq_hz` at that instant. Called once per
/// step in time order.
using ShedController = std::function<double(double time_s, double freq_hz)>;

struct SheddingEvent {
  double time_s = 0.0;
  double shed_mw = 0.0;
};

/// Integrates the COI swing equation with limited first-order governors for
/// the trip of unit `outage`. Shedding is piecewise constant over each step.
inline FrequencyTrace simulate_with_controller(const OperatingPoint& op, const SystemSpec& spec,
                                               std::size_t outage, const ShedController& controller,
                                               const SimulationOptions& opt = {}) {
  if (outage >= spec.size()) throw InvalidArgument("outage unit index out of range");
  if (!(opt.dt > 0.0) || !(opt.duration_s > 0.0)) throw InvalidArgument("duration and dt must be positive");
  const double f0 = spec.nominal_freq_f0;

  struct Governor {
    double gain_mw_per_hz;  // K*M/f0
    double time_s;
    double headroom;
  };
  std::vector<Governor> govs;
  double hm = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (i == outage || !op.committed[i]) continue;
    const auto& g = spec.generators[i];
    hm += g.inertia_mws();
    double headroom = opt.clip_headroom ? std::max(0.0, g.p_max - op.dispatch[i])
                                        : std::numeric_limits<double>::infinity();
    govs.push_back({g.governor_gain_k * g.m_base / f0, g.governor_time_t, headroom});
  }
  if (govs.empty()) throw InvalidArgument("no unit remains online after the outage");

  const double p_loss = op.committed[outage] ? op.dispatch[outage] : 0.0;
  const double inertia = 2.0 * hm / f0;                          // MW*s/Hz
  const double damping = spec.load_damping_d * op.load_mw / f0;  // MW/Hz
  const std::size_t n = govs.size();

  // state: [df, g_1 .. g_n]
  std::vector<double> x(n + 1, 0.0), k1(n + 1), k2(n + 1), k3(n + 1), k4(n + 1), tmp(n + 1);
  double shed = 0.0;
  auto rhs = [&](const std::vector<double>& s, std::vector<double>& out) {
    double response = 0.0;
    for (std::size_t j = 0; j < n; ++j) response += s[j + 1];
    out[0] = (response - p_loss + shed - damping * s[0]) / inertia;
    for (std::size_t j = 0; j < n; ++j) {
      const auto& g = govs[j];
      double d = (-g.gain_mw_per_hz * s[0] - s[j + 1]) / g.time_s;
      if (opt.clip_headroom) {
        if (s[j + 1] >= g.headroom && d > 0.0) d = 0.0;
        if (s[j + 1] <= 0.0 && d < 0.0) d = 0.0;
      }
      out[j + 1] = d;
    }
  };

  FrequencyTrace tr;
  tr.f0 = f0;
  tr.dt = opt.dt;
  auto steps = static_cast<std::size_t>(std::llround(opt.duration_s / opt.dt));
  tr.samples.reserve(steps + 1);
  tr.samples.push_back({0.0, 0.0});
  for (std::size_t k = 0; k < steps; ++k) {
    double t = static_cast<double>(k) * opt.dt;
    shed = controller ? controller(t, f0 + x[0]) : 0.0;
    if (k == 0) {
      rhs(x, k1);
      tr.initial_rocof_hzps = -k1[0];
    }
    const double h = opt.dt;
    rhs(x, k1);
    for (std::size_t j = 0; j <= n; ++j) tmp[j] = x[j] + 0.5 * h * k1[j];
    rhs(tmp, k2);
    for (std::size_t j = 0; j <= n; ++j) tmp[j] = x[j] + 0.5 * h * k2[j];
    rhs(tmp, k3);
    for (std::size_t j = 0; j <= n; ++j) tmp[j] = x[j] + h * k3[j];
    rhs(tmp, k4);
    for (std::size_t j = 0; j <= n; ++j) x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    if (opt.clip_headroom) {
      for (std::size_t j = 0; j < n; ++j) x[j + 1] = std::clamp(x[j + 1], 0.0, govs[j].headroom);
    }
    tr.samples.push_back({static_cast<double>(k + 1) * opt.dt, x[0]});
  }
  finalize(tr);
  return tr;
}

inline ShedController event_controller(std::vector<SheddingEvent> events) {
  std::sort(events.begin(), events.end(),
            [](const SheddingEvent& a, const SheddingEvent& b) { return a.time_s < b.time_s; });
  return [events = std::move(events)](double t, double) {
    double total = 0.0;
    for (const auto& e : events) {
      if (e.time_s <= t + 1e-9) total += e.shed_mw;
    }
    return total;
  };
}

inline FrequencyTrace simulate_multimachine(const OperatingPoint& op, const SystemSpec& spec,
                                            std::size_t outage, std::vector<SheddingEvent> shed_events,
                                            const SimulationOptions& opt = {}) {
  return simulate_with_controller(op, spec, outage, event_controller(std::move(shed_events)), opt);
}

// ---------------------------------------------------------------------------
// Optimal (minimal single-block) under-frequency load shedding

struct OptimalUflsOptions {
  SimulationOptions sim{};
  double tolerance_mw = 0.01;
  int max_iterations = 60;
};

struct OptimalUflsResult {
  double shed_mw = 0.0;
  double shed_time_s = 0.0;  // instant the block is applied (0 when no shed)
  FrequencyTrace trace;      // trace with the returned shed applied
};

/// Smallest single block, applied when frequency first drops below the soft
/// floor, that keeps the trace above the hard floor and below the soft floor
/// for no longer than the allowed (cumulative) duration.
///
/// Throws CollapseError when shedding the entire load still fails.
inline OptimalUflsResult optimal_ufls_detail(const OperatingPoint& op, const SystemSpec& spec,
                                             std::size_t outage, const OptimalUflsOptions& opt = {}) {
  if (outage >= spec.size()) throw InvalidArgument("outage unit index out of range");
  if (!op.committed[outage]) throw InvalidArgument("outage unit is not online");
  const auto criteria = FrequencyCriteria::from(spec);

  OptimalUflsResult res;
  res.trace = simulate_with_controller(op, spec, outage, nullptr, opt.sim);
  if (criteria.met_by(res.trace)) return res;

  auto first = res.trace.first_below(spec.freq_floor_soft);
  // Unreachable in practice: failing criteria implies dipping below the soft floor.
  double shed_time = first ? res.trace.samples[*first].time_s : 0.0;

  auto run = [&](double amount) {
    return simulate_multimachine(op, spec, outage, {{shed_time, amount}}, opt.sim);
  };

  double hi = op.load_mw;
  auto hi_trace = run(hi);
  if (!criteria.met_by(hi_trace)) {
    throw CollapseError("criteria unreachable even when shedding the full load");
  }
  double lo = 0.0;
  for (int it = 0; it < opt.max_iterations && hi - lo > opt.tolerance_mw; ++it) {
    double mid = 0.5 * (lo + hi);
    auto tr = run(mid);
    if (criteria.met_by(tr)) {
      hi = mid;
      hi_trace = std::move(tr);
    } else {
      lo = mid;
    }
  }
  res.shed_mw = hi;
  res.shed_time_s = shed_time;
  res.trace = std::move(hi_trace);
  return res;
}

inline double optimal_ufls(const OperatingPoint& op, const SystemSpec& spec, std::size_t outage,
                           const OptimalUflsOptions& opt = {}) {
  return optimal_ufls_detail(op, spec, outage, opt).shed_mw;
}

// ---------------------------------------------------------------------------
// Conventional step-wise relay schemes

struct UflsSchemeStep {
  double threshold_hz = 49.0;
  double delay_s = 0.1;
  double block = 0.1;               // MW, or fraction of demand when fraction_of_demand
  bool fraction_of_demand = true;

  double block_mw(double demand_mw) const { return fraction_of_demand ? block * demand_mw : block; }
};

inline void validate_scheme(const std::vector<UflsSchemeStep>& scheme) {
  for (std::size_t j = 0; j < scheme.size(); ++j) {
    if (!(scheme[j].delay_s >= 0.0)) throw ValidationError("scheme.delay_s", "must be non-negative");
    if (!(scheme[j].block > 0.0)) throw ValidationError("scheme.block", "must be positive");
    if (j > 0 && !(scheme[j].threshold_hz < scheme[j - 1].threshold_hz)) {
      throw ValidationError("scheme.threshold_hz", "thresholds must be strictly decreasing");
    }
  }
}

/// Six 10 % blocks between 49.0 and 48.0 Hz, 0.1 s definite-time delay.
inline std::vector<UflsSchemeStep> default_conventional_scheme() {
  std::vector<UflsSchemeStep> s;
  for (double thr : {49.0, 48.8, 48.6, 48.4, 48.2, 48.0}) s.push_back({thr, 0.1, 0.1, true});
  return s;
}

/// Definite-time relays: a stage trips once frequency has stayed below its
/// threshold for its delay, and stays tripped.
class RelayController {
 public:
  RelayController(std::vector<UflsSchemeStep> scheme, double demand_mw)
      : scheme_(std::move(scheme)), demand_(demand_mw),
        below_since_(scheme_.size(), -1.0), tripped_(scheme_.size(), false) {}

  double operator()(double t, double freq_hz) {
    double total = 0.0;
    for (std::size_t j = 0; j < scheme_.size(); ++j) {
      if (!tripped_[j]) {
        if (freq_hz < scheme_[j].threshold_hz) {
          if (below_since_[j] < 0.0) below_since_[j] = t;
          if (t - below_since_[j] >= scheme_[j].delay_s - 1e-9) tripped_[j] = true;
        } else {
          below_since_[j] = -1.0;
        }
      }
      if (tripped_[j]) total += scheme_[j].block_mw(demand_);
    }
    shed_ = total;
    return total;
  }

  double shed_mw() const { return shed_; }

 private:
  std::vector<UflsSchemeStep> scheme_;
  double demand_;
  std::vector<double> below_since_;
  std::vector<bool> tripped_;
  double shed_ = 0.0;
};

struct SchemeSimulation {
  FrequencyTrace trace;
  double shed_mw = 0.0;
};

inline SchemeSimulation simulate_scheme(const OperatingPoint& op, const SystemSpec& spec,
                                        std::size_t outage, const std::vector<UflsSchemeStep>& scheme,
                                        const SimulationOptions& opt = {}) {
  validate_scheme(scheme);
  auto relay = std::make_shared<RelayController>(scheme, op.load_mw);
  SchemeSimulation out;
  out.trace = simulate_with_controller(
      op, spec, outage, [relay](double t, double f) { return (*relay)(t, f); }, opt);
  out.shed_mw = relay->shed_mw();
  return out;
}

}  // namespace fcuc::sfr
