#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fcuc/errors.hpp"
#include "fcuc/io.hpp"
#include "fcuc/learn/tobit.hpp"
#include "fcuc/sfr.hpp"
#include "fcuc/system_model.hpp"

namespace fcuc::learn {

struct DatasetPoint {
  std::size_t point_id = 0;
  std::size_t outage = 0;  // unit index
  double rocof_hzps = 0.0;
  double ufls_mw = 0.0;
};

struct LabelledDataset {
  std::vector<DatasetPoint> points;
  std::size_t collapsed = 0;  // outages where even full shedding fails; excluded
  std::size_t isolated = 0;   // outages of the only online unit; excluded
};

/// For every operating point and every online unit, the initial RoCoF of
/// losing that unit and the optimal shedding found by simulation.
inline LabelledDataset label_dataset(const std::vector<OperatingPoint>& points, const SystemSpec& spec,
                                     const sfr::OptimalUflsOptions& opt = {}) {
  LabelledDataset out;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto& op = points[p];
    for (std::size_t l = 0; l < spec.size(); ++l) {
      if (!op.committed[l]) continue;
      double remaining = system_inertia(op, spec, l);
      if (remaining <= 0.0) {
        ++out.isolated;
        continue;
      }
      double rocof = initial_rocof(op.dispatch[l], remaining, spec.nominal_freq_f0);
      try {
        double shed = sfr::optimal_ufls(op, spec, l, opt);
        out.points.push_back({p, l, rocof, shed});
      } catch (const CollapseError&) {
        ++out.collapsed;
      }
    }
  }
  return out;
}

inline TobitModel fit_tobit(const std::vector<DatasetPoint>& data, const TobitOptions& opt = {}) {
  std::vector<double> x, y;
  x.reserve(data.size());
  y.reserve(data.size());
  for (const auto& d : data) {
    x.push_back(d.rocof_hzps);
    y.push_back(d.ufls_mw);
  }
  return fit_tobit(std::span<const double>(x), std::span<const double>(y), opt);
}

inline double max_label(const std::vector<DatasetPoint>& data) {
  double m = 0.0;
  for (const auto& d : data) m = std::max(m, d.ufls_mw);
  return m;
}

// ---------------------------------------------------------------------------
// Files

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
};

inline std::string dataset_to_csv(const std::vector<DatasetPoint>& data, const SystemSpec& spec,
                                  const Provenance& prov) {
  std::string out = "# config_hash=" + prov.config_hash + " seed=" + std::to_string(prov.seed) + "\n";
  out += "point_id,outage_unit,rocof_hzps,ufls_mw\n";
  for (const auto& d : data) {
    out += std::to_string(d.point_id) + "," + spec.generators[d.outage].id + "," + io::fmt(d.rocof_hzps) +
           "," + io::fmt(d.ufls_mw) + "\n";
  }
  return out;
}

inline std::vector<DatasetPoint> parse_dataset(std::string_view text, const SystemSpec& spec) {
  auto table = io::parse_csv(text);
  auto c_id = table.column("point_id");
  auto c_unit = table.column("outage_unit");
  auto c_rocof = table.column("rocof_hzps");
  auto c_ufls = table.column("ufls_mw");
  std::vector<DatasetPoint> out;
  for (const auto& row : table.rows) {
    DatasetPoint d;
    long id = io::parse_int(row[c_id], "point_id");
    if (id < 0) throw ParseError("point_id must be non-negative");
    d.point_id = static_cast<std::size_t>(id);
    try {
      d.outage = spec.index_of(row[c_unit]);
    } catch (const InvalidArgument&) {
      throw ParseError("unknown outage_unit '" + row[c_unit] + "'");
    }
    d.rocof_hzps = io::parse_double(row[c_rocof], "rocof_hzps");
    d.ufls_mw = io::parse_double(row[c_ufls], "ufls_mw");
    if (d.rocof_hzps < 0.0 || d.ufls_mw < 0.0) throw ParseError("negative rocof or ufls in dataset");
    out.push_back(d);
  }
  return out;
}

inline std::vector<DatasetPoint> load_dataset(const std::filesystem::path& path, const SystemSpec& spec) {
  return parse_dataset(io::read_file(path), spec);
}

/// The fitted estimator plus what the MILP needs to size its constants.
struct TobitArtifact {
  TobitModel model;
  double max_label_mw = 0.0;
  Provenance provenance;
};

inline nlohmann::ordered_json to_json(const TobitArtifact& a) {
  nlohmann::ordered_json j;
  j["a_hzps"] = a.model.threshold_a;
  j["b_mw_per_hzps"] = a.model.slope_b;
  j["sigma_mw"] = a.model.noise_sigma;
  j["n_points"] = a.model.n_points;
  j["n_censored"] = a.model.n_censored;
  j["conservative_fraction"] = a.model.conservative_fraction;
  j["log_likelihood"] = a.model.log_likelihood;
  j["max_label_mw"] = a.max_label_mw;
  j["config_hash"] = a.provenance.config_hash;
  j["seed"] = a.provenance.seed;
  return j;
}

inline TobitArtifact parse_tobit(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("tobit json: ") + e.what());
  }
  TobitArtifact a;
  try {
    a.model.threshold_a = j.at("a_hzps").get<double>();
    a.model.slope_b = j.at("b_mw_per_hzps").get<double>();
    a.model.noise_sigma = j.value("sigma_mw", 0.0);
    a.model.n_points = j.value("n_points", std::size_t{0});
    a.model.n_censored = j.value("n_censored", std::size_t{0});
    a.model.conservative_fraction = j.value("conservative_fraction", 0.0);
    a.model.log_likelihood = j.value("log_likelihood", 0.0);
    a.max_label_mw = j.value("max_label_mw", 0.0);
    a.provenance.config_hash = j.value("config_hash", std::string{});
    a.provenance.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("tobit json: ") + e.what());
  }
  if (!(a.model.slope_b > 0.0)) throw ValidationError("b_mw_per_hzps", "must be positive");
  if (!std::isfinite(a.model.threshold_a)) throw ValidationError("a_hzps", "must be finite");
  return a;
}

inline TobitArtifact load_tobit(const std::filesystem::path& path) { return parse_tobit(io::read_file(path)); }

}  // namespace fcuc::learn
