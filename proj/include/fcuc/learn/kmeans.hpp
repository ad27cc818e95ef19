#pragma once

// Lloyd's k-means with k-means++ seeding over operating points. The feature
// vector of a point is its per-unit dispatch divided by p_max (0 when off).

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "fcuc/errors.hpp"
#include "fcuc/system_model.hpp"

namespace fcuc::learn {

using Feature = std::vector<double>;

inline Feature features(const SystemSpec& spec, const OperatingPoint& op) {
  Feature f(spec.size(), 0.0);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (op.committed[i]) f[i] = op.dispatch[i] / spec.generators[i].p_max;
  }
  return f;
}

inline double squared_distance(const Feature& a, const Feature& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

namespace detail {

// Uniform in [0, 1) from the raw 64-bit stream; identical on every platform,
// unlike std::uniform_real_distribution.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

struct KMeansOptions {
  int restarts = 20;
  int max_iterations = 100;
};

struct KMeansResult {
  std::vector<Feature> means;
  std::vector<std::size_t> assignment;
  std::vector<std::size_t> representative;  // index of the point nearest each mean
  double error = 0.0;                        // sum of squared distances to the means
};

inline KMeansResult kmeans_features(const std::vector<Feature>& data, std::size_t k, std::uint64_t seed,
                                    const KMeansOptions& opt = {}) {
  const std::size_t n = data.size();
  if (k < 1 || k > n) throw InvalidArgument("k must satisfy 1 <= k <= number of points");
  const std::size_t dim = data.front().size();

  KMeansResult best;
  best.error = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart < std::max(1, opt.restarts); ++restart) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(restart));

    // k-means++ seeding
    std::vector<Feature> means;
    std::vector<bool> chosen(n, false);
    std::size_t first = static_cast<std::size_t>(detail::unit_uniform(rng) * static_cast<double>(n));
    means.push_back(data[first]);
    chosen[first] = true;
    std::vector<double> d2(n);
    for (std::size_t p = 0; p < n; ++p) d2[p] = squared_distance(data[p], means[0]);
    while (means.size() < k) {
      double total = 0.0;
      for (std::size_t p = 0; p < n; ++p) total += d2[p];
      std::size_t pick = n;
      if (total > 0.0) {
        double r = detail::unit_uniform(rng) * total;
        double acc = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
          acc += d2[p];
          if (acc > r && d2[p] > 0.0) {
            pick = p;
            break;
          }
        }
        if (pick == n) {
          for (std::size_t p = n; p-- > 0;) {
            if (d2[p] > 0.0) {
              pick = p;
              break;
            }
          }
        }
      } else {
        // all remaining points coincide with a mean; take any unused index
        for (std::size_t p = 0; p < n; ++p) {
          if (!chosen[p]) {
            pick = p;
            break;
          }
        }
      }
      chosen[pick] = true;
      means.push_back(data[pick]);
      for (std::size_t p = 0; p < n; ++p) d2[p] = std::min(d2[p], squared_distance(data[p], means.back()));
    }

    // Lloyd iterations
    std::vector<std::size_t> assign(n, k);
    std::vector<double> dist(n, 0.0);
    for (int it = 0; it < opt.max_iterations; ++it) {
      bool changed = false;
      for (std::size_t p = 0; p < n; ++p) {
        std::size_t arg = 0;
        double dbest = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
          double d = squared_distance(data[p], means[c]);
          if (d < dbest) {
            dbest = d;
            arg = c;
          }
        }
        dist[p] = dbest;
        if (assign[p] != arg) {
          assign[p] = arg;
          changed = true;
        }
      }
      if (!changed) break;
      std::vector<Feature> sums(k, Feature(dim, 0.0));
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t p = 0; p < n; ++p) {
        ++counts[assign[p]];
        for (std::size_t j = 0; j < dim; ++j) sums[assign[p]][j] += data[p][j];
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
          // re-seed an empty cluster at the point farthest from its mean
          std::size_t far = static_cast<std::size_t>(
              std::max_element(dist.begin(), dist.end()) - dist.begin());
          means[c] = data[far];
          dist[far] = 0.0;
          continue;
        }
        for (std::size_t j = 0; j < dim; ++j) means[c][j] = sums[c][j] / static_cast<double>(counts[c]);
      }
    }
    double error = 0.0;
    for (std::size_t p = 0; p < n; ++p) error += squared_distance(data[p], means[assign[p]]);

    if (error < best.error) {
      best.error = error;
      best.means = std::move(means);
      best.assignment = std::move(assign);
    }
  }

  best.representative.assign(k, 0);
  std::vector<double> rep_dist(k, std::numeric_limits<double>::infinity());
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t c = 0; c < k; ++c) {
      double d = squared_distance(data[p], best.means[c]);
      if (d < rep_dist[c]) {
        rep_dist[c] = d;
        best.representative[c] = p;
      }
    }
  }
  return best;
}

struct ClusteredPoints {
  std::vector<OperatingPoint> centroids;  // each snapped to the nearest input point
  double error = 0.0;
};

/// Reduces `points` to `k` representative operating points. A centroid is
/// replaced by the input point nearest to it, so every output is feasible.
inline ClusteredPoints kmeans_reduce(const SystemSpec& spec, const std::vector<OperatingPoint>& points,
                                     std::size_t k, std::uint64_t seed, const KMeansOptions& opt = {}) {
  if (points.empty()) throw InvalidArgument("no points to cluster");
  std::vector<Feature> data;
  data.reserve(points.size());
  for (const auto& p : points) data.push_back(features(spec, p));
  auto res = kmeans_features(data, k, seed, opt);
  ClusteredPoints out;
  out.error = res.error;
  for (auto idx : res.representative) out.centroids.push_back(points[idx]);
  return out;
}

struct KSelection {
  std::size_t k = 1;
  std::vector<double> errors;  // errors[j] is the clustering error with j+1 clusters
};

/// Smallest k whose step to k+1 clusters improves the clustering error by
/// less than `improvement_tol`, measured as a fraction of the single-cluster
/// error. Errors are computed lazily in increasing k; returns k_max when no
/// step qualifies.
inline KSelection select_k_features(const std::vector<Feature>& data, std::size_t k_max,
                                    double improvement_tol, std::uint64_t seed,
                                    const KMeansOptions& opt = {}) {
  if (k_max < 2) throw InvalidArgument("k_max must be at least 2");
  k_max = std::min(k_max, data.size());
  KSelection sel;
  sel.errors.push_back(kmeans_features(data, 1, seed, opt).error);
  for (std::size_t k = 1; k < k_max; ++k) {
    double next = kmeans_features(data, k + 1, seed, opt).error;
    sel.errors.push_back(next);
    double total = sel.errors.front();
    double improvement = total > 0.0 ? (sel.errors[k - 1] - next) / total : 0.0;
    if (improvement < improvement_tol) {
      sel.k = k;
      return sel;
    }
  }
  sel.k = k_max;
  return sel;
}

inline KSelection select_k(const SystemSpec& spec, const std::vector<OperatingPoint>& points,
                           std::size_t k_max, double improvement_tol = 0.001, std::uint64_t seed = 42,
                           const KMeansOptions& opt = {}) {
  std::vector<Feature> data;
  data.reserve(points.size());
  for (const auto& p : points) data.push_back(features(spec, p));
  return select_k_features(data, k_max, improvement_tol, seed, opt);
}

}  // namespace fcuc::learn
