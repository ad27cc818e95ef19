#pragma once

// Left-censored (at zero) linear regression fitted by maximum likelihood.
// Latent model: y* = b0 + b1 x + e, e ~ N(0, s^2); observed y = max(0, y*).
// Rewritten as y = max(0, b (x - a)) with a = -b0/b1 and b = b1.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fcuc/errors.hpp"

namespace fcuc::learn {

struct TobitModel {
  double threshold_a = 0.0;  // Hz/s
  double slope_b = 0.0;      // MW per Hz/s
  double noise_sigma = 0.0;  // MW
  double censor_point = 0.0;  // MW
  std::size_t n_points = 0;
  std::size_t n_censored = 0;
  double conservative_fraction = 0.0;  // share of points whose prediction does not exceed the label
  double log_likelihood = 0.0;
  int iterations = 0;
};

/// Censored-linear prediction max(0, b (x - a)).
inline double predict_ufls(const TobitModel& m, double rocof_hzps) {
  if (!(rocof_hzps >= 0.0)) throw InvalidArgument("rocof must be a non-negative number");
  return std::max(0.0, m.slope_b * (rocof_hzps - m.threshold_a));
}

struct TobitOptions {
  int max_iterations = 200;
  double gradient_tol = 1e-8;
  double censor_tol = 1e-9;  // labels at or below this count as censored
};

struct OlsFit {
  double intercept = 0.0;
  double slope = 0.0;
  double residual_sigma = 0.0;
};

inline OlsFit ordinary_least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw InvalidArgument("least squares needs two or more paired values");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  OlsFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - f.intercept - f.slope * x[i];
    rss += r * r;
  }
  f.residual_sigma = n > 2 ? std::sqrt(rss / static_cast<double>(n - 2)) : 0.0;
  return f;
}

namespace detail {

// erfc keeps full relative accuracy until it underflows near z = -37; past
// that point both helpers switch to the asymptotic tail expansion.
constexpr double kTailSwitch = -37.0;

inline double log_norm_cdf(double z) {
  if (z < kTailSwitch) {
    double z2 = z * z;
    double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
    return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
  }
  return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
}

// phi(z) / Phi(z)
inline double inverse_mills(double z) {
  if (z < kTailSwitch) {
    double z2 = z * z;
    return -z / (1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2));
  }
  double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return pdf / (0.5 * std::erfc(-z / std::numbers::sqrt2));
}

struct Evaluation {
  double ll = 0.0;
  std::array<double, 3> grad{};
  std::array<std::array<double, 3>, 3> hess{};
};

// Parameters theta = (b0, b1, log sigma).
inline Evaluation evaluate(const std::array<double, 3>& th, std::span<const double> x,
                           std::span<const double> y, double censor_tol) {
  Evaluation e;
  const double s = std::exp(th[2]);
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi[2] = {1.0, x[i]};
    const double mu = th[0] + th[1] * x[i];
    if (y[i] <= censor_tol) {
      const double c = -mu / s;
      const double lam = inverse_mills(c);
      e.ll += log_norm_cdf(c);
      const double q = lam * (c + lam);
      for (int j = 0; j < 2; ++j) {
        e.grad[j] += -lam * xi[j] / s;
        for (int k = 0; k < 2; ++k) e.hess[j][k] += -q * xi[j] * xi[k] / (s * s);
        e.hess[j][2] += -xi[j] / s * (lam * c * (c + lam) - lam);
      }
      e.grad[2] += -lam * c;
      e.hess[2][2] += lam * c - lam * c * c * (c + lam);
    } else {
      const double r = (y[i] - mu) / s;
      e.ll += -half_log_2pi - th[2] - 0.5 * r * r;
      for (int j = 0; j < 2; ++j) {
        e.grad[j] += r * xi[j] / s;
        for (int k = 0; k < 2; ++k) e.hess[j][k] += -xi[j] * xi[k] / (s * s);
        e.hess[j][2] += -2.0 * r * xi[j] / s;
      }
      e.grad[2] += -1.0 + r * r;
      e.hess[2][2] += -2.0 * r * r;
    }
  }
  e.hess[2][0] = e.hess[0][2];
  e.hess[2][1] = e.hess[1][2];
  return e;
}

// Solves A d = g for symmetric positive definite A via Cholesky; false if A
// is not positive definite.
inline bool solve_spd3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> g,
                       std::array<double, 3>& d) {
  std::array<std::array<double, 3>, 3> l{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = a[i][j];
      for (int k = 0; k < j; ++k) sum -= l[i][k] * l[j][k];
      if (i == j) {
        if (!(sum > 0.0)) return false;
        l[i][i] = std::sqrt(sum);
      } else {
        l[i][j] = sum / l[j][j];
      }
    }
  }
  std::array<double, 3> z{};
  for (int i = 0; i < 3; ++i) {
    double sum = g[i];
    for (int k = 0; k < i; ++k) sum -= l[i][k] * z[k];
    z[i] = sum / l[i][i];
  }
  for (int i = 2; i >= 0; --i) {
    double sum = z[i];
    for (int k = i + 1; k < 3; ++k) sum -= l[k][i] * d[k];
    d[i] = sum / l[i][i];
  }
  return true;
}

inline double max_abs(const std::array<double, 3>& v) {
  return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
}

}  // namespace detail

/// Log-likelihood at (b0, b1, sigma); exposed for tests and diagnostics.
inline double tobit_log_likelihood(double b0, double b1, double sigma, std::span<const double> x,
                                   std::span<const double> y, double censor_tol = 1e-9) {
  return detail::evaluate({b0, b1, std::log(sigma)}, x, y, censor_tol).ll;
}

/// Maximum-likelihood fit. Newton steps on (b0, b1, log sigma) with a
/// backtracking line search; gradient ascent when the Hessian is not
/// negative definite.
inline TobitModel fit_tobit(std::span<const double> x, std::span<const double> y,
                            const TobitOptions& opt = {}) {
  const std::size_t n = x.size();
  if (y.size() != n) throw InvalidArgument("rocof and ufls columns differ in length");
  if (n < 10) throw InvalidArgument("Tobit fit needs at least 10 points, got " + std::to_string(n));
  std::vector<double> xu, yu;
  std::size_t censored = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]) || y[i] < 0.0) {
      throw InvalidArgument("labels must be finite with ufls >= 0");
    }
    if (y[i] <= opt.censor_tol) {
      ++censored;
    } else {
      xu.push_back(x[i]);
      yu.push_back(y[i]);
    }
  }
  if (censored == 0) throw InvalidArgument("no censored labels; a censored model is not identified");
  if (censored == n) throw InvalidArgument("every label is censored; slope is not identified");

  std::array<double, 3> th{};
  if (xu.size() >= 3) {
    auto ols = ordinary_least_squares(xu, yu);
    th = {ols.intercept, ols.slope, std::log(std::max(ols.residual_sigma, 1e-3))};
  }
  if (!(th[1] > 0.0)) {
    double mean = 0.0;
    for (double v : yu) mean += v;
    th = {0.0, 0.0, std::log(std::max(mean / static_cast<double>(yu.size()), 1e-3))};
  }

  auto ev = detail::evaluate(th, x, y, opt.censor_tol);
  int it = 0;
  // With a tiny sigma the gradient carries 1/sigma factors and cannot reach
  // the absolute tolerance; a Newton step below rounding level of every
  // parameter then means the optimum is resolved to working precision.
  bool stalled_at_precision = false;
  for (; it < opt.max_iterations && detail::max_abs(ev.grad) >= opt.gradient_tol; ++it) {
    std::array<std::array<double, 3>, 3> neg{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) neg[i][j] = -ev.hess[i][j];
    std::array<double, 3> dir{};
    bool newton = detail::solve_spd3(neg, ev.grad, dir);
    if (newton) {
      bool negligible = true;
      for (int i = 0; i < 3; ++i) {
        negligible = negligible && std::abs(dir[i]) <= 8.0 * std::numeric_limits<double>::epsilon() *
                                                          std::max(1.0, std::abs(th[i]));
      }
      if (negligible) {
        stalled_at_precision = true;
        break;
      }
    } else {
      double scale = 1.0 / std::max(1.0, detail::max_abs(ev.grad));
      for (int i = 0; i < 3; ++i) dir[i] = ev.grad[i] * scale;
    }
    // the log-sigma curvature vanishes when residuals are far below sigma;
    // cap that component so one step changes sigma by at most a factor e
    if (std::abs(dir[2]) > 1.0) {
      double shrink = 1.0 / std::abs(dir[2]);
      for (auto& v : dir) v *= shrink;
    }
    double step = 1.0;
    bool improved = false;
    for (int h = 0; h < 60; ++h, step *= 0.5) {
      std::array<double, 3> cand{th[0] + step * dir[0], th[1] + step * dir[1], th[2] + step * dir[2]};
      auto ce = detail::evaluate(cand, x, y, opt.censor_tol);
      // near the optimum the likelihood is flat to rounding; a smaller
      // gradient then decides
      bool flat = std::abs(ce.ll - ev.ll) <= 1e-12 * std::max(1.0, std::abs(ev.ll));
      if (std::isfinite(ce.ll) &&
          (ce.ll > ev.ll || (flat && detail::max_abs(ce.grad) < detail::max_abs(ev.grad)))) {
        th = cand;
        ev = ce;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  const double gnorm = detail::max_abs(ev.grad);
  if (!(gnorm < opt.gradient_tol) && !stalled_at_precision) {
    throw ConvergenceError("Tobit fit did not converge after " + std::to_string(it) +
                           " iterations (gradient " + std::to_string(gnorm) + ")");
  }
  if (!(th[1] > 0.0)) throw ConvergenceError("Tobit fit produced a non-positive slope");

  TobitModel m;
  m.slope_b = th[1];
  m.threshold_a = -th[0] / th[1];
  m.noise_sigma = std::exp(th[2]);
  m.n_points = n;
  m.n_censored = censored;
  m.log_likelihood = ev.ll;
  m.iterations = it;
  std::size_t conservative = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::max(0.0, m.slope_b * (x[i] - m.threshold_a)) <= y[i]) ++conservative;
  }
  m.conservative_fraction = static_cast<double>(conservative) / static_cast<double>(n);
  return m;
}

}  // namespace fcuc::learn
