#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace sdemi {

inline double normal_logpdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(6.283185307179586476925286766559 * var) + d * d / var);
}

inline double logsumexp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Trapezoid over uniformly spaced samples.
inline double trapezoid(std::span<const double> values, double dt) {
  if (values.size() < 2) return 0.0;
  double s = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
  return s * dt;
}

// Trapezoid over a strictly increasing abscissa set (used on r grids).
inline double trapezoid_nonuniform(std::span<const double> xs, std::span<const double> ys) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    s += 0.5 * (xs[i + 1] - xs[i]) * (ys[i] + ys[i + 1]);
  return s;
}

inline double mean_of(double sum, long n) { return n > 0 ? sum / n : 0.0; }

// Standard error of the sample mean from raw first and second moments.
inline double se_of(double sum, double sumsq, long n) {
  if (n < 2) return 0.0;
  const double var = std::max(0.0, (sumsq - sum * sum / n) / (n - 1));
  return std::sqrt(var / n);
}

}  // namespace sdemi
