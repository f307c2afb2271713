#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "quadosc/model.hpp"

// Test-side oracles, deliberately independent of the library's own
// formulas: derivatives by central differences, roots by sign-scan plus
// bisection on the analytic gradient.
namespace support {

inline double fd_derivative(const std::function<double(double)>& fn, double x,
                            double h = 1e-5) {
  return (fn(x + h) - fn(x - h)) / (2.0 * h);
}

// All sign-change roots of g on [lo, hi]: uniform scan, then bisection.
inline std::vector<double> bracketed_roots(
    const std::function<double(double)>& g, double lo, double hi,
    int scan = 4096) {
  std::vector<double> roots;
  double prev_x = lo;
  double prev_g = g(lo);
  for (int i = 1; i <= scan; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / scan;
    const double gx = g(x);
    if (prev_g == 0.0) {
      roots.push_back(prev_x);
    } else if (gx != 0.0 && std::signbit(gx) != std::signbit(prev_g)) {
      double a = prev_x, b = x, ga = prev_g;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        const double gm = g(m);
        if (gm == 0.0) {
          a = m;
          b = m;
          break;
        }
        if (std::signbit(gm) == std::signbit(ga)) {
          a = m;
          ga = gm;
        } else {
          b = m;
        }
        if (b - a <= 1e-15 * std::max(1.0, std::abs(a))) break;
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_x = x;
    prev_g = gx;
  }
  return roots;
}

// Scan interval covering every possible equilibrium of (kind, p) while
// staying inside the guarded domain.
inline std::pair<double, double> gradient_scan_range(
    quadosc::OscillatorKind kind, const quadosc::Params& p) {
  if (p.lambda < 0.0) {
    const double w = 1.0 / std::sqrt(-p.lambda);
    return {-w * (1.0 - 1e-9), w * (1.0 - 1e-9)};
  }
  const double a2 = p.alpha * p.alpha;
  double bound = 1.0;
  if (kind == quadosc::OscillatorKind::QuesneI && p.beta != 0.0) {
    const double disc = a2 * a2 + 4.0 * p.lambda * p.beta * p.beta;
    bound = (a2 + std::sqrt(std::max(disc, 0.0))) /
            (2.0 * std::abs(p.lambda * p.beta));
  } else if (kind == quadosc::OscillatorKind::QuesneII && p.beta != 0.0) {
    const double disc = a2 * a2 - p.lambda * p.beta * p.beta;
    if (disc > 0.0) bound = std::abs(p.beta) / std::sqrt(disc);
  }
  bound = 1.1 * bound + 1.0;
  return {-bound, bound};
}

// Random parameters on a box where every draw is valid for all three
// families: alpha in [1,2], beta in [0.01,0.35], |lambda| in [0.05,2].
// On this box QuesneI has D = alpha^4 + 4*lambda*beta^2 > 0 and QuesneII
// has alpha^4 - lambda*beta^2 > 0, so equilibria always exist.
enum class LambdaSign { Any, Positive, Negative };

inline quadosc::Params draw_params(std::mt19937_64& rng,
                                   quadosc::OscillatorKind kind,
                                   LambdaSign sign = LambdaSign::Any) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  quadosc::Params p;
  p.alpha = 1.0 + u01(rng);
  p.beta = kind == quadosc::OscillatorKind::ML ? 0.0
                                               : 0.01 + 0.34 * u01(rng);
  const double mag = 0.05 + 1.95 * u01(rng);
  switch (sign) {
    case LambdaSign::Positive: p.lambda = mag; break;
    case LambdaSign::Negative: p.lambda = -mag; break;
    case LambdaSign::Any: p.lambda = u01(rng) < 0.5 ? mag : -mag; break;
  }
  return p;
}

inline bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol;
}

inline bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace support
