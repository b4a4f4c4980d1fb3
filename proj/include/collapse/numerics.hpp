#pragma once

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "collapse/error.hpp"

namespace collapse {

inline constexpr double kQuadTol = 1e-12;

// Adaptive Gauss-Kronrod on [a,b]; a,b may be +-inf (handled by boost's
// variable transformations).
template <class F>
double integrate(const F& f, double a, double b, double abs_tol = kQuadTol) {
  if (a == b) return 0.0;
  double err = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, 15, abs_tol, &err);
  if (!std::isfinite(v))
    fail(ErrorCode::QuadratureFailure, "integral not finite");
  return v;
}

// Bracketing root finder (TOMS 748). Requires f(a), f(b) of opposite sign.
template <class F>
double find_root(const F& f, double a, double b, double tol = 1e-14) {
  double fa = f(a), fb = f(b);
  if (fa == 0) return a;
  if (fb == 0) return b;
  if ((fa > 0) == (fb > 0))
    fail(ErrorCode::NonInvertible, "root not bracketed");
  auto stop = [tol](double x, double y) { return std::fabs(x - y) < tol; };
  std::uintmax_t it = 200;
  auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, stop, it);
  return 0.5 * (r.first + r.second);
}

// Newton with bracket fallback: g monotone on [lo,hi], dg its derivative.
template <class G, class DG>
double newton_solve(const G& g, const DG& dg, double x0, double lo, double hi,
                    double tol = 1e-13) {
  double x = std::clamp(x0, lo, hi);
  for (int i = 0; i < 60; ++i) {
    double gx = g(x);
    double d = dg(x);
    if (d == 0) break;
    double step = gx / d;
    double xn = x - step;
    if (!(xn > lo && xn < hi)) break;  // leave Newton, bisect instead
    if (std::fabs(step) < tol * std::max(1.0, std::fabs(x))) return xn;
    x = xn;
  }
  return find_root(g, lo, hi, tol);
}

// Central finite differences with one Richardson step. f must be smooth.
template <class F>
double fd_derivative(const F& f, double x, int order, double h) {
  auto d = [&](double hh) -> double {
    switch (order) {
      case 1: return (f(x + hh) - f(x - hh)) / (2 * hh);
      case 2: return (f(x + hh) - 2 * f(x) + f(x - hh)) / (hh * hh);
      case 3:
        return (f(x + 2 * hh) - 2 * f(x + hh) + 2 * f(x - hh) -
                f(x - 2 * hh)) /
               (2 * hh * hh * hh);
      default:
        fail(ErrorCode::DerivativeUnavailable, "fd order > 3");
    }
  };
  double c = d(h), fine = d(h / 2);
  return (4.0 * fine - c) / 3.0;  // cancels the O(h^2) term
}

// Golden-section style minimizer (boost Brent); returns argmin.
template <class F>
double minimize(const F& f, double a, double b) {
  auto r = boost::math::tools::brent_find_minima(f, a, b, 40);
  return r.first;
}

struct RegressionResult {
  double slope = 0;       // through-origin OLS slope
  double se = 0;          // heteroscedasticity-robust standard error
  std::size_t n = 0;
};

// y ~ slope * x through the origin; HC0 robust SE.
class OriginRegression {
 public:
  void add(double x, double y) {
    sxx_ += x * x;
    sxy_ += x * y;
    xs_.push_back(x);
    ys_.push_back(y);
  }
  RegressionResult finish() const {
    RegressionResult r;
    r.n = xs_.size();
    if (r.n < 2 || sxx_ == 0) {
      fail(ErrorCode::InsufficientData, "regression needs >= 2 points");
    }
    r.slope = sxy_ / sxx_;
    long double s = 0;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      long double res = ys_[i] - r.slope * xs_[i];
      s += res * res * xs_[i] * xs_[i];
    }
    r.se = static_cast<double>(std::sqrt(s) / sxx_);
    return r;
  }

 private:
  long double sxx_ = 0, sxy_ = 0;
  std::vector<double> xs_, ys_;
};

struct MeanVar {
  double mean = 0, var = 0;
  std::size_t n = 0;
  double se() const { return n > 1 ? std::sqrt(var / n) : 0.0; }
};

// Single-pass Welford accumulator; deterministic for a fixed insertion order.
class Accumulator {
 public:
  void add(double x) {
    ++n_;
    double d = x - mean_;
    mean_ += d / n_;
    m2_ += d * (x - mean_);
  }
  MeanVar finish() const {
    MeanVar r;
    r.n = n_;
    r.mean = mean_;
    r.var = n_ > 1 ? m2_ / (n_ - 1) : 0.0;
    return r;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0, m2_ = 0;
};

}  // namespace collapse
