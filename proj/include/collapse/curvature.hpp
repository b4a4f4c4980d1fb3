#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "collapse/geometry.hpp"

namespace collapse {

// Orthonormal-frame Riemann components for the radial families.
// Independent values (all verified against a coordinate-basis computation):
//   R0101 = R0202 = R1313 = R2323 = R0213 = -F'/(2R)
//   R0123 = R0231 = +F'/(2R)
//   R0312 = -F'/R            (first Bianchi: R0123 + R0231 + R0312 = 0)
//   R0303 = -(F'' + 3F'/R)/2
//   R1212 = 4(1-F)/R^2
struct CurvatureReport {
  double R = 0;
  double F = 0;
  double R0101 = 0, R0123 = 0, R0312 = 0, R0303 = 0, R1212 = 0;
  double k_h = 0;  // holomorphic sectional curvature along grad H: R0303

  // bisectional curvature between the grad-H plane and the S3 orbit plane
  // at orbit angle theta
  double khs3(double theta) const {
    double c2 = std::cos(theta) * std::cos(theta);
    double s2 = std::sin(theta) * std::sin(theta);
    double delta = F * c2 + s2;
    if (delta <= 0) fail(ErrorCode::SingularPoint, "degenerate orbit plane");
    return (R0303 * F * c2 + R0312 * s2) / delta;
  }
};

inline double gauss_curvature(const ProfileMetric& m, double theta) {
  if (m.family != Family::OneDim)
    fail(ErrorCode::WrongChart, "gauss_curvature is OneDim only");
  double S = eval_profile(m, theta, 0);
  if (S == 0) fail(ErrorCode::SingularPoint, "S = 0");
  return -eval_profile(m, theta, 2) / S;
}

namespace detail {

// dF/du for the potential family, from derivatives of Sigma up to order 3.
inline double Fdot_potential(const ProfileMetric& m, double u) {
  double s1 = eval_profile(m, u, 1), s2 = eval_profile(m, u, 2),
         s3 = eval_profile(m, u, 3);
  return ((2 * s2 + u * s3) * s1 - (s1 + u * s2) * s2) / (s1 * s1);
}

// dF/dR for the potential family; dR/du = (S'+uS'')/R.
inline double Fp_R_potential(const ProfileMetric& m, double u) {
  double s1 = eval_profile(m, u, 1), s2 = eval_profile(m, u, 2);
  double R = std::sqrt(2.0 * u * s1);
  return Fdot_potential(m, u) * R / (s1 + u * s2);
}

struct FDerivs {
  double F, Fp, Fpp;
};

inline FDerivs f_derivs_at_R(const ProfileMetric& m, double R) {
  FDerivs d{};
  if (m.family == Family::RadialUN) {
    d.F = eval_profile(m, R, 0);
    d.Fp = eval_profile(m, R, 1);
    d.Fpp = eval_profile(m, R, 2);
    return d;
  }
  if (m.family != Family::PotentialUN)
    fail(ErrorCode::WrongChart, "no radial picture for OneDim");
  ChartPoint rp = radial_point(R);
  double u = native_of_point(m, rp);
  d.F = F_native(m, u);
  d.Fp = Fp_R_potential(m, u);
  // F'' in R needs a 4th Sigma derivative analytically; Richardson
  // differences of the analytic F'(R) keep the order-3 contract.
  auto fp = [&](double r) {
    return Fp_R_potential(m, native_of_point(m, radial_point(r)));
  };
  double h = 1e-4 * std::max(1.0, R);
  double c = (fp(R + h) - fp(R - h)) / (2 * h);
  double fine = (fp(R + h / 2) - fp(R - h / 2)) / h;
  d.Fpp = (4 * fine - c) / 3.0;
  return d;
}

}  // namespace detail

inline CurvatureReport riemann_components(const ProfileMetric& m, double R) {
  if (m.family == Family::OneDim)
    fail(ErrorCode::WrongChart, "riemann_components needs a radial family");
  if (R <= 0)
    fail(ErrorCode::SingularPoint, "R = 0 is a nut; use limits instead");
  auto d = detail::f_derivs_at_R(m, R);
  CurvatureReport r;
  r.R = R;
  r.F = d.F;
  r.R0101 = -d.Fp / (2 * R);
  r.R0123 = d.Fp / (2 * R);
  r.R0312 = -d.Fp / R;
  r.R0303 = -0.5 * (d.Fpp + 3 * d.Fp / R);
  r.R1212 = 4 * (1 - d.F) / (R * R);
  r.k_h = r.R0303;
  return r;
}

// K_H through the dispersion route: -(1/2V) d^2(log V)/dchi^2, with the
// second derivative taken numerically across the chi chart. Independent of
// the frame-component formulas, so the two routes cross-check each other.
//
// Near an end V decays like exp(-c|chi|), so the result is a ratio of two
// exponentially small numbers; the rounding floor of the stencil is ~eps/h^2
// in d2 and gets divided by 2V. h = 0.04 with one Richardson level keeps
// that floor below 1e-8 relative for any point a catalog scan visits while
// the h^6 truncation term stays negligible (log V has O(1) chi-derivatives).
inline double kh_via_dispersion(const ProfileMetric& m, double x_native) {
  double V = V_native(m, x_native);
  if (V <= 0) fail(ErrorCode::ZeroDispersion, "V = 0");
  double chi = chi_of_native(m, x_native);
  auto logV = [&](double c) {
    return std::log(V_native(m, native_of_chi(m, c, x_native)));
  };
  double y0 = logV(chi);
  auto stencil = [&](double s) {
    return (-logV(chi + 2 * s) + 16 * logV(chi + s) - 30 * y0 +
            16 * logV(chi - s) - logV(chi - 2 * s)) /
           (12 * s * s);
  };
  double h = 0.04;
  double d2 = (16 * stencil(h / 2) - stencil(h)) / 15.0;
  return -d2 / (2 * V);
}

inline double holomorphic_sectional_KH(const ProfileMetric& m,
                                       const ChartPoint& p) {
  double x = native_of_point(m, p);
  double V = V_native(m, x);
  if (V <= 0) fail(ErrorCode::ZeroDispersion, "V = 0 at a critical point");
  switch (m.family) {
    case Family::OneDim:
      return gauss_curvature(m, x);
    case Family::RadialUN:
    case Family::PotentialUN:
      return riemann_components(m, R_of_native(m, x)).k_h;
  }
  return 0;
}

// R(U, JU, W, JW) for unit frame vectors U = (a,b,g,d), W = (A,B,C,D).
inline double bisectional(const CurvatureReport& r,
                          const std::array<double, 4>& U,
                          const std::array<double, 4>& W) {
  auto norm2 = [](const std::array<double, 4>& v) {
    return v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3];
  };
  if (std::fabs(norm2(U) - 1) > 1e-9 || std::fabs(norm2(W) - 1) > 1e-9)
    fail(ErrorCode::NotUnit, "bisectional needs unit tangents");
  double a = U[0], b = U[1], g = U[2], d = U[3];
  double A = W[0], B = W[1], C = W[2], D = W[3];
  double t1 = (a * a + d * d) * (A * A + D * D);
  double m1 = a * B + b * A - g * D - d * C;
  double m2 = a * C + b * D + g * A + d * B;
  double t3 = (b * b + g * g) * (B * B + C * C);
  return r.R0303 * t1 + r.R0312 * (m1 * m1 + m2 * m2) + r.R1212 * t3;
}

inline double bisectional_KHS3(const ProfileMetric& m, double R,
                               double theta) {
  return riemann_components(m, R).khs3(theta);
}

struct ScanExtremum {
  double value = 0;
  double at = 0;
};

struct PositivityVerdicts {
  bool collapse_H = false;
  std::optional<bool> reduce_S;         // radial families only
  std::optional<bool> all_bisectional;  // radial families only
  ScanExtremum min_KH;                  // min R0303 (or gauss K for OneDim)
  ScanExtremum min_R0312;
  ScanExtremum min_R1212;
};

// 200 log-spaced interior points plus 10 clustered within 1e-3 of each
// finite endpoint; unbounded domains are capped at the metric's x_cap.
inline std::vector<double> default_scan_grid(const ProfileMetric& m) {
  std::vector<double> g;
  double lo = m.x_lo;
  double hi = std::isfinite(m.x_hi) ? m.x_hi : m.x_cap;
  double span = hi - lo;
  double delta = std::max(1e-6 * span, 1e-9);
  for (int i = 0; i < 200; ++i) {
    double t = static_cast<double>(i) / 199.0;
    g.push_back(lo + delta * std::pow(span / delta, t));
  }
  double c = std::min(1e-3, 0.1 * span);
  for (int k = 1; k <= 10; ++k) {
    g.push_back(lo + c * k / 10.0);
    if (std::isfinite(m.x_hi)) g.push_back(hi - c * k / 10.0);
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  while (!g.empty() && g.back() >= hi) g.pop_back();
  return g;
}

inline PositivityVerdicts positivity_scan(const ProfileMetric& m,
                                          const std::vector<double>& grid) {
  if (grid.empty()) fail(ErrorCode::EmptyGrid, "positivity_scan");
  // Strict sign test. Flat directions produce exact 0.0 through the closed
  // derivative formulas, while genuinely positive profiles may decay to
  // denormals (tanh cylinder tails), so no tolerance band is safe here.
  constexpr double kMargin = 0.0;
  PositivityVerdicts v;
  v.min_KH = {std::numeric_limits<double>::infinity(), 0};
  v.min_R0312 = {std::numeric_limits<double>::infinity(), 0};
  v.min_R1212 = {std::numeric_limits<double>::infinity(), 0};
  if (m.family == Family::OneDim) {
    for (double x : grid) {
      double K = gauss_curvature(m, x);
      if (K < v.min_KH.value) v.min_KH = {K, x};
    }
    v.collapse_H = v.min_KH.value > kMargin;
    return v;
  }
  for (double x : grid) {
    auto r = riemann_components(m, R_of_native(m, x));
    if (r.R0303 < v.min_KH.value) v.min_KH = {r.R0303, x};
    if (r.R0312 < v.min_R0312.value) v.min_R0312 = {r.R0312, x};
    if (r.R1212 < v.min_R1212.value) v.min_R1212 = {r.R1212, x};
  }
  v.collapse_H = v.min_KH.value > kMargin;
  v.reduce_S = v.collapse_H && v.min_R0312.value > kMargin;
  v.all_bisectional = *v.reduce_S && v.min_R1212.value > kMargin;
  return v;
}

}  // namespace collapse
