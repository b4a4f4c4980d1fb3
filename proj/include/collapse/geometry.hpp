#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "collapse/error.hpp"
#include "collapse/numerics.hpp"

namespace collapse {

enum class Family { OneDim, RadialUN, PotentialUN };
enum class Chart { Theta, Chi, RadialFrame, Complex };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::OneDim: return "one_dim";
    case Family::RadialUN: return "radial_un";
    case Family::PotentialUN: return "potential_un";
  }
  return "?";
}

// One real profile function with analytic derivatives up to analytic_order
// (<= 3 per the public contract). Catalog entries may attach closed-form
// chart maps and H so simulation steps stay O(1); everything falls back to
// quadrature + Newton otherwise.
struct Profile {
  std::function<double(double, int)> f;
  int analytic_order = 3;
  std::function<double(double)> chi_of_x;  // OneDim / RadialUN only
  std::function<double(double)> x_of_chi;
  std::function<double(double)> H_of_x;  // OneDim only (else closed forms)
};

// Coordinate conventions per family:
//   OneDim      Theta:{theta,phi}          Chi:{chi,phi}
//   RadialUN    RadialFrame:{R,theta,phi,psi}  Chi:{chi,theta,phi,psi}
//   PotentialUN Complex: z[0..N-1]         Chi:{chi,theta,phi,psi}
//               RadialFrame:{R,theta,phi,psi}
struct ChartPoint {
  Chart chart = Chart::Theta;
  std::array<double, 4> x{};
  std::vector<std::complex<double>> z;
  bool at_boundary = false;
};

inline ChartPoint theta_point(double theta, double phi = 0) {
  return {Chart::Theta, {theta, phi, 0, 0}, {}, false};
}
inline ChartPoint chi_point(double chi, double a1 = 0, double a2 = 0,
                            double a3 = 0) {
  return {Chart::Chi, {chi, a1, a2, a3}, {}, false};
}
inline ChartPoint radial_point(double R, double theta = 0, double phi = 0,
                               double psi = 0) {
  return {Chart::RadialFrame, {R, theta, phi, psi}, {}, false};
}
inline ChartPoint complex_point(std::vector<std::complex<double>> z) {
  return {Chart::Complex, {0, 0, 0, 0}, std::move(z), false};
}

// Which end of the chi line a trajectory got absorbed at.
enum class EndSide { Lower, Upper };

struct ProfileMetric {
  Family family = Family::OneDim;
  int N = 1;  // complex dimension of the state manifold
  double x_lo = 0, x_hi = 0;
  Profile profile;
  std::string name;
  double h_offset = 0;  // OneDim: value of H at x_lo
  // construction parameters, kept for serialization round-trips
  std::vector<std::pair<std::string, double>> params;

  // Precomputed by make_metric (metrics are immutable afterwards).
  double x_peak = std::numeric_limits<double>::quiet_NaN();  // interior V max
  double v_max = 0;
  double x_anchor = 0;   // chi(x_anchor) = 0 for OneDim / RadialUN
  double chi_split = 0;  // absorption side boundary in chi
  double x_cap = 0;      // finite stand-in for an unbounded upper end
  double R_sup = 0;      // PotentialUN: sup of R over the domain
};

namespace detail {

inline double domain_eps(const ProfileMetric& m) {
  double s = std::max(1.0, std::fabs(m.x_lo));
  if (std::isfinite(m.x_hi)) s = std::max(s, std::fabs(m.x_hi));
  return 1e-9 * s;
}

}  // namespace detail

inline bool in_domain(const ProfileMetric& m, double x) {
  double e = detail::domain_eps(m);
  if (x < m.x_lo - e) return false;
  if (std::isfinite(m.x_hi) && x > m.x_hi + e) return false;
  return true;
}

inline double eval_profile(const ProfileMetric& m, double x, int order) {
  if (order < 0 || order > 3)
    fail(ErrorCode::DerivativeUnavailable,
         "profile derivatives available to order 3 only");
  if (!in_domain(m, x)) fail(ErrorCode::OutOfDomain, "profile argument");
  if (order <= m.profile.analytic_order) return m.profile.f(x, order);
  // Central differences + Richardson for profiles without closed derivatives.
  // The step grows with the order: rounding noise scales like eps / h^order,
  // so a first-derivative step would drown the third derivative entirely.
  auto f0 = [&](double t) { return m.profile.f(t, 0); };
  double h = (order == 1 ? 1e-5 : order == 2 ? 5e-4 : 5e-3) *
             std::max(1.0, std::fabs(x));
  return fd_derivative(f0, x, order, h);
}

// ---- per-family scalar quantities in the native coordinate ----
// native coordinate: theta (OneDim), R (RadialUN), u (PotentialUN)

inline double V_native(const ProfileMetric& m, double x) {
  switch (m.family) {
    case Family::OneDim: {
      double S = eval_profile(m, x, 0);
      return S * S;
    }
    case Family::RadialUN: {
      double F = eval_profile(m, x, 0);
      return x * x * F / 4.0;
    }
    case Family::PotentialUN: {
      double s1 = eval_profile(m, x, 1), s2 = eval_profile(m, x, 2);
      return 2.0 * x * (s1 + x * s2);
    }
  }
  return 0;
}

inline double H_native(const ProfileMetric& m, double x) {
  switch (m.family) {
    case Family::OneDim: {
      if (m.profile.H_of_x) return m.profile.H_of_x(x);
      auto S = [&](double t) { return eval_profile(m, t, 0); };
      return m.h_offset - integrate(S, m.x_lo, x);
    }
    case Family::RadialUN:
      return -x * x / 4.0;
    case Family::PotentialUN:
      return -x * eval_profile(m, x, 1);
  }
  return 0;
}

// F and Q of the radial picture. F is the profile itself for RadialUN and
// (S'+uS'')/S' for PotentialUN; OneDim has no radial picture.
inline double F_native(const ProfileMetric& m, double x) {
  switch (m.family) {
    case Family::RadialUN:
      return eval_profile(m, x, 0);
    case Family::PotentialUN: {
      double s1 = eval_profile(m, x, 1), s2 = eval_profile(m, x, 2);
      if (s1 <= 0) fail(ErrorCode::DegenerateMetric, "Sigma' <= 0");
      return (s1 + x * s2) / s1;
    }
    default:
      fail(ErrorCode::WrongChart, "no radial picture for OneDim");
  }
}

inline double Q_native(const ProfileMetric& m, double u) {
  double s1 = eval_profile(m, u, 1), s2 = eval_profile(m, u, 2);
  double d = s1 + u * s2;
  if (d == 0) fail(ErrorCode::DegenerateMetric, "Sigma' + u Sigma'' = 0");
  return s2 / d;
}

inline double dlogV_dchi_native(const ProfileMetric& m, double x) {
  switch (m.family) {
    case Family::OneDim:
      return 2.0 * eval_profile(m, x, 1);
    case Family::RadialUN: {
      double F = eval_profile(m, x, 0), Fp = eval_profile(m, x, 1);
      return F + x * Fp / 2.0;
    }
    case Family::PotentialUN: {
      double s1 = eval_profile(m, x, 1), s2 = eval_profile(m, x, 2),
             s3 = eval_profile(m, x, 3);
      double V = 2.0 * x * (s1 + x * s2);
      if (V == 0) fail(ErrorCode::ZeroDispersion, "V = 0");
      double Vd = 2.0 * s1 + 6.0 * x * s2 + 2.0 * x * x * s3;
      return 2.0 * x * Vd / V;
    }
  }
  return 0;
}

// ---- chi chart ----

inline double chi_of_native(const ProfileMetric& m, double x) {
  switch (m.family) {
    case Family::PotentialUN:
      if (x <= 0) fail(ErrorCode::SingularPoint, "u = 0 maps to chi = -inf");
      return 0.5 * std::log(x);
    case Family::OneDim: {
      if (m.profile.chi_of_x) return m.profile.chi_of_x(x);
      auto g = [&](double t) { return 1.0 / eval_profile(m, t, 0); };
      return integrate(g, m.x_anchor, x);
    }
    case Family::RadialUN: {
      if (m.profile.chi_of_x) return m.profile.chi_of_x(x);
      auto g = [&](double t) {
        return 2.0 / (t * eval_profile(m, t, 0));
      };
      return integrate(g, m.x_anchor, x);
    }
  }
  return 0;
}

inline double native_of_chi(const ProfileMetric& m, double chi,
                            double warm_start =
                                std::numeric_limits<double>::quiet_NaN()) {
  switch (m.family) {
    case Family::PotentialUN:
      return std::exp(2.0 * chi);
    default:
      break;
  }
  if (m.profile.x_of_chi) return m.profile.x_of_chi(chi);
  double eps = detail::domain_eps(m);
  double lo = m.x_lo + eps;
  double hi = (std::isfinite(m.x_hi) ? m.x_hi - eps : m.x_cap);
  auto g = [&](double x) { return chi_of_native(m, x) - chi; };
  auto dg = [&](double x) {
    return m.family == Family::OneDim
               ? 1.0 / eval_profile(m, x, 0)
               : 2.0 / (x * eval_profile(m, x, 0));
  };
  if (!std::isfinite(m.x_hi)) {
    while (g(hi) < 0) {  // chi(x) is increasing; widen until bracketed
      hi *= 2;
      if (hi > 1e18) fail(ErrorCode::NonInvertible, "chi out of range");
    }
  }
  double x0 = std::isfinite(warm_start) ? warm_start : m.x_anchor;
  return newton_solve(g, dg, x0, lo, hi);
}

inline double native_of_point(const ProfileMetric& m, const ChartPoint& p) {
  switch (p.chart) {
    case Chart::Theta:
      if (m.family != Family::OneDim) fail(ErrorCode::WrongChart, "Theta");
      if (!in_domain(m, p.x[0])) fail(ErrorCode::OutOfDomain, "theta");
      return p.x[0];
    case Chart::Chi:
      return native_of_chi(m, p.x[0]);
    case Chart::RadialFrame: {
      double R = p.x[0];
      if (m.family == Family::RadialUN) {
        if (!in_domain(m, R)) fail(ErrorCode::OutOfDomain, "R");
        return R;
      }
      if (m.family == Family::PotentialUN) {
        // invert R^2 = 2 u Sigma', monotone since (R^2)' = 2(S'+uS'') > 0
        double R2 = R * R;
        auto g = [&](double u) {
          return 2.0 * u * eval_profile(m, u, 1) - R2;
        };
        auto dg = [&](double u) {
          return 2.0 * (eval_profile(m, u, 1) + u * eval_profile(m, u, 2));
        };
        double hi = std::isfinite(m.x_hi) ? m.x_hi : m.x_cap;
        while (g(hi) < 0) {
          hi *= 2;
          if (hi > 1e18) fail(ErrorCode::NonInvertible, "R out of range");
        }
        return newton_solve(g, dg, R2 / (2.0 * eval_profile(m, 1.0, 1)), 0.0,
                            hi);
      }
      fail(ErrorCode::WrongChart, "RadialFrame");
    }
    case Chart::Complex: {
      if (m.family != Family::PotentialUN) fail(ErrorCode::WrongChart, "Complex");
      if (static_cast<int>(p.z.size()) != m.N)
        fail(ErrorCode::DimensionMismatch, "z size != N");
      double u = 0;
      for (auto& c : p.z) u += std::norm(c);
      return u;
    }
  }
  fail(ErrorCode::WrongChart, "unknown chart");
}

inline double R_of_native(const ProfileMetric& m, double x) {
  switch (m.family) {
    case Family::RadialUN:
      return x;
    case Family::PotentialUN:
      return std::sqrt(2.0 * x * eval_profile(m, x, 1));
    default:
      fail(ErrorCode::WrongChart, "no radial picture for OneDim");
  }
}

inline ChartPoint chart_convert(const ProfileMetric& m, const ChartPoint& p,
                                Chart target) {
  if (p.chart == target) return p;
  double x = native_of_point(m, p);  // validates chart/family combination
  ChartPoint q;
  q.chart = target;
  // angles ride along where both charts carry them
  switch (target) {
    case Chart::Theta:
      if (m.family != Family::OneDim) fail(ErrorCode::WrongChart, "Theta");
      q.x = {x, p.x[1], 0, 0};
      return q;
    case Chart::Chi: {
      double e = detail::domain_eps(m);
      bool at_end = std::fabs(x - m.x_lo) < e ||
                    (std::isfinite(m.x_hi) && std::fabs(x - m.x_hi) < e);
      if (m.family != Family::PotentialUN && at_end && V_native(m, x) == 0)
        fail(ErrorCode::SingularPoint, "chi diverges at this endpoint");
      q.x = {chi_of_native(m, x), p.x[1], p.x[2], p.x[3]};
      return q;
    }
    case Chart::RadialFrame:
      q.x = {R_of_native(m, x), p.x[1], p.x[2], p.x[3]};
      return q;
    case Chart::Complex: {
      if (m.family != Family::PotentialUN) fail(ErrorCode::WrongChart, "Complex");
      // direction information is not carried by the real charts; the
      // conversion lands on the first-axis ray by convention
      q.z.assign(m.N, {0, 0});
      q.z[0] = std::sqrt(x);
      return q;
    }
  }
  fail(ErrorCode::WrongChart, "unknown chart");
}

struct MetricComponents {
  std::vector<double> coeffs;
  std::optional<double> F, Q;
};

inline MetricComponents metric_components(const ProfileMetric& m,
                                          const ChartPoint& p) {
  MetricComponents out;
  double x = native_of_point(m, p);
  double e = detail::domain_eps(m);
  bool interior = x > m.x_lo + e && (!std::isfinite(m.x_hi) || x < m.x_hi - e);
  auto check = [&](double c) {
    if (std::isnan(c) || (interior && c <= 0))
      fail(ErrorCode::DegenerateMetric, "nonpositive metric coefficient");
    return c;
  };
  switch (m.family) {
    case Family::OneDim: {
      double V = V_native(m, x);
      if (p.chart == Chart::Chi) {
        out.coeffs = {check(V), check(V)};  // ds^2 = V (dchi^2 + dphi^2)
      } else {
        out.coeffs = {1.0, check(V)};
      }
      return out;
    }
    case Family::RadialUN: {
      double F = eval_profile(m, x, 0);
      out.coeffs = {check(1.0 / F), check(x * x / 4.0),
                    check(x * x * F / 4.0)};
      out.F = F;
      return out;
    }
    case Family::PotentialUN: {
      double s1 = eval_profile(m, x, 1), s2 = eval_profile(m, x, 2);
      if (interior && (s1 <= 0 || s1 + x * s2 <= 0))
        fail(ErrorCode::DegenerateMetric, "Sigma conditions violated");
      double F = (s1 + x * s2) / s1;
      double R2 = 2.0 * x * s1;
      out.coeffs = {check(1.0 / F), check(R2 / 4.0), check(R2 * F / 4.0)};
      out.F = F;
      out.Q = s2 / (s1 + x * s2);
      return out;
    }
  }
  return out;
}

// Factory: validates and precomputes the immutable caches.
inline ProfileMetric make_metric(Family family, int N, double x_lo,
                                 double x_hi, Profile profile,
                                 std::string name, double h_offset = 0) {
  ProfileMetric m;
  m.family = family;
  m.N = N;
  m.x_lo = x_lo;
  m.x_hi = x_hi;
  m.profile = std::move(profile);
  m.name = std::move(name);
  m.h_offset = h_offset;
  if (!(x_lo < x_hi)) fail(ErrorCode::BadParams, "empty domain");
  if (!std::isfinite(x_lo)) fail(ErrorCode::BadParams, "x_lo must be finite");
  if (family != Family::OneDim && x_lo < 0)
    fail(ErrorCode::BadParams, "radial coordinate must be nonnegative");
  if (family == Family::OneDim) m.N = 1;
  if (family != Family::OneDim && N < 2)
    fail(ErrorCode::BadParams, "N >= 2 required");

  m.x_cap = std::isfinite(x_hi) ? x_hi
                                : x_lo + 50.0 * std::max(1.0, std::fabs(x_lo));

  // Interior maximum of V, if any; used for chi anchoring and side labels.
  double eps = detail::domain_eps(m);
  double a = x_lo + eps, b = (std::isfinite(x_hi) ? x_hi - eps : m.x_cap);
  auto negV = [&](double t) { return -V_native(m, t); };
  double xp = minimize(negV, a, b);
  double margin = 1e-6 * (b - a);
  bool interior_peak = xp > a + margin && xp < b - margin;
  if (interior_peak) {
    // polish the Brent argmax: dlogV/dchi crosses zero there, and the chi
    // gauge anchored at the peak should agree with closed chi maps to
    // machine precision, not Brent's sqrt(eps)
    auto W = [&](double t) { return dlogV_dchi_native(m, t); };
    double pl = std::max(a, xp - 1e-2 * (b - a));
    double ph = std::min(b, xp + 1e-2 * (b - a));
    if (W(pl) > 0 && W(ph) < 0) xp = find_root(W, pl, ph);
    m.x_peak = xp;
    m.v_max = V_native(m, xp);
  } else {
    m.x_peak = std::numeric_limits<double>::quiet_NaN();
    m.v_max = std::max(V_native(m, a + (b - a) * 0.5),
                       std::max(V_native(m, a), V_native(m, b)));
  }

  if (family == Family::PotentialUN) {
    m.x_anchor = 1.0;  // chi = (1/2) log u is fixed, no anchor freedom
  } else if (interior_peak) {
    m.x_anchor = xp;
  } else if (std::isfinite(x_hi)) {
    m.x_anchor = 0.5 * (x_lo + x_hi);
  } else {
    m.x_anchor = x_lo + 1.0;
  }

  if (interior_peak) {
    m.chi_split = chi_of_native(m, xp);
  } else {
    // monotone V: tolerance absorption can only happen on the V -> 0 side
    double v_lo = V_native(m, a), v_hi = V_native(m, b);
    m.chi_split = v_lo < v_hi ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
  }

  if (family == Family::PotentialUN) {
    double u_probe = std::isfinite(x_hi) ? x_hi : 1e12;
    m.R_sup = R_of_native(m, u_probe);
  }
  return m;
}

}  // namespace collapse
