#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "collapse/curvature.hpp"
#include "collapse/geometry.hpp"
#include "collapse/numerics.hpp"

namespace collapse {

enum class EndKind { Nut, Bolt, ConicalDefect, InfiniteEnd, Degenerate };

inline std::string to_string(EndKind k) {
  switch (k) {
    case EndKind::Nut: return "Nut";
    case EndKind::Bolt: return "Bolt";
    case EndKind::ConicalDefect: return "ConicalDefect";
    case EndKind::InfiniteEnd: return "InfiniteEnd";
    case EndKind::Degenerate: return "Degenerate";
  }
  return "?";
}

struct EndpointClass {
  EndKind kind = EndKind::Degenerate;
  double location = 0;  // native coordinate; +inf for unbounded ends
  int n = 0;            // Bolt order
  double boundary_slope = 0;  // R0 F'(R0) at a bolt, S'(theta0) at a pole
  double deficit = 0;         // ConicalDefect angle deficit
  std::optional<double> drift_limit;  // probe value at an infinite end
  std::string detail;
};

enum class CaseLabel {
  Case1_NutBolt,
  Case2_TwoBolts,
  Case3_SemiInfiniteNut,
  Case4_SemiInfiniteBolt,
  OneDimSphere,
  OneDimPlane,
  Incomplete,
};

inline std::string to_string(CaseLabel c) {
  switch (c) {
    case CaseLabel::Case1_NutBolt: return "Case1_NutBolt";
    case CaseLabel::Case2_TwoBolts: return "Case2_TwoBolts";
    case CaseLabel::Case3_SemiInfiniteNut: return "Case3_SemiInfiniteNut";
    case CaseLabel::Case4_SemiInfiniteBolt: return "Case4_SemiInfiniteBolt";
    case CaseLabel::OneDimSphere: return "OneDimSphere";
    case CaseLabel::OneDimPlane: return "OneDimPlane";
    case CaseLabel::Incomplete: return "Incomplete";
  }
  return "?";
}

struct ManifoldClassification {
  std::array<EndpointClass, 2> ends;
  CaseLabel case_label = CaseLabel::Incomplete;
  std::string principal_orbit;  // "S^3", "L(3,n)", "S^1"
  std::string topology_note;
  std::string incomplete_reason;
};

namespace detail {

constexpr double kSmoothTol = 1e-8;   // closing conditions at an endpoint
constexpr double kIntegerTol = 1e-6;  // bolt order must sit on an integer

// Zeros of the degeneracy indicator strictly inside the domain, located by
// sign-change bisection on a 2000 point grid. The indicator is the factor of
// the metric that is allowed to vanish only at an end: S for OneDim, F for
// RadialUN, Sigma' + u Sigma'' (the V factor) for PotentialUN.
inline std::vector<double> interior_profile_zeros(const ProfileMetric& m) {
  std::vector<double> zeros;
  double lo = m.x_lo;
  double hi = std::isfinite(m.x_hi) ? m.x_hi : m.x_cap;
  double eps = 1e-6 * (hi - lo);
  auto f = [&](double x) {
    if (m.family == Family::PotentialUN)
      return eval_profile(m, x, 1) + x * eval_profile(m, x, 2);
    return eval_profile(m, x, 0);
  };
  int n = 2000;
  double prev_x = lo + eps, prev_f = f(prev_x);
  for (int i = 1; i <= n; ++i) {
    double x = lo + eps + (hi - eps - (lo + eps)) * i / n;
    double fx = f(x);
    if (prev_f == 0) {
      zeros.push_back(prev_x);
    } else if (prev_f * fx < 0) {
      double a = prev_x, b = x;
      while (b - a > 1e-12 * std::max(1.0, std::fabs(b))) {
        double mid = 0.5 * (a + b);
        double fm = f(mid);
        if (fm == 0) { a = b = mid; break; }
        if (prev_f * fm < 0) b = mid; else a = mid;
      }
      zeros.push_back(0.5 * (a + b));
    }
    prev_x = x;
    prev_f = fx;
  }
  return zeros;
}

// True when the geodesic distance to the upper end diverges. Probed by
// integrating dR/sqrt(F) over doubling windows; a converging tail flattens.
inline bool radial_distance_diverges(const ProfileMetric& m, double R_from) {
  auto ds = [&](double R) {
    double F = (m.family == Family::RadialUN)
                   ? eval_profile(m, R, 0)
                   : F_native(m, native_of_point(m, radial_point(R)));
    if (F <= 0) return 0.0;
    return 1.0 / std::sqrt(F);
  };
  double total = 0, a = std::max(R_from, 1.0);
  for (int k = 0; k < 24; ++k) {
    double b = 2 * a;
    double piece = integrate(ds, a, b, 1e-9);
    total += piece;
    if (total > 1e6) return true;
    if (piece < 1e-9 * std::max(1.0, total)) return false;
    a = b;
  }
  return true;
}

struct RadialEndView {
  bool infinite = false;  // R grows without bound toward this end
  double R0 = 0;          // limiting radius when finite
  double F0 = 0, Fp0 = 0;
};

// Collapse the endpoint of either radial family to the (R, F) picture.
// Potential-family metrics are probed at large u to decide whether the
// radius saturates (a hidden finite end) or keeps growing.
inline RadialEndView radial_end_view(const ProfileMetric& m, double x_end) {
  RadialEndView v;
  if (!std::isfinite(x_end)) {
    if (m.family == Family::RadialUN) {
      v.infinite = true;
      return v;
    }
    // For the potential family a saturating radius hides a finite end at
    // u = inf. Probe values converge like 1/u, so Richardson-extrapolate two
    // moderate probes; pushing a single probe far enough for 1e-8 accuracy
    // instead would hit the floating point cancellation in Sigma' + u Sigma''.
    double xa = 1e6, xb = 4e6;
    double Ra = R_of_native(m, xa), Rb = R_of_native(m, xb);
    if (Rb > Ra * (1 + 1e-6)) {
      v.infinite = true;
      return v;
    }
    v.R0 = Rb + (Rb - Ra) / 3.0;
    v.F0 = (4.0 * F_native(m, xb) - F_native(m, xa)) / 3.0;
    v.Fp0 = (4.0 * Fp_R_potential(m, xb) - Fp_R_potential(m, xa)) / 3.0;
    return v;
  }
  if (m.family == Family::RadialUN) {
    v.R0 = x_end;
    v.F0 = eval_profile(m, x_end, 0);
    v.Fp0 = eval_profile(m, x_end, 1);
  } else {
    v.R0 = R_of_native(m, x_end);
    v.F0 = F_native(m, x_end);
    v.Fp0 = (x_end > 0) ? Fp_R_potential(m, x_end) : 0;
  }
  return v;
}

inline EndpointClass classify_radial_view(const RadialEndView& v,
                                          const ProfileMetric& m,
                                          double x_end) {
  EndpointClass e;
  e.location = x_end;
  if (v.infinite) {
    e.kind = EndKind::InfiniteEnd;
    double probe = (m.family == Family::RadialUN)
                       ? m.x_cap
                       : R_of_native(m, std::min(m.x_cap, 1e12));
    if (!radial_distance_diverges(m, probe / 2)) {
      e.kind = EndKind::Degenerate;
      e.detail = "unbounded radius at finite distance";
      return e;
    }
    double x_probe = std::min(m.x_cap, 1e12);
    e.drift_limit = -0.5 * dlogV_dchi_native(m, x_probe);
    return e;
  }
  if (std::fabs(v.F0) <= kSmoothTol) {
    double t = v.R0 * v.Fp0;
    int n = static_cast<int>(std::lround(std::fabs(t) / 2));
    if (n <= 0 || std::fabs(std::fabs(t) - 2.0 * n) > kIntegerTol) {
      e.kind = EndKind::Degenerate;
      e.detail = "F vanishes but R0 F' is not an even integer";
      e.boundary_slope = t;
      return e;
    }
    e.kind = EndKind::Bolt;
    e.n = n;
    e.boundary_slope = t;
    return e;
  }
  if (v.R0 <= kSmoothTol) {
    double F0 = (m.family == Family::RadialUN) ? eval_profile(m, 0.0, 0)
                                               : 1.0;
    double Fp0 = (m.family == Family::RadialUN) ? eval_profile(m, 0.0, 1)
                                                : 0.0;
    if (std::fabs(F0 - 1) <= kSmoothTol && std::fabs(Fp0) <= kSmoothTol) {
      e.kind = EndKind::Nut;
      return e;
    }
    e.kind = EndKind::Degenerate;
    e.detail = "origin without F(0)=1, F'(0)=0";
    return e;
  }
  e.kind = EndKind::Degenerate;
  e.detail = "finite boundary with F > 0";
  return e;
}

inline EndpointClass classify_one_dim_end(const ProfileMetric& m,
                                          double x_end) {
  EndpointClass e;
  e.location = x_end;
  if (!std::isfinite(x_end)) {
    e.kind = EndKind::InfiniteEnd;
    e.drift_limit = -0.5 * dlogV_dchi_native(m, m.x_cap);
    return e;
  }
  double S = eval_profile(m, x_end, 0);
  if (std::fabs(S) > kSmoothTol) {
    e.kind = EndKind::Degenerate;
    e.detail = "boundary with S > 0";
    return e;
  }
  double slope = std::fabs(eval_profile(m, x_end, 1));
  e.boundary_slope = slope;
  if (std::fabs(slope - 1) <= kSmoothTol) {
    e.kind = EndKind::Nut;
    return e;
  }
  e.kind = EndKind::ConicalDefect;
  e.deficit = 2 * M_PI * (1 - slope);
  return e;
}

}  // namespace detail

inline EndpointClass classify_end(const ProfileMetric& m, double endpoint) {
  bool at_lo = endpoint == m.x_lo;
  bool at_hi = endpoint == m.x_hi ||
               (!std::isfinite(m.x_hi) && !std::isfinite(endpoint));
  if (!at_lo && !at_hi) {
    bool is_zero = std::isfinite(endpoint) && in_domain(m, endpoint) &&
                   std::fabs(eval_profile(m, endpoint, 0)) <= 1e-10;
    if (!is_zero)
      fail(ErrorCode::NotAnEndpoint,
           "not a domain boundary or a profile zero");
  }
  if (m.family == Family::OneDim)
    return detail::classify_one_dim_end(m, endpoint);
  return detail::classify_radial_view(detail::radial_end_view(m, endpoint),
                                      m, endpoint);
}

inline ManifoldClassification classify_manifold(const ProfileMetric& m) {
  ManifoldClassification c;
  c.ends[0] = classify_end(m, m.x_lo);
  c.ends[1] = classify_end(m, m.x_hi);

  auto interior = detail::interior_profile_zeros(m);
  // A zero at the far end of the probe window on an unbounded domain is the
  // grid brushing the asymptote, not an interior zero.
  if (!interior.empty()) {
    c.case_label = CaseLabel::Incomplete;
    c.incomplete_reason = "profile vanishes inside the domain";
    return c;
  }

  const EndpointClass& a = c.ends[0];
  const EndpointClass& b = c.ends[1];

  if (m.family == Family::OneDim) {
    c.principal_orbit = "S^1";
    if (a.kind == EndKind::Nut && b.kind == EndKind::Nut) {
      c.case_label = CaseLabel::OneDimSphere;
      c.topology_note = "two smooth poles; topological 2-sphere";
    } else if (a.kind == EndKind::Nut && b.kind == EndKind::InfiniteEnd) {
      c.case_label = CaseLabel::OneDimPlane;
      c.topology_note = "smooth pole with an open end; topological plane";
    } else {
      c.case_label = CaseLabel::Incomplete;
      for (const auto& e : c.ends) {
        if (e.kind == EndKind::ConicalDefect)
          c.incomplete_reason = "conical defect at a pole";
        else if (e.kind == EndKind::Degenerate)
          c.incomplete_reason = "domain boundary is not a smooth pole";
      }
      if (c.incomplete_reason.empty())
        c.incomplete_reason = "unrecognized end structure";
    }
    return c;
  }

  auto has = [&](EndKind k) { return a.kind == k || b.kind == k; };
  auto the_bolt = [&]() -> const EndpointClass& {
    return a.kind == EndKind::Bolt ? a : b;
  };

  if (has(EndKind::Degenerate)) {
    c.case_label = CaseLabel::Incomplete;
    const auto& d = a.kind == EndKind::Degenerate ? a : b;
    c.incomplete_reason =
        d.detail.empty() ? "degenerate end" : d.detail;
    return c;
  }
  if (a.kind == EndKind::Nut && b.kind == EndKind::Nut) {
    c.case_label = CaseLabel::Incomplete;
    c.incomplete_reason = "two nut ends cannot close up";
    return c;
  }

  int orbit_n = 1;
  if (a.kind == EndKind::Bolt) orbit_n = std::max(orbit_n, a.n);
  if (b.kind == EndKind::Bolt) orbit_n = std::max(orbit_n, b.n);
  std::string sphere =
      m.N == 2 ? "S^3" : "S^" + std::to_string(2 * m.N - 1);
  if (orbit_n == 1) {
    c.principal_orbit = sphere;
  } else if (m.N == 2) {
    c.principal_orbit = "L(3," + std::to_string(orbit_n) + ")";
  } else {
    c.principal_orbit = sphere + "/Z_" + std::to_string(orbit_n);
  }

  if (has(EndKind::Nut) && has(EndKind::Bolt)) {
    if (the_bolt().n != 1) {
      c.case_label = CaseLabel::Incomplete;
      c.incomplete_reason = "nut paired with a higher-order bolt";
      return c;
    }
    c.case_label = CaseLabel::Case1_NutBolt;
    c.topology_note = "biholomorphic to CP^" + std::to_string(m.N);
    return c;
  }
  if (a.kind == EndKind::Bolt && b.kind == EndKind::Bolt) {
    if (a.n != b.n) {
      c.case_label = CaseLabel::Incomplete;
      c.incomplete_reason = "bolts of different order";
      return c;
    }
    c.case_label = CaseLabel::Case2_TwoBolts;
    c.topology_note =
        "P(O(" + std::to_string(a.n) + ")+O(0)) bundle over CP^1";
    return c;
  }
  if (has(EndKind::Nut) && has(EndKind::InfiniteEnd)) {
    c.case_label = CaseLabel::Case3_SemiInfiniteNut;
    c.topology_note = "complete open manifold, C^" + std::to_string(m.N) +
                      "-like";
    return c;
  }
  if (has(EndKind::Bolt) && has(EndKind::InfiniteEnd)) {
    c.case_label = CaseLabel::Case4_SemiInfiniteBolt;
    c.topology_note = "O(-" + std::to_string(the_bolt().n) +
                      ") bundle over CP^1";
    return c;
  }
  c.case_label = CaseLabel::Incomplete;
  c.incomplete_reason = "unrecognized end structure";
  return c;
}

}  // namespace collapse
