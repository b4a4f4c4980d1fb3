#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "collapse/geometry.hpp"
#include "collapse/topology.hpp"

namespace collapse {

inline double hamiltonian(const ProfileMetric& m, const ChartPoint& p) {
  return H_native(m, native_of_point(m, p));
}

inline double dispersion(const ProfileMetric& m, const ChartPoint& p) {
  return V_native(m, native_of_point(m, p));
}

namespace detail {

// Orbit direction cosines (n1, n2, n3) from the polar pair (theta, phi).
inline std::array<double, 3> axis_from_angles(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
          std::cos(theta)};
}

// theta, phi of a point in either angular chart of a radial family.
inline std::array<double, 2> orbit_angles(const ProfileMetric&,
                                          const ChartPoint& p) {
  switch (p.chart) {
    case Chart::RadialFrame:
    case Chart::Chi:
      return {p.x[1], p.x[2]};
    case Chart::Complex: {
      if (p.z.size() != 2)
        fail(ErrorCode::DimensionMismatch,
             "orbit angles need N = 2 complex coordinates");
      double a = std::abs(p.z[0]), b = std::abs(p.z[1]);
      double u = a * a + b * b;
      if (u == 0) fail(ErrorCode::SingularPoint, "origin has no orbit angles");
      double theta = std::acos(std::clamp((a * a - b * b) / u, -1.0, 1.0));
      double phi = std::arg(p.z[1]) - std::arg(p.z[0]);
      return {theta, phi};
    }
    case Chart::Theta:
      fail(ErrorCode::WrongChart, "no orbit angles in a OneDim chart");
  }
  return {0, 0};
}

inline void require_hermitian(const std::vector<std::vector<std::complex<double>>>& h,
                              size_t n) {
  if (h.size() != n) fail(ErrorCode::DimensionMismatch, "observable matrix size");
  for (size_t a = 0; a < n; ++a) {
    if (h[a].size() != n)
      fail(ErrorCode::DimensionMismatch, "observable matrix size");
    for (size_t b = 0; b < n; ++b)
      if (std::abs(h[a][b] - std::conj(h[b][a])) > 1e-12)
        fail(ErrorCode::BadParams, "observable matrix must be Hermitian");
  }
}

}  // namespace detail

// Spin moment map on the 4d radial families. Values are the same whether the
// metric is presented radially or through a potential:
//   S_i = H_rad * n_i  with  H_rad = -R^2/4  and  n the orbit axis.
inline std::array<double, 3> spin(const ProfileMetric& m,
                                  const ChartPoint& p) {
  if (m.family == Family::OneDim)
    fail(ErrorCode::WrongChart, "spin needs a radial family");
  if (m.family == Family::PotentialUN && m.N != 2)
    fail(ErrorCode::DimensionMismatch, "spin is the N = 2 moment map");
  double x = native_of_point(m, p);
  double R = R_of_native(m, x);
  auto ang = detail::orbit_angles(m, p);
  auto n = detail::axis_from_angles(ang[0], ang[1]);
  double h = -R * R / 4;
  return {h * n[0], h * n[1], h * n[2]};
}

// Moment map of the U(N) generator h on a potential-family metric:
//   S_h = -Sigma'(u) z^dag h z.
inline double spin_general(
    const ProfileMetric& m, const ChartPoint& p,
    const std::vector<std::vector<std::complex<double>>>& h) {
  if (m.family != Family::PotentialUN)
    fail(ErrorCode::WrongChart, "spin_general needs a potential family");
  ChartPoint cp = chart_convert(m, p, Chart::Complex);
  detail::require_hermitian(h, cp.z.size());
  double u = native_of_point(m, cp);
  std::complex<double> s = 0;
  for (size_t a = 0; a < cp.z.size(); ++a)
    for (size_t b = 0; b < cp.z.size(); ++b)
      s += std::conj(cp.z[a]) * h[a][b] * cp.z[b];
  return -eval_profile(m, u, 1) * s.real();
}

// Squared Hamiltonian-flow speed of the U(N) generator h:
//   |X_h|^2 = 2 (Sigma' |h z|^2 + Sigma'' (z^dag h z)^2).
inline double spin_dispersion_general(
    const ProfileMetric& m, const ChartPoint& p,
    const std::vector<std::vector<std::complex<double>>>& h) {
  if (m.family != Family::PotentialUN)
    fail(ErrorCode::WrongChart, "spin_dispersion_general needs a potential family");
  ChartPoint cp = chart_convert(m, p, Chart::Complex);
  detail::require_hermitian(h, cp.z.size());
  double u = native_of_point(m, cp);
  double s1 = eval_profile(m, u, 1), s2 = eval_profile(m, u, 2);
  double v2 = 0;
  std::complex<double> q = 0;
  for (size_t a = 0; a < cp.z.size(); ++a) {
    std::complex<double> va = 0;
    for (size_t b = 0; b < cp.z.size(); ++b) va += h[a][b] * cp.z[b];
    v2 += std::norm(va);
    q += std::conj(cp.z[a]) * va;
  }
  return 2 * (s1 * v2 + s2 * q.real() * q.real());
}

// Dispersions of the three spin components. The Killing vector of S_i has
// squared length -H (1 - n_i^2) + V n_i^2 in the radial normalization, which
// interpolates the transverse sphere directions and the orbit fiber.
inline std::array<double, 3> spin_dispersion(const ProfileMetric& m,
                                             const ChartPoint& p) {
  if (m.family == Family::OneDim)
    fail(ErrorCode::WrongChart, "spin_dispersion needs a radial family");
  if (m.family == Family::PotentialUN && m.N != 2)
    fail(ErrorCode::DimensionMismatch, "spin_dispersion is the N = 2 case");
  double x = native_of_point(m, p);
  auto ang = detail::orbit_angles(m, p);
  auto n = detail::axis_from_angles(ang[0], ang[1]);
  double H, V;
  if (m.family == Family::RadialUN) {
    H = H_native(m, x);
    V = V_native(m, x);
  } else {
    // potential-family H, V carry twice the radial normalization; the spin
    // generators tau_i/2 are convention independent
    H = H_native(m, x) / 2;
    V = V_native(m, x) / 4;
  }
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i)
    out[i] = -H * (1 - n[i] * n[i]) + V * n[i] * n[i];
  return out;
}

namespace detail {

// Solve A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_linear(std::vector<std::vector<double>> A,
                                        std::vector<double> b) {
  size_t n = b.size();
  for (size_t c = 0; c < n; ++c) {
    size_t piv = c;
    for (size_t r = c + 1; r < n; ++r)
      if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
    if (std::fabs(A[piv][c]) < 1e-300)
      fail(ErrorCode::NonInvertible, "singular symplectic matrix");
    std::swap(A[c], A[piv]);
    std::swap(b[c], b[piv]);
    for (size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      double f = A[r][c] / A[c][c];
      if (f == 0) continue;
      for (size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (size_t i = 0; i < n; ++i) x[i] = b[i] / A[i][i];
  return x;
}

// Symplectic form as a matrix over the real coordinates of the point's
// chart. All three families use the Kaehler form of their metric.
inline std::vector<std::vector<double>> omega_matrix(const ProfileMetric& m,
                                                     const ChartPoint& p) {
  auto mat = [](size_t n) {
    return std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0));
  };
  if (p.chart == Chart::Complex) {
    if (m.family != Family::PotentialUN)
      fail(ErrorCode::WrongChart, "complex chart brackets need a potential");
    size_t N = p.z.size();
    double u = native_of_point(m, p);
    double s1 = eval_profile(m, u, 1), s2 = eval_profile(m, u, 2);
    auto g = [&](size_t a, size_t b) {  // g_{a b-bar}
      std::complex<double> v = s2 * std::conj(p.z[a]) * p.z[b];
      if (a == b) v += s1;
      return v;
    };
    // realified over (x1, y1, ..., xN, yN):
    // omega(U, V) = i sum g_{a b-bar} (V^a conj(U^b) - U^a conj(V^b)),
    // the sign fixed so the complex chart reproduces the angular-chart
    // d((R^2/4) sigma_3) brackets: {S1, S2} = +S3 in either chart.
    auto W = mat(2 * N);
    auto val = [&](size_t i, size_t j) {
      std::vector<std::complex<double>> U(N, 0.0), Vv(N, 0.0);
      U[i / 2] = (i % 2 == 0) ? 1.0 : std::complex<double>(0, 1);
      Vv[j / 2] = (j % 2 == 0) ? 1.0 : std::complex<double>(0, 1);
      std::complex<double> s = 0;
      for (size_t a = 0; a < N; ++a)
        for (size_t b = 0; b < N; ++b)
          s += g(a, b) * (Vv[a] * std::conj(U[b]) - U[a] * std::conj(Vv[b]));
      return (std::complex<double>(0, 1) * s).real();
    };
    for (size_t i = 0; i < 2 * N; ++i)
      for (size_t j = i + 1; j < 2 * N; ++j) {
        W[i][j] = val(i, j);
        W[j][i] = -W[i][j];
      }
    return W;
  }
  if (m.family == Family::OneDim) {
    // (theta, phi) or (chi, phi): omega = S dtheta wedge dphi = V dchi wedge dphi
    auto W = mat(2);
    double x = native_of_point(m, p);
    W[0][1] = (p.chart == Chart::Theta) ? eval_profile(m, x, 0)
                                        : V_native(m, x);
    W[1][0] = -W[0][1];
    return W;
  }
  // radial families in an angular chart, coordinates (r, theta, phi, psi)
  // with r = R or chi: omega = d((R^2/4) sigma_3)
  auto W = mat(4);
  double x = native_of_point(m, p);
  double R = R_of_native(m, x);
  double theta = p.x[1];
  double dR_dr;  // d(R^2/4) by the chart's first coordinate
  if (p.chart == Chart::RadialFrame) {
    dR_dr = R / 2;  // the first coordinate is R for both radial families
  } else {
    // d(R^2/4)/dchi = (R/2)(R F/2), which is V in the radial normalization
    // and V/2 in the potential one
    dR_dr = V_native(m, x);
    if (m.family == Family::PotentialUN) dR_dr /= 2;
  }
  W[0][3] = dR_dr;
  W[0][2] = dR_dr * std::cos(theta);
  W[1][2] = -(R * R / 4) * std::sin(theta);
  W[3][0] = -W[0][3];
  W[2][0] = -W[0][2];
  W[2][1] = -W[1][2];
  return W;
}

inline size_t chart_dim(const ChartPoint& p, const ProfileMetric& m) {
  if (p.chart == Chart::Complex) return 2 * p.z.size();
  return m.family == Family::OneDim ? 2 : 4;
}

inline ChartPoint displace(const ChartPoint& p, size_t i, double h) {
  ChartPoint q = p;
  if (p.chart == Chart::Complex) {
    q.z[i / 2] += (i % 2 == 0) ? h : std::complex<double>(0, h);
  } else {
    q.x[i] += h;
  }
  return q;
}

}  // namespace detail

using ScalarField = std::function<double(const ChartPoint&)>;
using GradientField = std::function<std::vector<double>(const ChartPoint&)>;

// {f, g} at p: gradients contract against the inverse symplectic form of
// the point's chart. Finite differences (h = 1e-6) stand in for missing
// analytic gradients.
inline double poisson_bracket(const ProfileMetric& m, const ChartPoint& p,
                              const ScalarField& f, const ScalarField& g,
                              const GradientField& grad_f = nullptr,
                              const GradientField& grad_g = nullptr) {
  size_t n = detail::chart_dim(p, m);
  auto numeric_grad = [&](const ScalarField& fn) {
    std::vector<double> d(n);
    for (size_t i = 0; i < n; ++i) {
      double h = 1e-6;
      d[i] = (fn(detail::displace(p, i, h)) - fn(detail::displace(p, i, -h))) /
             (2 * h);
    }
    return d;
  };
  std::vector<double> df = grad_f ? grad_f(p) : numeric_grad(f);
  std::vector<double> dg = grad_g ? grad_g(p) : numeric_grad(g);
  if (df.size() != n || dg.size() != n)
    fail(ErrorCode::DimensionMismatch, "gradient size");
  auto W = detail::omega_matrix(m, p);
  // {f, g} = X_f(g) with i_{X_f} omega = df, i.e. -df^T W^{-1} dg
  auto x = detail::solve_linear(W, dg);
  double out = 0;
  for (size_t i = 0; i < n; ++i) out -= df[i] * x[i];
  return out;
}

struct CriticalComponent {
  EndKind end_kind = EndKind::Nut;
  double location = 0;  // native coordinate
  double H_value = 0;
  std::optional<std::array<double, 2>> S3_range;  // radial families
  std::string description;
};

// Fixed-point sets of the Hamiltonian circle action: the V = 0 loci. Nuts
// are isolated points, bolts are 2-spheres with S3 sweeping [-R0^2/4, R0^2/4].
inline std::vector<CriticalComponent> critical_set(const ProfileMetric& m) {
  std::vector<CriticalComponent> out;
  for (double end : {m.x_lo, m.x_hi}) {
    EndpointClass e = classify_end(m, end);
    if (e.kind != EndKind::Nut && e.kind != EndKind::Bolt &&
        e.kind != EndKind::ConicalDefect)
      continue;
    CriticalComponent c;
    c.end_kind = e.kind;
    c.location = e.location;
    if (m.family == Family::OneDim) {
      c.H_value = H_native(m, end);
      c.description = e.kind == EndKind::Nut ? "smooth pole" : "conical pole";
    } else {
      double R0 = e.kind == EndKind::Nut
                      ? 0.0
                      : detail::radial_end_view(m, end).R0;
      double h_rad = -R0 * R0 / 4;
      c.H_value = (m.family == Family::PotentialUN) ? 2 * h_rad : h_rad;
      c.S3_range = std::array<double, 2>{h_rad, -h_rad};
      if (c.S3_range->at(0) > c.S3_range->at(1))
        std::swap(c.S3_range->at(0), c.S3_range->at(1));
      c.description = e.kind == EndKind::Nut
                          ? "isolated fixed point"
                          : "fixed 2-sphere of order " + std::to_string(e.n);
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace collapse
