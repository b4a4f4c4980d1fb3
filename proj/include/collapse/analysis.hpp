#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "collapse/curvature.hpp"
#include "collapse/geometry.hpp"
#include "collapse/numerics.hpp"
#include "collapse/observables.hpp"
#include "collapse/sde.hpp"
#include "collapse/topology.hpp"

namespace collapse {

struct HypothesisReport {
  double statistic = 0;
  double standard_error = 0;
  double z_score = 0;
  bool pass = false;
  long n_samples = 0;
  std::string description;
  // named companion numbers (bucket extremes, regression slopes, ...)
  std::vector<std::pair<std::string, double>> details;
};

namespace detail {

constexpr long kMinPaths = 100;
constexpr double kZThreshold = 3.0;
// per-bucket threshold leaves roughly 1e-3 family-wise false alarm odds
// across a few hundred buckets
constexpr double kBucketZThreshold = 4.5;

inline void require_paths(const EnsembleStats& st) {
  if (static_cast<long>(st.H_slab.size()) < kMinPaths)
    fail(ErrorCode::InsufficientData, "need at least 100 paths");
}

// record-grid intervals grouped so each bucket spans >= 50 integrator steps
inline long records_per_bucket(const EnsembleStats& st) {
  return std::max<long>(1, (50 + st.record_stride - 1) / st.record_stride);
}

inline bool interval_active(const EnsembleStats& st, long path, long k) {
  // an interval [k, k+1) contributes only while the path is alive at its start
  double ta = st.absorb_time[path];
  return (ta < 0 || st.t_grid[k] < ta) &&
         st.V_slab[path][k] > st.absorb_V_tol;
}

struct CountedRegression {
  OriginRegression reg;
  long n = 0;
  bool any_x = false;  // all-zero regressors (n_i = 0, sigma = 0) mean "no signal"
  void add(double x, double y) {
    reg.add(x, y);
    any_x = any_x || x != 0;
    ++n;
  }
  RegressionResult result() const {
    if (n < 2 || !any_x) return {};
    return reg.finish();
  }
};

}  // namespace detail

// Mean-zero test for increments of H over paths, overall and per time
// bucket, plus a quadratic-variation regression Var(dH) ~ sigma^2 V^2 dt.
inline HypothesisReport martingale_test(
    const EnsembleStats& st, double threshold = detail::kZThreshold) {
  detail::require_paths(st);
  long n = st.H_slab.size();
  long n_rec = st.t_grid.size();
  HypothesisReport rep;
  rep.n_samples = n;

  Accumulator total;
  for (long i = 0; i < n; ++i)
    total.add(st.H_slab[i][n_rec - 1] - st.H_slab[i][0]);
  MeanVar tv = total.finish();
  rep.statistic = tv.mean;
  rep.standard_error = tv.se();
  rep.z_score = rep.standard_error > 0 ? rep.statistic / rep.standard_error : 0;

  long per = detail::records_per_bucket(st);
  double max_bucket_z = 0;
  long buckets = 0;
  for (long k0 = 0; k0 + 1 < n_rec; k0 += per) {
    long k1 = std::min(n_rec - 1, k0 + per);
    Accumulator bucket;
    for (long i = 0; i < n; ++i)
      bucket.add(st.H_slab[i][k1] - st.H_slab[i][k0]);
    MeanVar bv = bucket.finish();
    if (bv.se() > 0)
      max_bucket_z = std::max(max_bucket_z, std::fabs(bv.mean / bv.se()));
    ++buckets;
  }

  // quadratic variation: squared increments against sigma^2 V^2 dt
  detail::CountedRegression qv;
  double s2 = st.sigma * st.sigma;
  for (long i = 0; i < n; ++i)
    for (long k = 0; k + 1 < n_rec; ++k) {
      if (!detail::interval_active(st, i, k)) continue;
      double dH = st.H_slab[i][k + 1] - st.H_slab[i][k];
      double v = st.V_slab[i][k];
      double dtk = st.t_grid[k + 1] - st.t_grid[k];
      qv.add(s2 * v * v * dtk, dH * dH);
    }
  auto qvr = qv.result();

  rep.pass = std::fabs(rep.z_score) < threshold &&
             max_bucket_z < detail::kBucketZThreshold;
  rep.details = {{"max_bucket_z", max_bucket_z},
                 {"buckets", static_cast<double>(buckets)},
                 {"qv_slope", qvr.slope},
                 {"qv_slope_se", qvr.se}};
  rep.description =
      "H-increment mean-zero test over paths and time buckets; "
      "quadratic-variation slope should sit near 1";
  return rep;
}

// Supermartingale structure of V: the mean must not increase, and interval
// drift regressed on V^2 dt recovers -sigma^2 K_H.
inline HypothesisReport supermartingale_test(
    const ProfileMetric& m, const EnsembleStats& st,
    double threshold = detail::kZThreshold) {
  detail::require_paths(st);
  long n = st.H_slab.size();
  long n_rec = st.t_grid.size();
  HypothesisReport rep;
  rep.n_samples = n;

  // worst increase of the mean-V curve, in standard errors
  double worst_rise = 0;
  long per = detail::records_per_bucket(st);
  for (long k0 = 0; k0 + 1 < n_rec; k0 += per) {
    long k1 = std::min(n_rec - 1, k0 + per);
    Accumulator inc;
    for (long i = 0; i < n; ++i)
      inc.add(st.V_slab[i][k1] - st.V_slab[i][k0]);
    MeanVar iv = inc.finish();
    if (iv.se() > 0) worst_rise = std::max(worst_rise, iv.mean / iv.se());
  }

  detail::CountedRegression on_v2;   // dV ~ slope (V^2 dt): -sigma^2 K_H
  detail::CountedRegression on_kv2;  // dV ~ slope (K_H V^2 dt): -sigma^2
  for (long i = 0; i < n; ++i)
    for (long k = 0; k + 1 < n_rec; ++k) {
      if (!detail::interval_active(st, i, k)) continue;
      double v = st.V_slab[i][k];
      double dV = st.V_slab[i][k + 1] - st.V_slab[i][k];
      double dtk = st.t_grid[k + 1] - st.t_grid[k];
      double x = native_of_chi(m, st.chi_slab[i][k]);
      double kh = m.family == Family::OneDim
                      ? gauss_curvature(m, x)
                      : riemann_components(m, R_of_native(m, x)).k_h;
      on_v2.add(v * v * dtk, dV);
      on_kv2.add(kh * v * v * dtk, dV);
    }
  if (on_kv2.n < 2) fail(ErrorCode::InsufficientData, "no active intervals");
  auto r_kv2 = on_kv2.result();
  auto r_v2 = on_v2.result();

  double s2 = st.sigma * st.sigma;
  rep.statistic = r_kv2.slope;
  rep.standard_error = r_kv2.se;
  rep.z_score =
      rep.standard_error > 0 ? (rep.statistic + s2) / rep.standard_error : 0;
  rep.pass = std::fabs(rep.z_score) < threshold &&
             worst_rise < detail::kBucketZThreshold;
  rep.details = {{"slope_on_V2dt", r_v2.slope},
                 {"slope_on_V2dt_se", r_v2.se},
                 {"worst_mean_rise_z", worst_rise},
                 {"final_mean_V", st.mean_V[n_rec - 1]},
                 {"initial_mean_V", st.mean_V[0]}};
  rep.description =
      "V-drift regression: coefficient on K_H V^2 dt should be -sigma^2; "
      "mean V must be non-increasing within noise";
  return rep;
}

// Mean decay of the spin-component dispersion V_i along an ensemble whose
// orbit angles are frozen at the start point. V_i is the linear combination
// -H (1 - n_i^2) + V n_i^2 of the recorded slabs (radial normalization).
inline HypothesisReport spin_reduction_test(
    const ProfileMetric& m, const EnsembleStats& st, int axis,
    double threshold = detail::kZThreshold) {
  detail::require_paths(st);
  if (m.family == Family::OneDim)
    fail(ErrorCode::WrongChart, "spin reduction needs a radial family");
  if (axis < 1 || axis > 3) fail(ErrorCode::BadParams, "axis must be 1..3");
  long n = st.H_slab.size();
  long n_rec = st.t_grid.size();
  auto nvec = detail::axis_from_angles(st.start_angles[0], st.start_angles[1]);
  double ni = nvec[axis - 1];
  double c_h = -(1 - ni * ni), c_v = ni * ni;
  // potential-family slabs carry twice (H) and four times (V) the radial
  // normalization; the spin generators are convention independent
  double scale_h = m.family == Family::PotentialUN ? 0.5 : 1.0;
  double scale_v = m.family == Family::PotentialUN ? 0.25 : 1.0;

  HypothesisReport rep;
  rep.n_samples = n;
  Accumulator total;
  for (long i = 0; i < n; ++i) {
    double v0 =
        c_h * scale_h * st.H_slab[i][0] + c_v * scale_v * st.V_slab[i][0];
    double v1 = c_h * scale_h * st.H_slab[i][n_rec - 1] +
                c_v * scale_v * st.V_slab[i][n_rec - 1];
    total.add(v1 - v0);
  }
  MeanVar tv = total.finish();
  rep.statistic = tv.mean;
  rep.standard_error = tv.se();
  rep.z_score = rep.standard_error > 0 ? rep.statistic / rep.standard_error : 0;
  // one-sided: reduction means the mean does not rise
  rep.pass = rep.z_score < threshold;

  detail::CountedRegression reg;  // dV_i ~ slope (sigma^2 K_H V^2 n_i^2 dt)
  double s2 = st.sigma * st.sigma;
  for (long i = 0; i < n; ++i)
    for (long k = 0; k + 1 < n_rec; ++k) {
      if (!detail::interval_active(st, i, k)) continue;
      double dVi = c_h * scale_h * (st.H_slab[i][k + 1] - st.H_slab[i][k]) +
                   c_v * scale_v * (st.V_slab[i][k + 1] - st.V_slab[i][k]);
      double x = native_of_chi(m, st.chi_slab[i][k]);
      double kh = riemann_components(m, R_of_native(m, x)).k_h;
      double v = st.V_slab[i][k] * scale_v;
      double dtk = st.t_grid[k + 1] - st.t_grid[k];
      reg.add(s2 * kh * v * v * ni * ni * dtk, dVi);
    }
  auto rr = reg.result();
  rep.details = {{"n_axis", ni},
                 {"drift_slope", rr.slope},
                 {"drift_slope_se", rr.se}};
  rep.description =
      "spin dispersion V_i mean change along paths (negative under "
      "reduction); drift slope against sigma^2 K_H V^2 n_i^2 dt targets -1";
  return rep;
}

// Endpoint H limit in the chi coordinate; nullopt marks a divergent limit.
inline std::optional<double> h_limit(const ProfileMetric& m, EndSide side) {
  double end = side == EndSide::Lower ? m.x_lo : m.x_hi;
  if (std::isfinite(end)) return H_native(m, end);
  double a = m.x_cap, prev = H_native(m, a);
  for (int k = 0; k < 24; ++k) {
    a = std::min(a * 4, 1e14);
    double h = H_native(m, a);
    if (std::fabs(h - prev) < 1e-9 * std::max(1.0, std::fabs(h)))
      return h + (h - prev) / 3;  // extrapolate the 1/x tail over the 4x rung
    prev = h;
    if (a >= 1e14) break;
  }
  return std::nullopt;
}

// pi_plus by the boundary-value formula; the degenerate single-ended case
// sends the divergent side's probability to zero.
inline double hitting_probability_analytic(const ProfileMetric& m,
                                           double chi0) {
  auto h_lo = h_limit(m, EndSide::Lower);
  auto h_hi = h_limit(m, EndSide::Upper);
  if (!h_lo && !h_hi)
    fail(ErrorCode::NotCompact, "no end with a finite H limit");
  if (!h_hi) return 0.0;  // upper end unreachable, pi_- = 1
  if (!h_lo) return 1.0;
  double H0 = H_native(m, native_of_chi(m, chi0));
  // truncated endpoint probes can land a hair outside the unit interval
  return std::clamp((H0 - *h_lo) / (*h_hi - *h_lo), 0.0, 1.0);
}

// Independent route: the scale density of the chi diffusion is V itself, so
// pi_+ is a ratio of integrals of V dchi, evaluated in the native variable
// with weight V dchi/dx.
inline double hitting_probability_oracle(const ProfileMetric& m,
                                         double chi0) {
  auto h_lo = h_limit(m, EndSide::Lower);
  auto h_hi = h_limit(m, EndSide::Upper);
  if (!h_lo && !h_hi)
    fail(ErrorCode::NotCompact, "no end with a finite H limit");
  if (!h_hi) return 0.0;
  if (!h_lo) return 1.0;
  auto w = [&](double x) {
    switch (m.family) {
      case Family::OneDim:
        return eval_profile(m, x, 0);
      case Family::RadialUN:
        return x / 2;
      case Family::PotentialUN:
        return eval_profile(m, x, 1) + x * eval_profile(m, x, 2);
    }
    return 0.0;
  };
  double x0 = native_of_chi(m, chi0);
  double head = integrate(w, m.x_lo, x0, kQuadTol);
  double total = head + integrate(w, x0, m.x_hi, kQuadTol);
  if (total <= 0) fail(ErrorCode::QuadratureFailure, "degenerate weight");
  return head / total;
}

struct LuedersReport {
  double ratio_residual = 0;
  bool pass_confinement = false;
  long n_lower = 0, n_upper = 0, n_none = 0;
  double p_upper_mc = 0, p_upper_analytic = 0, standard_error = 0;
  double z_score = 0;
  bool pass_split = false;
  std::optional<double> p_upper_born;  // |z|^2 weight of the complement
  std::optional<double> born_z;
  bool pass_born = true;
  double mean_H_drift_z = 0;
  bool pass = false;
  long n_samples = 0;
  std::string description;
};

// Born-rule and confinement check for a potential-family metric: runs the
// full complex SDE, verifies ray confinement, and compares the terminal
// nut/bolt split against the analytic hitting probability (and against the
// Born weight u0/(1+u0) on the standard projective family).
inline LuedersReport lueders_check(const ProfileMetric& m,
                                   const std::vector<std::complex<double>>& z0,
                                   SimConfig cfg) {
  if (m.family != Family::PotentialUN)
    fail(ErrorCode::WrongChart, "lueders_check needs a potential family");
  double u0 = 0;
  for (auto& za : z0) u0 += std::norm(za);
  if (u0 <= 0) fail(ErrorCode::BadParams, "z0 must be nonzero");
  cfg.full_state = true;
  cfg.start = complex_point(z0);
  auto st = run_ensemble(m, cfg);

  LuedersReport rep;
  rep.n_samples = st.H_slab.size();
  for (double r : st.ratio_residual)
    rep.ratio_residual = std::max(rep.ratio_residual, r);
  rep.pass_confinement = rep.ratio_residual < 1e-12;
  rep.n_lower = st.n_lower;
  rep.n_upper = st.n_upper;
  rep.n_none = st.n_none;

  long absorbed = st.n_lower + st.n_upper;
  rep.p_upper_analytic =
      hitting_probability_analytic(m, chi_of_native(m, u0));
  if (absorbed > 0) {
    rep.p_upper_mc = static_cast<double>(st.n_upper) / absorbed;
    rep.standard_error =
        std::sqrt(std::max(1e-300, rep.p_upper_analytic *
                                       (1 - rep.p_upper_analytic) / absorbed));
    rep.z_score = (rep.p_upper_mc - rep.p_upper_analytic) / rep.standard_error;
  }
  rep.pass_split = absorbed > 0 && std::fabs(rep.z_score) < 3;

  // Born weight of the non-nut component for the projective catalog family
  if (m.name == "fubini_study_potential") {
    rep.p_upper_born = u0 / (1 + u0);
    double se_b = std::sqrt(std::max(
        1e-300, *rep.p_upper_born * (1 - *rep.p_upper_born) /
                    std::max<long>(absorbed, 1)));
    rep.born_z = absorbed > 0 ? (rep.p_upper_mc - *rep.p_upper_born) / se_b : 0;
    rep.pass_born = std::fabs(*rep.born_z) < 3;
  }

  Accumulator h_drift;
  long n_rec = st.t_grid.size();
  for (size_t i = 0; i < st.H_slab.size(); ++i)
    h_drift.add(st.H_slab[i][n_rec - 1] - st.H_slab[i][0]);
  MeanVar hv = h_drift.finish();
  rep.mean_H_drift_z = hv.se() > 0 ? hv.mean / hv.se() : 0;

  rep.pass = rep.pass_confinement && rep.pass_split && rep.pass_born &&
             std::fabs(rep.mean_H_drift_z) < detail::kBucketZThreshold;
  rep.description =
      "ray confinement residual, terminal split vs analytic hitting "
      "probability, Born weight comparison, terminal H mean conservation";
  return rep;
}

}  // namespace collapse
