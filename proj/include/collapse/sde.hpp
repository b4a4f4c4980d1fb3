#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "collapse/geometry.hpp"
#include "collapse/rng.hpp"

namespace collapse {

struct SimConfig {
  double sigma = 1.0;
  double dt = 1e-3;
  long max_steps = 100000;
  ChartPoint start;
  std::uint64_t seed = 0;
  long n_trajectories = 1;
  double absorb_V_tol = -1;  // < 0: resolved to 1e-10 * V_max
  std::pair<double, double> chi_bounds = {
      std::numeric_limits<double>::quiet_NaN(),
      std::numeric_limits<double>::quiet_NaN()};  // NaN: start -/+ 40
  int record_stride = -1;  // < 0: about 200 records per path
  int threads = 1;
  double drift_bias = 0;   // test fixture: additive chi drift contamination
  bool full_state = false; // track complex components along potential paths
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ChartPoint> states;
  std::vector<double> H_series, V_series;
  std::optional<std::pair<double, std::string>> absorbed_at;
  std::uint64_t seed_used = 0;
  bool non_convergence = false;
  int endpoint_side = 0;  // -1 lower, +1 upper, 0 none
};

struct EnsembleStats {
  std::vector<double> t_grid;
  // per-path records on the common grid, [path][record]
  std::vector<std::vector<double>> H_slab, V_slab, chi_slab;
  std::vector<double> H_final, absorb_time, ratio_residual;
  std::vector<signed char> side;  // -1 lower, +1 upper, 0 none
  std::vector<double> mean_H, mean_V, se_H, se_V;
  long n_lower = 0, n_upper = 0, n_none = 0;
  long non_convergence_count = 0;
  double sigma = 0, dt = 0;
  long max_steps = 0;
  int record_stride = 1;
  std::uint64_t seed = 0;
  double absorb_V_tol = 0;
  std::pair<double, double> chi_bounds{0, 0};
  double chi0 = 0;
  std::array<double, 2> start_angles{0, 0};  // frozen (theta, phi) if radial
  std::string warning;
};

inline double drift_chi(const ProfileMetric& m, double chi, double sigma) {
  double x = native_of_chi(m, chi);
  return -0.5 * sigma * sigma * dlogV_dchi_native(m, x);
}

// One Euler-Maruyama step of the reduced process; phase advances at rate 2.
inline std::pair<double, double> step_chi(const ProfileMetric& m,
                                          std::pair<double, double> state,
                                          double dt, double dW, double sigma) {
  double b = drift_chi(m, state.first, sigma);
  return {state.first + b * dt + sigma * dW, state.second + 2 * dt};
}

// One step of the full complex process. The one-step map is the exact
// exponential of the frozen-coefficient generator,
//   z' = z exp[(2i + b) dt + sigma dW],  b = drift in chi,
// whose Ito expansion is z [1 + (2i + (sigma^2/2)(1 - 2uV'/V)) dt + sigma dW].
// The common scalar keeps component ratios exactly constant, and log|z'|
// reproduces the chi step bit for bit.
inline std::vector<std::complex<double>> step_full(
    const ProfileMetric& m, const std::vector<std::complex<double>>& z,
    double dt, double dW, double sigma) {
  if (m.family != Family::PotentialUN)
    fail(ErrorCode::WrongChart, "step_full integrates a potential family");
  double u = 0;
  for (auto& za : z) u += std::norm(za);
  if (u <= 0) fail(ErrorCode::ZeroDispersion, "z = 0");
  double b = -0.5 * sigma * sigma * dlogV_dchi_native(m, u);
  std::complex<double> w =
      std::exp(std::complex<double>(b * dt + sigma * dW, 2 * dt));
  std::vector<std::complex<double>> out(z.size());
  for (size_t a = 0; a < z.size(); ++a) {
    out[a] = z[a] * w;
    if (!std::isfinite(out[a].real()) || !std::isfinite(out[a].imag()))
      fail(ErrorCode::Overflow, "state left the representable range");
  }
  return out;
}

namespace detail {

inline int absorption_side(const ProfileMetric& m, double chi, double x) {
  // x is valid even when V = 0 makes chi diverge (bolt starts)
  if (std::isfinite(m.x_peak)) return x >= m.x_peak ? 1 : -1;
  if (std::isfinite(m.chi_split)) return chi >= m.chi_split ? 1 : -1;
  // monotone V: the only vanishing end is opposite the growth direction
  return m.chi_split > 0 ? -1 : 1;
}

struct ResolvedConfig {
  double sigma, dt, v_tol, chi_lo, chi_hi, bias;
  long max_steps;
  int stride;
  double chi0, x0, theta0 = 0, phi0 = 0, phase0 = 0;
  std::vector<std::complex<double>> z0;
  std::string warning;
};

inline ResolvedConfig resolve_config(const ProfileMetric& m,
                                     const SimConfig& cfg) {
  if (cfg.sigma < 0 || cfg.dt <= 0 || cfg.max_steps <= 0 ||
      cfg.n_trajectories < 1)
    fail(ErrorCode::BadParams, "sigma >= 0, dt > 0, steps/paths >= 1");
  ResolvedConfig r{};
  r.sigma = cfg.sigma;
  r.dt = cfg.dt;
  r.bias = cfg.drift_bias;
  r.max_steps = cfg.max_steps;
  r.v_tol = cfg.absorb_V_tol > 0 ? cfg.absorb_V_tol : 1e-10 * m.v_max;
  r.x0 = native_of_point(m, cfg.start);
  double V0 = V_native(m, r.x0);
  // a Chi start is the process state itself; a native round trip would
  // shift it by a few ulp and break exact noise-off invariance
  if (cfg.start.chart == Chart::Chi)
    r.chi0 = cfg.start.x[0];
  else
    r.chi0 = V0 > 0 ? chi_of_native(m, r.x0)
                    : std::numeric_limits<double>::quiet_NaN();
  r.chi_lo = std::isnan(cfg.chi_bounds.first) ? r.chi0 - 40
                                              : cfg.chi_bounds.first;
  r.chi_hi = std::isnan(cfg.chi_bounds.second) ? r.chi0 + 40
                                               : cfg.chi_bounds.second;
  r.stride = cfg.record_stride > 0
                 ? cfg.record_stride
                 : static_cast<int>(std::max<long>(1, cfg.max_steps / 200));
  if (m.family != Family::OneDim) {
    auto q = chart_convert(m, cfg.start, Chart::RadialFrame);
    r.theta0 = q.x[1];
    r.phi0 = q.x[2];
    r.phase0 = q.x[3];
  } else {
    r.phase0 = cfg.start.x[1];
  }
  if (cfg.full_state && m.family == Family::PotentialUN) {
    r.z0 = chart_convert(m, cfg.start, Chart::Complex).z;
  }
  if (cfg.dt * cfg.sigma * cfg.sigma > 0.01)
    r.warning = "dt*sigma^2 exceeds 0.01; discretization bias likely";
  return r;
}

// Slim per-path run writing (H, V, chi) on the shared record grid.
struct PathOutput {
  double H_final = 0, absorb_time = -1, ratio_residual = 0;
  signed char side = 0;
  bool non_convergence = false;
};

template <typename RecordFn>
inline PathOutput run_path(const ProfileMetric& m, const ResolvedConfig& r,
                           std::uint64_t seed, std::uint64_t index,
                           RecordFn&& record) {
  Rng rng = Rng::for_stream(seed, index);
  PathOutput out;
  double x = r.x0, chi = r.chi0;
  double H = H_native(m, x), V = V_native(m, x);
  bool absorbed = false;
  std::vector<std::complex<double>> z = r.z0;
  std::vector<std::complex<double>> ratio0;
  if (z.size() > 1) {
    ratio0.resize(z.size() - 1);
    for (size_t a = 1; a < z.size(); ++a) ratio0[a - 1] = z[a] / z[0];
  }
  if (V <= r.v_tol) {
    absorbed = true;
    out.side = static_cast<signed char>(absorption_side(m, chi, x));
    out.absorb_time = 0;
  }
  record(0, chi, H, V);
  long rec = 1;
  const long total_recs = r.max_steps / r.stride;
  for (long s = 1; s <= r.max_steps && !absorbed; ++s) {
    double dW = std::sqrt(r.dt) * rng.gauss();
    double b = -0.5 * r.sigma * r.sigma * dlogV_dchi_native(m, x) + r.bias;
    chi += b * r.dt + r.sigma * dW;
    if (!z.empty()) {
      std::complex<double> w = std::exp(
          std::complex<double>(b * r.dt + r.sigma * dW, 2 * r.dt));
      for (auto& za : z) za *= w;
      for (size_t a = 1; a < z.size(); ++a)
        out.ratio_residual = std::max(out.ratio_residual,
                                      std::abs(z[a] / z[0] - ratio0[a - 1]));
    }
    x = native_of_chi(m, chi, x);
    V = V_native(m, x);
    if (V <= r.v_tol || chi < r.chi_lo || chi > r.chi_hi) {
      absorbed = true;
      out.absorb_time = s * r.dt;
      out.side = static_cast<signed char>(V <= r.v_tol
                                              ? absorption_side(m, chi, x)
                                              : (chi > r.chi_hi ? 1 : -1));
      H = H_native(m, x);
    }
    if (s % r.stride == 0) {
      if (!absorbed) H = H_native(m, x);
      record(rec++, chi, H, V);
    }
  }
  // absorbed paths carry frozen values through the rest of the grid
  while (rec <= total_recs) record(rec++, chi, H, V);
  if (!absorbed) {
    out.non_convergence = true;
    H = H_native(m, x);
    out.H_final = H;
    return out;
  }
  out.H_final = H;
  return out;
}

}  // namespace detail

inline Trajectory run_trajectory(const ProfileMetric& m, const SimConfig& cfg,
                                 std::uint64_t index = 0) {
  auto r = detail::resolve_config(m, cfg);
  if (cfg.record_stride <= 0 && cfg.n_trajectories == 1 &&
      cfg.max_steps <= 200000)
    r.stride = 1;
  Trajectory tr;
  tr.seed_used = cfg.seed ^ index;
  long n_rec = r.max_steps / r.stride + 1;
  tr.times.reserve(n_rec);
  tr.H_series.reserve(n_rec);
  tr.V_series.reserve(n_rec);
  tr.states.reserve(n_rec);
  std::vector<std::complex<double>> z_now = r.z0;
  auto record = [&](long k, double chi, double H, double V) {
    double t = k * r.stride * r.dt;
    tr.times.push_back(t);
    tr.H_series.push_back(H);
    tr.V_series.push_back(V);
    ChartPoint p;
    p.chart = Chart::Chi;
    if (m.family == Family::OneDim) {
      p.x = {chi, r.phase0 + 2 * t, 0, 0};
    } else {
      p.x = {chi, r.theta0, r.phi0, r.phase0 + 2 * t};
    }
    tr.states.push_back(p);
  };
  auto out = detail::run_path(m, r, cfg.seed, index, record);
  tr.non_convergence = out.non_convergence;
  tr.endpoint_side = out.side;
  if (out.side != 0)
    tr.absorbed_at = {out.absorb_time,
                      out.side > 0 ? std::string("upper")
                                   : std::string("lower")};
  return tr;
}

inline EnsembleStats run_ensemble(const ProfileMetric& m,
                                  const SimConfig& cfg) {
  auto r = detail::resolve_config(m, cfg);
  long n = cfg.n_trajectories;
  EnsembleStats st;
  st.sigma = r.sigma;
  st.dt = r.dt;
  st.max_steps = r.max_steps;
  st.record_stride = r.stride;
  st.seed = cfg.seed;
  st.absorb_V_tol = r.v_tol;
  st.chi_bounds = {r.chi_lo, r.chi_hi};
  st.chi0 = r.chi0;
  st.start_angles = {r.theta0, r.phi0};
  st.warning = r.warning;
  long n_rec = r.max_steps / r.stride + 1;
  st.t_grid.resize(n_rec);
  for (long k = 0; k < n_rec; ++k) st.t_grid[k] = k * r.stride * r.dt;
  st.H_slab.assign(n, {});
  st.V_slab.assign(n, {});
  st.chi_slab.assign(n, {});
  st.H_final.resize(n);
  st.absorb_time.assign(n, -1);
  st.ratio_residual.assign(n, 0);
  st.side.resize(n);

  int n_threads = std::max(1, cfg.threads);
  std::atomic<long> next{0};
  auto worker = [&]() {
    for (;;) {
      long i = next.fetch_add(1);
      if (i >= n) return;
      auto& Hs = st.H_slab[i];
      auto& Vs = st.V_slab[i];
      auto& Cs = st.chi_slab[i];
      Hs.resize(n_rec);
      Vs.resize(n_rec);
      Cs.resize(n_rec);
      auto record = [&](long k, double chi, double H, double V) {
        Hs[k] = H;
        Vs[k] = V;
        Cs[k] = chi;
      };
      auto out = detail::run_path(m, r, cfg.seed, i, record);
      st.H_final[i] = out.H_final;
      st.absorb_time[i] = out.absorb_time;
      st.ratio_residual[i] = out.ratio_residual;
      st.side[i] = out.side;
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // serial, index-ordered reduction: results do not depend on thread count
  st.mean_H.assign(n_rec, 0);
  st.mean_V.assign(n_rec, 0);
  st.se_H.assign(n_rec, 0);
  st.se_V.assign(n_rec, 0);
  for (long k = 0; k < n_rec; ++k) {
    double sh = 0, sv = 0;
    for (long i = 0; i < n; ++i) {
      sh += st.H_slab[i][k];
      sv += st.V_slab[i][k];
    }
    double mh = sh / n, mv = sv / n;
    double qh = 0, qv = 0;
    for (long i = 0; i < n; ++i) {
      qh += (st.H_slab[i][k] - mh) * (st.H_slab[i][k] - mh);
      qv += (st.V_slab[i][k] - mv) * (st.V_slab[i][k] - mv);
    }
    st.mean_H[k] = mh;
    st.mean_V[k] = mv;
    if (n > 1) {
      st.se_H[k] = std::sqrt(qh / (n - 1) / n);
      st.se_V[k] = std::sqrt(qv / (n - 1) / n);
    }
  }
  for (long i = 0; i < n; ++i) {
    if (st.side[i] > 0)
      ++st.n_upper;
    else if (st.side[i] < 0)
      ++st.n_lower;
    else {
      ++st.n_none;
      ++st.non_convergence_count;
    }
  }
  return st;
}

}  // namespace collapse
