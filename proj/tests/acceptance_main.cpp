// Acceptance gate: one line per criterion, [PASS] or [FAIL], nonzero exit
// when anything fails. Tolerances and sample sizes are pinned here on
// purpose; loosening them is not a fix.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <vector>

#include "collapse/analysis.hpp"
#include "collapse/catalog.hpp"
#include "collapse/report.hpp"

using namespace collapse;

namespace {

int g_fail_count = 0;
std::string g_why;

bool expect(bool ok, const std::string& why) {
  if (!ok && g_why.empty()) g_why = why;
  return ok;
}

double detail_of(const HypothesisReport& r, const std::string& key) {
  for (auto& [k, v] : r.details)
    if (k == key) return v;
  g_why = "missing detail " + key;
  return std::numeric_limits<double>::quiet_NaN();
}

template <typename F>
void criterion(int index, const char* label, double budget_s, F body) {
  g_why.clear();
  auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  try {
    ok = body();
  } catch (const std::exception& e) {
    if (g_why.empty()) g_why = std::string("exception: ") + e.what();
  }
  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (ok && elapsed > budget_s) {
    ok = false;
    g_why = "over the " + std::to_string(budget_s) + " s budget";
  }
  std::printf("[%s] %d. %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", index, label,
              elapsed, g_why.empty() ? "" : " -- ", g_why.c_str());
  std::fflush(stdout);
  if (!ok) ++g_fail_count;
}

SimConfig make_sim(ChartPoint start, double sigma, double dt, long steps,
                   long n, std::uint64_t seed) {
  SimConfig cfg;
  cfg.start = start;
  cfg.sigma = sigma;
  cfg.dt = dt;
  cfg.max_steps = steps;
  cfg.n_trajectories = n;
  cfg.seed = seed;
  cfg.threads = 1;
  return cfg;
}

// 1. Hitchin horizontal curvature is the constant 4/s across the domain.
bool crit1() {
  bool ok = true;
  for (double s : {0.05, 0.1, 0.2})
    for (int n : {2, 3}) {
      auto m = instantiate("hitchin", {{"s", s}, {"n", double(n)}});
      for (int k = 1; k <= 20; ++k) {
        double x = m.x_lo + (m.x_hi - m.x_lo) * k / 21.0;
        double got = riemann_components(m, R_of_native(m, x)).R0303;
        ok &= expect(std::fabs(got - 4.0 / s) < 1e-8,
                     "R0303 != 4/s at s=" + std::to_string(s) +
                         " n=" + std::to_string(n) + " x=" + std::to_string(x));
      }
    }
  return ok;
}

// 2. Endpoint certification for the three radial reference families.
bool crit2() {
  bool ok = true;
  auto eh = classify_manifold(instantiate("eguchi_hanson", {{"a", 1.0}}));
  ok &= expect(eh.case_label == CaseLabel::Case4_SemiInfiniteBolt,
               "eguchi_hanson case != Case4");
  ok &= expect(eh.ends[0].kind == EndKind::Bolt && eh.ends[0].n == 2,
               "eguchi_hanson lower end != Bolt(2)");
  ok &= expect(std::fabs(eh.ends[0].location - 1.0) < 1e-8,
               "eguchi_hanson bolt not at R=1");
  for (int n : {2, 3}) {
    auto h = classify_manifold(instantiate("hitchin", {{"s", 0.1}, {"n", double(n)}}));
    ok &= expect(h.case_label == CaseLabel::Case2_TwoBolts,
                 "hitchin case != Case2");
    ok &= expect(h.ends[0].kind == EndKind::Bolt &&
                     h.ends[1].kind == EndKind::Bolt &&
                     h.ends[0].n == n && h.ends[1].n == n,
                 "hitchin bolt orders unequal at n=" + std::to_string(n));
  }
  auto b = classify_manifold(instantiate("berger", {{"lambda", 0.5}}));
  ok &= expect(b.case_label == CaseLabel::Case3_SemiInfiniteNut,
               "berger case != Case3");
  ok &= expect(b.ends[0].kind == EndKind::Nut, "berger lower end != Nut");
  return ok;
}

// 3. Positivity taxonomy across the reference families.
bool crit3() {
  bool ok = true;
  auto scan = [](const ProfileMetric& m) {
    return positivity_scan(m, default_scan_grid(m));
  };
  auto b = scan(instantiate("berger", {{"lambda", 0.5}}));
  ok &= expect(b.all_bisectional.has_value() && *b.all_bisectional,
               "berger lambda=0.5 fails all_bisectional");
  for (const char* name : {"eguchi_hanson", "hitchin"}) {
    auto v = scan(instantiate(name, {}));
    ok &= expect(v.collapse_H, std::string(name) + " fails collapse_H");
    ok &= expect(v.reduce_S.has_value() && !*v.reduce_S,
                 std::string(name) + " should fail reduce_S");
  }
  return ok;
}

// 4. Dispersion route and frame route to K_H agree on every catalog entry.
bool crit4() {
  bool ok = true;
  for (const auto& e : catalog_entries()) {
    auto m = instantiate(e.name, {});
    double lo = m.x_lo;
    double hi = std::isfinite(m.x_hi) ? m.x_hi : m.x_cap;
    for (int k = 1; k <= 50; ++k) {
      double x = lo + (hi - lo) * k / 51.0;
      double via_disp = kh_via_dispersion(m, x);
      double ref =
          m.family == Family::OneDim
              ? -eval_profile(m, x, 2) / eval_profile(m, x, 0)
              : riemann_components(m, R_of_native(m, x)).k_h;
      ok &= expect(std::fabs(via_disp - ref) <=
                       1e-8 * std::max(1.0, std::fabs(ref)),
                   e.name + ": K_H routes disagree at x=" + std::to_string(x));
    }
  }
  return ok;
}

// 5. Hitting probabilities on the 1-D entries: MC vs scale-function formula
// vs quadrature, and the half-cylinder sends everything to the waist.
bool crit5() {
  bool ok = true;
  auto m = instantiate("sphere_1d", {});
  double angles[5] = {0.6, 1.0, M_PI / 2, 2.2, 2.6};
  for (int i = 0; i < 5; ++i) {
    double chi0 = chi_of_native(m, angles[i]);
    double p = hitting_probability_analytic(m, chi0);
    double q = hitting_probability_oracle(m, chi0);
    ok &= expect(std::fabs(p - q) < 1e-8,
                 "oracle != analytic at theta=" + std::to_string(angles[i]));
    auto cfg = make_sim(theta_point(angles[i]), 1.0, 1e-3, 20000, 10000,
                        901 + i);
    cfg.absorb_V_tol = 1e-4;
    auto st = run_ensemble(m, cfg);
    long absorbed = st.n_lower + st.n_upper;
    ok &= expect(absorbed > 9900, "too few absorbed paths");
    double p_mc = double(st.n_upper) / absorbed;
    double se = std::sqrt(p * (1 - p) / absorbed);
    ok &= expect(std::fabs(p_mc - p) <= 3 * se,
                 "MC split off at theta=" + std::to_string(angles[i]) +
                     ": p_mc=" + std::to_string(p_mc) +
                     " p=" + std::to_string(p));
  }
  auto cyl = instantiate("cylinder_1d", {});
  double chi0 = chi_of_native(cyl, 1.0);
  ok &= expect(hitting_probability_analytic(cyl, chi0) == 0.0,
               "cylinder pi_minus != 1 (analytic)");
  ok &= expect(hitting_probability_oracle(cyl, chi0) < 1e-8,
               "cylinder pi_minus != 1 (oracle)");
  return ok;
}

// 6. Martingale/supermartingale structure on the constant-K_H metric.
bool crit6() {
  bool ok = true;
  auto m = instantiate("fubini_study", {});
  double sigma = 0.5;
  auto cfg = make_sim(chi_point(0.0), sigma, 1e-3, 30000, 10000, 600);
  auto st = run_ensemble(m, cfg);
  auto mart = martingale_test(st);
  ok &= expect(std::fabs(mart.z_score) < 3,
               "H-increment z=" + std::to_string(mart.z_score));
  ok &= expect(mart.pass, "martingale_test failed");
  auto super_rep = supermartingale_test(m, st);
  double slope = detail_of(super_rep, "slope_on_V2dt");
  double se = detail_of(super_rep, "slope_on_V2dt_se");
  double target = -4.0 * sigma * sigma;
  ok &= expect(std::fabs(slope - target) <= 3 * se,
               "V-drift coefficient " + std::to_string(slope) +
                   " != -4 sigma^2 within 3 SE (se=" + std::to_string(se) +
                   ")");
  ok &= expect(super_rep.pass, "supermartingale_test failed");
  ok &= expect(st.mean_V.back() < 0.5 * st.mean_V.front(),
               "mean V did not decay: " + std::to_string(st.mean_V.front()) +
                   " -> " + std::to_string(st.mean_V.back()));
  return ok;
}

// 7. Drift saturation at the 1-D sphere's poles.
bool crit7() {
  bool ok = true;
  auto m = instantiate("sphere_1d", {});
  for (double sigma : {0.6, 1.0}) {
    double s2 = sigma * sigma;
    ok &= expect(std::fabs(drift_chi(m, -8.0, sigma) + s2) < 1e-3,
                 "drift at chi=-8 != -sigma^2");
    ok &= expect(std::fabs(drift_chi(m, 8.0, sigma) - s2) < 1e-3,
                 "drift at chi=+8 != +sigma^2");
  }
  return ok;
}

// 8. Full complex flow: ray confinement, Born split, and lockstep with the
// reduced flow under shared increments.
bool crit8() {
  bool ok = true;

  auto m3 = instantiate("fubini_study_potential", {{"N", 3}});
  std::vector<std::complex<double>> z{{0.4, 0.1}, {-0.3, 0.2}, {0.05, -0.7}};
  double r1 = std::abs(z[1]) / std::abs(z[0]);
  double r2 = std::abs(z[2]) / std::abs(z[0]);
  auto rng = Rng::for_stream(47, 0);
  double dt = 1e-3, sigma = 0.8, worst = 0;
  for (int k = 0; k < 2000; ++k) {
    z = step_full(m3, z, dt, std::sqrt(dt) * rng.gauss(), sigma);
    worst = std::max(worst,
                     std::fabs(std::abs(z[1]) / std::abs(z[0]) - r1) / r1);
    worst = std::max(worst,
                     std::fabs(std::abs(z[2]) / std::abs(z[0]) - r2) / r2);
  }
  ok &= expect(worst < 1e-12,
               "component ratios drifted by " + std::to_string(worst));

  auto m2 = instantiate("fubini_study_potential", {});
  SimConfig cfg = make_sim(ChartPoint{}, 1.0, 1e-3, 40000, 10000, 800);
  auto rep = lueders_check(m2, {{0.8, 0.0}, {0.0, 0.6}}, cfg);
  ok &= expect(rep.pass_confinement,
               "ray confinement residual " +
                   std::to_string(rep.ratio_residual));
  ok &= expect(std::fabs(rep.p_upper_analytic - 0.5) < 1e-12,
               "analytic split != 1/2");
  ok &= expect(rep.pass_split, "MC split off the analytic value by " +
                                   std::to_string(rep.z_score) + " SE");
  ok &= expect(rep.p_upper_born.has_value() && rep.pass_born,
               "Born weight comparison failed");

  auto rng2 = Rng::for_stream(48, 0);
  std::vector<std::complex<double>> zf{{0.6, 0.0}, {0.0, 0.8}};
  double u0 = 1.0;
  std::pair<double, double> red{chi_of_native(m2, u0), 0.0};
  double worst_chi = 0;
  for (int k = 0; k < 500; ++k) {
    double dW = std::sqrt(dt) * rng2.gauss();
    zf = step_full(m2, zf, dt, dW, sigma);
    red = step_chi(m2, red, dt, dW, sigma);
    double uf = std::norm(zf[0]) + std::norm(zf[1]);
    double diff = std::fabs(chi_of_native(m2, uf) - red.first);
    if (diff > 1e-10 * (k + 1))
      ok &= expect(false, "chi paths split at step " + std::to_string(k) +
                              " by " + std::to_string(diff));
    worst_chi = std::max(worst_chi, diff);
  }
  return ok;
}

// 9. Summaries are byte-identical across thread counts and reruns.
bool crit9() {
  auto m = instantiate("fubini_study", {});
  auto run = [&](int threads) {
    auto cfg = make_sim(chi_point(0.0), 0.5, 1e-3, 2000, 64, 42);
    cfg.threads = threads;
    return ensemble_summary_json(run_ensemble(m, cfg)).dump();
  };
  std::string a = run(1), b = run(1), c = run(4), d = run(3);
  bool ok = expect(a == b, "rerun with one thread differs");
  ok &= expect(a == c, "four-thread run differs");
  ok &= expect(a == d, "three-thread run differs");
  return ok;
}

}  // namespace

int main() {
  criterion(1, "Hitchin R0303 equals 4/s", 1.0, crit1);
  criterion(2, "nut/bolt certification", 1.0, crit2);
  criterion(3, "positivity taxonomy", 1.0, crit3);
  criterion(4, "K_H dispersion route matches frame route", 120.0, crit4);
  criterion(5, "hitting probabilities on 1-D entries", 120.0, crit5);
  criterion(6, "martingale and supermartingale structure", 180.0, crit6);
  criterion(7, "drift saturation at the poles", 10.0, crit7);
  criterion(8, "ray confinement, Born split, lockstep flows", 180.0, crit8);
  criterion(9, "byte-identical summaries across thread counts", 60.0, crit9);
  if (g_fail_count) {
    std::printf("%d criterion(s) failed\n", g_fail_count);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
