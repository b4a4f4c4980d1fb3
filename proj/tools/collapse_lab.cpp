// collapse_lab: command-line front end for the collapse library.
//
// Subcommands: classify, curvature, simulate, hitprob, lueders, brackets,
// catalog. Reports are JSON; series are CSV. Exit codes: 0 success,
// 1 validation or usage error, 2 numerical failure, 3 failed hypothesis
// test under --strict.

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "collapse/analysis.hpp"
#include "collapse/catalog.hpp"
#include "collapse/report.hpp"
#include "json.hpp"

using nlohmann::json;
using namespace collapse;

namespace {

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::SingularPoint:
    case ErrorCode::NonInvertible:
    case ErrorCode::DegenerateMetric:
    case ErrorCode::ZeroDispersion:
    case ErrorCode::QuadratureFailure:
    case ErrorCode::Overflow:
      return 2;
    default:
      return 1;  // bad input of one kind or another
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string iso_timestamp() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// Values from --config apply only where the flag was not given explicitly.
// Config keys are the long option names with dashes turned to underscores.
struct ConfigMerge {
  json cfg = json::object();
  struct Entry {
    CLI::Option* opt;
    std::string key;
    std::function<void(const json&)> apply;
  };
  std::vector<Entry> entries;

  template <typename T>
  CLI::Option* bind(CLI::Option* opt, const std::string& key, T& var) {
    entries.push_back({opt, key, [&var](const json& v) { var = v.get<T>(); }});
    return opt;
  }

  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::BadParams, "cannot open config file " + path);
    try {
      in >> cfg;
    } catch (const std::exception& e) {
      fail(ErrorCode::BadParams, std::string("config parse: ") + e.what());
    }
    if (!cfg.is_object())
      fail(ErrorCode::BadParams, "config file must hold a JSON object");
  }

  void merge() {
    for (auto& e : entries)
      if (e.opt->count() == 0 && cfg.contains(e.key)) e.apply(cfg[e.key]);
  }
};

struct MetricOpts {
  std::string catalog, metric_json;
  std::vector<std::string> params;  // key=value
  double s = kUnset, a = kUnset, lambda = kUnset, scale = kUnset, N = kUnset;
  double n_param = kUnset;  // --n for classify/curvature
};

void add_metric_options(CLI::App* sub, MetricOpts& mo, ConfigMerge& cm,
                        bool n_is_order) {
  cm.bind(sub->add_option("--catalog", mo.catalog, "catalog entry name"),
          "catalog", mo.catalog);
  cm.bind(sub->add_option("--metric-json", mo.metric_json,
                          "metric descriptor: inline JSON or a file path"),
          "metric_json", mo.metric_json);
  cm.bind(sub->add_option("--param", mo.params,
                          "catalog parameter as key=value (repeatable)"),
          "params", mo.params);
  cm.bind(sub->add_option("--s", mo.s, "catalog parameter s"), "s", mo.s);
  cm.bind(sub->add_option("--a", mo.a, "catalog parameter a"), "a", mo.a);
  cm.bind(sub->add_option("--lambda", mo.lambda, "catalog parameter lambda"),
          "lambda", mo.lambda);
  cm.bind(sub->add_option("--scale", mo.scale, "catalog parameter scale"),
          "scale", mo.scale);
  cm.bind(sub->add_option("--N", mo.N, "catalog parameter N"), "N", mo.N);
  if (n_is_order)
    cm.bind(sub->add_option("--n", mo.n_param, "catalog parameter n"), "n",
            mo.n_param);
}

ProfileMetric build_metric(const MetricOpts& mo) {
  bool have_cat = !mo.catalog.empty(), have_json = !mo.metric_json.empty();
  if (have_cat == have_json)
    fail(ErrorCode::BadParams,
         "give exactly one metric source: --catalog or --metric-json");
  if (have_json) {
    json j;
    try {
      if (!mo.metric_json.empty() && mo.metric_json.front() == '{') {
        j = json::parse(mo.metric_json);
      } else {
        std::ifstream in(mo.metric_json);
        if (!in)
          fail(ErrorCode::BadParams,
               "cannot open metric file " + mo.metric_json);
        in >> j;
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      fail(ErrorCode::BadParams, std::string("metric JSON parse: ") + e.what());
    }
    return metric_from_json(j);
  }
  std::map<std::string, double> p;
  for (const auto& kv : mo.params) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      fail(ErrorCode::BadParams, "--param expects key=value, got " + kv);
    try {
      p[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      fail(ErrorCode::BadParams, "--param value is not a number in " + kv);
    }
  }
  if (std::isfinite(mo.s)) p["s"] = mo.s;
  if (std::isfinite(mo.a)) p["a"] = mo.a;
  if (std::isfinite(mo.lambda)) p["lambda"] = mo.lambda;
  if (std::isfinite(mo.scale)) p["scale"] = mo.scale;
  if (std::isfinite(mo.N)) p["N"] = mo.N;
  if (std::isfinite(mo.n_param)) p["n"] = mo.n_param;
  return instantiate(mo.catalog, p);
}

// Refuse to run dynamics on anything that fails completeness screening.
void require_complete(const ProfileMetric& m, bool force) {
  auto c = classify_manifold(m);
  if (c.case_label == CaseLabel::Incomplete && !force)
    fail(ErrorCode::IncompleteManifold,
         c.incomplete_reason + " (use --force to run anyway)");
}

struct StartOpts {
  double theta0 = kUnset, x0 = kUnset, u0 = kUnset, chi0 = kUnset;
  double ang_theta = M_PI / 2, ang_phi = 0, ang_psi = 0;
};

void add_start_options(CLI::App* sub, StartOpts& so, ConfigMerge& cm) {
  cm.bind(sub->add_option("--theta0", so.theta0,
                          "start angle (one-dimensional profiles)"),
          "theta0", so.theta0);
  cm.bind(sub->add_option("--x0", so.x0, "start in the native coordinate"),
          "x0", so.x0);
  cm.bind(sub->add_option("--u0", so.u0, "start u (potential families)"),
          "u0", so.u0);
  cm.bind(sub->add_option("--chi0", so.chi0, "start in the chi coordinate"),
          "chi0", so.chi0);
  cm.bind(sub->add_option("--ang-theta", so.ang_theta,
                          "orbit polar angle for radial starts"),
          "ang_theta", so.ang_theta);
  cm.bind(sub->add_option("--ang-phi", so.ang_phi,
                          "orbit azimuth for radial starts"),
          "ang_phi", so.ang_phi);
  cm.bind(sub->add_option("--ang-psi", so.ang_psi,
                          "fiber phase for radial starts"),
          "ang_psi", so.ang_psi);
}

ChartPoint ray_point(const ProfileMetric& m, double u, const StartOpts& so) {
  std::vector<std::complex<double>> z(m.N, 0.0);
  if (u < 0) fail(ErrorCode::BadParams, "u must be nonnegative");
  if (m.N == 2) {
    z[0] = std::sqrt(u) * std::cos(so.ang_theta / 2);
    z[1] = std::polar(std::sqrt(u) * std::sin(so.ang_theta / 2), so.ang_phi);
  } else {
    z[0] = std::sqrt(u);
  }
  return complex_point(z);
}

ChartPoint resolve_start(const ProfileMetric& m, const StartOpts& so) {
  int n_set = int(std::isfinite(so.theta0)) + int(std::isfinite(so.x0)) +
              int(std::isfinite(so.u0)) + int(std::isfinite(so.chi0));
  if (n_set != 1)
    fail(ErrorCode::BadParams,
         "give exactly one of --theta0, --x0, --u0, --chi0");
  if (std::isfinite(so.theta0)) {
    if (m.family != Family::OneDim)
      fail(ErrorCode::BadParams,
           "--theta0 applies to one-dimensional profiles; use --x0");
    return theta_point(so.theta0);
  }
  if (std::isfinite(so.u0)) {
    if (m.family != Family::PotentialUN)
      fail(ErrorCode::BadParams, "--u0 applies to potential families");
    return ray_point(m, so.u0, so);
  }
  if (std::isfinite(so.x0)) {
    switch (m.family) {
      case Family::OneDim:
        return theta_point(so.x0);
      case Family::RadialUN:
        return radial_point(so.x0, so.ang_theta, so.ang_phi, so.ang_psi);
      case Family::PotentialUN:
        return ray_point(m, so.x0, so);
    }
  }
  return chi_point(so.chi0, m.family == Family::OneDim ? 0.0 : so.ang_theta,
                   so.ang_phi, so.ang_psi);
}

struct SimOpts {
  double sigma = 1.0, dt = 1e-3, absorb_v_tol = -1;
  long steps = 100000, n = 1;
  std::uint64_t seed = 0;
  int stride = -1;
  int threads = 0;  // 0: pick hardware parallelism
  double chi_lo = kUnset, chi_hi = kUnset;
  bool full = false;
};

void add_sim_options(CLI::App* sub, SimOpts& so, ConfigMerge& cm,
                     long default_n) {
  so.n = default_n;
  cm.bind(sub->add_option("--sigma", so.sigma, "noise strength"), "sigma",
          so.sigma);
  cm.bind(sub->add_option("--dt", so.dt, "time step"), "dt", so.dt);
  cm.bind(sub->add_option("--steps", so.steps, "maximum steps per path"),
          "steps", so.steps);
  cm.bind(sub->add_option("--n", so.n, "number of paths"), "n", so.n);
  cm.bind(sub->add_option("--seed", so.seed, "base RNG seed"), "seed",
          so.seed);
  cm.bind(sub->add_option("--record-stride", so.stride,
                          "steps between records (default about 200 records)"),
          "record_stride", so.stride);
  cm.bind(sub->add_option("--absorb-v-tol", so.absorb_v_tol,
                          "absorption threshold on V"),
          "absorb_v_tol", so.absorb_v_tol);
  cm.bind(sub->add_option("--chi-lo", so.chi_lo, "lower chi cutoff"),
          "chi_lo", so.chi_lo);
  cm.bind(sub->add_option("--chi-hi", so.chi_hi, "upper chi cutoff"),
          "chi_hi", so.chi_hi);
  cm.bind(sub->add_option("--threads", so.threads,
                          "worker threads (COLLAPSE_LAB_THREADS overrides)"),
          "threads", so.threads);
  cm.bind(sub->add_flag("--full", so.full,
                        "track the complex components (potential families)"),
          "full", so.full);
}

int resolve_threads(int requested) {
  if (const char* env = std::getenv("COLLAPSE_LAB_THREADS")) {
    int t = std::atoi(env);
    if (t >= 1) return t;
  }
  if (requested >= 1) return requested;
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

SimConfig to_sim_config(const ProfileMetric& m, const SimOpts& so,
                        const StartOpts& st) {
  SimConfig cfg;
  cfg.sigma = so.sigma;
  cfg.dt = so.dt;
  cfg.max_steps = so.steps;
  cfg.n_trajectories = so.n;
  cfg.seed = so.seed;
  cfg.record_stride = so.stride;
  cfg.absorb_V_tol = so.absorb_v_tol;
  cfg.chi_bounds = {so.chi_lo, so.chi_hi};
  cfg.threads = resolve_threads(so.threads);
  cfg.full_state = so.full;
  cfg.start = resolve_start(m, st);
  return cfg;
}

// Output sink: --out path or stdout.
struct Sink {
  std::ofstream file;
  bool to_file = false;
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file.open(path);
    if (!file) fail(ErrorCode::BadParams, "cannot open output file " + path);
    to_file = true;
  }
  std::ostream& out() { return to_file ? file : std::cout; }
};

void emit_json(Sink& sink, json j, bool no_timestamp) {
  if (!no_timestamp) j["timestamp"] = iso_timestamp();
  sink.out() << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"collapse_lab: geometry, classification and stochastic "
               "collapse experiments on cohomogeneity-one Kahler metrics"};
  app.require_subcommand(1);
  int rc = 0;

  // ---- classify ----
  auto* cls = app.add_subcommand("classify",
                                 "endpoint structure and case label as JSON");
  auto cls_cm = std::make_shared<ConfigMerge>();
  auto cls_mo = std::make_shared<MetricOpts>();
  auto cls_out = std::make_shared<std::string>();
  auto cls_nots = std::make_shared<bool>(false);
  auto cls_cfgp = std::make_shared<std::string>();
  add_metric_options(cls, *cls_mo, *cls_cm, true);
  cls->add_option("--config", *cls_cfgp, "JSON config merged under flags");
  cls_cm->bind(cls->add_option("--out", *cls_out, "write the report here"),
               "out", *cls_out);
  cls_cm->bind(cls->add_flag("--no-timestamp", *cls_nots,
                             "omit the timestamp field"),
               "no_timestamp", *cls_nots);
  cls->callback([=]() {
    if (!cls_cfgp->empty()) cls_cm->load(*cls_cfgp);
    cls_cm->merge();
    auto m = build_metric(*cls_mo);
    auto c = classify_manifold(m);
    json j = classification_json(c);
    j["metric"] = metric_to_json(m);
    Sink sink(*cls_out);
    emit_json(sink, j, *cls_nots);
  });

  // ---- curvature ----
  auto* cur = app.add_subcommand(
      "curvature", "frame curvature profile as CSV plus positivity verdicts");
  auto cur_cm = std::make_shared<ConfigMerge>();
  auto cur_mo = std::make_shared<MetricOpts>();
  auto cur_out = std::make_shared<std::string>();
  auto cur_nots = std::make_shared<bool>(false);
  auto cur_force = std::make_shared<bool>(false);
  auto cur_cfgp = std::make_shared<std::string>();
  auto cur_pts = std::make_shared<int>(50);
  add_metric_options(cur, *cur_mo, *cur_cm, true);
  cur->add_option("--config", *cur_cfgp, "JSON config merged under flags");
  cur_cm->bind(cur->add_option("--grid-points", *cur_pts,
                               "interior sample count"),
               "grid_points", *cur_pts);
  cur_cm->bind(cur->add_option("--out", *cur_out, "write the report here"),
               "out", *cur_out);
  cur_cm->bind(cur->add_flag("--no-timestamp", *cur_nots,
                             "omit the timestamp comment"),
               "no_timestamp", *cur_nots);
  cur_cm->bind(cur->add_flag("--force", *cur_force,
                             "run even if classification is Incomplete"),
               "force", *cur_force);
  cur->callback([=]() {
    if (!cur_cfgp->empty()) cur_cm->load(*cur_cfgp);
    cur_cm->merge();
    auto m = build_metric(*cur_mo);
    require_complete(m, *cur_force);
    if (*cur_pts < 1) fail(ErrorCode::BadParams, "--grid-points must be >= 1");
    Sink sink(*cur_out);
    auto& os = sink.out();
    if (!*cur_nots) os << "# generated " << iso_timestamp() << "\n";
    double lo = m.x_lo;
    double hi = std::isfinite(m.x_hi) ? m.x_hi : m.x_cap;
    int P = *cur_pts;
    if (m.family == Family::OneDim) {
      os << "theta, K_H\n";
      for (int k = 1; k <= P; ++k) {
        double x = lo + (hi - lo) * k / (P + 1);
        os << fmt(x) << ", " << fmt(gauss_curvature(m, x)) << "\n";
      }
    } else {
      os << "R, R0101, R0123, R0303, R0312, R1212, K_H\n";
      for (int k = 1; k <= P; ++k) {
        double x = lo + (hi - lo) * k / (P + 1);
        auto r = riemann_components(m, R_of_native(m, x));
        os << fmt(r.R) << ", " << fmt(r.R0101) << ", " << fmt(r.R0123)
           << ", " << fmt(r.R0303) << ", " << fmt(r.R0312) << ", "
           << fmt(r.R1212) << ", " << fmt(r.k_h) << "\n";
      }
    }
    auto v = positivity_scan(m, default_scan_grid(m));
    os << "\n" << verdicts_json(v).dump(2) << "\n";
  });

  // ---- simulate ----
  auto* sim = app.add_subcommand(
      "simulate", "integrate paths: trajectory CSV (--n 1) or ensemble JSON");
  auto sim_cm = std::make_shared<ConfigMerge>();
  auto sim_mo = std::make_shared<MetricOpts>();
  auto sim_so = std::make_shared<SimOpts>();
  auto sim_st = std::make_shared<StartOpts>();
  auto sim_out = std::make_shared<std::string>();
  auto sim_nots = std::make_shared<bool>(false);
  auto sim_force = std::make_shared<bool>(false);
  auto sim_cfgp = std::make_shared<std::string>();
  add_metric_options(sim, *sim_mo, *sim_cm, false);
  add_start_options(sim, *sim_st, *sim_cm);
  add_sim_options(sim, *sim_so, *sim_cm, 1);
  sim->add_option("--config", *sim_cfgp, "JSON config merged under flags");
  sim_cm->bind(sim->add_option("--out", *sim_out, "write the report here"),
               "out", *sim_out);
  sim_cm->bind(sim->add_flag("--no-timestamp", *sim_nots,
                             "omit the timestamp"),
               "no_timestamp", *sim_nots);
  sim_cm->bind(sim->add_flag("--force", *sim_force,
                             "run even if classification is Incomplete"),
               "force", *sim_force);
  sim->callback([=]() {
    if (!sim_cfgp->empty()) sim_cm->load(*sim_cfgp);
    sim_cm->merge();
    auto m = build_metric(*sim_mo);
    require_complete(m, *sim_force);
    if (sim_so->full && m.family != Family::PotentialUN)
      fail(ErrorCode::BadParams, "--full needs a potential family");
    auto cfg = to_sim_config(m, *sim_so, *sim_st);
    Sink sink(*sim_out);
    if (cfg.n_trajectories == 1) {
      auto tr = run_trajectory(m, cfg);
      std::vector<std::complex<double>> z0;
      double chi_start = 0;
      if (cfg.full_state) {
        z0 = chart_convert(m, cfg.start, Chart::Complex).z;
        chi_start = chi_of_native(m, native_of_point(m, cfg.start));
      }
      auto& os = sink.out();
      if (!*sim_nots) os << "# generated " << iso_timestamp() << "\n";
      os << "t, chi, phi, H, V";
      for (size_t a = 0; a < z0.size(); ++a)
        os << ", Re z^" << a + 1 << ", Im z^" << a + 1;
      os << "\n";
      int phase_i = m.family == Family::OneDim ? 1 : 3;
      for (size_t k = 0; k < tr.times.size(); ++k) {
        double chi = tr.states[k].x[0];
        os << fmt(tr.times[k]) << ", " << fmt(chi) << ", "
           << fmt(tr.states[k].x[phase_i]) << ", " << fmt(tr.H_series[k])
           << ", " << fmt(tr.V_series[k]);
        // the ray is invariant, so components rebuild from chi and t alone
        std::complex<double> w =
            std::exp(std::complex<double>(chi - chi_start, 2 * tr.times[k]));
        for (auto& za : z0) {
          auto z = za * w;
          os << ", " << fmt(z.real()) << ", " << fmt(z.imag());
        }
        os << "\n";
      }
      if (tr.absorbed_at)
        os << "# absorbed at t = " << fmt(tr.absorbed_at->first) << " ("
           << tr.absorbed_at->second << ")\n";
      if (tr.non_convergence) os << "# step limit reached before absorption\n";
    } else {
      auto st = run_ensemble(m, cfg);
      emit_json(sink, ensemble_summary_json(st), *sim_nots);
    }
  });

  // ---- hitprob ----
  auto* hit = app.add_subcommand(
      "hitprob", "absorption split: Monte Carlo vs analytic vs quadrature");
  auto hit_cm = std::make_shared<ConfigMerge>();
  auto hit_mo = std::make_shared<MetricOpts>();
  auto hit_so = std::make_shared<SimOpts>();
  auto hit_st = std::make_shared<StartOpts>();
  auto hit_out = std::make_shared<std::string>();
  auto hit_paths_out = std::make_shared<std::string>();
  auto hit_nots = std::make_shared<bool>(false);
  auto hit_force = std::make_shared<bool>(false);
  auto hit_strict = std::make_shared<bool>(false);
  auto hit_cfgp = std::make_shared<std::string>();
  add_metric_options(hit, *hit_mo, *hit_cm, false);
  add_start_options(hit, *hit_st, *hit_cm);
  add_sim_options(hit, *hit_so, *hit_cm, 10000);
  hit->add_option("--config", *hit_cfgp, "JSON config merged under flags");
  hit_cm->bind(hit->add_option("--out", *hit_out, "write the report here"),
               "out", *hit_out);
  hit_cm->bind(hit->add_option("--paths-out", *hit_paths_out,
                               "CSV of per-path terminal data"),
               "paths_out", *hit_paths_out);
  hit_cm->bind(hit->add_flag("--no-timestamp", *hit_nots,
                             "omit the timestamp"),
               "no_timestamp", *hit_nots);
  hit_cm->bind(hit->add_flag("--force", *hit_force,
                             "run even if classification is Incomplete"),
               "force", *hit_force);
  hit_cm->bind(hit->add_flag("--strict", *hit_strict,
                             "exit 3 when the statistical check fails"),
               "strict", *hit_strict);
  hit->callback([=, &rc]() {
    if (!hit_cfgp->empty()) hit_cm->load(*hit_cfgp);
    hit_cm->merge();
    auto m = build_metric(*hit_mo);
    require_complete(m, *hit_force);
    auto cfg = to_sim_config(m, *hit_so, *hit_st);
    double chi0 = chi_of_native(m, native_of_point(m, cfg.start));
    double p_analytic = hitting_probability_analytic(m, chi0);
    double p_oracle = hitting_probability_oracle(m, chi0);
    auto st = run_ensemble(m, cfg);
    long absorbed = st.n_lower + st.n_upper;
    double p_mc = absorbed > 0 ? double(st.n_upper) / absorbed : 0.0;
    double se = absorbed > 0
                    ? std::sqrt(std::max(1e-300, p_analytic *
                                                     (1 - p_analytic) /
                                                     absorbed))
                    : 0.0;
    double z = absorbed > 0 ? (p_mc - p_analytic) / se : 0.0;
    bool pass = absorbed > 0 && std::fabs(z) < 3;
    json j;
    j["analytic"] = p_analytic;
    j["oracle"] = p_oracle;
    j["mc"] = p_mc;
    j["standard_error"] = se;
    j["z_score"] = z;
    j["pass"] = pass;
    j["chi0"] = chi0;
    j["endpoints"] = {{"lower", st.n_lower},
                      {"upper", st.n_upper},
                      {"none", st.n_none}};
    if (!st.warning.empty()) j["warning"] = st.warning;
    Sink sink(*hit_out);
    emit_json(sink, j, *hit_nots);
    if (!hit_paths_out->empty()) {
      Sink ps(*hit_paths_out);
      ps.out() << "index, side, absorb_time, H_final\n";
      for (size_t i = 0; i < st.side.size(); ++i)
        ps.out() << i << ", " << int(st.side[i]) << ", "
                 << fmt(st.absorb_time[i]) << ", " << fmt(st.H_final[i])
                 << "\n";
    }
    if (*hit_strict && !pass) rc = 3;
  });

  // ---- lueders ----
  auto* lue = app.add_subcommand(
      "lueders", "ray confinement and Born split for a potential family");
  auto lue_cm = std::make_shared<ConfigMerge>();
  auto lue_mo = std::make_shared<MetricOpts>();
  auto lue_so = std::make_shared<SimOpts>();
  auto lue_z0 = std::make_shared<std::vector<double>>();
  auto lue_out = std::make_shared<std::string>();
  auto lue_nots = std::make_shared<bool>(false);
  auto lue_force = std::make_shared<bool>(false);
  auto lue_strict = std::make_shared<bool>(false);
  auto lue_cfgp = std::make_shared<std::string>();
  add_metric_options(lue, *lue_mo, *lue_cm, false);
  add_sim_options(lue, *lue_so, *lue_cm, 10000);
  lue->add_option("--config", *lue_cfgp, "JSON config merged under flags");
  lue_cm->bind(lue->add_option("--z0", *lue_z0,
                               "start components as re,im pairs")
                   ->delimiter(','),
               "z0", *lue_z0);
  lue_cm->bind(lue->add_option("--out", *lue_out, "write the report here"),
               "out", *lue_out);
  lue_cm->bind(lue->add_flag("--no-timestamp", *lue_nots,
                             "omit the timestamp"),
               "no_timestamp", *lue_nots);
  lue_cm->bind(lue->add_flag("--force", *lue_force,
                             "run even if classification is Incomplete"),
               "force", *lue_force);
  lue_cm->bind(lue->add_flag("--strict", *lue_strict,
                             "exit 3 when any check fails"),
               "strict", *lue_strict);
  lue->callback([=, &rc]() {
    if (!lue_cfgp->empty()) lue_cm->load(*lue_cfgp);
    lue_cm->merge();
    auto m = build_metric(*lue_mo);
    require_complete(m, *lue_force);
    if (lue_z0->empty() || lue_z0->size() % 2 != 0)
      fail(ErrorCode::BadParams, "--z0 expects re,im pairs");
    std::vector<std::complex<double>> z0(lue_z0->size() / 2);
    for (size_t i = 0; i < z0.size(); ++i)
      z0[i] = {(*lue_z0)[2 * i], (*lue_z0)[2 * i + 1]};
    SimConfig cfg;
    cfg.sigma = lue_so->sigma;
    cfg.dt = lue_so->dt;
    cfg.max_steps = lue_so->steps;
    cfg.n_trajectories = lue_so->n;
    cfg.seed = lue_so->seed;
    cfg.record_stride = lue_so->stride;
    cfg.absorb_V_tol = lue_so->absorb_v_tol;
    cfg.chi_bounds = {lue_so->chi_lo, lue_so->chi_hi};
    cfg.threads = resolve_threads(lue_so->threads);
    auto rep = lueders_check(m, z0, cfg);
    Sink sink(*lue_out);
    emit_json(sink, lueders_json(rep), *lue_nots);
    if (*lue_strict && !rep.pass) rc = 3;
  });

  // ---- brackets ----
  auto* brk = app.add_subcommand(
      "brackets", "Poisson bracket of two observables at a point");
  auto brk_cm = std::make_shared<ConfigMerge>();
  auto brk_mo = std::make_shared<MetricOpts>();
  auto brk_pt = std::make_shared<std::vector<double>>();
  auto brk_z0 = std::make_shared<std::vector<double>>();
  auto brk_a = std::make_shared<std::string>("H");
  auto brk_b = std::make_shared<std::string>("S3");
  auto brk_out = std::make_shared<std::string>();
  auto brk_nots = std::make_shared<bool>(false);
  auto brk_force = std::make_shared<bool>(false);
  auto brk_cfgp = std::make_shared<std::string>();
  add_metric_options(brk, *brk_mo, *brk_cm, true);
  brk->add_option("--config", *brk_cfgp, "JSON config merged under flags");
  brk_cm->bind(brk->add_option("--point", *brk_pt,
                               "chart point: theta,psi (one-dim) or "
                               "R,theta,phi,psi (radial)")
                   ->delimiter(','),
               "point", *brk_pt);
  brk_cm->bind(brk->add_option("--z0", *brk_z0,
                               "complex chart point as re,im pairs")
                   ->delimiter(','),
               "z0", *brk_z0);
  brk_cm->bind(brk->add_option("--obs-a", *brk_a,
                               "H, S1..S3, or {\"spin_matrix\": [[...]]}"),
               "obs_a", *brk_a);
  brk_cm->bind(brk->add_option("--obs-b", *brk_b, "second observable"),
               "obs_b", *brk_b);
  brk_cm->bind(brk->add_option("--out", *brk_out, "write the report here"),
               "out", *brk_out);
  brk_cm->bind(brk->add_flag("--no-timestamp", *brk_nots,
                             "omit the timestamp"),
               "no_timestamp", *brk_nots);
  brk_cm->bind(brk->add_flag("--force", *brk_force,
                             "run even if classification is Incomplete"),
               "force", *brk_force);
  brk->callback([=]() {
    if (!brk_cfgp->empty()) brk_cm->load(*brk_cfgp);
    brk_cm->merge();
    auto m = build_metric(*brk_mo);
    require_complete(m, *brk_force);
    ChartPoint p;
    if (!brk_z0->empty()) {
      if (m.family != Family::PotentialUN)
        fail(ErrorCode::BadParams, "--z0 needs a potential family");
      if (brk_z0->size() % 2 != 0)
        fail(ErrorCode::BadParams, "--z0 expects re,im pairs");
      std::vector<std::complex<double>> z(brk_z0->size() / 2);
      for (size_t i = 0; i < z.size(); ++i)
        z[i] = {(*brk_z0)[2 * i], (*brk_z0)[2 * i + 1]};
      p = complex_point(z);
    } else if (m.family == Family::OneDim) {
      if (brk_pt->size() != 2)
        fail(ErrorCode::BadParams, "--point expects theta,psi");
      p = theta_point((*brk_pt)[0], (*brk_pt)[1]);
    } else {
      if (brk_pt->size() != 4)
        fail(ErrorCode::BadParams, "--point expects R,theta,phi,psi");
      p = radial_point((*brk_pt)[0], (*brk_pt)[1], (*brk_pt)[2],
                       (*brk_pt)[3]);
    }
    auto make_obs = [&m](const std::string& spec) -> ScalarField {
      if (spec == "H")
        return [&m](const ChartPoint& q) { return hamiltonian(m, q); };
      if (spec == "V")
        return [&m](const ChartPoint& q) { return dispersion(m, q); };
      if (spec == "S1" || spec == "S2" || spec == "S3") {
        int i = spec[1] - '1';
        return [&m, i](const ChartPoint& q) { return spin(m, q)[i]; };
      }
      json js;
      try {
        js = json::parse(spec);
      } catch (const std::exception&) {
        fail(ErrorCode::BadParams, "unknown observable '" + spec + "'");
      }
      if (!js.is_object() || !js.contains("spin_matrix"))
        fail(ErrorCode::BadParams, "observable JSON needs spin_matrix");
      std::vector<std::vector<std::complex<double>>> h;
      for (auto& row : js["spin_matrix"]) {
        h.emplace_back();
        for (auto& cell : row) {
          if (cell.is_array())
            h.back().push_back({cell[0].get<double>(),
                                cell[1].get<double>()});
          else
            h.back().push_back({cell.get<double>(), 0.0});
        }
      }
      return [&m, h](const ChartPoint& q) { return spin_general(m, q, h); };
    };
    auto fa = make_obs(*brk_a);
    auto fb = make_obs(*brk_b);
    double val = poisson_bracket(m, p, fa, fb);
    json j;
    j["a"] = *brk_a;
    j["b"] = *brk_b;
    j["bracket"] = val;
    Sink sink(*brk_out);
    emit_json(sink, j, *brk_nots);
  });

  // ---- catalog ----
  auto* cat = app.add_subcommand("catalog",
                                 "list built-in metrics and their schemas");
  auto cat_out = std::make_shared<std::string>();
  cat->add_option("--out", *cat_out, "write the listing here");
  cat->callback([=]() {
    Sink sink(*cat_out);
    sink.out() << catalog_listing_json().dump(2) << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
