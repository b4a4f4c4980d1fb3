#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "collapse/error.hpp"
#include "collapse/geometry.hpp"
#include "collapse/topology.hpp"
#include "json.hpp"

namespace collapse {

struct ParamSpec {
  std::string name;
  double def = 0;
  bool integer = false;
  std::string constraint;  // human-readable validity rule
};

// Built-in family descriptor. Expectations are re-derived from the metric
// by the classification and curvature scans in the test suite; they hold for
// every admissible parameter value, not just the defaults.
struct CatalogEntry {
  std::string name;
  Family family = Family::OneDim;
  std::vector<ParamSpec> params;
  std::string domain_rule;
  CaseLabel expected_case = CaseLabel::Incomplete;
  bool expect_collapse_H = false;
  std::optional<bool> expect_reduce_S;
  std::optional<bool> expect_all_bisectional;
  std::string notes;
};

namespace detail {

inline double require_positive(const std::map<std::string, double>& p,
                               const std::string& key, double def) {
  auto it = p.find(key);
  double v = it == p.end() ? def : it->second;
  if (!(v > 0) || !std::isfinite(v))
    fail(ErrorCode::BadParams, key + " must be positive");
  return v;
}

inline int require_integer_at_least(const std::map<std::string, double>& p,
                                    const std::string& key, int def,
                                    int min_value) {
  auto it = p.find(key);
  double v = it == p.end() ? def : it->second;
  if (v != std::floor(v) || v < min_value || v > 1e9)
    fail(ErrorCode::BadParams,
         key + " must be an integer >= " + std::to_string(min_value));
  return static_cast<int>(v);
}

inline void reject_unknown(const std::map<std::string, double>& p,
                           std::initializer_list<const char*> known,
                           const std::string& entry) {
  for (auto& [k, v] : p) {
    bool ok = false;
    for (auto* s : known) ok = ok || k == s;
    if (!ok)
      fail(ErrorCode::BadParams, "unknown parameter '" + k + "' for " + entry);
  }
}

// ---- profile builders ----

inline ProfileMetric build_sphere_1d() {
  Profile pr;
  pr.f = [](double x, int k) {
    switch (k) {
      case 0: return std::sin(x);
      case 1: return std::cos(x);
      case 2: return -std::sin(x);
      default: return -std::cos(x);
    }
  };
  pr.analytic_order = 3;
  pr.chi_of_x = [](double x) { return std::log(std::tan(x / 2)); };
  pr.x_of_chi = [](double chi) { return 2 * std::atan(std::exp(chi)); };
  pr.H_of_x = [](double x) { return std::cos(x); };
  const double pi = std::acos(-1.0);
  return make_metric(Family::OneDim, 1, 0.0, pi, std::move(pr), "sphere_1d",
                     1.0);
}

inline ProfileMetric build_cylinder_1d() {
  Profile pr;
  pr.f = [](double x, int k) {
    double t = std::tanh(x), c = 1 / std::cosh(x), c2 = c * c;
    switch (k) {
      case 0: return t;
      case 1: return c2;
      case 2: return -2 * c2 * t;
      default: return 4 * c2 * t * t - 2 * c2 * c2;
    }
  };
  pr.analytic_order = 3;
  double l0 = std::log(std::sinh(1.0));
  pr.chi_of_x = [l0](double x) { return std::log(std::sinh(x)) - l0; };
  pr.x_of_chi = [l0](double chi) { return std::asinh(std::exp(chi + l0)); };
  // -log cosh x, written to survive large x
  pr.H_of_x = [](double x) {
    return -x - std::log1p(std::exp(-2 * x)) + std::log(2.0);
  };
  return make_metric(Family::OneDim, 1, 0.0,
                     std::numeric_limits<double>::infinity(), std::move(pr),
                     "cylinder_1d", 0.0);
}

inline ProfileMetric build_fubini_study(double a) {
  double a2 = a * a;
  Profile pr;
  pr.f = [a2](double x, int k) {
    switch (k) {
      case 0: return 1 - x * x / a2;
      case 1: return -2 * x / a2;
      case 2: return -2 / a2;
      default: return 0.0;
    }
  };
  pr.analytic_order = 3;
  pr.chi_of_x = [a2](double x) { return std::log(x * x / (a2 - x * x)); };
  pr.x_of_chi = [a = a](double chi) {
    // R = a / sqrt(1 + e^{-chi}); guard the chi -> -inf direction
    return chi >= 0 ? a / std::sqrt(1 + std::exp(-chi))
                    : a * std::exp(chi / 2) / std::sqrt(1 + std::exp(chi));
  };
  auto m = make_metric(Family::RadialUN, 2, 0.0, a, std::move(pr),
                       "fubini_study");
  m.params = {{"scale", a}};
  return m;
}

inline ProfileMetric build_eguchi_hanson(double a) {
  double a4 = a * a * a * a;
  Profile pr;
  pr.f = [a4](double x, int k) {
    double x2 = x * x, x4 = x2 * x2;
    switch (k) {
      case 0: return 1 - a4 / x4;
      case 1: return 4 * a4 / (x4 * x);
      case 2: return -20 * a4 / (x4 * x2);
      default: return 120 * a4 / (x4 * x2 * x);
    }
  };
  pr.analytic_order = 3;
  double c0 = std::pow(a + 1, 4) - a4;  // anchors chi(a + 1) = 0
  pr.chi_of_x = [a4, c0](double x) {
    double x2 = x * x;
    return 0.5 * std::log((x2 * x2 - a4) / c0);
  };
  pr.x_of_chi = [a4, c0](double chi) {
    return std::pow(a4 + c0 * std::exp(2 * chi), 0.25);
  };
  auto m = make_metric(Family::RadialUN, 2, a,
                       std::numeric_limits<double>::infinity(), std::move(pr),
                       "eguchi_hanson");
  m.params = {{"a", a}};
  return m;
}

inline ProfileMetric build_hitchin(double s, int n) {
  double c = s * n + 1;  // the two profile zeros sit at v = 1 and v = c
  Profile pr;
  pr.f = [s, c](double x, int k) {
    double v = x * x;
    switch (k) {
      case 0: return ((c + 1) - v - c / v) / s;
      case 1: return (2 * x / s) * (c / (v * v) - 1);
      case 2: return (2 / s) * (-3 * c / (v * v) - 1);
      default: return 24 * x * c / (s * v * v * v);
    }
  };
  pr.analytic_order = 3;
  double nn = n;
  pr.chi_of_x = [c, nn](double x) {
    double v = x * x;
    return std::log((v - 1) / (c - v)) / nn;
  };
  pr.x_of_chi = [c, nn](double chi) {
    double t = nn * chi;
    double v = t <= 0 ? (1 + c * std::exp(t)) / (1 + std::exp(t))
                      : (std::exp(-t) + c) / (std::exp(-t) + 1);
    return std::sqrt(v);
  };
  // Domain ends are located by bisection on the profile sign and cached in
  // the metric, rather than trusting the factored form.
  auto fv = [s, c](double v) { return ((c + 1) - v - c / v) / s; };
  double vm = 0.5 * (c + 1);  // strictly interior, F(vm) > 0
  auto bisect_zero = [&](double lo, double hi) {
    // sign convention: F(lo side) and F(hi side) differ
    for (int i = 0; i < 200; ++i) {
      double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      if ((fv(mid) > 0) == (fv(hi) > 0))
        hi = mid;
      else
        lo = mid;
    }
    return 0.5 * (lo + hi);
  };
  double v_lo = bisect_zero(1e-12, vm);
  double v_hi = bisect_zero(2 * c + 2, vm);
  auto m = make_metric(Family::RadialUN, 2, std::sqrt(v_lo), std::sqrt(v_hi),
                       std::move(pr), "hitchin");
  m.params = {{"s", s}, {"n", static_cast<double>(n)}};
  return m;
}

inline ProfileMetric build_berger(double lambda) {
  Profile pr;
  pr.f = [lambda](double x, int k) {
    double v = x * x, d = 1 + v;
    switch (k) {
      case 0: return (1 + lambda * v) / d;
      case 1: return 2 * x * (lambda - 1) / (d * d);
      case 2: return 2 * (lambda - 1) * (1 - 3 * v) / (d * d * d);
      default: return -24 * x * (lambda - 1) * (1 - v) / (d * d * d * d);
    }
  };
  pr.analytic_order = 3;
  // chi = 2 log R + ((1-lambda)/lambda) log(1 + lambda R^2), anchored at R=1
  double c0 = lambda > 0 ? (1 - lambda) / lambda * std::log1p(lambda) : 1.0;
  pr.chi_of_x = [lambda, c0](double x) {
    double v = x * x;
    double tail = lambda > 0 ? (1 - lambda) / lambda * std::log1p(lambda * v)
                             : v;
    return 2 * std::log(x) + tail - c0;
  };
  auto m = make_metric(Family::RadialUN, 2, 0.0,
                       std::numeric_limits<double>::infinity(), std::move(pr),
                       "berger");
  m.params = {{"lambda", lambda}};
  return m;
}

inline ProfileMetric build_flat_potential(int N) {
  Profile pr;
  pr.f = [](double x, int k) { return k == 0 ? x : (k == 1 ? 1.0 : 0.0); };
  pr.analytic_order = 3;
  auto m = make_metric(Family::PotentialUN, N, 0.0,
                       std::numeric_limits<double>::infinity(), std::move(pr),
                       "flat_potential");
  m.params = {{"N", static_cast<double>(N)}};
  return m;
}

inline ProfileMetric build_fubini_study_potential(int N) {
  Profile pr;
  pr.f = [](double x, int k) {
    double d = 1 + x;
    switch (k) {
      case 0: return 0.5 * std::log1p(x);
      case 1: return 0.5 / d;
      case 2: return -0.5 / (d * d);
      default: return 1.0 / (d * d * d);
    }
  };
  pr.analytic_order = 3;
  auto m = make_metric(Family::PotentialUN, N, 0.0,
                       std::numeric_limits<double>::infinity(), std::move(pr),
                       "fubini_study_potential");
  m.params = {{"N", static_cast<double>(N)}};
  return m;
}

}  // namespace detail

inline const std::vector<CatalogEntry>& catalog_entries() {
  static const std::vector<CatalogEntry> entries = {
      {"sphere_1d",
       Family::OneDim,
       {},
       "theta in [0, pi]",
       CaseLabel::OneDimSphere,
       true,
       std::nullopt,
       std::nullopt,
       "round two-sphere, S = sin(theta), H = cos(theta), K = 1"},
      {"cylinder_1d",
       Family::OneDim,
       {},
       "theta in [0, inf)",
       CaseLabel::OneDimPlane,
       true,
       std::nullopt,
       std::nullopt,
       "S = tanh(theta): smooth pole plus an asymptotically cylindrical end; "
       "K = 2 sech^2(theta) > 0, and the lower end absorbs with "
       "probability one"},
      {"fubini_study",
       Family::RadialUN,
       {{"scale", 1.0, false, "scale > 0"}},
       "R in [0, scale]; F = 1 - (R/scale)^2",
       CaseLabel::Case1_NutBolt,
       true,
       true,
       true,
       "projective line/plane standard metric; nut at R = 0, bolt of order 1 "
       "at R = scale; constant curvature block 4/scale^2"},
      {"eguchi_hanson",
       Family::RadialUN,
       {{"a", 1.0, false, "a > 0"}},
       "R in [a, inf); F = 1 - (a/R)^4",
       CaseLabel::Case4_SemiInfiniteBolt,
       true,
       false,
       false,
       "bolt of order 2 at R = a, asymptotically locally Euclidean large-R "
       "end; mixed-sign curvature blocks"},
      {"hitchin",
       Family::RadialUN,
       {{"s", 0.1, false, "s > 0"}, {"n", 2, true, "integer n >= 2"}},
       "R between the two positive zeros of F = (R^2-1)(sn+1-R^2)/(sR^2)",
       CaseLabel::Case2_TwoBolts,
       true,
       false,
       false,
       "compact two-bolt family; both bolts have order n and the holomorphic "
       "sectional block is the constant 4/s"},
      {"berger",
       Family::RadialUN,
       {{"lambda", 0.5, false, "0 <= lambda <= 1"}},
       "R in [0, inf); F = (1 + lambda R^2)/(1 + R^2)",
       CaseLabel::Case3_SemiInfiniteNut,
       true,
       true,
       true,
       "nut plus a deformed-three-sphere infinite end; all curvature blocks "
       "positive for lambda < 1, flat at lambda = 1"},
      {"flat_potential",
       Family::PotentialUN,
       {{"N", 2, true, "integer N >= 2"}},
       "u in [0, inf); Sigma = u",
       CaseLabel::Case3_SemiInfiniteNut,
       false,
       false,
       false,
       "flat C^N; every curvature block vanishes, so no collapse"},
      {"fubini_study_potential",
       Family::PotentialUN,
       {{"N", 2, true, "integer N >= 2"}},
       "u in [0, inf); Sigma = (1/2) log(1 + u)",
       CaseLabel::Case1_NutBolt,
       true,
       true,
       true,
       "projective space via its potential; nut at u = 0, order-1 bolt at "
       "the u -> inf edge, radial picture identical to fubini_study"},
  };
  return entries;
}

inline const CatalogEntry& catalog_entry(const std::string& name) {
  for (auto& e : catalog_entries())
    if (e.name == name) return e;
  fail(ErrorCode::BadParams, "unknown catalog entry '" + name + "'");
}

inline ProfileMetric instantiate(const std::string& name,
                                 const std::map<std::string, double>& params =
                                     {}) {
  const CatalogEntry& e = catalog_entry(name);  // validates the name
  if (e.name == "sphere_1d") {
    detail::reject_unknown(params, {}, name);
    return detail::build_sphere_1d();
  }
  if (e.name == "cylinder_1d") {
    detail::reject_unknown(params, {}, name);
    return detail::build_cylinder_1d();
  }
  if (e.name == "fubini_study") {
    detail::reject_unknown(params, {"scale"}, name);
    return detail::build_fubini_study(
        detail::require_positive(params, "scale", 1.0));
  }
  if (e.name == "eguchi_hanson") {
    detail::reject_unknown(params, {"a"}, name);
    return detail::build_eguchi_hanson(
        detail::require_positive(params, "a", 1.0));
  }
  if (e.name == "hitchin") {
    detail::reject_unknown(params, {"s", "n"}, name);
    double s = detail::require_positive(params, "s", 0.1);
    int n = detail::require_integer_at_least(params, "n", 2, 2);
    return detail::build_hitchin(s, n);
  }
  if (e.name == "berger") {
    detail::reject_unknown(params, {"lambda"}, name);
    auto it = params.find("lambda");
    double lambda = it == params.end() ? 0.5 : it->second;
    if (!(lambda >= 0 && lambda <= 1))
      fail(ErrorCode::BadParams, "lambda must lie in [0, 1]");
    return detail::build_berger(lambda);
  }
  if (e.name == "flat_potential") {
    detail::reject_unknown(params, {"N"}, name);
    return detail::build_flat_potential(
        detail::require_integer_at_least(params, "N", 2, 2));
  }
  detail::reject_unknown(params, {"N"}, name);
  return detail::build_fubini_study_potential(
      detail::require_integer_at_least(params, "N", 2, 2));
}

// ---- JSON metric descriptors ----
// {"family": "radial_un",
//  "profile": {"name": "hitchin", "params": {"s": 0.1, "n": 2}},
//  "N": 2, "domain": [lo, hi]}
// User profiles: {"name": "polynomial", "coeffs": [...]} over the family's
// native variable, with "domain" required (upper end may be "inf").

namespace detail {

inline double json_domain_value(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf")
      return std::numeric_limits<double>::infinity();
    fail(ErrorCode::BadParams, "domain entries are numbers or \"inf\"");
  }
  if (!j.is_number()) fail(ErrorCode::BadParams, "bad domain entry");
  return j.get<double>();
}

inline Family family_from_string(const std::string& s) {
  if (s == "one_dim") return Family::OneDim;
  if (s == "radial_un") return Family::RadialUN;
  if (s == "potential_un") return Family::PotentialUN;
  fail(ErrorCode::BadParams, "unknown family '" + s + "'");
}

}  // namespace detail

inline nlohmann::json metric_to_json(const ProfileMetric& m) {
  nlohmann::json j;
  j["family"] = to_string(m.family);
  j["N"] = m.N;
  j["domain"] = nlohmann::json::array();
  j["domain"].push_back(m.x_lo);
  if (std::isfinite(m.x_hi))
    j["domain"].push_back(m.x_hi);
  else
    j["domain"].push_back("inf");
  nlohmann::json prof;
  prof["name"] = m.name;
  if (m.name == "polynomial") {
    std::vector<double> coeffs(m.params.size(), 0.0);
    for (auto& [k, v] : m.params) {
      size_t i = std::stoul(k.substr(1));
      if (i >= coeffs.size()) coeffs.resize(i + 1, 0.0);
      coeffs[i] = v;
    }
    prof["coeffs"] = coeffs;
    if (m.family == Family::OneDim && m.h_offset != 0)
      j["h_offset"] = m.h_offset;
  } else {
    prof["params"] = nlohmann::json::object();
    for (auto& [k, v] : m.params) prof["params"][k] = v;
  }
  j["profile"] = std::move(prof);
  return j;
}

inline ProfileMetric metric_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("profile") || !j["profile"].is_object() ||
      !j["profile"].contains("name"))
    fail(ErrorCode::BadParams, "metric JSON needs a profile object with name");
  const auto& prof = j["profile"];
  std::string pname = prof["name"].get<std::string>();

  if (pname != "polynomial") {
    std::map<std::string, double> params;
    if (prof.contains("params")) {
      if (!prof["params"].is_object())
        fail(ErrorCode::BadParams, "profile params must be an object");
      for (auto it = prof["params"].begin(); it != prof["params"].end(); ++it)
        params[it.key()] = it.value().get<double>();
    }
    // a top-level N is a parameter only for potential families; elsewhere it
    // is validated against the instantiated metric below
    if (j.contains("N") && catalog_entry(pname).family == Family::PotentialUN)
      params.emplace("N", j["N"].get<double>());
    auto m = instantiate(pname, params);
    if (j.contains("family") &&
        detail::family_from_string(j["family"].get<std::string>()) !=
            m.family)
      fail(ErrorCode::BadParams, "family does not match profile '" + pname +
                                     "'");
    if (j.contains("N") && j["N"].get<int>() != m.N)
      fail(ErrorCode::BadParams, "N does not match profile '" + pname + "'");
    // a "domain" field is informational for named profiles: the profile
    // formula determines the ends
    return m;
  }

  if (!j.contains("family"))
    fail(ErrorCode::BadParams, "polynomial profiles need a family");
  Family fam = detail::family_from_string(j["family"].get<std::string>());
  if (!prof.contains("coeffs") || !prof["coeffs"].is_array() ||
      prof["coeffs"].empty())
    fail(ErrorCode::BadParams, "polynomial profiles need coeffs");
  std::vector<double> coeffs;
  for (auto& c : prof["coeffs"]) coeffs.push_back(c.get<double>());
  if (!j.contains("domain") || !j["domain"].is_array() ||
      j["domain"].size() != 2)
    fail(ErrorCode::BadParams, "polynomial profiles need domain [lo, hi]");
  double lo = detail::json_domain_value(j["domain"][0]);
  double hi = detail::json_domain_value(j["domain"][1]);
  int N = j.contains("N") ? j["N"].get<int>() : (fam == Family::OneDim ? 1
                                                                       : 2);
  double h_offset =
      j.contains("h_offset") ? j["h_offset"].get<double>() : 0.0;

  Profile pr;
  pr.f = [coeffs](double x, int k) {
    // Horner over descending powers of the k-th derivative
    double acc = 0;
    for (size_t i = coeffs.size(); i-- > static_cast<size_t>(k);) {
      double w = coeffs[i];
      for (int r = 0; r < k; ++r) w *= static_cast<double>(i - r);
      acc = acc * x + w;
    }
    return acc;
  };
  pr.analytic_order = 3;
  auto m = make_metric(fam, N, lo, hi, std::move(pr), "polynomial", h_offset);
  m.params.clear();
  for (size_t i = 0; i < coeffs.size(); ++i)
    m.params.emplace_back("c" + std::to_string(i), coeffs[i]);
  return m;
}

// Listing used by the command-line catalog subcommand.
inline nlohmann::json catalog_listing_json() {
  nlohmann::json out = nlohmann::json::array();
  for (auto& e : catalog_entries()) {
    nlohmann::json je;
    je["name"] = e.name;
    je["family"] = to_string(e.family);
    je["params"] = nlohmann::json::array();
    for (auto& p : e.params) {
      nlohmann::json jp;
      jp["name"] = p.name;
      jp["default"] = p.def;
      jp["integer"] = p.integer;
      jp["constraint"] = p.constraint;
      je["params"].push_back(jp);
    }
    je["domain_rule"] = e.domain_rule;
    je["expected_case"] = to_string(e.expected_case);
    je["expected_positivity"] = {
        {"collapse_H", e.expect_collapse_H},
        {"reduce_S",
         e.expect_reduce_S ? nlohmann::json(*e.expect_reduce_S)
                           : nlohmann::json()},
        {"all_bisectional",
         e.expect_all_bisectional ? nlohmann::json(*e.expect_all_bisectional)
                                  : nlohmann::json()}};
    je["notes"] = e.notes;
    out.push_back(je);
  }
  return out;
}

}  // namespace collapse
