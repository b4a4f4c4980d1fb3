#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>

#include "collapse/catalog.hpp"
#include "collapse/geometry.hpp"
#include "test_support.hpp"

using namespace collapse;
using testsup::throws_code;

TEST_CASE("profile derivatives fall back to finite differences",
          "[geometry]") {
  Profile pr;
  pr.f = [](double x, int) { return std::sin(x); };
  pr.analytic_order = 0;
  auto m = make_metric(Family::OneDim, 1, 0.1, 3.0, std::move(pr), "fd_sin");
  CHECK(eval_profile(m, 1.3, 0) == std::sin(1.3));
  CHECK(eval_profile(m, 1.3, 1) == Catch::Approx(std::cos(1.3)).margin(1e-9));
  CHECK(eval_profile(m, 1.3, 2) == Catch::Approx(-std::sin(1.3)).margin(1e-6));
  CHECK(eval_profile(m, 1.3, 3) == Catch::Approx(-std::cos(1.3)).margin(1e-4));
  CHECK(throws_code([&] { eval_profile(m, 1.3, 4); },
                    ErrorCode::DerivativeUnavailable));
  CHECK(throws_code([&] { eval_profile(m, 5.0, 0); },
                    ErrorCode::OutOfDomain));
}

TEST_CASE("linear potential is flat to all available orders", "[geometry]") {
  auto m = instantiate("flat_potential");
  CHECK(eval_profile(m, 2.0, 2) == 0.0);
  CHECK(eval_profile(m, 2.0, 3) == 0.0);
  CHECK(R_of_native(m, 4.0) == Catch::Approx(2 * std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("potential dispersion matches its radial picture", "[geometry]") {
  auto m = instantiate("fubini_study_potential");
  for (double u : {0.05, 0.3, 1.0, 2.7, 9.0}) {
    double R = R_of_native(m, u);
    double F = F_native(m, u);
    CHECK(V_native(m, u) == Catch::Approx(R * R * F).epsilon(1e-10));
  }
  // radial picture of this potential is exactly F = 1 - R^2
  for (double u : {0.1, 0.5, 2.0}) {
    double R = R_of_native(m, u);
    CHECK(F_native(m, u) == Catch::Approx(1 - R * R).epsilon(1e-12));
  }
}

TEST_CASE("chart conversions round trip", "[geometry]") {
  SECTION("one dimensional") {
    auto m = instantiate("sphere_1d");
    ChartPoint p = theta_point(1.1, 0.4);
    auto q = chart_convert(m, p, Chart::Chi);
    CHECK(q.x[0] == Catch::Approx(std::log(std::tan(0.55))).epsilon(1e-12));
    auto back = chart_convert(m, q, Chart::Theta);
    CHECK(back.x[0] == Catch::Approx(1.1).epsilon(1e-12));
    CHECK(back.x[1] == Catch::Approx(0.4));
  }
  SECTION("radial") {
    auto m = instantiate("fubini_study");
    ChartPoint p = radial_point(0.6, 1.0, 0.2, 0.9);
    auto q = chart_convert(m, p, Chart::Chi);
    auto back = chart_convert(m, q, Chart::RadialFrame);
    CHECK(back.x[0] == Catch::Approx(0.6).epsilon(1e-12));
    CHECK(back.x[1] == Catch::Approx(1.0));
    CHECK(back.x[3] == Catch::Approx(0.9));
  }
  SECTION("potential") {
    auto m = instantiate("fubini_study_potential");
    ChartPoint p = complex_point({{0.6, 0.3}, {-0.2, 0.5}});
    double u = std::norm(std::complex<double>(0.6, 0.3)) +
               std::norm(std::complex<double>(-0.2, 0.5));
    auto q = chart_convert(m, p, Chart::Chi);
    CHECK(q.x[0] == Catch::Approx(0.5 * std::log(u)).epsilon(1e-12));
    auto rf = chart_convert(m, p, Chart::RadialFrame);
    CHECK(rf.x[0] == Catch::Approx(R_of_native(m, u)).epsilon(1e-12));
    auto ray = chart_convert(m, q, Chart::Complex);
    CHECK(ray.z.size() == 2);
    CHECK(ray.z[0].real() == Catch::Approx(std::sqrt(u)).epsilon(1e-12));
    CHECK(ray.z[0].imag() == 0.0);
    CHECK(std::abs(ray.z[1]) == 0.0);
  }
  SECTION("chart and family mismatches") {
    auto radial = instantiate("fubini_study");
    CHECK(throws_code(
        [&] { chart_convert(radial, theta_point(1.0), Chart::Chi); },
        ErrorCode::WrongChart));
    CHECK(throws_code(
        [&] { chart_convert(radial, radial_point(0.5), Chart::Complex); },
        ErrorCode::WrongChart));
    auto pot = instantiate("flat_potential");
    ChartPoint bad = complex_point({{1, 0}, {0, 0}, {0, 0}});
    CHECK(throws_code([&] { native_of_point(pot, bad); },
                      ErrorCode::DimensionMismatch));
  }
}

TEST_CASE("closed chart maps agree with the generic quadrature route",
          "[geometry]") {
  auto fast = instantiate("fubini_study");
  auto slow = metric_from_json(nlohmann::json::parse(
      R"({"family":"radial_un","N":2,"domain":[0,1],
          "profile":{"name":"polynomial","coeffs":[1,0,-1]}})"));
  REQUIRE(slow.name == "polynomial");
  for (double R : {0.2, 0.45, 0.7071, 0.9}) {
    CHECK(chi_of_native(fast, R) ==
          Catch::Approx(chi_of_native(slow, R)).margin(1e-9));
  }
  for (double chi : {-2.0, -0.5, 0.0, 1.5}) {
    CHECK(native_of_chi(fast, chi) ==
          Catch::Approx(native_of_chi(slow, chi)).margin(1e-9));
  }
}

TEST_CASE("chi inversion is exact on closed forms", "[geometry]") {
  for (const char* name :
       {"sphere_1d", "cylinder_1d", "fubini_study", "eguchi_hanson",
        "berger", "hitchin", "fubini_study_potential"}) {
    auto m = instantiate(name);
    for (double chi : {-6.0, -1.0, 0.0, 0.7, 4.0}) {
      double x = native_of_chi(m, chi);
      CHECK(chi_of_native(m, x) == Catch::Approx(chi).margin(1e-9));
    }
  }
}

TEST_CASE("metric components and positivity guards", "[geometry]") {
  auto m = instantiate("fubini_study_potential");
  ChartPoint p = chi_point(0.0);
  auto g = metric_components(m, p);
  REQUIRE(g.coeffs.size() == 3);
  CHECK(g.F.has_value());
  CHECK(g.Q.has_value());
  CHECK(*g.F == Catch::Approx(0.5).epsilon(1e-12));  // u = 1: F = 1/(1+u)

  // potential violating Sigma' + u Sigma'' > 0 in the interior
  Profile pr;
  pr.f = [](double x, int k) {
    switch (k) {
      case 0: return x - x * x;
      case 1: return 1 - 2 * x;
      case 2: return -2.0;
      default: return 0.0;
    }
  };
  pr.analytic_order = 3;
  auto bad = make_metric(Family::PotentialUN, 2, 0.0, 0.45, std::move(pr),
                         "bad_potential");
  CHECK(throws_code([&] { metric_components(bad, chi_point(std::log(0.3) / 2)); },
                    ErrorCode::DegenerateMetric));
}

TEST_CASE("construction validation", "[geometry]") {
  Profile pr;
  pr.f = [](double, int) { return 1.0; };
  CHECK(throws_code(
      [&] { make_metric(Family::OneDim, 1, 2.0, 1.0, pr, "empty"); },
      ErrorCode::BadParams));
  CHECK(throws_code(
      [&] { make_metric(Family::RadialUN, 2, -1.0, 1.0, pr, "negR"); },
      ErrorCode::BadParams));
  CHECK(throws_code(
      [&] { make_metric(Family::PotentialUN, 1, 0.0, 1.0, pr, "smallN"); },
      ErrorCode::BadParams));
  CHECK(throws_code(
      [&] {
        make_metric(Family::RadialUN, 2,
                    -std::numeric_limits<double>::infinity(), 1.0, pr, "inf");
      },
      ErrorCode::BadParams));
}

TEST_CASE("boundary chi conversion is rejected where chi diverges",
          "[geometry]") {
  auto m = instantiate("sphere_1d");
  CHECK(throws_code([&] { chart_convert(m, theta_point(0.0), Chart::Chi); },
                    ErrorCode::SingularPoint));
  auto pot = instantiate("flat_potential");
  CHECK(throws_code([&] { chi_of_native(pot, 0.0); },
                    ErrorCode::SingularPoint));
}
