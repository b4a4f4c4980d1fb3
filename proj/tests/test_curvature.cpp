#include <catch2/catch_amalgamated.hpp>
#include <array>
#include <cmath>

#include "collapse/catalog.hpp"
#include "collapse/curvature.hpp"
#include "collapse/rng.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace collapse;
using testsup::throws_code;

namespace {

// all independent frame components against the finite-difference tensor
void check_against_oracle(const ProfileMetric& m, double R, double scale) {
  auto F = [&m](double r) { return eval_profile(m, r, 0); };
  auto T = oracle::radial_frame_tensor(F, R);
  auto r = riemann_components(m, R);
  double tol = 3e-5 * scale;
  CHECK(T[0][1][0][1] == Catch::Approx(r.R0101).margin(tol));
  CHECK(T[0][2][0][2] == Catch::Approx(r.R0101).margin(tol));
  CHECK(T[1][3][1][3] == Catch::Approx(r.R0101).margin(tol));
  CHECK(T[2][3][2][3] == Catch::Approx(r.R0101).margin(tol));
  CHECK(T[0][1][2][3] == Catch::Approx(r.R0123).margin(tol));
  CHECK(T[0][2][3][1] == Catch::Approx(r.R0123).margin(tol));
  CHECK(T[0][3][1][2] == Catch::Approx(r.R0312).margin(tol));
  CHECK(T[0][3][0][3] == Catch::Approx(r.R0303).margin(tol));
  CHECK(T[1][2][1][2] == Catch::Approx(r.R1212).margin(tol));
  // first Bianchi identity fixes the remaining mixed component
  CHECK(T[0][2][1][3] == Catch::Approx(r.R0123 + r.R0312).margin(tol));
  // mixed components that must vanish by the symmetry
  CHECK(T[0][1][0][2] == Catch::Approx(0.0).margin(tol));
  CHECK(T[0][1][0][3] == Catch::Approx(0.0).margin(tol));
  CHECK(T[0][3][1][3] == Catch::Approx(0.0).margin(tol));
  CHECK(T[0][1][1][2] == Catch::Approx(0.0).margin(tol));
}

}  // namespace

TEST_CASE("projective plane frame components are constant", "[curvature]") {
  auto m = instantiate("fubini_study");
  for (double R : {0.3, 0.5, 0.9}) {
    auto r = riemann_components(m, R);
    CHECK(r.R0101 == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(r.R0123 == Catch::Approx(-1.0).epsilon(1e-12));
    CHECK(r.R0312 == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(r.R0303 == Catch::Approx(4.0).epsilon(1e-12));
    CHECK(r.R1212 == Catch::Approx(4.0).epsilon(1e-12));
    CHECK(r.k_h == Catch::Approx(4.0).epsilon(1e-12));
    // pair-exchange relation that the table locks in
    CHECK(r.R0123 == Catch::Approx(-0.5 * r.R0312).epsilon(1e-12));
  }
  // scale parameter divides every block by a^2
  auto big = instantiate("fubini_study", {{"scale", 2.0}});
  auto r = riemann_components(big, 1.0);
  CHECK(r.R0303 == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(r.R0312 == Catch::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("frame formulas match the finite-difference tensor", "[curvature]") {
  check_against_oracle(instantiate("fubini_study"), 0.6, 4.0);
  check_against_oracle(instantiate("eguchi_hanson"), 1.3, 4.0);
  check_against_oracle(instantiate("hitchin", {{"s", 0.1}, {"n", 2}}), 1.05,
                       40.0);
  check_against_oracle(instantiate("berger"), 0.8, 4.0);
}

TEST_CASE("flat profile has vanishing curvature", "[curvature]") {
  auto flat = instantiate("berger", {{"lambda", 1.0}});
  auto r = riemann_components(flat, 0.7);
  CHECK(r.R0101 == 0.0);
  CHECK(r.R0123 == 0.0);
  CHECK(r.R0312 == 0.0);
  CHECK(r.R0303 == 0.0);
  CHECK(r.R1212 == 0.0);
  auto F = [&flat](double x) { return eval_profile(flat, x, 0); };
  auto T = oracle::radial_frame_tensor(F, 0.7);
  CHECK(T[0][3][0][3] == Catch::Approx(0.0).margin(1e-6));
  CHECK(T[1][2][1][2] == Catch::Approx(0.0).margin(1e-6));
}

TEST_CASE("bisectional contraction matches the reduced formula",
          "[curvature]") {
  auto m = instantiate("eguchi_hanson");
  double R = 1.3;
  auto rep = riemann_components(m, R);
  auto F = [&m](double x) { return eval_profile(m, x, 0); };
  auto T = oracle::radial_frame_tensor(F, R);
  Rng rng = Rng::for_stream(17, 0);
  for (int trial = 0; trial < 6; ++trial) {
    std::array<double, 4> U{}, W{};
    double nu = 0, nw = 0;
    for (int i = 0; i < 4; ++i) {
      U[i] = rng.gauss();
      W[i] = rng.gauss();
      nu += U[i] * U[i];
      nw += W[i] * W[i];
    }
    for (int i = 0; i < 4; ++i) {
      U[i] /= std::sqrt(nu);
      W[i] /= std::sqrt(nw);
    }
    double reduced = bisectional(rep, U, W);
    double full = oracle::bisectional_contract(T, U, W);
    CHECK(reduced == Catch::Approx(full).margin(3e-5));
  }
  std::array<double, 4> not_unit{2, 0, 0, 0}, e0{1, 0, 0, 0};
  CHECK(throws_code([&] { bisectional(rep, not_unit, e0); },
                    ErrorCode::NotUnit));
}

TEST_CASE("orbit-angle section interpolates the two blocks", "[curvature]") {
  auto m = instantiate("eguchi_hanson");
  double R = 1.4;
  auto rep = riemann_components(m, R);
  CHECK(rep.khs3(0.0) == Catch::Approx(rep.R0303).epsilon(1e-12));
  const double pi = std::acos(-1.0);
  CHECK(rep.khs3(pi / 2) == Catch::Approx(rep.R0312).epsilon(1e-12));
  // generic angle: same value through the bisectional contraction with the
  // normalized spin-gradient plane
  for (double th : {0.4, 1.0, 2.2}) {
    double F = rep.F;
    double c = std::cos(th), s = std::sin(th);
    double delta = F * c * c + s * s;
    std::array<double, 4> U{1, 0, 0, 0};
    std::array<double, 4> W{std::sqrt(F) * c / std::sqrt(delta),
                            s / std::sqrt(delta), 0, 0};
    CHECK(rep.khs3(th) ==
          Catch::Approx(bisectional(rep, U, W)).epsilon(1e-12));
  }
}

TEST_CASE("dispersion route to K_H agrees with the frame formula",
          "[curvature]") {
  for (const auto& entry : catalog_entries()) {
    auto m = instantiate(entry.name);
    double hi = std::isfinite(m.x_hi) ? m.x_hi : m.x_cap;
    for (int k = 1; k <= 50; ++k) {
      double x = m.x_lo + (hi - m.x_lo) * k / 51.0;
      double via_frame =
          (m.family == Family::OneDim)
              ? gauss_curvature(m, x)
              : riemann_components(m, R_of_native(m, x)).k_h;
      double via_disp = kh_via_dispersion(m, x);
      CHECK(via_disp ==
            Catch::Approx(via_frame)
                .margin(1e-8 * std::max(1.0, std::fabs(via_frame))));
    }
  }
}

TEST_CASE("surface curvature from the profile", "[curvature]") {
  auto sph = instantiate("sphere_1d");
  for (double th : {0.3, 1.2, 2.8})
    CHECK(gauss_curvature(sph, th) == Catch::Approx(1.0).epsilon(1e-12));
  auto cyl = instantiate("cylinder_1d");
  for (double th : {0.5, 1.5, 4.0}) {
    double sech = 1 / std::cosh(th);
    CHECK(gauss_curvature(cyl, th) ==
          Catch::Approx(2 * sech * sech).epsilon(1e-12));
    auto S = [&cyl](double x) { return eval_profile(cyl, x, 0); };
    CHECK(oracle::surface_gauss(S, th) ==
          Catch::Approx(2 * sech * sech).margin(1e-6));
  }
  CHECK(throws_code([&] { gauss_curvature(instantiate("berger"), 0.5); },
                    ErrorCode::WrongChart));
  CHECK(throws_code([&] { riemann_components(sph, 1.0); },
                    ErrorCode::WrongChart));
}

TEST_CASE("positivity verdicts across the catalog", "[curvature]") {
  auto verdicts = [](const char* name) {
    auto m = instantiate(name);
    return positivity_scan(m, default_scan_grid(m));
  };
  auto fs = verdicts("fubini_study");
  CHECK(fs.collapse_H);
  CHECK(*fs.reduce_S);
  CHECK(*fs.all_bisectional);
  auto eh = verdicts("eguchi_hanson");
  CHECK(eh.collapse_H);
  CHECK_FALSE(*eh.reduce_S);
  auto hit = verdicts("hitchin");
  CHECK(hit.collapse_H);
  CHECK_FALSE(*hit.reduce_S);
  auto ber = verdicts("berger");
  CHECK(ber.collapse_H);
  CHECK(*ber.reduce_S);
  CHECK(*ber.all_bisectional);
  auto flat = verdicts("flat_potential");
  CHECK_FALSE(flat.collapse_H);
  auto sph = verdicts("sphere_1d");
  CHECK(sph.collapse_H);
  CHECK_FALSE(sph.reduce_S.has_value());
  auto cyl = verdicts("cylinder_1d");
  CHECK(cyl.collapse_H);
}

TEST_CASE("two-bolt family has constant holomorphic block", "[curvature]") {
  for (double s : {0.05, 0.1, 0.2}) {
    for (int n : {2, 3}) {
      auto m = instantiate("hitchin", {{"s", s}, {"n", double(n)}});
      double span = m.x_hi - m.x_lo;
      for (int k = 1; k <= 20; ++k) {
        double R = m.x_lo + span * k / 21.0;
        CHECK(riemann_components(m, R).R0303 ==
              Catch::Approx(4.0 / s).margin(1e-8 * (4.0 / s)));
      }
    }
  }
}
