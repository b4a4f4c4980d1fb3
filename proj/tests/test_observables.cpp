#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <vector>

#include "collapse/catalog.hpp"
#include "collapse/observables.hpp"
#include "test_support.hpp"

using namespace collapse;
using testsup::throws_code;

namespace {

using Mat = std::vector<std::vector<std::complex<double>>>;
const std::complex<double> I{0, 1};

Mat half_tau(int i) {
  switch (i) {
    case 1: return {{0.0, 0.5}, {0.5, 0.0}};
    case 2: return {{0.0, -0.5 * I}, {0.5 * I, 0.0}};
    default: return {{0.5, 0.0}, {0.0, -0.5}};
  }
}

}  // namespace

TEST_CASE("energy and dispersion take their closed values", "[observables]") {
  auto sph = instantiate("sphere_1d");
  CHECK(hamiltonian(sph, theta_point(0.7)) ==
        Catch::Approx(std::cos(0.7)).epsilon(1e-13));
  CHECK(dispersion(sph, theta_point(0.7)) ==
        Catch::Approx(std::sin(0.7) * std::sin(0.7)).epsilon(1e-13));
  // same values through the chi chart
  double chi = std::log(std::tan(0.35));
  CHECK(hamiltonian(sph, chi_point(chi)) ==
        Catch::Approx(std::cos(0.7)).epsilon(1e-12));

  auto fs = instantiate("fubini_study");
  CHECK(hamiltonian(fs, radial_point(0.5)) == Catch::Approx(-1.0 / 16));
  CHECK(dispersion(fs, radial_point(0.5)) == Catch::Approx(3.0 / 64));

  auto fsp = instantiate("fubini_study_potential");
  auto one = complex_point({{1.0, 0.0}, {0.0, 0.0}});
  CHECK(hamiltonian(fsp, one) == Catch::Approx(-0.25));
  CHECK(dispersion(fsp, one) == Catch::Approx(0.25));

  auto flat = instantiate("flat_potential");
  auto two = complex_point({{2.0, 0.0}, {0.0, 0.0}});  // u = 4
  CHECK(hamiltonian(flat, two) == Catch::Approx(-4.0));
  CHECK(dispersion(flat, two) == Catch::Approx(8.0));
}

TEST_CASE("spin components against the generator route", "[observables]") {
  auto m = instantiate("fubini_study_potential");
  auto p = complex_point({{0.6, 0.3}, {-0.2, 0.5}});
  auto s = spin(m, p);
  for (int i = 1; i <= 3; ++i)
    CHECK(s[i - 1] ==
          Catch::Approx(spin_general(m, p, half_tau(i))).margin(1e-13));
  // closed direction cosines of this z
  double u = 0.74;
  double R2 = u / (1 + u);
  CHECK(s[0] == Catch::Approx(-(R2 / 4) * (0.06 / u)).margin(1e-13));
  CHECK(s[1] == Catch::Approx(-(R2 / 4) * (0.72 / u)).margin(1e-13));
  CHECK(s[2] == Catch::Approx(-(R2 / 4) * (0.16 / u)).margin(1e-13));
}

TEST_CASE("spin is insensitive to the metric presentation", "[observables]") {
  auto fs = instantiate("fubini_study");
  auto fsp = instantiate("fubini_study_potential");
  auto p = radial_point(0.6, 1.1, 0.7, 0.3);
  auto a = spin(fs, p), b = spin(fsp, p);
  for (int i = 0; i < 3; ++i) CHECK(a[i] == Catch::Approx(b[i]).margin(1e-12));
  auto da = spin_dispersion(fs, p), db = spin_dispersion(fsp, p);
  for (int i = 0; i < 3; ++i)
    CHECK(da[i] == Catch::Approx(db[i]).margin(1e-10));
}

TEST_CASE("spin dispersions against the generator route", "[observables]") {
  auto m = instantiate("fubini_study_potential");
  auto p = complex_point({{0.6, 0.3}, {-0.2, 0.5}});
  auto d = spin_dispersion(m, p);
  for (int i = 1; i <= 3; ++i)
    CHECK(d[i - 1] ==
          Catch::Approx(spin_dispersion_general(m, p, half_tau(i)))
              .margin(1e-13));
  // radial-normalization interpolation formula at a real-chart point
  auto fs = instantiate("fubini_study");
  auto q = radial_point(0.5, 1.1, 0.7, 0.0);
  double H = -1.0 / 16, V = 3.0 / 64;
  double n3 = std::cos(1.1);
  auto dq = spin_dispersion(fs, q);
  CHECK(dq[2] == Catch::Approx(-H * (1 - n3 * n3) + V * n3 * n3).margin(1e-13));
}

TEST_CASE("moment map brackets close in the complex chart", "[observables]") {
  auto m = instantiate("fubini_study_potential");
  auto p = complex_point({{0.6, 0.3}, {-0.2, 0.5}});
  auto S = [&](int i) {
    return [&m, i](const ChartPoint& q) { return spin(m, q)[i - 1]; };
  };
  auto H = [&m](const ChartPoint& q) { return hamiltonian(m, q); };
  auto s = spin(m, p);
  CHECK(poisson_bracket(m, p, S(1), S(2)) ==
        Catch::Approx(s[2]).margin(1e-7));
  CHECK(poisson_bracket(m, p, S(2), S(3)) ==
        Catch::Approx(s[0]).margin(1e-7));
  CHECK(poisson_bracket(m, p, S(3), S(1)) ==
        Catch::Approx(s[1]).margin(1e-7));
  CHECK(poisson_bracket(m, p, S(1), S(1)) ==
        Catch::Approx(0.0).margin(1e-9));
  for (int i = 1; i <= 3; ++i)
    CHECK(poisson_bracket(m, p, H, S(i)) == Catch::Approx(0.0).margin(1e-7));
}

TEST_CASE("moment map brackets close in the angular chart", "[observables]") {
  auto m = instantiate("fubini_study");
  auto p = radial_point(0.6, 1.1, 0.7, 0.3);
  auto S = [&](int i) {
    return [&m, i](const ChartPoint& q) { return spin(m, q)[i - 1]; };
  };
  auto H = [&m](const ChartPoint& q) { return hamiltonian(m, q); };
  auto s = spin(m, p);
  CHECK(poisson_bracket(m, p, S(1), S(2)) ==
        Catch::Approx(s[2]).margin(1e-7));
  CHECK(poisson_bracket(m, p, S(2), S(3)) ==
        Catch::Approx(s[0]).margin(1e-7));
  CHECK(poisson_bracket(m, p, S(3), S(1)) ==
        Catch::Approx(s[1]).margin(1e-7));
  for (int i = 1; i <= 3; ++i)
    CHECK(poisson_bracket(m, p, H, S(i)) == Catch::Approx(0.0).margin(1e-7));
}

TEST_CASE("energy conjugates the fiber angle", "[observables]") {
  auto psi = [](const ChartPoint& q) { return q.x[3]; };
  auto fs = instantiate("fubini_study");
  auto H_fs = [&fs](const ChartPoint& q) { return hamiltonian(fs, q); };
  auto p = radial_point(0.6, 1.1, 0.7, 0.3);
  double b = poisson_bracket(fs, p, H_fs, psi);
  CHECK(std::fabs(b) == Catch::Approx(1.0).margin(1e-7));

  auto fsp = instantiate("fubini_study_potential");
  auto H_fsp = [&fsp](const ChartPoint& q) { return hamiltonian(fsp, q); };
  double b2 = poisson_bracket(fsp, p, H_fsp, psi);
  CHECK(std::fabs(b2) == Catch::Approx(2.0).margin(1e-7));
  CHECK(b * b2 > 0);  // same rotation sense in both normalizations

  // supplied gradients replace the finite differences
  auto grad_H = [](const ChartPoint& q) {
    return std::vector<double>{-q.x[0] / 2, 0, 0, 0};
  };
  auto grad_psi = [](const ChartPoint&) {
    return std::vector<double>{0, 0, 0, 1};
  };
  double bg = poisson_bracket(fs, p, H_fs, psi, grad_H, grad_psi);
  CHECK(bg == Catch::Approx(b).margin(1e-9));
  auto bad_grad = [](const ChartPoint&) { return std::vector<double>{1, 0}; };
  CHECK(throws_code(
      [&] { poisson_bracket(fs, p, H_fs, psi, bad_grad, grad_psi); },
      ErrorCode::DimensionMismatch));
  // the angular symplectic form degenerates on the orbit axis
  CHECK(throws_code(
      [&] { poisson_bracket(fs, radial_point(0.6, 0.0, 0.0, 0.0), H_fs, psi); },
      ErrorCode::NonInvertible));
}

TEST_CASE("fixed point sets of the energy flow", "[observables]") {
  auto fs = instantiate("fubini_study");
  auto cs = critical_set(fs);
  REQUIRE(cs.size() == 2);
  CHECK(cs[0].end_kind == EndKind::Nut);
  CHECK(cs[0].H_value == Catch::Approx(0.0).margin(1e-12));
  CHECK(cs[0].description == "isolated fixed point");
  CHECK(cs[1].end_kind == EndKind::Bolt);
  CHECK(cs[1].H_value == Catch::Approx(-0.25).margin(1e-12));
  REQUIRE(cs[1].S3_range.has_value());
  CHECK((*cs[1].S3_range)[0] == Catch::Approx(-0.25).margin(1e-12));
  CHECK((*cs[1].S3_range)[1] == Catch::Approx(0.25).margin(1e-12));
  CHECK(cs[1].description == "fixed 2-sphere of order 1");

  auto fsp = instantiate("fubini_study_potential");
  auto cp = critical_set(fsp);
  REQUIRE(cp.size() == 2);
  CHECK(cp[1].end_kind == EndKind::Bolt);
  CHECK(cp[1].H_value == Catch::Approx(-0.5).margin(1e-6));
  CHECK((*cp[1].S3_range)[1] == Catch::Approx(0.25).margin(1e-6));

  auto eh = instantiate("eguchi_hanson");
  auto ce = critical_set(eh);
  REQUIRE(ce.size() == 1);
  CHECK(ce[0].end_kind == EndKind::Bolt);
  CHECK(ce[0].H_value == Catch::Approx(-0.25).margin(1e-12));
  CHECK(ce[0].description == "fixed 2-sphere of order 2");

  auto sph = instantiate("sphere_1d");
  auto c1 = critical_set(sph);
  REQUIRE(c1.size() == 2);
  CHECK(c1[0].H_value == Catch::Approx(1.0).margin(1e-12));
  CHECK(c1[1].H_value == Catch::Approx(-1.0).margin(1e-12));
  CHECK_FALSE(c1[0].S3_range.has_value());
}

TEST_CASE("observable input validation", "[observables]") {
  auto sph = instantiate("sphere_1d");
  CHECK(throws_code([&] { spin(sph, theta_point(0.5)); },
                    ErrorCode::WrongChart));
  CHECK(throws_code([&] { spin_dispersion(sph, theta_point(0.5)); },
                    ErrorCode::WrongChart));

  auto fsp3 = instantiate("fubini_study_potential", {{"N", 3.0}});
  auto p3 = complex_point({{0.5, 0.0}, {0.2, 0.1}, {0.0, 0.3}});
  CHECK(throws_code([&] { spin(fsp3, p3); }, ErrorCode::DimensionMismatch));
  Mat d3(3, std::vector<std::complex<double>>(3, 0.0));
  d3[0][0] = 1.0;
  double u = native_of_point(fsp3, p3);
  CHECK(spin_general(fsp3, p3, d3) ==
        Catch::Approx(-eval_profile(fsp3, u, 1) * 0.25).margin(1e-13));

  auto fsp = instantiate("fubini_study_potential");
  Mat not_h{{0.0, 1.0}, {2.0, 0.0}};
  auto p = complex_point({{0.6, 0.3}, {-0.2, 0.5}});
  CHECK(throws_code([&] { spin_general(fsp, p, not_h); },
                    ErrorCode::BadParams));
  Mat wrong_size{{1.0}};
  CHECK(throws_code([&] { spin_general(fsp, p, wrong_size); },
                    ErrorCode::DimensionMismatch));
  auto fs = instantiate("fubini_study");
  CHECK(throws_code([&] { spin_general(fs, radial_point(0.5), half_tau(3)); },
                    ErrorCode::WrongChart));
  CHECK(throws_code(
      [&] { spin(fsp, complex_point({{0.0, 0.0}, {0.0, 0.0}})); },
      ErrorCode::SingularPoint));
}
