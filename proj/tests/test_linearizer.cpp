#include "doctest.h"

#include "common.hpp"

using namespace atlas;
using testing::rho;

namespace {

const Linearizer& shift_lin() {
  static const ShiftChart c = shift_chart(testing::model(), cplx{-2.0, 0.0});
  return c.lin;
}

std::vector<cplx> basin_samples(const Linearizer& lin, std::uint64_t seed, int count) {
  std::mt19937_64 g(seed);
  std::vector<cplx> out;
  while (static_cast<int>(out.size()) < count) {
    const cplx z = testing::uniform_in_box(g, -3, 3, -3, 3);
    try {
      (void)koenigs(lin, z);
      (void)koenigs(lin, evalf(lin.slice, z));
      out.push_back(z);
    } catch (const Error&) {
    }
  }
  return out;
}

void check_functional_equation(const Linearizer& lin, std::uint64_t seed) {
  for (cplx z : basin_samples(lin, seed, 100)) {
    const cplx p = koenigs(lin, z);
    CHECK(std::abs(koenigs(lin, evalf(lin.slice, z)) - lin.multiplier * p) <= 1e-9 * (1.0 + std::abs(p)));
  }
}

void check_inverse(const Linearizer& lin, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  for (int i = 0; i < 100; ++i) {
    const cplx zeta = testing::uniform_in_disk(g, 0.9 * lin.r0);
    const cplx z = koenigs_inverse(lin, zeta);
    CHECK(std::abs(koenigs(lin, z) - zeta) <= 1e-10);
    CHECK(std::abs(evalf(lin.slice, z) - koenigs_inverse(lin, lin.multiplier * zeta)) <= 1e-9);
  }
}

}  // namespace

TEST_CASE("model linearizer normalization") {
  const ModelMap& m = testing::model();
  const Linearizer& lin = m.lin;
  CHECK(lin.normalization == Normalization::DerivativeOne);
  CHECK(std::abs(koenigs(lin, m.q0)) <= 1e-15);
  CHECK(std::abs(std::abs(koenigs(lin, m.lambda0())) - lin.r0) <= 1e-12);
  CHECK(std::abs(evalf(lin.slice, lin.fixed_point) - lin.fixed_point) <= 1e-12);
  CHECK(std::abs(lin.multiplier) < 1.0);
  // phi(q + h) / h = 1 + b2 h + O(h^2) with b2 = (f''(q) / 2) / (rho - rho^2), near -2 here
  const double e = 1e-4;
  const cplx f2 = (deriv(m.slice, m.q0 + e) - deriv(m.slice, m.q0 - e)) / (2.0 * e);
  const cplx b2 = 0.5 * f2 / (rho() - rho() * rho());
  CHECK(std::abs(b2 - lin.coeffs[2]) <= 1e-6);
  for (double a : {0.0, 1.0, 2.5, 4.0}) {
    const cplx h = std::polar(1e-5, a);
    const cplx ratio = koenigs(lin, m.q0 + h) / h;
    CHECK(std::abs(ratio - 1.0 - b2 * h) <= 1e-6);
    const cplx g = std::polar(1e-7, a);
    CHECK(std::abs(koenigs(lin, m.q0 + g) / g - 1.0) <= 1e-6);
  }
  const double fd = 1e-6;
  const cplx slope = (koenigs(lin, m.q0 + fd) - koenigs(lin, m.q0 - fd)) / (2.0 * fd);
  CHECK(std::abs(slope - 1.0) <= 1e-6);
}

TEST_CASE("shift slice linearizer places mu on the positive axis at r0") {
  const ModelMap& m = testing::model();
  const Linearizer& lin = shift_lin();
  CHECK(lin.normalization == Normalization::AsymptoticValueToR0);
  CHECK(std::abs(lin.fixed_point) <= 1e-14);
  CHECK(std::abs(lin.multiplier - rho()) <= 1e-12);
  CHECK(lin.r0 == doctest::Approx(m.r0).epsilon(1e-15));
  const cplx pm = koenigs(lin, lin.slice.mu);
  CHECK(std::abs(pm - m.r0) <= 1e-9);
  CHECK(std::abs(std::arg(pm)) <= 1e-9);
}

TEST_CASE("build_linearizer rejects repelling or missing fixed points") {
  const ModelMap& m = testing::model();
  const cplx z = periodic_point(m, std::vector<int>{0});
  CHECK_THROWS_AS((void)build_linearizer(m.slice, z, Normalization::DerivativeOne), Error);
  CHECK_THROWS_AS((void)build_linearizer(m.slice, cplx{}, Normalization::AsymptoticValueToR0), Error);
}

TEST_CASE("koenigs functional equation") {
  check_functional_equation(testing::model().lin, 31);
  check_functional_equation(shift_lin(), 37);
}

TEST_CASE("koenigs_inverse round trip and equivariance") {
  const Linearizer& lin = testing::model().lin;
  CHECK(koenigs_inverse(lin, cplx{}) == lin.fixed_point);
  check_inverse(lin, 41);
  check_inverse(shift_lin(), 43);
  CHECK_THROWS_AS((void)koenigs_inverse(lin, cplx{lin.r0, 0.0}), Error);
  try {
    (void)koenigs_inverse(lin, cplx{0.0, 2.0 * lin.r0});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::OutsideInjectivityDisk);
  }
}

TEST_CASE("koenigs outside the basin") {
  const ModelMap& m = testing::model();
  try {
    (void)koenigs(m.lin, cplx{});
    FAIL("0 is not in the basin of q0");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotInBasin);
  }
}

TEST_CASE("level_and_angle") {
  const ModelMap& m = testing::model();
  const Linearizer& lin = m.lin;
  CHECK(level_and_angle(lin, m.q0).r == 0.0);
  const cplx zeta = std::polar(0.5 * lin.r0, 1.2);
  const LevelAngle la = level_and_angle(lin, koenigs_inverse(lin, zeta));
  CHECK(la.r == doctest::Approx(0.5 * lin.r0).epsilon(1e-10));
  CHECK(la.n == 0);
  CHECK(la.t == doctest::Approx(1.2).epsilon(1e-10));
  const double ar = std::abs(lin.multiplier);
  for (cplx z : basin_samples(lin, 47, 100)) {
    const double r = level_and_angle(lin, z).r;
    if (r == 0.0) continue;
    const LevelAngle fa = level_and_angle(lin, evalf(lin.slice, z));
    CHECK(std::abs(fa.r / r - ar) <= 1e-9 * ar);
    const LevelAngle za = level_and_angle(lin, z);
    CHECK(za.n >= fa.n);
  }
}
