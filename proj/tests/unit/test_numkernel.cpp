// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "satmoe/errors.hpp"
#include "satmoe/numkernel.hpp"
#include "satmoe/rng.hpp"

using namespace satmoe;

namespace {

// J0(x) = (1/pi) int_0^pi cos(x sin t) dt, composite Simpson with many panels.
double j0_integral(double x) {
  const int n = 20000;
  const double h = std::numbers::pi / n;
  double s = std::cos(0.0) + std::cos(x * std::sin(std::numbers::pi));
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * std::cos(x * std::sin(i * h));
  return s * h / 3.0 / std::numbers::pi;
}

CMat random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  CMat m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rng.complex_normal();
  return m;
}

}  // namespace

TEST_CASE("hermitian inner product conjugates the first argument") {
  CHECK(hermitian_inner(CVec{{1, 0}}, CVec{{1, 0}}) == cplx(1, 0));
  CHECK(hermitian_inner(CVec{{0, 1}}, CVec{{0, 1}}) == cplx(1, 0));
  const CVec a{{1, 1}, {2, 0}}, b{{3, 0}, {0, 1}};
  const cplx got = hermitian_inner(a, b);
  CHECK(got.real() == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(got.imag() == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK_THROWS_AS(hermitian_inner(CVec(2), CVec(3)), DimensionError);
}

TEST_CASE("self inner product is real and matches norm2") {
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    CVec a(8);
    for (auto& x : a) x = rng.complex_normal();
    const cplx s = hermitian_inner(a, a);
    CHECK(std::abs(s.imag()) < 1e-12);
    CHECK(s.real() >= 0.0);
    CHECK(std::abs(s.real() - norm2(a)) < 1e-12);
  }
  CHECK(norm2(CVec{{3, 4}}) == 25.0);
  CHECK(norm2(CVec(4)) == 0.0);
  CHECK(norm2(CVec{{1, 1}, {1, -1}}) == doctest::Approx(4.0));
}

TEST_CASE("right pseudo inverse hand cases") {
  const CMat v = right_pseudo_inverse(CMat::identity(2));
  CHECK(std::abs(v(0, 0) - cplx(1, 0)) < 1e-14);
  CHECK(std::abs(v(0, 1)) < 1e-14);
  CMat row(1, 2);
  row(0, 0) = 1;
  row(0, 1) = 1;
  const CMat w = right_pseudo_inverse(row);
  REQUIRE(w.rows() == 2);
  CHECK(std::abs(w(0, 0) - cplx(0.5, 0)) < 1e-14);
  CHECK(std::abs(w(1, 0) - cplx(0.5, 0)) < 1e-14);
}

TEST_CASE("right pseudo inverse satisfies G V = I on random full-rank instances") {
  Rng rng(11);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t r = 1 + t % 4, c = r + (t % 13);
    const CMat g = random_matrix(r, c, rng);
    const CMat p = g * right_pseudo_inverse(g);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) worst = std::max(worst, std::abs(p(i, j) - cplx(i == j ? 1.0 : 0.0, 0.0)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("right pseudo inverse rejects rank-deficient and tall inputs") {
  CMat g(2, 3);
  for (std::size_t j = 0; j < 3; ++j) g(0, j) = g(1, j) = cplx(1.0 + j, 0.5);
  CHECK_THROWS_AS(right_pseudo_inverse(g), SingularMatrixError);
  CHECK_THROWS_AS(right_pseudo_inverse(CMat(3, 2)), DimensionError);
}

TEST_CASE("bessel J0 values") {
  CHECK(bessel_j0(0.0) == 1.0);
  CHECK(std::abs(bessel_j0(2.404825557695773)) < 1e-9);
  const double x = 2.0 * std::numbers::pi * 10.0 * 0.002;
  const double series = 1.0 - x * x / 4.0 + std::pow(x, 4) / 64.0 - std::pow(x, 6) / 2304.0;
  CHECK(std::abs(bessel_j0(x) - series) < 1e-12);
  CHECK(bessel_j0(x) == doctest::Approx(0.9960561).epsilon(1e-7));
  CHECK_THROWS_AS(bessel_j0(std::nan("")), DomainError);
}

TEST_CASE("bessel J0 agrees with the integral oracle on [0, 20]") {
  double worst = 0.0;
  for (double x = 0.0; x <= 20.0; x += 0.05) worst = std::max(worst, std::abs(bessel_j0(x) - j0_integral(x)));
  CHECK(worst < 1e-9);
}
