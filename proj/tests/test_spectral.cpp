#include "doctest.h"
#include "oracle.hpp"

#include "llg/lie.hpp"
#include "llg/spectral.hpp"

#include <cmath>

using namespace llg;
using oracle::kPi;

TEST_CASE("eigenvalues") {
  CHECK(eigenvalue(0) == 0.0);
  CHECK(eigenvalue(1) == -1.0);
  CHECK(eigenvalue(3) == -9.0);
}

TEST_CASE("weighted inner product on unit coefficients") {
  ModeState a(2), b(2);
  a(0, 1) = 1;
  CHECK(weighted_inner(a, a) == doctest::Approx(2 * kPi).epsilon(1e-15));
  a = ModeState(2);
  a(1, 1) = 1;
  CHECK(weighted_inner(a, a) == doctest::Approx(kPi).epsilon(1e-15));
  b(2, 1) = 1;
  CHECK(weighted_inner(a, b) == 0.0);
}

TEST_CASE("evaluate_physical exact samples") {
  ModeState m(3);
  m(0, 2) = 1;
  const PhysicalField f = evaluate_physical(m, 7);
  for (int q = 0; q < 7; ++q) CHECK((f.values.row(q) - Eigen::RowVector3d(0, 1, 0)).norm() == 0.0);

  ModeState c(1);
  c(1, 1) = 1;
  const PhysicalField g = evaluate_physical(c, 4);
  const double expect[4] = {1, 0, -1, 0};
  for (int q = 0; q < 4; ++q) {
    CHECK(std::abs(g.values(q, 0) - expect[q]) < 1e-15);
    CHECK(g.values(q, 1) == 0.0);
  }
}

TEST_CASE("projection round trip and Parseval") {
  for (int K : {0, 1, 3, 6}) {
    for (int s = 0; s < 5; ++s) {
      const ModeState m = lie::random_sphere_state(K, 1.7, 100 + s);
      for (int N : {2 * K + 2, 4 * K + 2, 4 * K + 4, 4 * K + 9}) {
        const ModeState back = project_to_modes(evaluate_physical(m, N), K);
        CHECK((back.coeffs() - m.coeffs()).cwiseAbs().maxCoeff() < 1e-12);
        const PhysicalField f = evaluate_physical(m, N);
        const double quad = f.values.rowwise().squaredNorm().sum() * kTwoPi / N;
        CHECK(std::abs(quad - weighted_inner(m, m)) <= 1e-12 * weighted_inner(m, m));
      }
      CHECK(weighted_norm(m) == doctest::Approx(oracle::l2_norm(m)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(project_to_modes(evaluate_physical(ModeState(3), 7), 3), std::invalid_argument);
}

TEST_CASE("projection of simple fields") {
  PhysicalField f;
  const int N = 12;
  f.values.resize(N, 3);
  for (int q = 0; q < N; ++q) f.values.row(q) = Eigen::RowVector3d(0, 0, 5);
  ModeState m = project_to_modes(f, 2);
  ModeState expect(2);
  expect(0, 3) = 5;
  CHECK((m.coeffs() - expect.coeffs()).norm() < 1e-14);

  for (int q = 0; q < N; ++q) f.values.row(q) = Eigen::RowVector3d(std::cos(2 * PhysicalField::node(q, N)), 0, 0);
  m = project_to_modes(f, 2);
  expect = ModeState(2);
  expect(2, 1) = 1;
  CHECK((m.coeffs() - expect.coeffs()).norm() < 1e-14);

  for (int q = 0; q < N; ++q) {
    const double c = std::cos(PhysicalField::node(q, N));
    f.values.row(q) = Eigen::RowVector3d(c * c, 0, 0);
  }
  m = project_to_modes(f, 2);
  expect = ModeState(2);
  expect(0, 1) = 0.5;
  expect(2, 1) = 0.5;
  CHECK((m.coeffs() - expect.coeffs()).norm() < 1e-14);
  const ModeState q = oracle::project([](double x) { return oracle::Vec3(std::cos(x) * std::cos(x), 0, 0); }, 2);
  CHECK((q.coeffs() - expect.coeffs()).norm() < 1e-14);
}

TEST_CASE("product coefficient tables") {
  CHECK(triple_product_coeff(0, 0, 0) == doctest::Approx(2 * kPi));
  CHECK(triple_product_coeff(1, 1, 2) == doctest::Approx(kPi / 2));
  CHECK(triple_product_coeff(1, 2, 5) == 0.0);
  CHECK(quad_product_coeff(0, 0, 0, 0) == doctest::Approx(2 * kPi));
  CHECK(quad_product_coeff(1, 1, 1, 3) == doctest::Approx(kPi / 4));
  CHECK(quad_product_coeff(1, 1, 2, 4) == doctest::Approx(kPi / 4));
  // coincident resonance counted twice
  CHECK(triple_product_coeff(1, 0, 1) == doctest::Approx(kPi));

  constexpr int F = 12;
  double worst3 = 0.0, worst4 = 0.0;
  for (int a = 0; a <= F; ++a)
    for (int b = 0; b <= F; ++b)
      for (int c = 0; c <= F; ++c) {
        const double q = oracle::integral([&](double x) { return std::cos(a * x) * std::cos(b * x) * std::cos(c * x); }, 64);
        worst3 = std::max(worst3, std::abs(q - triple_product_coeff(a, b, c)));
        for (int d = 0; d <= F; ++d) {
          const double q4 = oracle::integral(
              [&](double x) { return std::cos(a * x) * std::cos(b * x) * std::cos(c * x) * std::cos(d * x); }, 64);
          worst4 = std::max(worst4, std::abs(q4 - quad_product_coeff(a, b, c, d)));
        }
      }
  CHECK(worst3 < 1e-10);
  CHECK(worst4 < 1e-10);
}

TEST_CASE("Levi-Civita symbol") {
  CHECK(levi_civita(1, 2, 3) == 1);
  CHECK(levi_civita(2, 3, 1) == 1);
  CHECK(levi_civita(2, 1, 3) == -1);
  CHECK(levi_civita(1, 1, 3) == 0);
  for (int p = 1; p <= 3; ++p)
    for (int l = 1; l <= 3; ++l)
      for (int j = 1; j <= 3; ++j) {
        const Eigen::Vector3d ep = Eigen::Vector3d::Unit(p - 1), el = Eigen::Vector3d::Unit(l - 1);
        CHECK(levi_civita(p, l, j) == static_cast<int>(std::lround(ep.cross(el)[j - 1])));
      }
}

TEST_CASE("state arithmetic rejects mismatched K") {
  CHECK_THROWS_AS(ModeState(1) + ModeState(2), DimensionMismatch);
  CHECK_THROWS_AS(ModeState(2, Eigen::VectorXd::Zero(5)), DimensionMismatch);
}
