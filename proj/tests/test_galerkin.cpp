#include "doctest.h"
#include "oracle.hpp"

#include "llg/galerkin.hpp"
#include "llg/lie.hpp"

#include <cmath>

using namespace llg;

namespace {

double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return (a - b).norm() / scale;
}

}  // namespace

TEST_CASE("drift vanishes on constant and single-mode states") {
  LlgParams p;
  p.K = 3;
  const GalerkinModel model(p);
  ModeState m(3);
  m(0, 1) = 0.3;
  m(0, 2) = -1.2;
  m(0, 3) = 0.7;
  CHECK(model.drift(m).coeffs().norm() == 0.0);
  ModeState s(3);
  s(1, 1) = 1.0;
  CHECK(model.drift(s).coeffs().norm() < 1e-14);
}

TEST_CASE("drift of a two-mode state matches the hand computation") {
  // M = (1, cos x, 0): M x M_xx = (0, 0, -cos x), M x (M x M_xx) = (-cos^2 x, cos x, 0)
  LlgParams p;
  p.K = 2;
  const GalerkinModel model(p);
  ModeState m(2);
  m(0, 1) = 1;
  m(1, 2) = 1;
  ModeState expect(2);
  expect(1, 3) = -1;
  expect(1, 2) = -1;
  expect(0, 1) = 0.5;
  expect(2, 1) = 0.5;
  CHECK((model.drift(m).coeffs() - expect.coeffs()).norm() < 1e-13);
  CHECK((oracle::drift(m, 1, 1).coeffs() - expect.coeffs()).norm() < 1e-13);
}

TEST_CASE("drift and control fields agree with the physical-space oracle") {
  for (int K : {1, 2, 4, 8}) {
    LlgParams p;
    p.K = K;
    p.mu1 = 0.8;
    p.mu2 = 1.3;
    const GalerkinModel model(p);
    double worst_drift = 0.0, worst_ctrl = 0.0;
    for (int s = 0; s < 100; ++s) {
      const ModeState m = lie::random_sphere_state(K, 1.0 + 0.01 * s, 7000 + s);
      worst_drift = std::max(worst_drift, rel_err(model.drift(m).coeffs(), oracle::drift(m, p.mu1, p.mu2).coeffs()));
      const int k = s % (K + 1), l = 1 + s % 3;
      worst_ctrl = std::max(worst_ctrl,
                            rel_err(control_field(k, l, K).apply(m).coeffs(), oracle::control(m, k, l).coeffs()));
    }
    CAPTURE(K);
    CHECK(worst_drift <= 1e-10);
    CHECK(worst_ctrl <= 1e-10);
  }
}

TEST_CASE("control field of the constant mode rotates every block about its axis") {
  const int K = 3;
  const LinearField A = control_field(0, 1, K);
  const ModeState m = lie::random_sphere_state(K, 2.0, 4);
  const ModeState v = A.apply(m);
  for (int i = 0; i <= K; ++i) {
    CHECK(v(i, 1) == 0.0);
    CHECK(v(i, 2) == doctest::Approx(m(i, 3)).epsilon(1e-14));
    CHECK(v(i, 3) == doctest::Approx(-m(i, 2)).epsilon(1e-14));
  }
  CHECK(A.apply(ModeState(K)).coeffs().norm() == 0.0);
  const LinearField P = control_field(0, 1, K, FieldConvention::LiteralFormula);
  CHECK((P.matrix - 2.0 * A.matrix).norm() == 0.0);
}

TEST_CASE("A^{1,1} equals the projection of M x cos(x) e_1") {
  const ModeState m = lie::random_sphere_state(2, 1.0, 11);
  const Eigen::VectorXd ref = oracle::control(m, 1, 1).coeffs();
  CHECK((control_field(1, 1, 2).apply(m).coeffs() - ref).norm() < 1e-13);
}

TEST_CASE("rhs with zero control or zero state") {
  LlgParams p;
  p.K = 2;
  const GalerkinModel model(p);
  const ModeState m = lie::random_sphere_state(2, 1.0, 3);
  const ControlSchedule zero = ControlSchedule::Zero(p.control_modes, 1.0, 4);
  CHECK((model.rhs(m, 0.3, zero).coeffs() - model.drift(m).coeffs()).norm() == 0.0);
  Eigen::MatrixXd v = Eigen::MatrixXd::Random(4, 3);
  const ControlSchedule sched(p.control_modes, 1.0, v);
  CHECK(model.rhs(ModeState(2), 0.6, sched).coeffs().norm() == 0.0);
}

TEST_CASE("constant-mode control on the constant state") {
  // M = e_3, v = e_1: M x v = e_2
  LlgParams p;
  p.K = 1;
  p.mu1 = p.mu2 = 1;
  const GalerkinModel model(p);
  ModeState m(1);
  m(0, 3) = 1;
  const ControlSchedule sched = ControlSchedule::Constant(p.control_modes, 1.0, Eigen::Vector3d(1, 0, 0));
  const ModeState d = model.rhs(m, 0.0, sched);
  ModeState expect(1);
  expect(0, 2) = 1;
  CHECK((d.coeffs() - expect.coeffs()).norm() < 1e-15);
}

TEST_CASE("weighted-norm conservation and skewness") {
  for (int K : {1, 3, 6}) {
    LlgParams p;
    p.K = K;
    const GalerkinModel model(p);
    const Eigen::VectorXd w = weight_diagonal(K);
    for (int s = 0; s < 20; ++s) {
      const ModeState m = lie::random_sphere_state(K, 2.0, 50 + s);
      const ModeState m2 = lie::random_sphere_state(K, 1.0, 500 + s);
      Eigen::VectorXd amp = Eigen::VectorXd::Random(3) * 3.0;
      Eigen::VectorXd out;
      model.rhs(m.coeffs(), amp, out);
      CHECK(std::abs(m.coeffs().dot(w.asDiagonal() * out)) < 1e-12 * std::max(1.0, out.norm()));
      for (int k = 0; k <= K; ++k)
        for (int l = 1; l <= 3; ++l) {
          const Eigen::MatrixXd A = control_field(k, l, K).matrix;
          const double s1 = weighted_inner(ModeState(K, A * m.coeffs()), m2) + weighted_inner(m, ModeState(K, A * m2.coeffs()));
          CHECK(std::abs(s1) < 1e-12);
        }
    }
  }
}

TEST_CASE("control field sparsity pattern") {
  const int K = 4;
  for (int k = 0; k <= K; ++k)
    for (int l = 1; l <= 3; ++l) {
      const Eigen::MatrixXd A = control_field(k, l, K).matrix;
      for (int i = 0; i <= K; ++i)
        for (int j = 1; j <= 3; ++j)
          for (int n = 0; n <= K; ++n)
            for (int q = 1; q <= 3; ++q) {
              const double a = A(ModeState::flat_index(i, j), ModeState::flat_index(n, q));
              const bool allowed = (n == k + i || n == std::abs(k - i)) && levi_civita(q, l, j) != 0;
              if (!allowed) CHECK(a == 0.0);
            }
    }
}

TEST_CASE("parameter validation") {
  LlgParams p;
  p.K = -1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.K = 1;
  p.mu2 = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.mu2 = 1;
  p.control_modes = {{2, 1}};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.control_modes = {{0, 4}};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.control_modes = {{1, 3}};
  CHECK_NOTHROW(p.validate());
  const GalerkinModel model(p);
  const ControlSchedule other = ControlSchedule::Zero({{0, 1}}, 1.0, 1);
  CHECK_THROWS_AS(model.amplitudes(other, 0.0), std::invalid_argument);
}
