#include "llg/spectral.hpp"

#include <cmath>
#include <string>

namespace llg {

ModeState::ModeState(int K) : K_(K), coeffs_(Eigen::VectorXd::Zero(3 * (K + 1))) {
  if (K < 0) throw std::invalid_argument("truncation order K must be >= 0");
}

ModeState::ModeState(int K, Eigen::VectorXd coeffs) : K_(K), coeffs_(std::move(coeffs)) {
  if (K < 0) throw std::invalid_argument("truncation order K must be >= 0");
  if (coeffs_.size() != 3 * (K + 1)) {
    throw DimensionMismatch("ModeState: expected " + std::to_string(3 * (K + 1)) +
                            " coefficients, got " + std::to_string(coeffs_.size()));
  }
}

namespace {

void require_same_K(const ModeState& a, const ModeState& b, const char* where) {
  if (a.K() != b.K()) {
    throw DimensionMismatch(std::string(where) + ": K mismatch (" + std::to_string(a.K()) +
                            " vs " + std::to_string(b.K()) + ")");
  }
}

}  // namespace

ModeState operator+(const ModeState& a, const ModeState& b) {
  require_same_K(a, b, "operator+");
  return ModeState(a.K(), a.coeffs() + b.coeffs());
}

ModeState operator-(const ModeState& a, const ModeState& b) {
  require_same_K(a, b, "operator-");
  return ModeState(a.K(), a.coeffs() - b.coeffs());
}

ModeState operator*(double s, const ModeState& a) { return ModeState(a.K(), s * a.coeffs()); }

double eigenvalue(int n) { return -static_cast<double>(n) * n; }

double basis_norm_sq(int i) { return i == 0 ? kTwoPi : std::numbers::pi; }

Eigen::VectorXd weight_diagonal(int K) {
  Eigen::VectorXd w(3 * (K + 1));
  for (int i = 0; i <= K; ++i) w.segment<3>(3 * i).setConstant(basis_norm_sq(i));
  return w;
}

double weighted_inner(const ModeState& a, const ModeState& b) {
  require_same_K(a, b, "weighted_inner");
  double acc = 0.0;
  for (int i = 0; i <= a.K(); ++i) acc += basis_norm_sq(i) * a.mode(i).dot(b.mode(i));
  return acc;
}

double weighted_norm(const ModeState& m) { return std::sqrt(weighted_inner(m, m)); }

namespace {

PhysicalField synthesize(const ModeState& m, int N, bool second_derivative) {
  if (N < 1) throw std::invalid_argument("evaluate_physical: N must be >= 1");
  PhysicalField f;
  f.values.setZero(N, 3);
  for (int q = 0; q < N; ++q) {
    const double x = PhysicalField::node(q, N);
    Eigen::RowVector3d acc = Eigen::RowVector3d::Zero();
    for (int i = 0; i <= m.K(); ++i) {
      const double scale = second_derivative ? eigenvalue(i) : 1.0;
      if (scale == 0.0) continue;
      acc += scale * std::cos(i * x) * m.mode(i).transpose();
    }
    f.values.row(q) = acc;
  }
  return f;
}

}  // namespace

PhysicalField evaluate_physical(const ModeState& m, int N) { return synthesize(m, N, false); }

PhysicalField evaluate_second_derivative(const ModeState& m, int N) {
  return synthesize(m, N, true);
}

ModeState project_to_modes(const PhysicalField& f, int K) {
  const int N = f.N();
  if (N < 2 * K + 2) {
    throw std::invalid_argument("project_to_modes: grid of " + std::to_string(N) +
                                " points aliases frequencies up to K=" + std::to_string(K) +
                                " (need N >= 2K+2)");
  }
  ModeState m(K);
  const double h = kTwoPi / N;
  for (int i = 0; i <= K; ++i) {
    Eigen::RowVector3d acc = Eigen::RowVector3d::Zero();
    for (int q = 0; q < N; ++q) acc += std::cos(i * PhysicalField::node(q, N)) * f.values.row(q);
    m.coeffs().segment<3>(3 * i) = (h / basis_norm_sq(i)) * acc.transpose();
  }
  return m;
}

// cos(a)cos(b)cos(c) expands into four cosines of signed frequency sums;
// each vanishing sum integrates to 2*pi.
double triple_product_coeff(int n, int k, int r) {
  int hits = 0;
  for (int s1 : {1, -1})
    for (int s2 : {1, -1}) hits += (n + s1 * k + s2 * r == 0);
  return hits * std::numbers::pi / 2.0;
}

double quad_product_coeff(int l, int n, int k, int r) {
  int hits = 0;
  for (int s1 : {1, -1})
    for (int s2 : {1, -1})
      for (int s3 : {1, -1}) hits += (l + s1 * n + s2 * k + s3 * r == 0);
  return hits * std::numbers::pi / 4.0;
}

int levi_civita(int p, int l, int j) {
  if (p == l || l == j || p == j) return 0;
  // even permutations of (1,2,3)
  if ((p == 1 && l == 2 && j == 3) || (p == 2 && l == 3 && j == 1) || (p == 3 && l == 1 && j == 2))
    return 1;
  return -1;
}

}  // namespace llg
