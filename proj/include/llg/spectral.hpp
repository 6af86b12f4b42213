#pragma once

// Cosine basis of the Neumann Laplacian on (0, 2*pi) and the quadrature
// machinery that moves between coefficient space and physical samples.

#include <Eigen/Dense>

#include <numbers>
#include <stdexcept>

namespace llg {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// (frequency, axis) pair; axis is 1-based to match the usual e_1, e_2, e_3.
struct ModeIndex {
  int frequency = 0;
  int axis = 1;

  friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
  friend auto operator<=>(const ModeIndex&, const ModeIndex&) = default;
};

/// Galerkin state: coefficients m_i^j of cos(i x) e_j, i = 0..K, j = 1..3.
/// Storage is flat with index 3*i + (j-1).
class ModeState {
 public:
  ModeState() = default;
  explicit ModeState(int K);
  ModeState(int K, Eigen::VectorXd coeffs);

  static ModeState Zero(int K) { return ModeState(K); }

  int K() const { return K_; }
  Eigen::Index dim() const { return coeffs_.size(); }

  double& operator()(int frequency, int axis) {
    return coeffs_[flat_index(frequency, axis)];
  }
  double operator()(int frequency, int axis) const {
    return coeffs_[flat_index(frequency, axis)];
  }

  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }

  /// Axis vector (m_i^1, m_i^2, m_i^3) of one frequency.
  Eigen::Vector3d mode(int frequency) const {
    return coeffs_.segment<3>(3 * frequency);
  }

  bool all_finite() const { return coeffs_.allFinite(); }

  static Eigen::Index flat_index(int frequency, int axis) {
    return 3 * frequency + (axis - 1);
  }

 private:
  int K_ = 0;
  Eigen::VectorXd coeffs_ = Eigen::VectorXd::Zero(3);
};

ModeState operator+(const ModeState& a, const ModeState& b);
ModeState operator-(const ModeState& a, const ModeState& b);
ModeState operator*(double s, const ModeState& a);

/// Samples M(x_q) on x_q = 2*pi*q/N, q = 0..N-1; one row per grid point.
struct PhysicalField {
  Eigen::Matrix<double, Eigen::Dynamic, 3> values;

  int N() const { return static_cast<int>(values.rows()); }
  static double node(int q, int N) { return kTwoPi * q / N; }
};

/// lambda_n = -n^2.
double eigenvalue(int n);

/// ||cos(i .)||^2 on (0, 2*pi): 2*pi for i = 0, pi otherwise.
double basis_norm_sq(int i);

/// L2(0, 2*pi; R^3) inner product of the reconstructed fields.
double weighted_inner(const ModeState& a, const ModeState& b);
double weighted_norm(const ModeState& m);

/// Diagonal of the weighted Gram matrix in flat ordering.
Eigen::VectorXd weight_diagonal(int K);

/// Default grid for pseudo-spectral products: exact for quartic integrands.
inline int dealiased_grid(int K) { return 4 * K + 4; }

PhysicalField evaluate_physical(const ModeState& m, int N);

/// Second x-derivative evaluated on the grid (spectrally exact).
PhysicalField evaluate_second_derivative(const ModeState& m, int N);

/// Trapezoid projection onto cos(i x) e_j, i <= K. Throws if N < 2K + 2.
ModeState project_to_modes(const PhysicalField& f, int K);

/// Integral over (0, 2*pi) of cos(n x) cos(k x) cos(r x).
double triple_product_coeff(int n, int k, int r);

/// Integral over (0, 2*pi) of cos(l x) cos(n x) cos(k x) cos(r x).
double quad_product_coeff(int l, int n, int k, int r);

/// Levi-Civita symbol on 1-based axes: <e_p x e_l, e_j> = eps(p, l, j).
int levi_civita(int p, int l, int j);

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace llg
