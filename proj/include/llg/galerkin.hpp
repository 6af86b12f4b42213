#pragma once

// Galerkin truncation of the controlled LLG equation
//
//   M_t = mu1 M x M_xx - mu2 M x (M x M_xx) + M x v,   M_x = 0 at x = 0, 2*pi
//
// onto S_K = span{cos(i x) e_j : i <= K}. Every vector field here is the exact
// L2 projection of its physical-space counterpart. In particular the control
// field of mode (k, l) is the linear map
//
//   A^{k,l} m = Pi_K [ M(x) x cos(k x) e_l ],
//
// whose entries are triple-product integrals divided by the basis norms.

#include "llg/schedule.hpp"
#include "llg/spectral.hpp"

#include <Eigen/Dense>

#include <vector>

namespace llg {

struct LlgParams {
  double mu1 = 1.0;
  double mu2 = 1.0;
  int K = 1;
  std::vector<ModeIndex> control_modes = default_control_modes();
  /// Multiplies every stochastic forcing field; 1 reproduces the model as written.
  double noise_scale = 1.0;

  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
};

/// Scaling of the control fields. L2Projection is the ground truth; LiteralFormula
/// multiplies by 2, which is how the displayed mode formulas are normalized.
enum class FieldConvention { L2Projection, LiteralFormula };

/// Linear vector field m -> matrix * m on S_K (flat ModeState ordering).
struct LinearField {
  int K = 0;
  Eigen::MatrixXd matrix;

  ModeState apply(const ModeState& m) const;
  Eigen::Index dim() const { return matrix.rows(); }
};

LinearField control_field(int k, int l, int K,
                          FieldConvention convention = FieldConvention::L2Projection);

/// Immutable model: precomputed quadrature tables and control matrices.
/// Safe to share between threads.
class GalerkinModel {
 public:
  explicit GalerkinModel(LlgParams params);

  const LlgParams& params() const { return params_; }
  int K() const { return params_.K; }
  int grid_size() const { return N_; }

  ModeState drift(const ModeState& m) const;
  void drift(const Eigen::VectorXd& m, Eigen::VectorXd& out) const;

  /// One matrix per entry of params().control_modes, same order.
  const std::vector<LinearField>& control_fields() const { return fields_; }

  /// drift + sum_c amplitudes[c] * A_c m; amplitudes follow params().control_modes.
  void rhs(const Eigen::VectorXd& m, const Eigen::VectorXd& amplitudes, Eigen::VectorXd& out) const;
  ModeState rhs(const ModeState& m, double t, const ControlSchedule& sched) const;

  /// Amplitude vector (in control_modes order) of a schedule at time t.
  /// Throws if the schedule uses a mode outside control_modes.
  Eigen::VectorXd amplitudes(const ControlSchedule& sched, double t) const;

 private:
  LlgParams params_;
  int N_ = 0;
  Eigen::MatrixXd synth_;       // N x (K+1): cos(i x_q)
  Eigen::MatrixXd synth_xx_;    // N x (K+1): -i^2 cos(i x_q)
  Eigen::MatrixXd analysis_;    // (K+1) x N: trapezoid weights / c_i
  std::vector<LinearField> fields_;
};

ModeState drift(const ModeState& m, const LlgParams& p);
ModeState rhs(const ModeState& m, double t, const ControlSchedule& sched, const LlgParams& p);

}  // namespace llg
